"""Swarm hyperparameter search as a scikit-learn meta-estimator."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, MetaEstimatorMixin, clone
from sklearn.utils.validation import check_is_fitted

from .exceptions import DivergenceError
from .optimizers import ParticleSwarmOptimizer
from .space import cnn_space
from .tinycnn.data import stratified_split
from .tinycnn.estimator import TinyCNNClassifier


class SwarmSearchCV(MetaEstimatorMixin, BaseEstimator):
    """Tune an estimator's parameters with PSO or WOA.

    Each candidate is decoded into estimator parameters, fitted on a
    stratified train split and scored on the held-out split; the fitness
    minimized is ``1 - score``. Every candidate is fitted with the same
    ``random_state`` so fitness differences come from the parameters alone.

    Parameters
    ----------
    estimator : estimator, default=TinyCNNClassifier()
        Must accept every search-space name via ``set_params``.
    optimizer : ParticleSwarmOptimizer or WhaleOptimizer, default=ParticleSwarmOptimizer()
    search_space : SearchSpace, default=cnn_space()
    test_size : float, default=0.2
        Held-out fraction per class.
    refit : bool, default=True
        Refit the best parameters on all of ``X`` as ``best_estimator_``.
    random_state : int, default=0
        Seeds the split and every candidate fit.
    """

    def __init__(self, estimator=None, optimizer=None, search_space=None, test_size=0.2,
                 refit=True, random_state=0):
        self.estimator = estimator
        self.optimizer = optimizer
        self.search_space = search_space
        self.test_size = test_size
        self.refit = refit
        self.random_state = random_state

    def _candidate(self, params):
        est = clone(self.estimator if self.estimator is not None else TinyCNNClassifier())
        if "random_state" in est.get_params():
            est.set_params(random_state=self.random_state)
        return est.set_params(**params)

    def fit(self, X, y):
        X = np.asarray(X)
        y = np.asarray(y)
        space = self.search_space if self.search_space is not None else cnn_space()
        optimizer = clone(self.optimizer if self.optimizer is not None else ParticleSwarmOptimizer())
        _, encoded = np.unique(y, return_inverse=True)
        train_idx, test_idx = stratified_split(encoded, self.test_size, self.random_state)

        def objective(position, space):
            est = self._candidate(space.decode(space.clip(position)))
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    est.fit(X[train_idx], y[train_idx])
            except DivergenceError:
                return 1.0
            return 1.0 - est.score(X[test_idx], y[test_idx])

        optimizer.minimize(objective, space)
        self.optimizer_ = optimizer
        self.result_ = optimizer.result_
        self.trace_ = optimizer.result_.trace
        self.best_params_ = optimizer.result_.best_params
        self.best_score_ = 1.0 - optimizer.result_.best_fitness
        if self.refit:
            self.best_estimator_ = self._candidate(self.best_params_).fit(X, y)
        return self

    def _best(self):
        check_is_fitted(self, "best_estimator_")
        return self.best_estimator_

    def predict(self, X):
        return self._best().predict(X)

    def predict_proba(self, X):
        return self._best().predict_proba(X)

    def score(self, X, y):
        return self._best().score(X, y)
