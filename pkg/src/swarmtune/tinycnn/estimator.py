from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..space import HyperParams
from .training import fit_arrays, predict_proba


def _as_images(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 3:
        X = X[..., None]
    return X


class TinyCNNClassifier(ClassifierMixin, BaseEstimator):
    """One conv block + two dense layers, trained with Adam.

    Accepts images as ``(N, H, W, C)`` (or ``(N, H, W)`` for grayscale) with
    pixel values in [0, 1] and even H, W. Labels may be any hashable values.

    Parameters
    ----------
    num_filters : int
        Convolution filters (3x3, same padding).
    dense_units : int
        Width of the hidden dense layer.
    dropout_rate : float
        Inverted-dropout probability after the hidden layer.
    learning_rate : float
        Adam step size.
    epochs, batch_size : int
        Training schedule.
    random_state : int
        Seeds weight init, shuffling and dropout masks.
    """

    def __init__(self, num_filters=16, dense_units=64, dropout_rate=0.3, learning_rate=1e-3,
                 epochs=5, batch_size=32, random_state=0):
        self.num_filters = num_filters
        self.dense_units = dense_units
        self.dropout_rate = dropout_rate
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.random_state = random_state

    def _hyperparams(self) -> HyperParams:
        return HyperParams(int(self.num_filters), int(self.dense_units),
                           float(self.dropout_rate), float(self.learning_rate))

    def fit(self, X, y):
        X = _as_images(X)
        X, y = check_X_y(X, y, allow_nd=True, dtype=np.float64)
        check_classification_targets(y)
        self.classes_, encoded = np.unique(y, return_inverse=True)
        self.model_, self.history_ = fit_arrays(
            self._hyperparams(), X, encoded, len(self.classes_), self.epochs,
            self.batch_size, self.random_state,
        )
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        X = check_array(_as_images(X), allow_nd=True, dtype=np.float64)
        return predict_proba(self.model_, X)

    def predict(self, X):
        check_is_fitted(self, "model_")
        return self.classes_[self.predict_proba(X).argmax(axis=1)]
