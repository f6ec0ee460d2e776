"""Mini-batch Adam training and evaluation for :class:`CnnModel`."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import ConfigError, DimensionError
from ..space import HyperParams
from .data import Dataset
from .nn import AdamState, CnnModel, adam_step, forward, loss_and_grads

EVAL_BATCH = 256


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss: float
    accuracy: float


def _seed_streams(seed):
    """Independent generators for weight init, shuffling and dropout masks."""
    init_ss, shuffle_ss, dropout_ss = np.random.SeedSequence(seed).spawn(3)
    return (np.random.default_rng(init_ss), np.random.default_rng(shuffle_ss),
            np.random.default_rng(dropout_ss))


def fit_arrays(hyperparams: HyperParams, X, y, n_classes: int, epochs: int = 5,
               batch_size: int = 32, seed: int = 0):
    """Train a fresh model on ``(X, y)``; returns ``(model, history)``.

    ``history`` holds one :class:`EpochStats` per epoch, with training loss
    and accuracy accumulated over that epoch's mini-batches.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 4 or len(X) == 0 or y.shape != (len(X),):
        raise DimensionError(f"need non-empty (N, H, W, C) images and (N,) labels, got {X.shape}, {y.shape}")
    if epochs < 1 or batch_size < 1:
        raise ConfigError("epochs and batch_size must be >= 1")
    init_rng, shuffle_rng, dropout_rng = _seed_streams(seed)
    model = CnnModel.initialize(
        hyperparams.num_filters, hyperparams.dense_units, hyperparams.dropout_rate,
        X.shape[1:], n_classes, init_rng,
    )
    params = model.params()
    state = AdamState.for_params(params)
    history = []
    n = len(X)
    for epoch in range(1, epochs + 1):
        order = shuffle_rng.permutation(n)
        total_loss, correct = 0.0, 0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            loss, grads, probs = loss_and_grads(
                model, X[idx], y[idx], training=True, rng=dropout_rng, return_probs=True
            )
            params, state = adam_step(params, grads, state, hyperparams.learning_rate)
            model = model.with_params(params)
            total_loss += loss * len(idx)
            correct += int((probs.argmax(axis=1) == y[idx]).sum())
        history.append(EpochStats(epoch, total_loss / n, correct / n))
    return model, history


def train(hyperparams: HyperParams, dataset: Dataset, epochs: int = 5, batch_size: int = 32,
          seed: int = 0):
    """Train on the dataset's train split. Raises DivergenceError on a non-finite loss."""
    return fit_arrays(hyperparams, dataset.X_train, dataset.y_train, dataset.n_classes,
                      epochs, batch_size, seed)


def predict_proba(model: CnnModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    chunks = [forward(model, X[i:i + EVAL_BATCH]) for i in range(0, len(X), EVAL_BATCH)]
    return np.concatenate(chunks) if chunks else np.empty((0, model.n_classes))


def evaluate_model(model: CnnModel, X, y):
    """Accuracy and argmax predictions (ties go to the lowest class index)."""
    y = np.asarray(y)
    if len(y) == 0:
        raise ConfigError("cannot evaluate on an empty test split")
    predictions = predict_proba(model, X).argmax(axis=1)
    return float((predictions == y).mean()), predictions
