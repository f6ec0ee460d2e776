"""Fitness functions to minimize: analytic benchmarks and CNN test error."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DivergenceError
from .space import SearchSpace
from .tinycnn.data import Dataset
from .tinycnn.training import evaluate_model, train

logger = logging.getLogger(__name__)


def sphere(x: np.ndarray) -> float:
    return float(np.sum(x * x))


def rastrigin(x: np.ndarray) -> float:
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def rosenbrock(x: np.ndarray) -> float:
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


BENCHMARKS = {"sphere": sphere, "rastrigin": rastrigin, "rosenbrock": rosenbrock}


def benchmark_eval(name: str, x) -> float:
    try:
        fn = BENCHMARKS[name]
    except KeyError:
        raise ConfigError(
            f"unknown benchmark {name!r}; choose from {', '.join(sorted(BENCHMARKS))}"
        ) from None
    return fn(np.asarray(x, dtype=float))


class BenchmarkObjective:
    """Analytic benchmark applied to the raw (clipped) coordinates."""

    def __init__(self, name: str):
        if name not in BENCHMARKS:
            benchmark_eval(name, [0.0])
        self.name = name

    def __call__(self, position, space: SearchSpace) -> float:
        return benchmark_eval(self.name, space.clip(position))

    def __repr__(self):
        return f"BenchmarkObjective({self.name!r})"


@dataclass(frozen=True)
class CnnObjectiveConfig:
    dataset: Dataset
    eval_epochs: int = 5
    batch_size: int = 32
    objective_seed: int = 0

    def __post_init__(self):
        if self.eval_epochs < 1:
            raise ConfigError(f"eval_epochs must be >= 1, got {self.eval_epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.dataset.n_classes < 2:
            raise ConfigError("the CNN objective needs at least two classes")
        if len(self.dataset.train_idx) == 0 or len(self.dataset.test_idx) == 0:
            raise ConfigError("the CNN objective needs non-empty train and test splits")


def cnn_fitness(candidate, space: SearchSpace, config: CnnObjectiveConfig):
    """Train on the train split, return ``(1 - test accuracy, diverged)``.

    A divergent run (non-finite loss) scores the worst fitness, 1.0.
    """
    hp = space.decode_hyperparams(space.clip(candidate))
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            model, _ = train(hp, config.dataset, config.eval_epochs, config.batch_size,
                             config.objective_seed)
    except DivergenceError as exc:
        logger.warning("training diverged for %s: %s", hp, exc)
        return 1.0, True
    accuracy, _ = evaluate_model(model, config.dataset.X_test, config.dataset.y_test)
    return 1.0 - accuracy, False


class CnnObjective:
    """Callable objective wrapping :func:`cnn_fitness`.

    The same ``objective_seed`` is used for every candidate, so fitness
    differences come from the hyperparameters alone. ``last_diverged``
    reports whether the most recent call hit a non-finite loss.
    """

    name = "cnn"

    def __init__(self, config: CnnObjectiveConfig):
        self.config = config
        self.last_diverged = False

    def __call__(self, position, space: SearchSpace) -> float:
        fitness, self.last_diverged = cnn_fitness(position, space, self.config)
        return fitness
