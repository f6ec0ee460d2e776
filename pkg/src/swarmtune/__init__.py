"""Swarm (PSO / WOA) hyperparameter search for a small convolutional classifier."""

__version__ = "0.1.0"

from .exceptions import (
    ConfigError,
    DimensionError,
    DivergenceError,
    DomainError,
    OptimizationError,
    PpmParseError,
    SwarmtuneError,
)
from .metrics import ClassMetrics, ConfusionMatrix, class_metrics, confusion_matrix
from .objectives import BenchmarkObjective, CnnObjective, CnnObjectiveConfig, benchmark_eval, cnn_fitness
from .optimizers import (
    ParticleSwarmOptimizer,
    PsoConfig,
    WhaleOptimizer,
    WoaCoefficients,
    WoaConfig,
    pso_run,
    pso_velocity_update,
    woa_coefficients,
    woa_position_update,
    woa_run,
    woa_schedule,
)
from .results import OptimizationResult, TraceRecord, read_trace_csv, write_trace_csv
from .search import SwarmSearchCV
from .space import HyperParams, ParamSpec, SearchSpace, cnn_space
from .tinycnn import TinyCNNClassifier
