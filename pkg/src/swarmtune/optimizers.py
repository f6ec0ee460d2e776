"""Particle swarm and whale optimization over a :class:`SearchSpace`.

Both loops follow the same contract: every evaluated position is inside the
box, the trace has one record per objective call, and a fixed seed gives a
bit-identical run. An objective is any callable ``objective(position, space)``
returning a finite float to minimize.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import ConfigError, DimensionError, OptimizationError
from .results import OptimizationResult, TraceRecord
from .space import SearchSpace

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray, SearchSpace], float]

# Constriction-factor PSO constants (Clerc & Kennedy).
DEFAULT_INERTIA = 0.729
DEFAULT_ACCELERATION = 1.49445


@dataclass(frozen=True)
class PsoConfig:
    swarm_size: int = 5
    iterations: int = 5
    inertia_w: float = DEFAULT_INERTIA
    cognitive_c1: float = DEFAULT_ACCELERATION
    social_c2: float = DEFAULT_ACCELERATION
    seed: int = 0
    per_dimension_random: bool = False
    velocity_scale: float = 0.1

    def __post_init__(self):
        _check_positive_int("swarm_size", self.swarm_size)
        _check_positive_int("iterations", self.iterations)
        for name in ("inertia_w", "cognitive_c1", "social_c2", "velocity_scale"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be finite and >= 0, got {value!r}")
        _check_seed(self.seed)

    @property
    def budget(self) -> int:
        return self.swarm_size * (1 + self.iterations)


@dataclass(frozen=True)
class WoaConfig:
    population_size: int = 5
    iterations: int = 10
    spiral_b: float = 1.0
    seed: int = 0
    literal_spiral: bool = False

    def __post_init__(self):
        _check_positive_int("population_size", self.population_size)
        _check_positive_int("iterations", self.iterations)
        if not math.isfinite(self.spiral_b):
            raise ConfigError(f"spiral_b must be finite, got {self.spiral_b!r}")
        _check_seed(self.seed)

    @property
    def budget(self) -> int:
        return self.population_size * (1 + self.iterations)


def _check_positive_int(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")


def _check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    pbest: np.ndarray
    pbest_fitness: float


class WoaCoefficients(NamedTuple):
    a: float
    A: float
    C: float
    l: float
    switch: float


class _Evaluator:
    """Calls the objective, keeps the running best and builds the trace."""

    def __init__(self, space: SearchSpace, objective: Objective):
        self.space = space
        self.objective = objective
        self.trace: list[TraceRecord] = []
        self.best_so_far = math.inf

    def __call__(self, position: np.ndarray, iteration: int) -> float:
        candidate = self.space.decode(position)
        try:
            fitness = float(self.objective(position.copy(), self.space))
        except Exception as exc:
            raise OptimizationError(
                f"objective failed at evaluation {len(self.trace) + 1} "
                f"(iteration {iteration}, candidate {candidate}): {exc}",
                self.trace,
            ) from exc
        if not math.isfinite(fitness):
            raise OptimizationError(
                f"objective returned non-finite fitness {fitness!r} for candidate {candidate}",
                self.trace,
            )
        self.best_so_far = min(self.best_so_far, fitness)
        self.trace.append(
            TraceRecord(
                evaluation_index=len(self.trace) + 1,
                iteration=iteration,
                candidate=candidate,
                fitness=fitness,
                best_so_far=self.best_so_far,
                diverged=bool(getattr(self.objective, "last_diverged", False)),
            )
        )
        return fitness


def _as_vectors(*vectors):
    arrays = [np.asarray(v, dtype=float) for v in vectors]
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1 or arrays[0].ndim != 1:
        raise DimensionError(f"vectors must share one 1-D shape, got {sorted(shapes)}")
    return arrays


def pso_velocity_update(v, x, pbest, gbest, w, c1, c2, r1, r2) -> np.ndarray:
    """``w*v + c1*r1*(pbest - x) + c2*r2*(gbest - x)``.

    ``r1``/``r2`` are scalars (one draw per particle) or per-dimension arrays.
    """
    v, x, pbest, gbest = _as_vectors(v, x, pbest, gbest)
    for r in (r1, r2):
        if np.ndim(r) not in (0, 1) or (np.ndim(r) == 1 and np.shape(r) != x.shape):
            raise DimensionError(f"random coefficient shape {np.shape(r)} does not match {x.shape}")
    return w * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x)


def woa_schedule(iteration: int, max_iterations: int) -> float:
    """Linearly decreasing ``a``: 2 at iteration 0, exactly 0 at ``max_iterations``."""
    if max_iterations < 1 or not (0 <= iteration <= max_iterations):
        raise ValueError(f"iteration {iteration} outside [0, {max_iterations}]")
    return 2.0 - 2.0 * iteration / max_iterations


def woa_coefficients(iteration: int, max_iterations: int, rng) -> WoaCoefficients:
    """Draw the per-whale WOA coefficients for one update.

    Draw order is r1, r2, l, switch; changing it changes every seeded run.
    """
    a = woa_schedule(iteration, max_iterations)
    r1 = rng.random()
    r2 = rng.random()
    l = 2.0 * rng.random() - 1.0
    switch = rng.random()
    return WoaCoefficients(a=a, A=2.0 * a * r1 - a, C=2.0 * r2, l=l, switch=switch)


def woa_position_update(x, best, rand_whale, coeffs: WoaCoefficients, b: float = 1.0,
                        literal_spiral: bool = False) -> np.ndarray:
    """Unclipped WOA move for one whale.

    ``switch < 0.5`` selects shrinking encircling (``|A| < 1``) or exploration
    around ``rand_whale`` (``|A| >= 1``); otherwise the logarithmic spiral
    around ``best``. With ``literal_spiral`` the spiral move always wins.
    """
    x, best, rand_whale = _as_vectors(x, best, rand_whale)
    spiral = coeffs.switch >= 0.5 or literal_spiral
    if not spiral or literal_spiral:
        if abs(coeffs.A) < 1:
            new = best - coeffs.A * np.abs(coeffs.C * best - x)
        else:
            new = rand_whale - coeffs.A * np.abs(coeffs.C * rand_whale - x)
    if spiral:
        new = np.abs(best - x) * math.exp(b * coeffs.l) * math.cos(2.0 * math.pi * coeffs.l) + best
    return new


def _override_array(space, n, rng, init_positions):
    if init_positions is None:
        return None
    arr = np.array(init_positions, dtype=float)
    if arr.shape != (n, space.dim):
        raise DimensionError(f"init_positions shape {arr.shape} != ({n}, {space.dim})")
    return arr


def pso_run(space: SearchSpace, objective: Objective, config: PsoConfig,
            init_positions=None, init_velocities=None) -> OptimizationResult:
    """Particle swarm search with immediate (asynchronous) gbest updates.

    Performs exactly ``swarm_size * (1 + iterations)`` objective calls.
    ``init_positions``/``init_velocities`` override the random start; the
    random draws for the start are still consumed so seeds stay aligned.
    """
    rng = np.random.default_rng(config.seed)
    evaluate = _Evaluator(space, objective)
    positions = _override_array(space, config.swarm_size, rng, init_positions)
    velocities = _override_array(space, config.swarm_size, rng, init_velocities)
    span = space.upper - space.lower

    particles: list[Particle] = []
    gbest, gbest_fitness = None, math.inf
    for i in range(config.swarm_size):
        x = space.sample(rng)
        v = rng.uniform(-1.0, 1.0, space.dim) * config.velocity_scale * span
        if positions is not None:
            x = space.clip(positions[i])
        if velocities is not None:
            v = velocities[i].copy()
        f = evaluate(x, 0)
        particles.append(Particle(x, v, x.copy(), f))
        if f < gbest_fitness:
            gbest, gbest_fitness = x.copy(), f

    for t in range(1, config.iterations + 1):
        for p in particles:
            if config.per_dimension_random:
                r1, r2 = rng.random(space.dim), rng.random(space.dim)
            else:
                r1, r2 = rng.random(), rng.random()
            p.velocity = pso_velocity_update(
                p.velocity, p.position, p.pbest, gbest,
                config.inertia_w, config.cognitive_c1, config.social_c2, r1, r2,
            )
            p.position = space.clip(p.position + p.velocity)
            f = evaluate(p.position, t)
            if f < p.pbest_fitness:
                p.pbest, p.pbest_fitness = p.position.copy(), f
            if f < gbest_fitness:
                gbest, gbest_fitness = p.position.copy(), f
        logger.debug("pso iteration %d: gbest %.6g", t, gbest_fitness)

    return OptimizationResult(
        algorithm="pso",
        best_position=gbest,
        best_params=space.decode(gbest),
        best_fitness=gbest_fitness,
        trace=evaluate.trace,
    )


def woa_run(space: SearchSpace, objective: Objective, config: WoaConfig,
            init_positions=None) -> OptimizationResult:
    """Whale optimization with immediate best-solution updates.

    Iterations run 1..T and feed the schedule directly, so the last
    iteration has ``a == 0``. Performs ``population_size * (1 + iterations)``
    objective calls.
    """
    rng = np.random.default_rng(config.seed)
    evaluate = _Evaluator(space, objective)
    positions = _override_array(space, config.population_size, rng, init_positions)

    whales = []
    best, best_fitness = None, math.inf
    for i in range(config.population_size):
        x = space.sample(rng)
        if positions is not None:
            x = space.clip(positions[i])
        f = evaluate(x, 0)
        whales.append(x)
        if f < best_fitness:
            best, best_fitness = x.copy(), f

    n = config.population_size
    for t in range(1, config.iterations + 1):
        for i in range(n):
            coeffs = woa_coefficients(t, config.iterations, rng)
            needs_rand = (coeffs.switch < 0.5 or config.literal_spiral) and abs(coeffs.A) >= 1
            rand_whale = whales[rng.integers(n)] if needs_rand else best
            new = woa_position_update(
                whales[i], best, rand_whale, coeffs, config.spiral_b, config.literal_spiral
            )
            whales[i] = space.clip(new)
            f = evaluate(whales[i], t)
            if f < best_fitness:
                best, best_fitness = whales[i].copy(), f
        logger.debug("woa iteration %d: best %.6g", t, best_fitness)

    return OptimizationResult(
        algorithm="woa",
        best_position=best,
        best_params=space.decode(best),
        best_fitness=best_fitness,
        trace=evaluate.trace,
    )


class ParticleSwarmOptimizer(BaseEstimator):
    """Estimator-style front end to :func:`pso_run`.

    ``minimize`` stores the run under ``result_`` and the usual fitted
    attributes (``best_position_``, ``best_params_``, ``best_fitness_``).
    """

    def __init__(self, swarm_size=5, iterations=5, inertia_w=DEFAULT_INERTIA,
                 cognitive_c1=DEFAULT_ACCELERATION, social_c2=DEFAULT_ACCELERATION,
                 per_dimension_random=False, velocity_scale=0.1, random_state=0):
        self.swarm_size = swarm_size
        self.iterations = iterations
        self.inertia_w = inertia_w
        self.cognitive_c1 = cognitive_c1
        self.social_c2 = social_c2
        self.per_dimension_random = per_dimension_random
        self.velocity_scale = velocity_scale
        self.random_state = random_state

    def to_config(self) -> PsoConfig:
        return PsoConfig(
            swarm_size=self.swarm_size, iterations=self.iterations, inertia_w=self.inertia_w,
            cognitive_c1=self.cognitive_c1, social_c2=self.social_c2, seed=self.random_state,
            per_dimension_random=self.per_dimension_random, velocity_scale=self.velocity_scale,
        )

    def minimize(self, objective: Objective, space: SearchSpace):
        self.result_ = pso_run(space, objective, self.to_config())
        _store_result(self, self.result_)
        return self


class WhaleOptimizer(BaseEstimator):
    """Estimator-style front end to :func:`woa_run`."""

    def __init__(self, population_size=5, iterations=10, spiral_b=1.0,
                 literal_spiral=False, random_state=0):
        self.population_size = population_size
        self.iterations = iterations
        self.spiral_b = spiral_b
        self.literal_spiral = literal_spiral
        self.random_state = random_state

    def to_config(self) -> WoaConfig:
        return WoaConfig(
            population_size=self.population_size, iterations=self.iterations,
            spiral_b=self.spiral_b, seed=self.random_state, literal_spiral=self.literal_spiral,
        )

    def minimize(self, objective: Objective, space: SearchSpace):
        self.result_ = woa_run(space, objective, self.to_config())
        _store_result(self, self.result_)
        return self


def _store_result(est, result: OptimizationResult) -> None:
    est.best_position_ = result.best_position
    est.best_params_ = result.best_params
    est.best_fitness_ = result.best_fitness
    est.trace_ = result.trace
    est.n_evaluations_ = result.evaluations


def run_optimizer(algorithm: str, space: SearchSpace, objective: Objective,
                  config) -> OptimizationResult:
    if algorithm == "pso":
        return pso_run(space, objective, config)
    if algorithm == "woa":
        return woa_run(space, objective, config)
    raise ConfigError(f"unknown algorithm {algorithm!r}; expected 'pso' or 'woa'")
