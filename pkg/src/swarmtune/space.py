"""Box-bounded mixed integer/continuous search spaces.

Positions are plain float vectors in the coordinate order of the space.
Integer parameters stay continuous while an optimizer moves them and are
only rounded when a position is decoded.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from .exceptions import ConfigError, DimensionError, DomainError

INTEGER = "integer"
CONTINUOUS = "continuous"


def round_half_away(x: float) -> int:
    """Round to the nearest integer, ties away from zero."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str
    lower: float
    upper: float

    def __post_init__(self):
        if not self.name or not str(self.name).isidentifier():
            raise ConfigError(f"parameter name {self.name!r} is not an identifier")
        if self.kind not in (INTEGER, CONTINUOUS):
            raise ConfigError(
                f"parameter {self.name!r}: kind must be 'integer' or 'continuous', got {self.kind!r}"
            )
        lower, upper = float(self.lower), float(self.upper)
        if not (math.isfinite(lower) and math.isfinite(upper)):
            raise ConfigError(f"parameter {self.name!r}: bounds must be finite")
        if lower > upper:
            raise ConfigError(
                f"parameter {self.name!r}: lower bound {lower} exceeds upper bound {upper}"
            )
        if self.kind == INTEGER and not (lower.is_integer() and upper.is_integer()):
            raise ConfigError(f"parameter {self.name!r}: integer bounds must be whole numbers")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)


@dataclass(frozen=True)
class HyperParams:
    """Decoded CNN hyperparameters."""

    num_filters: int
    dense_units: int
    dropout_rate: float
    learning_rate: float

    @classmethod
    def from_mapping(cls, values: Mapping[str, float]) -> "HyperParams":
        try:
            return cls(
                num_filters=int(values["num_filters"]),
                dense_units=int(values["dense_units"]),
                dropout_rate=float(values["dropout_rate"]),
                learning_rate=float(values["learning_rate"]),
            )
        except KeyError as exc:
            raise ConfigError(f"missing hyperparameter {exc.args[0]!r}") from None

    def as_dict(self) -> dict:
        return asdict(self)


class SearchSpace:
    """Ordered collection of :class:`ParamSpec`.

    The order of ``params`` fixes the coordinate order of every position
    living in this space.
    """

    def __init__(self, params: Sequence[ParamSpec]):
        params = tuple(params)
        if not params:
            raise ConfigError("a search space needs at least one parameter")
        names = [p.name for p in params]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ConfigError(f"duplicate parameter names: {', '.join(dupes)}")
        self.params = params
        self.lower = np.array([p.lower for p in params])
        self.upper = np.array([p.upper for p in params])
        self.lower.flags.writeable = False
        self.upper.flags.writeable = False

    @classmethod
    def box(cls, lower: float, upper: float, dim: int) -> "SearchSpace":
        """Continuous hypercube ``[lower, upper]**dim`` named x0, x1, ..."""
        return cls([ParamSpec(f"x{i}", CONTINUOUS, lower, upper) for i in range(dim)])

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    @property
    def dim(self) -> int:
        return len(self.params)

    def __len__(self):
        return len(self.params)

    def __eq__(self, other):
        return isinstance(other, SearchSpace) and self.params == other.params

    def __hash__(self):
        return hash(self.params)

    def __repr__(self):
        return f"SearchSpace({list(self.params)!r})"

    def _check_dim(self, pos) -> np.ndarray:
        x = np.asarray(pos, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.dim:
            raise DimensionError(
                f"position has shape {x.shape}, expected ({self.dim},) for this space"
            )
        return x

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Draw one position uniformly from the box (integers kept as reals)."""
        u = rng.random(self.dim)
        x = self.lower + u * (self.upper - self.lower)
        # guard against lower + 1*(upper-lower) rounding past upper
        return np.minimum(x, self.upper)

    def clip(self, pos) -> np.ndarray:
        x = self._check_dim(pos)
        return np.minimum(self.upper, np.maximum(self.lower, x))

    def contains(self, pos) -> bool:
        x = self._check_dim(pos)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def decode(self, pos) -> dict:
        """Map an in-bounds position to ``{name: value}``.

        Integer parameters are rounded half away from zero; continuous ones
        pass through unchanged. Raises :class:`DomainError` for coordinates
        outside the box, so clip first.
        """
        x = self._check_dim(pos)
        out = {}
        for spec, value in zip(self.params, x):
            if not (spec.lower <= value <= spec.upper):
                raise DomainError(
                    f"{spec.name}={float(value)!r} outside [{spec.lower}, {spec.upper}]; clip before decoding"
                )
            out[spec.name] = round_half_away(value) if spec.kind == INTEGER else float(value)
        return out

    def decode_hyperparams(self, pos) -> HyperParams:
        return HyperParams.from_mapping(self.decode(pos))

    def encode(self, values) -> np.ndarray:
        """Inverse of :meth:`decode` for in-range values (HyperParams or mapping)."""
        if isinstance(values, HyperParams):
            values = values.as_dict()
        try:
            return np.array([float(values[name]) for name in self.names])
        except KeyError as exc:
            raise ConfigError(f"missing value for parameter {exc.args[0]!r}") from None


def cnn_space() -> SearchSpace:
    """The four-parameter CNN space: filters, dense width, dropout, learning rate."""
    return SearchSpace(
        [
            ParamSpec("num_filters", INTEGER, 8, 32),
            ParamSpec("dense_units", INTEGER, 32, 128),
            ParamSpec("dropout_rate", CONTINUOUS, 0.1, 0.5),
            ParamSpec("learning_rate", CONTINUOUS, 1e-4, 1e-2),
        ]
    )
