"""Experiment configuration: an INI-style ``key = value`` file.

Sections::

    [experiment]            algorithm (pso|woa|both), seed
    [search_space.<name>]   kind, lower, upper
    [pso]                   swarm_size, iterations, inertia_w, cognitive_c1, social_c2,
                            seed, per_dimension_random, velocity_scale
    [woa]                   population_size, iterations, spiral_b, seed, literal_spiral
    [objective]             kind (cnn|sphere|rastrigin|rosenbrock), dataset, synthetic_classes,
                            synthetic_per_class, image_size, data_seed, test_fraction,
                            eval_epochs, batch_size, objective_seed, final_epochs
    [train]                 num_filters, dense_units, dropout_rate, learning_rate, epochs, seed
    [output]                directory

Every key is optional. Search-space sections that only name the four CNN
hyperparameters override their default bounds; naming any other parameter
switches to a fully custom space built from the declared sections alone.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .exceptions import ConfigError
from .objectives import BENCHMARKS
from .optimizers import PsoConfig, WoaConfig
from .space import ParamSpec, SearchSpace, cnn_space

ALGORITHMS = ("pso", "woa", "both")
OBJECTIVES = ("cnn", *sorted(BENCHMARKS))


@dataclass(frozen=True)
class ObjectiveSettings:
    kind: str = "cnn"
    dataset: str = ""  # empty -> synthetic
    synthetic_classes: int = 4
    synthetic_per_class: int = 50
    image_size: tuple = (32, 32)
    data_seed: int = 0
    test_fraction: float = 0.2
    eval_epochs: int = 5
    batch_size: int = 32
    objective_seed: Optional[int] = None  # None -> experiment seed
    final_epochs: int = 5


@dataclass(frozen=True)
class TrainSettings:
    num_filters: int = 16
    dense_units: int = 64
    dropout_rate: float = 0.3
    learning_rate: float = 1e-3
    epochs: Optional[int] = None  # None -> objective.final_epochs
    seed: Optional[int] = None


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str = "both"
    seed: int = 0
    space: SearchSpace = field(default_factory=cnn_space)
    pso: PsoConfig = field(default_factory=PsoConfig)
    woa: WoaConfig = field(default_factory=WoaConfig)
    pso_seed_explicit: bool = False
    woa_seed_explicit: bool = False
    objective: ObjectiveSettings = field(default_factory=ObjectiveSettings)
    train: TrainSettings = field(default_factory=TrainSettings)
    output_dir: str = "results"

    def algorithms(self) -> list:
        return ["pso", "woa"] if self.algorithm == "both" else [self.algorithm]

    def optimizer_config(self, algorithm: str):
        """Optimizer config with its seed derived from ``seed`` unless set explicitly."""
        if algorithm == "pso":
            cfg, explicit, stream = self.pso, self.pso_seed_explicit, 0
        elif algorithm == "woa":
            cfg, explicit, stream = self.woa, self.woa_seed_explicit, 1
        else:
            raise ConfigError(f"unknown algorithm {algorithm!r}")
        if explicit:
            return cfg
        return replace(cfg, seed=derive_seed(self.seed, stream))

    @property
    def objective_seed(self) -> int:
        s = self.objective.objective_seed
        return self.seed if s is None else s

    def with_overrides(self, seed=None, output_dir=None, equal_budget=False,
                       literal_spiral=False) -> "ExperimentConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=_check_seed_value("--seed", seed))
        if output_dir is not None:
            cfg = replace(cfg, output_dir=str(output_dir))
        if literal_spiral:
            cfg = replace(cfg, woa=replace(cfg.woa, literal_spiral=True))
        if equal_budget:
            cfg = equalize_budgets(cfg)
        return cfg


def derive_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, stream]).generate_state(1, np.uint32)[0])


def equalize_budgets(cfg: ExperimentConfig) -> ExperimentConfig:
    """Raise iteration counts until both searches have at least the larger budget.

    Exact when swarm and population sizes divide the target evenly.
    """
    target = max(cfg.pso.budget, cfg.woa.budget)
    pso_iters = math.ceil(target / cfg.pso.swarm_size) - 1
    woa_iters = math.ceil(target / cfg.woa.population_size) - 1
    return replace(
        cfg,
        pso=replace(cfg.pso, iterations=max(pso_iters, 1)),
        woa=replace(cfg.woa, iterations=max(woa_iters, 1)),
    )


def _check_seed_value(name, value):
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ConfigError(f"{name} must be a non-negative integer, got {value!r}")
    return value


# key -> converter, per fixed section
def _to_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def _to_size(text: str) -> tuple:
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not m:
        raise ValueError(f"expected HxW, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def _to_optional_int(text: str):
    return None if text.strip().lower() in ("", "none") else int(text)


_SECTIONS = {
    "experiment": {"algorithm": str, "seed": int},
    "pso": {
        "swarm_size": int, "iterations": int, "inertia_w": float, "cognitive_c1": float,
        "social_c2": float, "seed": int, "per_dimension_random": _to_bool,
        "velocity_scale": float,
    },
    "woa": {
        "population_size": int, "iterations": int, "spiral_b": float, "seed": int,
        "literal_spiral": _to_bool,
    },
    "objective": {
        "kind": str, "dataset": str, "synthetic_classes": int, "synthetic_per_class": int,
        "image_size": _to_size, "data_seed": int, "test_fraction": float, "eval_epochs": int,
        "batch_size": int, "objective_seed": _to_optional_int, "final_epochs": int,
    },
    "train": {
        "num_filters": int, "dense_units": int, "dropout_rate": float, "learning_rate": float,
        "epochs": _to_optional_int, "seed": _to_optional_int,
    },
    "output": {"directory": str},
}
_SPACE_KEYS = {"kind": str, "lower": float, "upper": float}
_SPACE_PREFIX = "search_space."


def _key_lines(text: str) -> dict:
    """(section, key) -> line number, for diagnostics."""
    lines, section = {}, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.fullmatch(r"\[(.+)\]", line)
        if m:
            section = m.group(1).strip()
            lines.setdefault((section, None), lineno)
            continue
        key = re.split(r"[=:]", line, maxsplit=1)[0].strip()
        lines.setdefault((section, key), lineno)
    return lines


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, strict=True,
                                       empty_lines_in_values=False, default_section="\0")
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}".replace("\n", " ")) from None
    lines = _key_lines(text)

    def where(section, key):
        ln = lines.get((section, key))
        return f"{source}:{ln}" if ln else source

    values = {}
    space_sections = {}
    for section in parser.sections():
        if section.startswith(_SPACE_PREFIX):
            schema = _SPACE_KEYS
            pname = section[len(_SPACE_PREFIX):]
        elif section in _SECTIONS:
            schema = _SECTIONS[section]
        else:
            raise ConfigError(f"{source}: unknown section [{section}]")
        parsed = {}
        for key, raw in parser.items(section):
            if key not in schema:
                raise ConfigError(f"{where(section, key)}: unknown key {key!r} in [{section}]")
            try:
                parsed[key] = schema[key](raw.strip())
            except ValueError as exc:
                raise ConfigError(f"{where(section, key)}: bad value for {section}.{key}: {exc}") from None
        if section.startswith(_SPACE_PREFIX):
            space_sections[pname] = (parsed, f"[{section}] at line {lines.get((section, None))}")
        else:
            values[section] = parsed

    try:
        return _build(values, space_sections)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def _build(values, space_sections) -> ExperimentConfig:
    exp = values.get("experiment", {})
    algorithm = exp.get("algorithm", "both")
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"experiment.algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
    seed = _check_seed_value("experiment.seed", exp.get("seed", 0))

    space = _build_space(space_sections)

    pso_vals = values.get("pso", {})
    woa_vals = values.get("woa", {})
    try:
        pso = PsoConfig(**pso_vals)
    except ConfigError as exc:
        raise ConfigError(f"[pso] {exc}") from None
    try:
        woa = WoaConfig(**woa_vals)
    except ConfigError as exc:
        raise ConfigError(f"[woa] {exc}") from None

    obj_vals = values.get("objective", {})
    objective = ObjectiveSettings(**obj_vals)
    if objective.kind not in OBJECTIVES:
        raise ConfigError(f"objective.kind must be one of {OBJECTIVES}, got {objective.kind!r}")
    for name in ("synthetic_per_class", "eval_epochs", "batch_size", "final_epochs"):
        if getattr(objective, name) < 1:
            raise ConfigError(f"objective.{name} must be >= 1")
    if not 0.0 < objective.test_fraction < 1.0:
        raise ConfigError("objective.test_fraction must lie in (0, 1)")
    h, w = objective.image_size
    if h < 2 or w < 2 or h % 2 or w % 2:
        raise ConfigError(f"objective.image_size must be even, got {h}x{w}")
    if objective.dataset and not Path(objective.dataset).exists():
        raise ConfigError(f"objective.dataset path {objective.dataset!r} does not exist")
    if objective.kind == "cnn" and set(space.names) != {
        "num_filters", "dense_units", "dropout_rate", "learning_rate"
    }:
        raise ConfigError("the cnn objective needs exactly the four CNN hyperparameters")

    train = TrainSettings(**values.get("train", {}))
    output_dir = values.get("output", {}).get("directory", "results")
    return ExperimentConfig(
        algorithm=algorithm, seed=seed, space=space, pso=pso, woa=woa,
        pso_seed_explicit="seed" in pso_vals, woa_seed_explicit="seed" in woa_vals,
        objective=objective, train=train, output_dir=output_dir,
    )


def _build_space(space_sections) -> SearchSpace:
    defaults = {p.name: p for p in cnn_space().params}
    if not space_sections:
        return cnn_space()
    custom = any(name not in defaults for name in space_sections)
    specs = []
    for name in list(space_sections) if custom else list(defaults):
        given, loc = space_sections.get(name, ({}, "defaults"))
        if custom:
            missing = [k for k in ("kind", "lower", "upper") if k not in given]
            if missing:
                raise ConfigError(f"{loc}: search_space.{name} needs {', '.join(missing)}")
            merged = given
        else:
            merged = {**vars(defaults[name]), **given}
        try:
            specs.append(ParamSpec(name, merged["kind"], merged["lower"], merged["upper"]))
        except ConfigError as exc:
            raise ConfigError(f"{loc}: {exc}") from None
    return SearchSpace(specs)


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from None
    return parse_config_text(text, str(path))
