"""Run a configured search and write its artifacts to the output directory.

Artifacts per algorithm ``<alg>``: ``trace_<alg>.csv``, ``best_<alg>.txt``
and, for the CNN objective, ``metrics_<alg>.csv`` and ``model_<alg>.tcnn``.
With both algorithms a ``comparison.csv`` is added. Everything except
``run_info.txt`` is a pure function of the config.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import logging
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .config import ExperimentConfig
from .exceptions import ConfigError, DivergenceError, OptimizationError
from .metrics import class_metrics, confusion_matrix, format_report, write_metrics_csv
from .objectives import BenchmarkObjective, CnnObjective, CnnObjectiveConfig
from .optimizers import run_optimizer
from .results import format_value, write_trace_csv
from .space import HyperParams, SearchSpace
from .tinycnn.container import load_dataset_container, save_model
from .tinycnn.data import Dataset, generate_synthetic_dataset, load_dataset
from .tinycnn.training import evaluate_model, train

logger = logging.getLogger(__name__)

ALG_LABELS = {"pso": "PSO-CNN", "woa": "WOA-CNN"}


@dataclass
class AlgorithmOutcome:
    algorithm: str
    result: object
    metrics: object = None
    final_accuracy: float | None = None


@dataclass
class ExperimentOutcome:
    output_dir: Path
    outcomes: dict = field(default_factory=dict)
    files: list = field(default_factory=list)


def build_dataset(cfg: ExperimentConfig) -> Dataset:
    obj = cfg.objective
    if obj.dataset:
        path = Path(obj.dataset)
        if path.is_file() and path.suffix == ".tcnn":
            return load_dataset_container(path)
        return load_dataset(path, obj.image_size, obj.data_seed, obj.test_fraction)
    return generate_synthetic_dataset(
        obj.synthetic_classes, obj.synthetic_per_class, obj.image_size, obj.data_seed,
        obj.test_fraction,
    )


def build_objective(cfg: ExperimentConfig, dataset: Dataset | None = None):
    if cfg.objective.kind != "cnn":
        return BenchmarkObjective(cfg.objective.kind)
    dataset = dataset if dataset is not None else build_dataset(cfg)
    return CnnObjective(
        CnnObjectiveConfig(dataset, cfg.objective.eval_epochs, cfg.objective.batch_size,
                           cfg.objective_seed)
    )


def best_text(space: SearchSpace, algorithm: str, result) -> str:
    """Two-column table: hyperparameter name, value at full precision."""
    lines = [f"Hyperparameters\t{ALG_LABELS.get(algorithm, algorithm)}"]
    for name in space.names:
        lines.append(f"{name}\t{format_value(result.best_params[name])}")
    lines.append(f"best_fitness\t{format_value(result.best_fitness)}")
    return "\n".join(lines) + "\n"


def read_best_text(path) -> dict:
    values = {}
    for line in Path(path).read_text().splitlines()[1:]:
        name, _, text = line.partition("\t")
        values[name] = float(text)
    return values


def final_evaluation(hp: HyperParams, dataset: Dataset, epochs: int, batch_size: int, seed: int):
    """Retrain ``hp`` on the train split and score it on the test split."""
    model, _ = train(hp, dataset, epochs, batch_size, seed)
    accuracy, predictions = evaluate_model(model, dataset.X_test, dataset.y_test)
    cm = confusion_matrix(dataset.y_test, predictions, dataset.n_classes, dataset.class_names)
    return model, accuracy, class_metrics(cm)


def comparison_text(outcomes: dict, space: SearchSpace) -> str:
    algs = list(outcomes)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", *algs])
    for name in space.names:
        w.writerow([name, *(format_value(outcomes[a].result.best_params[name]) for a in algs)])
    w.writerow(["best_fitness", *(format_value(outcomes[a].result.best_fitness) for a in algs)])
    w.writerow(["evaluations", *(outcomes[a].result.evaluations for a in algs)])
    if all(outcomes[a].metrics is not None for a in algs):
        classes = outcomes[algs[0]].metrics.class_names
        for k, cname in enumerate(classes):
            for metric in ("precision", "recall", "f1"):
                w.writerow([
                    f"{cname}_{metric}",
                    *(format_value(getattr(outcomes[a].metrics, metric)[k]) for a in algs),
                ])
        w.writerow(["accuracy", *(format_value(outcomes[a].metrics.accuracy) for a in algs)])
    return buf.getvalue()


def comparison_table(outcomes: dict, space: SearchSpace) -> str:
    """Side-by-side best hyperparameters, printed after the per-algorithm reports."""
    algs = list(outcomes)
    labels = [ALG_LABELS.get(a, a) for a in algs]
    width = max(len(n) for n in [*space.names, "Hyperparameters"]) + 2
    col = max(22, *(len(lb) + 2 for lb in labels))
    lines = ["Best hyperparameter values",
             f"{'Hyperparameters':<{width}}" + "".join(f"{lb:>{col}}" for lb in labels)]
    for name in space.names:
        vals = [format_value(outcomes[a].result.best_params[name]) for a in algs]
        lines.append(f"{name:<{width}}" + "".join(f"{v:>{col}}" for v in vals))
    return "\n".join(lines)


def _write(path: Path, text: str, files: list) -> None:
    path.write_text(text)
    files.append(path)


def run_experiment(cfg: ExperimentConfig, out=None) -> ExperimentOutcome:
    """Run every selected algorithm and write artifacts.

    Raises :class:`OptimizationError` (after writing the partial trace) if
    the objective fails.
    """
    out = out if out is not None else sys.stdout
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outcome = ExperimentOutcome(out_dir)
    dataset = build_dataset(cfg) if cfg.objective.kind == "cnn" else None
    objective = build_objective(cfg, dataset)
    _write(out_dir / "run_info.txt", _run_info(cfg), outcome.files)

    for alg in cfg.algorithms():
        opt_cfg = cfg.optimizer_config(alg)
        logger.info("running %s with %s", alg, opt_cfg)
        trace_path = out_dir / f"trace_{alg}.csv"
        try:
            result = run_optimizer(alg, cfg.space, objective, opt_cfg)
        except OptimizationError as exc:
            write_trace_csv(exc.partial_trace, cfg.space.names, trace_path)
            outcome.files.append(trace_path)
            raise
        write_trace_csv(result.trace, cfg.space.names, trace_path)
        outcome.files.append(trace_path)
        _write(out_dir / f"best_{alg}.txt", best_text(cfg.space, alg, result), outcome.files)
        record = AlgorithmOutcome(alg, result)

        if dataset is not None:
            hp = result.best_hyperparams
            try:
                model, accuracy, metrics = final_evaluation(
                    hp, dataset, cfg.objective.final_epochs, cfg.objective.batch_size,
                    cfg.objective_seed,
                )
            except DivergenceError as exc:
                raise OptimizationError(f"final retraining of {hp} diverged: {exc}",
                                        result.trace) from exc
            record.metrics, record.final_accuracy = metrics, accuracy
            metrics_path = out_dir / f"metrics_{alg}.csv"
            write_metrics_csv(metrics, metrics_path)
            outcome.files.append(metrics_path)
            model_path = out_dir / f"model_{alg}.tcnn"
            save_model(model_path, model)
            outcome.files.append(model_path)
            print(format_report(metrics, f"Evaluation metrics of {ALG_LABELS[alg]}"), file=out)
            print(file=out)
        else:
            print(f"{alg}: best fitness {format_value(result.best_fitness)} "
                  f"after {result.evaluations} evaluations", file=out)
        outcome.outcomes[alg] = record

    if len(outcome.outcomes) > 1:
        _write(out_dir / "comparison.csv", comparison_text(outcome.outcomes, cfg.space),
               outcome.files)
        print(comparison_table(outcome.outcomes, cfg.space), file=out)
    return outcome


def run_training(cfg: ExperimentConfig, out=None):
    """Train and evaluate the explicit hyperparameters of the ``[train]`` section."""
    out = out if out is not None else sys.stdout
    if cfg.objective.kind != "cnn":
        raise ConfigError("the train command needs objective.kind = cnn")
    t = cfg.train
    hp = HyperParams(t.num_filters, t.dense_units, t.dropout_rate, t.learning_rate)
    cfg.space.decode(cfg.space.encode(hp))  # range check against the configured space
    dataset = build_dataset(cfg)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    epochs = t.epochs if t.epochs is not None else cfg.objective.final_epochs
    seed = t.seed if t.seed is not None else cfg.objective_seed
    model, accuracy, metrics = final_evaluation(hp, dataset, epochs, cfg.objective.batch_size, seed)
    write_metrics_csv(metrics, out_dir / "metrics_train.csv")
    save_model(out_dir / "model_train.tcnn", model)
    print(format_report(metrics, f"Evaluation metrics of {hp}"), file=out)
    return model, accuracy, metrics


def _run_info(cfg: ExperimentConfig) -> str:
    now = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return (
        f"started\t{now}\nversion\t{__version__}\npython\t{platform.python_version()}\n"
        f"algorithm\t{cfg.algorithm}\nseed\t{cfg.seed}\nobjective\t{cfg.objective.kind}\n"
    )
