"""Convergence traces, optimization results and their CSV form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .space import HyperParams

FIXED_COLUMNS_HEAD = ("evaluation", "iteration")
FIXED_COLUMNS_TAIL = ("fitness", "best_so_far")


@dataclass(frozen=True)
class TraceRecord:
    evaluation_index: int
    iteration: int
    candidate: dict
    fitness: float
    best_so_far: float
    diverged: bool = False


@dataclass
class OptimizationResult:
    algorithm: str
    best_position: np.ndarray
    best_params: dict
    best_fitness: float
    trace: list = field(default_factory=list)

    @property
    def evaluations(self) -> int:
        return len(self.trace)

    @property
    def best_hyperparams(self) -> HyperParams:
        return HyperParams.from_mapping(self.best_params)


def format_value(value) -> str:
    """Integers verbatim, reals with 17 significant digits (round-trippable)."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def trace_header(names: Sequence[str]) -> list[str]:
    return [*FIXED_COLUMNS_HEAD, *names, *FIXED_COLUMNS_TAIL]


def write_trace_csv(trace: Iterable[TraceRecord], names: Sequence[str], dest) -> None:
    """Write one row per evaluation to ``dest`` (a path or text file object)."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            write_trace_csv(trace, names, fh)
        return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(trace_header(names))
    for rec in trace:
        writer.writerow(
            [
                rec.evaluation_index,
                rec.iteration,
                *(format_value(rec.candidate[n]) for n in names),
                format_value(rec.fitness),
                format_value(rec.best_so_far),
            ]
        )


def trace_to_csv_text(trace: Iterable[TraceRecord], names: Sequence[str]) -> str:
    buf = io.StringIO()
    write_trace_csv(trace, names, buf)
    return buf.getvalue()


def read_trace_csv(src) -> tuple[list[str], list[TraceRecord]]:
    """Parse a trace CSV back into records. Returns ``(param_names, records)``."""
    if isinstance(src, (str, Path)):
        with open(src, newline="") as fh:
            return read_trace_csv(fh)
    reader = csv.reader(src)
    header = next(reader, None)
    if (
        header is None
        or tuple(header[:2]) != FIXED_COLUMNS_HEAD
        or tuple(header[-2:]) != FIXED_COLUMNS_TAIL
    ):
        raise ValueError(f"not a trace CSV header: {header!r}")
    names = header[2:-2]
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        candidate = {}
        for name, text in zip(names, row[2:-2]):
            candidate[name] = float(text) if any(c in text for c in ".eEn") else int(text)
        records.append(
            TraceRecord(
                evaluation_index=int(row[0]),
                iteration=int(row[1]),
                candidate=candidate,
                fitness=float(row[-2]),
                best_so_far=float(row[-1]),
            )
        )
    return names, records
