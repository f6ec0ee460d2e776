"""Acceptance criteria 1-9, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict that is printed in the
pytest terminal summary (and on stdout when run with ``-s``).
"""

import math
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import (
    finite_difference_grads,
    metrics_by_definition,
    random_search,
    relative_error,
)

from swarmtune.cli import main
from swarmtune.config import parse_config_text
from swarmtune.exceptions import PpmParseError
from swarmtune.experiment import read_best_text, run_experiment
from swarmtune.metrics import ConfusionMatrix, class_metrics, f1_score
from swarmtune.objectives import BenchmarkObjective, rastrigin, sphere
from swarmtune.optimizers import (
    PsoConfig,
    WoaCoefficients,
    WoaConfig,
    pso_run,
    pso_velocity_update,
    woa_coefficients,
    woa_position_update,
    woa_run,
    woa_schedule,
)
from swarmtune.results import read_trace_csv
from swarmtune.space import SearchSpace, cnn_space
from swarmtune.tinycnn import CnnModel, decode_ppm, loss_and_grads


def verdict(n, ok, detail):
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


class _Seq:
    def __init__(self, *values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


def test_criterion_1_update_equations():
    checks = []
    x = np.array([0.3, -1.2])
    checks.append(np.array_equal(pso_velocity_update(np.zeros(2), x, x, x, 0.7, 1.4, 1.4, 0.9, 0.1), np.zeros(2)))
    v = pso_velocity_update([2.0], [0.0], [4.0], [8.0], 0.5, 1.0, 1.0, 0.5, 0.5)
    checks.append(abs(v[0] - 7.0) <= 1e-12)
    v0 = np.array([1.5, -0.25])
    checks.append(np.array_equal(pso_velocity_update(v0, x, [9, 9], [7, 7], 0.729, 2, 2, 0.0, 0.0), 0.729 * v0))

    start = woa_coefficients(0, 10, _Seq(1.0, 0.5, 0.5, 0.5))
    checks.append(start.a == 2.0 and start.A == 2.0)
    checks.append(woa_schedule(0, 10) == 2.0 and woa_schedule(10, 10) == 0.0)
    checks.append(all(woa_coefficients(10, 10, _Seq(r, 0.5, 0.5, 0.5)).A == 0.0 for r in (0, 0.37, 1)))
    checks.append(all(woa_coefficients(t, 10, _Seq(0.5, 0.5, 0.5, 0.5)).A == 0.0 for t in range(11)))

    enc = WoaCoefficients(a=1.0, A=0.5, C=1.0, l=0.0, switch=0.1)
    checks.append(abs(woa_position_update([3.0], [5.0], [0.0], enc)[0] - 4.0) <= 1e-12)
    zero = WoaCoefficients(a=0.0, A=0.0, C=1.3, l=0.2, switch=0.1)
    checks.append(np.array_equal(woa_position_update([9.0, 1.0], [5.0, -2.0], [0, 0], zero), [5.0, -2.0]))
    spiral = WoaCoefficients(a=1.0, A=0.5, C=1.0, l=0.0, switch=0.9)
    checks.append(abs(woa_position_update([3.0], [5.0], [0.0], spiral, b=1.0)[0] - 7.0) <= 1e-12)
    verdict(1, all(checks), f"{sum(checks)}/{len(checks)} hand-substitution checks exact to 1e-12")


def test_criterion_2_gradient_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(3):
        rng = np.random.default_rng(seed)
        model = CnnModel.initialize(2, 3, 0.0, (8, 8, 1), 4, rng)
        for name in ("conv_bias", "dense1_bias", "dense2_bias"):
            getattr(model, name)[:] = rng.normal(0, 0.1, getattr(model, name).shape)
        x = rng.random((4, 8, 8, 1))
        y = rng.integers(0, 4, 4)
        _, analytic = loss_and_grads(model, x, y)
        numeric = finite_difference_grads(model, x, y, h=1e-5)
        worst = max(worst, max(relative_error(analytic[k], numeric[k]).max() for k in analytic))
    elapsed = time.perf_counter() - t0
    verdict(2, worst < 1e-4 and elapsed < 10,
            f"max relative error {worst:.2e} (< 1e-4) over every parameter, {elapsed:.1f}s")


def test_criterion_3_convergence_against_random_search():
    t0 = time.perf_counter()
    seeds = range(20)
    sphere_space = SearchSpace.box(-5, 5, 4)
    rast_space = SearchSpace.box(-5.12, 5.12, 4)
    pso = [pso_run(sphere_space, BenchmarkObjective("sphere"), PsoConfig(20, 100, seed=s)).best_fitness
           for s in seeds]
    woa = [woa_run(rast_space, BenchmarkObjective("rastrigin"), WoaConfig(20, 200, seed=s)).best_fitness
           for s in seeds]
    rs_sphere = [random_search(sphere, -5, 5, 4, PsoConfig(20, 100).budget, 1000 + s) for s in seeds]
    rs_rast = [random_search(rastrigin, -5.12, 5.12, 4, WoaConfig(20, 200).budget, 1000 + s) for s in seeds]
    elapsed = time.perf_counter() - t0
    hits = sum(f < 1e-3 for f in pso)
    ok = (hits >= 19 and np.median(woa) < 1.0 and np.median(pso) < np.median(rs_sphere)
          and np.median(woa) < np.median(rs_rast) and elapsed < 30)
    verdict(3, ok,
            f"PSO sphere f<1e-3 in {hits}/20; WOA rastrigin median {np.median(woa):.3g}; "
            f"random-search medians {np.median(rs_sphere):.3g} / {np.median(rs_rast):.3g}; {elapsed:.1f}s")


def test_criterion_4_budget_identities(tmp_path):
    cfg = tmp_path / "default.ini"
    cfg.write_text("[objective]\nkind = sphere\n")
    assert main(["optimize", str(cfg), "--out", str(tmp_path / "run")]) == 0
    rows = {alg: len(read_trace_csv(tmp_path / f"run/trace_{alg}.csv")[1]) for alg in ("pso", "woa")}
    verdict(4, rows == {"pso": 30, "woa": 55}, f"trace rows {rows}")


_CONFIGS = []


@settings(max_examples=100, deadline=None, derandomize=True)
@given(
    alg=st.sampled_from(["pso", "woa"]),
    size=st.integers(1, 6),
    iterations=st.integers(1, 6),
    seed=st.integers(0, 2**31 - 1),
    landscape=st.integers(0, 2**31 - 1),
    literal=st.booleans(),
)
def _monotone_feasible(alg, size, iterations, seed, landscape, literal):
    space = cnn_space()
    centre = np.random.default_rng(landscape).uniform(space.lower, space.upper)
    scale = space.upper - space.lower

    def objective(x, s):
        return float(np.sum(((x - centre) / scale) ** 2)) + (landscape % 7) * 0.01

    if alg == "pso":
        res = pso_run(space, objective, PsoConfig(size, iterations, seed=seed, per_dimension_random=literal))
    else:
        res = woa_run(space, objective, WoaConfig(size, iterations, seed=seed, literal_spiral=literal))
    best = [r.best_so_far for r in res.trace]
    monotone = all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
    feasible = all(
        8 <= r.candidate["num_filters"] <= 32 and 32 <= r.candidate["dense_units"] <= 128
        and 0.1 <= r.candidate["dropout_rate"] <= 0.5 and 1e-4 <= r.candidate["learning_rate"] <= 1e-2
        and isinstance(r.candidate["num_filters"], int) and isinstance(r.candidate["dense_units"], int)
        for r in res.trace
    )
    _CONFIGS.append(monotone and feasible)
    assert monotone and feasible


def test_criterion_5_monotone_and_feasible():
    _CONFIGS.clear()
    try:
        _monotone_feasible()
    finally:
        ok = len(_CONFIGS) >= 100 and all(_CONFIGS)
        ACCEPTANCE[5] = (ok, f"{sum(_CONFIGS)}/{len(_CONFIGS)} randomized configs monotone and in range")
    verdict(5, ok, ACCEPTANCE[5][1])


def test_criterion_6_determinism(tmp_path):
    cnn = ("[objective]\neval_epochs = 1\n[pso]\nswarm_size = 2\niterations = 1\n"
           "[woa]\npopulation_size = 2\niterations = 1\n")
    same = []
    for name, text in (("sphere", "[objective]\nkind = sphere\n"), ("cnn", cnn)):
        cfg = tmp_path / f"{name}.ini"
        cfg.write_text(text)
        for run in ("a", "b"):
            assert main(["optimize", str(cfg), "--out", str(tmp_path / name / run)]) == 0
        for alg in ("pso", "woa"):
            a = (tmp_path / name / "a" / f"trace_{alg}.csv").read_bytes()
            b = (tmp_path / name / "b" / f"trace_{alg}.csv").read_bytes()
            same.append(a == b)
    verdict(6, all(same), f"{sum(same)}/{len(same)} trace pairs byte-identical (sphere and synthetic cnn)")


@pytest.mark.slow
def test_criterion_7_end_to_end(tmp_path, capsys):
    seeds = range(5)
    accuracies = {"pso": [], "woa": []}
    layout_ok = True
    t0 = time.perf_counter()
    slowest = 0.0
    for seed in seeds:
        text = (f"[experiment]\nalgorithm = both\nseed = {seed}\n"
                f"[objective]\nsynthetic_classes = 4\nsynthetic_per_class = 50\nimage_size = 32x32\n"
                f"data_seed = {seed}\neval_epochs = 5\nfinal_epochs = 5\n"
                f"[output]\ndirectory = {tmp_path / str(seed)}\n")
        start = time.perf_counter()
        outcome = run_experiment(parse_config_text(text))
        slowest = max(slowest, time.perf_counter() - start)
        out = capsys.readouterr().out
        layout_ok &= all(s in out for s in (
            "Evaluation metrics of PSO-CNN", "Evaluation metrics of WOA-CNN",
            "Classes", "Precision", "Recall", "F1-score", "Accuracy:",
            "Best hyperparameter values", "Hyperparameters",
        ))
        layout_ok &= (tmp_path / str(seed) / "comparison.csv").exists()
        for alg in ("pso", "woa"):
            accuracies[alg].append(outcome.outcomes[alg].final_accuracy)
            assert len(read_trace_csv(tmp_path / str(seed) / f"trace_{alg}.csv")[1]) == (30 if alg == "pso" else 55)
            best = read_best_text(tmp_path / str(seed) / f"best_{alg}.txt")
            cnn_space().decode([best[n] for n in cnn_space().names])
    elapsed = time.perf_counter() - t0
    wins = {alg: sum(a >= 0.90 for a in accs) for alg, accs in accuracies.items()}
    ok = all(w >= 3 for w in wins.values()) and slowest < 15 * 60 and layout_ok
    verdict(7, ok,
            f"seeds with final accuracy >= 0.90: PSO {wins['pso']}/5, WOA {wins['woa']}/5 "
            f"(PSO {accuracies['pso']}, WOA {accuracies['woa']}); slowest run {slowest:.0f}s, "
            f"total {elapsed:.0f}s; report layout {'ok' if layout_ok else 'missing'}")


def test_criterion_8_metrics_oracle():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(1000):
        k = int(rng.integers(2, 8))
        counts = rng.integers(0, 30, size=(k, k))
        counts[rng.integers(k), rng.integers(k)] += 1
        m = class_metrics(ConfusionMatrix(counts, tuple(str(i) for i in range(k))))
        p, r, f, acc = metrics_by_definition(counts.tolist())
        worst = max(worst, np.abs(m.precision - p).max(), np.abs(m.recall - r).max(),
                    np.abs(m.f1 - f).max(), abs(m.accuracy - acc))
    alluvial = f1_score(0.94, 0.83)
    ok = worst <= 1e-12 and round(alluvial, 2) == 0.88
    verdict(8, ok, f"max deviation {worst:.1e} over 1000 matrices; P=0.94 R=0.83 -> F1 {alluvial:.4f}")


def test_criterion_9_ppm_io():
    pixel = decode_ppm(b"P6\n1 1\n255\n" + bytes([255, 0, 0]))[0, 0].tolist()
    named = []
    for blob in (b"P5\n1 1\n255\n\x00", b"P6\n2 2\n255\n" + bytes(7), b"P3\n1 1\n255\n1 2 3", b"P6\n4"):
        try:
            decode_ppm(blob, "case.ppm")
            named.append(False)
        except PpmParseError as exc:
            named.append("case.ppm" in str(exc))
    ok = pixel == [1.0, 0.0, 0.0] and all(named)
    verdict(9, ok, f"1-pixel file -> {pixel}; {sum(named)}/{len(named)} malformed files raise named parse errors")
