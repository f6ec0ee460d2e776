import numpy as np
import pytest

from swarmtune.cli import main
from swarmtune.config import equalize_budgets, parse_config_text
from swarmtune.exceptions import ConfigError
from swarmtune.experiment import read_best_text
from swarmtune.optimizers import PsoConfig, WoaConfig
from swarmtune.results import read_trace_csv
from swarmtune.space import ParamSpec, cnn_space

SMALL_CNN = """
[experiment]
algorithm = both
seed = 3
[pso]
swarm_size = 2
iterations = 1
[woa]
population_size = 2
iterations = 1
[objective]
synthetic_per_class = 6
image_size = 8x8
eval_epochs = 1
final_epochs = 1
batch_size = 8
"""


def write(tmp_path, text, name="exp.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# -- parsing --------------------------------------------------------------------------


def test_empty_config_is_all_defaults():
    cfg = parse_config_text("")
    assert cfg.algorithm == "both"
    assert cfg.space == cnn_space()
    assert cfg.pso == PsoConfig() and cfg.woa == WoaConfig()
    assert cfg.objective.kind == "cnn" and cfg.objective.dataset == ""


def test_single_override():
    cfg = parse_config_text("[pso]\nswarm_size = 20\n")
    assert cfg.pso.swarm_size == 20
    assert cfg.pso.iterations == PsoConfig().iterations


def test_search_space_section_round_trips():
    cfg = parse_config_text("[search_space.num_filters]\nlower = 8\nupper = 32\nkind = integer\n")
    assert cfg.space.params[0] == ParamSpec("num_filters", "integer", 8, 32)


def test_partial_bound_override():
    cfg = parse_config_text("[search_space.dropout_rate]\nupper = 0.4\n")
    assert cfg.space.params[2] == ParamSpec("dropout_rate", "continuous", 0.1, 0.4)
    assert cfg.space.names == cnn_space().names


def test_custom_space_for_benchmarks():
    text = ("[objective]\nkind = sphere\n"
            "[search_space.a]\nkind = continuous\nlower = -1\nupper = 1\n"
            "[search_space.b]\nkind = integer\nlower = 0\nupper = 4\n")
    assert parse_config_text(text).space.names == ["a", "b"]


@pytest.mark.parametrize(
    "text,match",
    [
        ("[search_space.num_filters]\nlower = 40\nupper = 32\n", "num_filters"),
        ("[pso]\nswarm_sise = 3\n", r"<config>:2: unknown key 'swarm_sise'"),
        ("[bogus]\n", "unknown section"),
        ("[pso]\nswarm_size = many\n", "bad value"),
        ("[pso]\nswarm_size = 0\n", r"\[pso\] swarm_size"),
        ("[experiment]\nalgorithm = ga\n", "algorithm"),
        ("[objective]\nkind = cnn\n[search_space.z]\nkind = integer\nlower = 0\nupper = 1\n", "four CNN"),
        ("[objective]\nkind = sphere\n[search_space.z]\nlower = 0\n", "needs kind, upper"),
        ("[objective]\nimage_size = 7x8\n", "even"),
        ("[objective]\ndataset = /no/such/dir\n", "does not exist"),
        ("[pso]\nswarm_size = 2\nswarm_size = 3\n", "swarm_size"),
    ],
)
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config_text(text)


def test_seed_derivation_and_explicit_seed():
    cfg = parse_config_text("[experiment]\nseed = 5\n[woa]\nseed = 77\n")
    assert cfg.optimizer_config("woa").seed == 77
    assert cfg.optimizer_config("pso").seed != cfg.optimizer_config("woa").seed
    assert cfg.optimizer_config("pso").seed == parse_config_text("[experiment]\nseed = 5\n").optimizer_config("pso").seed


def test_equal_budget():
    cfg = equalize_budgets(parse_config_text(""))
    assert cfg.pso.budget == cfg.woa.budget == 55
    assert cfg.pso.iterations == 10


# -- CLI --------------------------------------------------------------------------------


def test_invalid_range_exits_2(tmp_path, capsys):
    path = write(tmp_path, "[search_space.dense_units]\nlower = 200\nupper = 100\n")
    assert main(["optimize", path, "--out", str(tmp_path / "o")]) == 2
    assert "dense_units" in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["optimize", str(tmp_path / "nope.ini")]) == 2


def test_pso_sphere_trace_has_30_rows(tmp_path):
    path = write(tmp_path, "[experiment]\nalgorithm = pso\n[objective]\nkind = sphere\n")
    out = tmp_path / "run"
    assert main(["optimize", path, "--out", str(out)]) == 0
    names, records = read_trace_csv(out / "trace_pso.csv")
    assert len(records) == 30 and names == cnn_space().names
    assert sorted(p.name for p in out.iterdir()) == ["best_pso.txt", "run_info.txt", "trace_pso.csv"]


def test_both_cnn_writes_every_artifact(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["optimize", write(tmp_path, SMALL_CNN), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "best_pso.txt", "best_woa.txt", "comparison.csv", "metrics_pso.csv", "metrics_woa.csv",
        "model_pso.tcnn", "model_woa.tcnn", "run_info.txt", "trace_pso.csv", "trace_woa.csv",
    ]
    text = capsys.readouterr().out
    assert "Evaluation metrics of PSO-CNN" in text and "Evaluation metrics of WOA-CNN" in text
    assert "Best hyperparameter values" in text
    best = read_best_text(out / "best_woa.txt")
    hp = cnn_space().decode_hyperparams([best[n] for n in cnn_space().names])
    assert 8 <= hp.num_filters <= 32
    for alg in ("pso", "woa"):
        _, records = read_trace_csv(out / f"trace_{alg}.csv")
        best_so_far = [r.best_so_far for r in records]
        assert best_so_far == sorted(best_so_far, reverse=True)


def test_identical_config_gives_identical_artifacts(tmp_path):
    path = write(tmp_path, SMALL_CNN)
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["optimize", path, "--out", str(out)]) == 0
    for p in outs[0].iterdir():
        if p.name != "run_info.txt":
            assert p.read_bytes() == (outs[1] / p.name).read_bytes(), p.name


def test_seed_override_changes_run(tmp_path):
    path = write(tmp_path, "[experiment]\nalgorithm = woa\n[objective]\nkind = rastrigin\n")
    main(["optimize", path, "--out", str(tmp_path / "a"), "--seed", "1"])
    main(["optimize", path, "--out", str(tmp_path / "b"), "--seed", "2"])
    assert (tmp_path / "a/trace_woa.csv").read_bytes() != (tmp_path / "b/trace_woa.csv").read_bytes()


def test_equal_budget_flag(tmp_path):
    path = write(tmp_path, "[objective]\nkind = sphere\n")
    assert main(["optimize", path, "--out", str(tmp_path / "r"), "--equal-budget"]) == 0
    for alg in ("pso", "woa"):
        assert len(read_trace_csv(tmp_path / f"r/trace_{alg}.csv")[1]) == 55


def test_failing_objective_exits_1_with_partial_trace(tmp_path, monkeypatch, capsys):
    import swarmtune.objectives as objectives

    calls = []

    def flaky(x):
        calls.append(1)
        if len(calls) > 4:
            raise RuntimeError("disk on fire")
        return 1.0

    monkeypatch.setitem(objectives.BENCHMARKS, "sphere", flaky)
    path = write(tmp_path, "[experiment]\nalgorithm = pso\n[objective]\nkind = sphere\n")
    assert main(["optimize", path, "--out", str(tmp_path / "r")]) == 1
    assert "disk on fire" in capsys.readouterr().err
    assert len(read_trace_csv(tmp_path / "r/trace_pso.csv")[1]) == 4


def test_gen_data_then_load(tmp_path, capsys):
    data = tmp_path / "data"
    assert main(["gen-data", str(data), "--per-class", "3", "--size", "8x8", "--classes", "2"]) == 0
    assert sorted(p.name for p in data.iterdir()) == ["alluvial", "black", "dataset.tcnn"]
    assert len(list((data / "black").glob("*.ppm"))) == 3
    assert main(["gen-data", str(data), "--size", "7x7"]) == 2


def test_train_command(tmp_path, capsys):
    text = SMALL_CNN + "[train]\nnum_filters = 8\ndense_units = 32\nepochs = 1\n"
    assert main(["train", write(tmp_path, text), "--out", str(tmp_path / "t")]) == 0
    assert (tmp_path / "t/metrics_train.csv").exists()
    assert "Accuracy:" in capsys.readouterr().out
    bad = SMALL_CNN + "[train]\nnum_filters = 99\n"
    assert main(["train", write(tmp_path, bad, "bad.ini"), "--out", str(tmp_path / "t")]) == 2


def test_train_on_ppm_directory(tmp_path):
    data = tmp_path / "data"
    main(["gen-data", str(data), "--per-class", "4", "--size", "8x8"])
    text = SMALL_CNN + f"dataset = {data}\n[train]\nnum_filters = 8\nepochs = 1\n"
    assert main(["train", write(tmp_path, text), "--out", str(tmp_path / "t")]) == 0


def test_report_command(tmp_path, capsys):
    path = write(tmp_path, "[experiment]\nalgorithm = woa\n[objective]\nkind = sphere\n")
    main(["optimize", path, "--out", str(tmp_path / "r")])
    capsys.readouterr()
    assert main(["report", str(tmp_path / "r/trace_woa.csv")]) == 0
    captured = capsys.readouterr()
    lines = captured.out.splitlines()
    assert lines[0] == "evaluation,iteration,fitness,best_so_far" and len(lines) == 56
    best = [float(line.split(",")[3]) for line in lines[1:]]
    assert best == list(np.minimum.accumulate(best))
    assert "evaluations: 55" in captured.err
    (tmp_path / "junk.csv").write_text("a,b\n1,2\n")
    assert main(["report", str(tmp_path / "junk.csv")]) == 2
