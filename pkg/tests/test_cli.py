import csv
import json
from pathlib import Path

import numpy as np
import pytest

from mtga.cli import emit_reports, main, resolve_config, run_experiment, score_directory
from mtga.core import ConfigError
from mtga.metrics import ReportError


def write_config(tmp_path, **fields):
    cfg = {
        "problem": {"kind": "synthetic", "dim": 4, "seed": 1},
        "solvers": {"mtga": {}, "soea": {}},
        "params": {"pop_size": 10, "n_t": 4, "generations": 12, "eval_budget": 400},
        "repetitions": 3,
        "seed": 5,
        "output": str(tmp_path / "out"),
        "emit": {"svg": False},
    }
    cfg.update(fields)
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(cfg))
    return path


def files(directory):
    d = Path(directory)
    return {str(p.relative_to(d)): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def test_smoke_single_task_soea(tmp_path):
    path = write_config(tmp_path, problem={"kind": "functions", "tasks": [{"function": "sphere", "dim": 1}]},
                        solvers=["soea"], repetitions=1, params={"pop_size": 10, "n_t": 0, "generations": 5})
    assert main(["run", "--config", str(path)]) == 0
    out = tmp_path / "out"
    assert [p.name for p in (out / "traces").iterdir()] == ["soea_rep000_seed5.csv"]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["solvers"]["soea"]["count"] == 1
    with open(out / "traces" / "soea_rep000_seed5.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["generation", "evaluations", "best_T1", "mean_T1"] and len(rows) == 7


def test_trace_columns_and_seeds(tmp_path):
    assert main(["run", "--config", str(write_config(tmp_path))]) == 0
    names = sorted(p.name for p in (tmp_path / "out" / "traces").iterdir())
    assert names == [f"{s}_rep{r:03d}_seed{5 + r}.csv" for s in ("mtga", "soea") for r in range(3)]
    header = (tmp_path / "out" / "traces" / names[0]).read_text().splitlines()[0]
    assert header == "generation,evaluations,best_T1,mean_T1,best_T2,mean_T2"


def test_rerun_is_byte_identical(tmp_path):
    a = write_config(tmp_path, output=str(tmp_path / "ra"))
    main(["run", "--config", str(a)])
    main(["run", "--config", str(a), "--out", str(tmp_path / "rb")])
    fa, fb = files(tmp_path / "ra"), files(tmp_path / "rb")
    fa.pop("manifest.json")
    fb.pop("manifest.json")
    assert fa == fb


def test_manifest_rerun_reproduces(tmp_path):
    main(["run", "--config", str(write_config(tmp_path))])
    manifest = tmp_path / "out" / "manifest.json"
    assert main(["run", "--config", str(manifest), "--out", str(tmp_path / "again")]) == 0
    first, second = files(tmp_path / "out"), files(tmp_path / "again")
    assert json.loads(first.pop("manifest.json"))["solvers"] == json.loads(second.pop("manifest.json"))["solvers"]
    assert first == second


def test_resume_skips_existing_traces(tmp_path):
    main(["run", "--config", str(write_config(tmp_path))])
    out = tmp_path / "out"
    before = files(out)
    victim = out / "traces" / "mtga_rep001_seed6.csv"
    victim.unlink()
    kept = out / "traces" / "soea_rep000_seed5.csv"
    mtime = kept.stat().st_mtime_ns
    main(["run", "--config", str(write_config(tmp_path))])
    assert kept.stat().st_mtime_ns == mtime
    assert files(out) == before


def test_scores_sum_to_zero_on_registry_pair(tmp_path):
    path = write_config(tmp_path, problem={"kind": "registry", "benchmark": "B4", "dim": 6},
                        repetitions=20, params={"pop_size": 10, "n_t": 4, "generations": 5, "eval_budget": 120})
    main(["run", "--config", str(path)])
    with open(tmp_path / "out" / "scores.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["solver"] for r in rows] == ["mtga", "soea"]
    assert abs(sum(float(r["score"]) for r in rows)) < 1e-9


def test_workers_give_same_bytes(tmp_path):
    main(["run", "--config", str(write_config(tmp_path))])
    main(["run", "--config", str(write_config(tmp_path, workers=2, output=str(tmp_path / "par")))])
    a, b = files(tmp_path / "out"), files(tmp_path / "par")
    a.pop("manifest.json")
    b.pop("manifest.json")
    assert a == b


@pytest.mark.parametrize("fields", [
    {"repetitions": 0},
    {"solvers": ["tabu"]},
    {"problem": "B42"},
    {"problem": {"kind": "synthetic", "functions": ["nope", "sphere"]}},
    {"params": {"pop_size": 7}},
    {"params": {"colour": 1}},
    {"mystery": True},
    {"problem": {"kind": "functions", "tasks": [{"function": "sphere", "dim": 2}]}},
])
def test_config_errors_exit_one(tmp_path, fields, capsys):
    assert main(["run", "--config", str(write_config(tmp_path, **fields))]) == 1
    assert "config error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 1


def test_malformed_data_file_is_config_error(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 -1 1 sphere\n0 0 0\n")
    assert main(["run", "--config", str(write_config(tmp_path, problem=str(bad)))]) == 1
    assert "bad.txt:2" in capsys.readouterr().err


def test_score_and_plot_on_empty_directory(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["score", "--in", str(tmp_path / "empty")]) == 2
    assert main(["plot", "--in", str(tmp_path / "empty")]) == 2
    with pytest.raises(ReportError):
        emit_reports(tmp_path / "empty")


def test_plot_outputs(tmp_path):
    main(["run", "--config", str(write_config(tmp_path))])
    out = tmp_path / "out"
    assert main(["plot", "--in", str(out)]) == 0
    for name in ("convergence.svg", "score_curve.svg", "convergence.csv", "score_curve.csv"):
        assert (out / name).exists()
    with open(out / "convergence.csv") as fh:
        rows = list(csv.reader(fh))
    # header + initial population + 12 generations
    assert len(rows) == 1 + 13
    assert rows[0][:4] == ["generation", "evaluations_mtga", "mean_best_T1_mtga", "mean_best_T2_mtga"]
    svg = (out / "convergence.svg").read_text()
    assert "mtga" in svg and "soea" in svg
    with open(out / "score_curve.csv") as fh:
        scores = np.array([[float(v) for v in r[2:]] for r in list(csv.reader(fh))[1:]])
    np.testing.assert_allclose(scores.sum(axis=1), 0, atol=1e-9)


def test_single_solver_plot(tmp_path):
    main(["run", "--config", str(write_config(tmp_path, solvers=["mtga"], repetitions=1))])
    written = emit_reports(tmp_path / "out")
    assert len(written) == 4


def test_score_verb_rebuilds_summary(tmp_path):
    main(["run", "--config", str(write_config(tmp_path))])
    out = tmp_path / "out"
    original = (out / "summary.json").read_bytes()
    (out / "summary.json").unlink()
    assert main(["score", "--in", str(out)]) == 0
    assert (out / "summary.json").read_bytes() == original


def test_flc_problem_resolves_with_fixed_matching(tmp_path):
    cfg = resolve_config({"problem": "flc-cotank", "solvers": ["mtga"], "output": str(tmp_path)})
    assert cfg["solvers"]["mtga"]["matching"] == "fixed"
    tables = cfg["solvers"]["mtga"]["fixed_tables"]
    assert len(tables[0]) == 17 and len(tables[1]) == 23
    assert cfg["problem"]["weights"] == pytest.approx([1, 1, 1 / 3, 1])


def test_flc_run_small(tmp_path):
    path = write_config(tmp_path, problem="flc-cotank", solvers=["mtga", "mfea"], repetitions=1,
                        params={"pop_size": 6, "n_t": 2, "generations": 2})
    assert main(["run", "--config", str(path)]) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["directions"] == ["maximize", "maximize"]


def test_resolve_rejects_fixed_matching_without_table(tmp_path):
    with pytest.raises(ConfigError):
        resolve_config({"params": {"matching": "fixed"}, "output": str(tmp_path)})
