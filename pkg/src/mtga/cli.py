"""Experiment runner and command line interface.

Verbs::

    mtga run --config exp.json [--seed S] [--out DIR]
    mtga score --in DIR
    mtga plot --in DIR

Exit codes: 0 success, 1 configuration error, 2 runtime failure.

An experiment directory holds ``manifest.json`` (the fully resolved config,
rerunnable with ``run --config DIR/manifest.json``), one trace CSV per
solver and repetition under ``traces/``, ``summary.json``, ``scores.csv``
and, after ``plot``, SVG figures with the CSVs they were drawn from.
Summaries and scores are always rebuilt from the trace CSVs, so resumed and
fresh runs produce the same bytes.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .benchmarks import FUNCTIONS, REGISTRY_SEED, BenchmarkFileError, ComposedTask, load_task_pair, synthetic_pair
from .core import ConfigError
from .metrics import ReportError, normalize_to_baseline, performance_score, summarize_runs
from .operators import MutationParams, SbxParams
from .solvers import RunTrace, SolverConfig, run_mfea, run_mtga, run_soea, run_soea_pair

log = logging.getLogger("mtga")

SOLVER_NAMES = ("mtga", "soea", "mfea")
FLC_PROBLEM = "flc-cotank"
TRACE_DIR = "traces"

DEFAULT_EXPERIMENT = {
    "name": "experiment",
    "problem": "B1",
    "solvers": {"mtga": {}, "soea": {}},
    "params": {},
    "repetitions": 20,
    "seed": 0,
    "output": "runs/experiment",
    "emit": {"csv": True, "json": True, "svg": True},
    "workers": 1,
    "baseline": "soea",
}


# --- config resolution ----------------------------------------------------------


def _solver_defaults() -> dict:
    cfg = asdict(SolverConfig())
    cfg["sbx"] = asdict(SbxParams())
    cfg["mutation"] = asdict(MutationParams())
    return cfg


def _resolve_solver(name: str, shared: dict, own: dict, flc: bool) -> dict:
    params = _solver_defaults()
    if flc:
        params["matching"] = "fixed"
    for source in (shared, own):
        unknown = set(source) - set(params)
        if unknown:
            raise ConfigError(f"solvers.{name}: unknown parameter(s) {sorted(unknown)}")
        for key, value in source.items():
            if key in ("sbx", "mutation"):
                params[key] = {**params[key], **value}
            else:
                params[key] = value
    if params["matching"] == "fixed" and params["fixed_tables"] is None:
        if not flc:
            raise ConfigError(f"solvers.{name}: fixed matching needs fixed_tables")
        from .fuzzy import flc_gene_matching

        params["fixed_tables"] = [m.index_map.tolist() for m in flc_gene_matching()]
    build_solver_config(params, name)
    return params


def build_solver_config(params: dict, name: str = "solver") -> SolverConfig:
    p = dict(params)
    try:
        p["sbx"] = SbxParams(**p["sbx"])
        p["mutation"] = MutationParams(**p["mutation"])
        return SolverConfig(**p)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solvers.{name}: {exc}") from None


def _resolve_problem(problem) -> dict:
    if isinstance(problem, str):
        if problem == FLC_PROBLEM:
            problem = {"kind": FLC_PROBLEM}
        elif problem == "synthetic":
            problem = {"kind": "synthetic"}
        elif Path(problem).suffix or os.sep in problem:
            problem = {"kind": "file", "files": [problem]}
        else:
            problem = {"kind": "registry", "benchmark": problem}
    if not isinstance(problem, dict) or "kind" not in problem:
        raise ConfigError("problem: expected a benchmark id, file path, 'synthetic', "
                          f"'{FLC_PROBLEM}' or an object with a 'kind' field")
    kind = problem["kind"]
    if kind == "registry":
        out = {"kind": kind, "benchmark": problem.get("benchmark"),
               "seed": problem.get("seed", REGISTRY_SEED), "dim": problem.get("dim")}
    elif kind == "synthetic":
        out = {"kind": kind, "functions": list(problem.get("functions", ["sphere", "ackley"])),
               "dim": problem.get("dim", 30), "seed": problem.get("seed", 0),
               "rotate": problem.get("rotate", False)}
        unknown = [f for f in out["functions"] if f not in FUNCTIONS]
        if unknown or len(out["functions"]) != 2:
            raise ConfigError(f"problem.functions: need two of {sorted(FUNCTIONS)}, got {out['functions']}")
    elif kind == "file":
        files = problem.get("files")
        if not files or len(files) > 2:
            raise ConfigError("problem.files: give one pair file or two single-task files")
        out = {"kind": kind, "files": [str(f) for f in files], "seed": problem.get("seed", REGISTRY_SEED)}
    elif kind == "functions":
        tasks = problem.get("tasks")
        if not tasks or len(tasks) > 2:
            raise ConfigError("problem.tasks: give one or two task definitions")
        out = {"kind": kind, "tasks": []}
        for i, t in enumerate(tasks):
            if "function" not in t:
                raise ConfigError(f"problem.tasks[{i}]: missing 'function'")
            dim = int(t.get("dim", len(t.get("shift", [0.0]))))
            shift = [float(v) for v in t.get("shift", [0.0] * dim)]
            ct = ComposedTask(t["function"], shift, t.get("rotation"), t.get("lower"), t.get("upper"))
            out["tasks"].append({"function": ct.kind, "dim": ct.dim, "shift": ct.shift.tolist(),
                                 "rotation": None if ct.rotation is None else ct.rotation.tolist(),
                                 "lower": ct.lower, "upper": ct.upper})
    elif kind == FLC_PROBLEM:
        from .tank import DEFAULT_WEIGHTS, ControllerConfig, FlcBounds, plant_configs

        plants = problem.get("plants")
        if plants is None:
            plants = [p.to_dict() for p in plant_configs(**problem.get("plant_overrides", {}))]
        out = {"kind": kind, "plants": plants,
               "weights": list(problem.get("weights", DEFAULT_WEIGHTS)),
               "controller": {**ControllerConfig().to_dict(), **problem.get("controller", {})},
               "bounds": {**asdict(FlcBounds()), **problem.get("bounds", {})}}
        if len(out["weights"]) != len(out["plants"]):
            raise ConfigError("problem.weights: one weight per plant is required")
    else:
        raise ConfigError(f"problem.kind: unknown kind {kind!r}")
    build_tasks(out)
    return out


def resolve_config(raw: dict, seed=None, out=None) -> dict:
    """Fill every default and validate; the result is what the manifest stores."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - set(DEFAULT_EXPERIMENT) - {"package_version"}
    if unknown:
        raise ConfigError(f"unknown config field(s) {sorted(unknown)}")
    cfg = {**copy.deepcopy(DEFAULT_EXPERIMENT), **copy.deepcopy(raw)}
    cfg.pop("package_version", None)
    if seed is not None:
        cfg["seed"] = seed
    if out is not None:
        cfg["output"] = str(out)
    if not isinstance(cfg["repetitions"], int) or cfg["repetitions"] < 1:
        raise ConfigError("repetitions: must be an integer >= 1")
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ConfigError("seed: must be a non-negative integer")
    if not isinstance(cfg["workers"], int) or cfg["workers"] < 1:
        raise ConfigError("workers: must be an integer >= 1")
    cfg["emit"] = {**DEFAULT_EXPERIMENT["emit"], **cfg["emit"]}
    cfg["problem"] = _resolve_problem(cfg["problem"])
    solvers = cfg["solvers"]
    if isinstance(solvers, (list, tuple)):
        solvers = {name: {} for name in solvers}
    if not solvers:
        raise ConfigError("solvers: at least one solver is required")
    unknown = set(solvers) - set(SOLVER_NAMES)
    if unknown:
        raise ConfigError(f"solvers: unknown solver(s) {sorted(unknown)}; known: {list(SOLVER_NAMES)}")
    n_tasks = len(build_tasks(cfg["problem"]))
    if n_tasks == 1 and set(solvers) != {"soea"}:
        raise ConfigError("solvers: a single-task problem only supports 'soea'")
    flc = cfg["problem"]["kind"] == FLC_PROBLEM
    cfg["solvers"] = {name: _resolve_solver(name, cfg["params"], solvers[name] or {}, flc)
                      for name in SOLVER_NAMES if name in solvers}
    cfg["params"] = {}
    if cfg["baseline"] not in cfg["solvers"]:
        cfg["baseline"] = None
    return cfg


def build_tasks(problem: dict) -> list:
    """Task definitions for a resolved problem section."""
    kind = problem["kind"]
    try:
        if kind == "registry":
            return list(load_task_pair(problem["benchmark"], seed=problem["seed"])
                        if problem["dim"] is None else _registry_with_dim(problem))
        if kind == "synthetic":
            pair = synthetic_pair(tuple(problem["functions"]), problem["dim"], problem["seed"], problem["rotate"])
            return [f.task(f"T{i + 1}") for i, f in enumerate(pair)]
        if kind == "file":
            files = problem["files"]
            return list(load_task_pair(files[0] if len(files) == 1 else tuple(files), seed=problem["seed"]))
        if kind == "functions":
            return [ComposedTask(t["function"], t["shift"], t["rotation"], t["lower"], t["upper"]).task(f"T{i + 1}")
                    for i, t in enumerate(problem["tasks"])]
        if kind == FLC_PROBLEM:
            from .tank import ControllerConfig, FlcBounds, PlantConfig, flc_tasks

            plants = [PlantConfig(**p) for p in problem["plants"]]
            return list(flc_tasks(configs=plants, weights=tuple(problem["weights"]),
                                  controller=ControllerConfig(**problem["controller"]),
                                  bounds=FlcBounds(**{k: tuple(v) for k, v in problem["bounds"].items()})))
    except (BenchmarkFileError, FileNotFoundError) as exc:
        raise ConfigError(f"problem: {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"problem: {exc}") from None
    raise ConfigError(f"problem.kind: unknown kind {kind!r}")


def _registry_with_dim(problem):
    from .benchmarks import registry_pair

    pair = registry_pair(problem["benchmark"], problem["seed"], problem["dim"])
    return [f.task(f"T{i + 1}") for i, f in enumerate(pair)]


# --- running ----------------------------------------------------------------------


def run_one(cfg: dict, solver: str, rep: int) -> RunTrace:
    """Run one (solver, repetition) cell of a resolved experiment."""
    tasks = build_tasks(cfg["problem"])
    config = build_solver_config(cfg["solvers"][solver], solver)
    seed = cfg["seed"] + rep
    if len(tasks) == 1:
        return run_soea(tasks[0], config, seed)
    return {"mtga": run_mtga, "soea": run_soea_pair, "mfea": run_mfea}[solver](tasks, config, seed)


def trace_path(out: Path, solver: str, rep: int, seed: int) -> Path:
    return out / TRACE_DIR / f"{solver}_rep{rep:03d}_seed{seed}.csv"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_trace(trace: RunTrace, path: Path):
    """Write atomically so an interrupted run never leaves a half trace behind."""
    tmp = path.with_suffix(".csv.tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace.columns())
        for row in trace.rows():
            w.writerow([_fmt(v) for v in row])
    os.replace(tmp, path)


def read_trace(path: Path) -> RunTrace:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["generation", "evaluations"]:
        raise ReportError(f"{path}: not a trace CSV")
    header, body = rows[0], rows[1:]
    n_tasks = (len(header) - 2) // 2
    solver = path.stem.split("_rep")[0]
    trace = RunTrace(solver, tuple(f"T{m + 1}" for m in range(n_tasks)), 0)
    for row in body:
        vals = [float(v) for v in row[2:]]
        trace.record(int(row[0]), int(row[1]), vals[0::2], vals[1::2])
    return trace


def _worker(args):
    cfg, solver, rep, path = args
    trace = run_one(cfg, solver, rep)
    write_trace(trace, Path(path))
    return path


def run_experiment(cfg: dict) -> Path:
    """Run every missing (solver, repetition) trace, then write manifest, summary and scores."""
    out = Path(cfg["output"])
    try:
        (out / TRACE_DIR).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output: cannot create {out}: {exc}") from None
    write_json(out / "manifest.json", {**cfg, "package_version": __version__})
    jobs = []
    for solver in cfg["solvers"]:
        for rep in range(cfg["repetitions"]):
            path = trace_path(out, solver, rep, cfg["seed"] + rep)
            if path.exists():
                log.info("skip %s (already present)", path.name)
                continue
            jobs.append((cfg, solver, rep, str(path)))
    if cfg["workers"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg["workers"]) as pool:
            for path in pool.map(_worker, jobs):
                log.info("wrote %s", Path(path).name)
    else:
        for job in jobs:
            log.info("wrote %s", Path(_worker(job)).name)
    score_directory(out, write_summary=cfg["emit"]["json"], write_scores=cfg["emit"]["csv"])
    if cfg["emit"]["svg"]:
        emit_reports(out)
    return out


# --- aggregation ----------------------------------------------------------------------


def write_json(path: Path, data):
    def clean(v):
        if isinstance(v, dict):
            return {str(k): clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, np.ndarray):
            return clean(v.tolist())
        if isinstance(v, (float, np.floating)):
            return float(v) if math.isfinite(v) else None
        if isinstance(v, np.integer):
            return int(v)
        return v

    Path(path).write_text(json.dumps(clean(data), indent=2, sort_keys=True) + "\n")


def load_manifest(directory: Path) -> dict:
    path = Path(directory) / "manifest.json"
    if not path.exists():
        raise ReportError(f"{directory}: no manifest.json; is this an experiment directory?")
    return json.loads(path.read_text())


def load_traces(directory: Path, manifest: dict) -> dict:
    out = {}
    for solver in manifest["solvers"]:
        runs = []
        for rep in range(manifest["repetitions"]):
            path = trace_path(Path(directory), solver, rep, manifest["seed"] + rep)
            if path.exists():
                runs.append(read_trace(path))
        if runs:
            out[solver] = runs
    if not out:
        raise ReportError(f"{directory}: no trace CSVs found")
    return out


def _task_signs(manifest: dict) -> np.ndarray:
    return np.array([t.sign for t in build_tasks(manifest["problem"])])


def score_directory(directory, write_summary: bool = True, write_scores: bool = True) -> dict:
    """Rebuild ``summary.json`` and ``scores.csv`` from the trace CSVs."""
    directory = Path(directory)
    manifest = load_manifest(directory)
    traces = load_traces(directory, manifest)
    summaries = {name: summarize_runs(runs) for name, runs in traces.items()}
    summary = {"solvers": {name: s.to_dict() for name, s in summaries.items()},
               "directions": [t.direction for t in build_tasks(manifest["problem"])]}
    baseline = manifest.get("baseline")
    if baseline in summaries:
        summary["normalized_to"] = baseline
        summary["normalized"] = normalize_to_baseline(summaries, baseline)

    # scores use costs (task sign applied), so lower is better for every task
    names = list(traces)
    reps = min(len(r) for r in traces.values())
    signs = _task_signs(manifest)
    B = np.array([[[signs[m] * traces[n][l].final_best[m] for l in range(reps)]
                   for m in range(len(signs))] for n in names])
    scores = performance_score(B)
    summary["scores"] = dict(zip(names, scores.tolist()))
    if write_summary:
        write_json(directory / "summary.json", summary)
    if write_scores:
        with open(directory / "scores.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["solver", "score"])
            for name, s in zip(names, scores):
                w.writerow([name, _fmt(s)])
    return summary


def emit_reports(directory) -> list:
    """Convergence and score-curve SVGs, each with the CSV it was drawn from."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    directory = Path(directory)
    if not directory.is_dir() or not any(directory.iterdir()):
        raise ReportError(f"{directory}: empty or missing directory")
    manifest = load_manifest(directory)
    traces = load_traces(directory, manifest)
    signs = _task_signs(manifest)
    n_tasks = len(signs)
    names = list(traces)
    length = min(len(t.generation) for runs in traces.values() for t in runs)
    written = []

    # convergence data: mean best objective per generation, one column block per solver
    header = ["generation"]
    columns = [np.arange(length)]
    for name in names:
        runs = traces[name]
        evals = np.mean([r.evaluations[:length] for r in runs], axis=0)
        best = np.mean([np.array(r.best[:length]) for r in runs], axis=0)
        header.append(f"evaluations_{name}")
        columns.append(evals)
        for m in range(n_tasks):
            header.append(f"mean_best_T{m + 1}_{name}")
            columns.append(best[:, m])
    conv = np.column_stack(columns)
    _write_table(directory / "convergence.csv", header, conv)
    written.append(directory / "convergence.csv")

    fig, axes = plt.subplots(1, n_tasks, figsize=(5 * n_tasks, 3.6), squeeze=False)
    for m in range(n_tasks):
        ax = axes[0, m]
        for name in names:
            ev = conv[:, header.index(f"evaluations_{name}")]
            y = conv[:, header.index(f"mean_best_T{m + 1}_{name}")]
            ax.plot(ev, y, label=name)
        task_cols = [i for i, h in enumerate(header) if h.startswith(f"mean_best_T{m + 1}_")]
        if signs[m] > 0 and np.all(conv[:, task_cols] > 0):
            ax.set_yscale("log")
        ax.set_xlabel("evaluations")
        ax.set_ylabel(f"mean best objective, task {m + 1}")
        ax.legend()
    fig.tight_layout()
    fig.savefig(directory / "convergence.svg", metadata={"Date": None})
    plt.close(fig)
    written.append(directory / "convergence.svg")

    # score curve: performance score at every generation, computed on costs
    reps = min(len(r) for r in traces.values())
    scores = np.empty((length, len(names)))
    for g in range(length):
        B = [[[signs[m] * traces[n][l].best[g][m] for l in range(reps)] for m in range(n_tasks)] for n in names]
        scores[g] = performance_score(B)
    mean_evals = np.mean([conv[:, header.index(f"evaluations_{n}")] for n in names], axis=0)
    _write_table(directory / "score_curve.csv", ["generation", "evaluations"] + [f"score_{n}" for n in names],
                 np.column_stack([np.arange(length), mean_evals, scores]))
    written.append(directory / "score_curve.csv")

    fig, ax = plt.subplots(figsize=(5, 3.6))
    for i, name in enumerate(names):
        ax.plot(mean_evals, scores[:, i], label=name)
    ax.set_xlabel("evaluations")
    ax.set_ylabel("performance score (lower is better)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(directory / "score_curve.svg", metadata={"Date": None})
    plt.close(fig)
    written.append(directory / "score_curve.svg")
    return written


def _write_table(path: Path, header, data):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in data:
            w.writerow([_fmt(v) for v in row])


# --- command line -------------------------------------------------------------------


def load_config(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mtga", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)
    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    score = sub.add_parser("score", help="rebuild summary.json and scores.csv")
    score.add_argument("--in", dest="directory", required=True)
    plot = sub.add_parser("plot", help="write convergence and score plots")
    plot.add_argument("--in", dest="directory", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.verb == "run":
            cfg = resolve_config(load_config(args.config), seed=args.seed, out=args.out)
            out = run_experiment(cfg)
            print(out)
        elif args.verb == "score":
            summary = score_directory(args.directory)
            print(json.dumps(summary["solvers"], indent=2))
        else:
            for path in emit_reports(args.directory):
                print(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # anything else is a runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
