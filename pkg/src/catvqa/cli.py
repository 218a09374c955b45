"""Command-line entry point: single runs, sweeps, thresholds and plot data."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import circuit as circuit_mod
from .experiments import (
    DEFAULT_EPSILON,
    SweepConfig,
    compare_models,
    default_p_grid,
    emit_outputs,
    plot_tables,
    random_graph,
    read_records_csv,
    run_sweep,
    threshold_reports,
)
from .noise import MODEL_TAGS, model_from_tag
from .simulator import RngStream, compile_circuit
from .vqa import Graph, OptimizerConfig, QaoaObjective, QaoaParams, VqlsObjective, VqlsProblem, optimize
from .vqa import build_qaoa_circuit, build_vqls_circuit

# built-in values for options that a config file may also set
DEFAULTS = {
    "noise_model": "agnostic-layer",
    "noise_level": None,
    "layers": None,
    "qubits": None,
    "instances": 100,
    "shots": 10_000,
    "seed": 0,
    "native_toffoli": "on",
    "epsilon": DEFAULT_EPSILON,
    "out": None,
    "resume": False,
    "optimizer_iters": 400,
    "restarts": 1,
    "backend": "auto",
    "algorithm": "qaoa",
    "edge_prob": 0.6,
    "workers": 1,
    "problem": None,
}


class CliError(Exception):
    pass


def parse_range(text: str, kind=int) -> list:
    """``"5"`` -> [5]; ``"1:10"`` -> [1, ..., 10] (inclusive)."""
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            return [kind(parts[0])]
        if len(parts) == 2:
            lo, hi = int(parts[0]), int(parts[1])
            if hi < lo:
                raise CliError(f"empty range {text!r}")
            return list(range(lo, hi + 1))
    except ValueError:
        pass
    raise CliError(f"cannot parse range {text!r}; use N or LO:HI")


def parse_noise_levels(text: str) -> list[float]:
    """``"0.01"`` or a log-spaced ``"1e-9:1e-1:17"``."""
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            values = [float(parts[0])]
        elif len(parts) == 3:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
            if lo <= 0 or hi <= 0 or count < 1:
                raise CliError("log-spaced noise range needs positive bounds and count >= 1")
            values = [float(v) for v in np.logspace(np.log10(lo), np.log10(hi), count)]
        else:
            raise ValueError
    except ValueError:
        raise CliError(f"cannot parse noise level {text!r}; use V or LO:HI:COUNT") from None
    if any(v < 0 for v in values):
        raise CliError("noise levels must be >= 0")
    return values


def resolve_models(names: str, native_toffoli: str) -> list[str]:
    tags = [t.strip() for t in str(names).split(",") if t.strip()]
    if native_toffoli not in ("on", "off"):
        raise CliError("--native-toffoli takes on or off")
    out = []
    for tag in tags:
        if tag not in MODEL_TAGS:
            raise CliError(f"unknown noise model {tag!r}; choose from {', '.join(MODEL_TAGS)}")
        if native_toffoli == "off" and tag == "agnostic-gate":
            tag = "agnostic-gate-no-toffoli"
        if native_toffoli == "off" and tag == "cat":
            raise CliError("the cat model always has a native Toffoli")
        out.append(tag)
    if not out:
        raise CliError("no noise model given")
    return out


def merged_options(args: argparse.Namespace) -> dict:
    """Built-in defaults, overridden by the config file, overridden by flags."""
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise CliError(f"cannot read config {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise CliError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise CliError("config file must hold a JSON object")
        for key, value in loaded.items():
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise CliError(f"unknown config key {key!r}")
            opts[key] = value
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    return opts


def _optimizer(opts: dict, seed: int) -> OptimizerConfig:
    iters, restarts = int(opts["optimizer_iters"]), int(opts["restarts"])
    if iters < 1 or restarts < 1:
        raise CliError("--optimizer-iters and --restarts must be >= 1")
    return OptimizerConfig(max_iterations=10**6, max_evaluations=iters, seed=seed, restarts=restarts)


def _single_value(text, what: str, default: float) -> float:
    if text is None:
        return default
    values = parse_noise_levels(text)
    if len(values) != 1:
        raise CliError(f"{what} takes a single value here")
    return values[0]


def _load_problem(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read problem {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"problem {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise CliError("problem file must hold a JSON object")
    return data


def _dump(circuit, model, args) -> None:
    if args.dump_circuit:
        Path(args.dump_circuit).write_text(circuit_mod.dumps(circuit))
    if args.dump_transpiled:
        Path(args.dump_transpiled).write_text(circuit_mod.dumps(compile_circuit(circuit, model).to_circuit()))


def _report(result: dict, opts: dict) -> None:
    text = json.dumps(result, indent=2)
    print(text)
    if opts["out"]:
        out = Path(opts["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / "result.json").write_text(text + "\n")


def cmd_run_qaoa(args) -> int:
    opts = merged_options(args)
    model_tag = resolve_models(opts["noise_model"], opts["native_toffoli"])
    if len(model_tag) != 1:
        raise CliError("run-qaoa takes a single noise model")
    model = model_from_tag(model_tag[0])
    p = _single_value(opts["noise_level"], "--noise-level", 0.0)
    layers = parse_range(opts["layers"] if opts["layers"] is not None else 1)
    if len(layers) != 1 or layers[0] < 1:
        raise CliError("run-qaoa takes a single layer count >= 1")
    seed = int(opts["seed"])
    if opts["problem"]:
        data = _load_problem(opts["problem"])
        try:
            graph = Graph(int(data["n_vertices"]), [tuple(e) for e in data["edges"]])
        except (KeyError, TypeError) as exc:
            raise CliError(f"problem file needs n_vertices and edges: {exc}") from None
    else:
        n = parse_range(opts["qubits"] if opts["qubits"] is not None else 5)
        if len(n) != 1:
            raise CliError("run-qaoa takes a single qubit count")
        graph = random_graph(n[0], float(opts["edge_prob"]), RngStream(seed, (1, n[0], 0)))
    L = layers[0]
    objective = QaoaObjective(graph, L, model, p, int(opts["shots"]), RngStream(seed, (3,)), opts["backend"])
    res = optimize(objective, _optimizer(opts, seed), RngStream(seed, (2,)), dim=objective.dim)
    params = QaoaParams.from_vector(res.params)
    _dump(build_qaoa_circuit(graph, params), model, args)
    _report({
        "algorithm": "qaoa", "model": model.name, "p": p, "n": graph.n_vertices, "L": L,
        "edges": [list(e) for e in graph.edges], "final_cost": res.cost,
        "exact_cost": objective.exact(res.params), "gammas": list(params.gammas), "betas": list(params.betas),
        "iterations": res.iterations, "evaluations": res.evaluations, "converged": res.converged,
        "depth": objective.depth(),
    }, opts)
    return 0


def cmd_run_vqls(args) -> int:
    opts = merged_options(args)
    model_tag = resolve_models(opts["noise_model"], opts["native_toffoli"])
    if len(model_tag) != 1:
        raise CliError("run-vqls takes a single noise model")
    model = model_from_tag(model_tag[0])
    p = _single_value(opts["noise_level"], "--noise-level", 0.0)
    n, L = 3, 1
    if opts["problem"]:
        data = _load_problem(opts["problem"])
        n, L = int(data.get("n", n)), int(data.get("layers", L))
    if opts["qubits"] is not None:
        n = parse_range(opts["qubits"])[0]
    if opts["layers"] is not None:
        L = parse_range(opts["layers"])[0]
    seed = int(opts["seed"])
    objective = VqlsObjective(n, L, model, p, int(opts["shots"]), RngStream(seed, (3,)), opts["backend"])
    res = optimize(objective, _optimizer(opts, seed), RngStream(seed, (2,)), dim=objective.dim)
    _dump(build_vqls_circuit(VqlsProblem(n, L, tuple(res.params))), model, args)
    _report({
        "algorithm": "vqls", "model": model.name, "p": p, "n": n, "L": L, "final_cost": res.cost,
        "exact_cost": objective.exact(res.params), "thetas": list(map(float, res.params)),
        "iterations": res.iterations, "evaluations": res.evaluations, "converged": res.converged,
        "depth": objective.depth(),
    }, opts)
    return 0


def sweep_config(opts: dict) -> SweepConfig:
    algorithm = opts["algorithm"]
    models = resolve_models(opts["noise_model"], opts["native_toffoli"])
    p_grid = parse_noise_levels(opts["noise_level"]) if opts["noise_level"] is not None else list(default_p_grid())
    default_n = 5 if algorithm == "qaoa" else 3
    n_values = parse_range(opts["qubits"]) if opts["qubits"] is not None else [default_n]
    layers = parse_range(opts["layers"]) if opts["layers"] is not None else list(range(1, 11))
    seed = int(opts["seed"])
    try:
        return SweepConfig(
            algorithm=algorithm, models=tuple(models), p_grid=tuple(p_grid), n_values=tuple(n_values),
            layers=tuple(layers), instances=int(opts["instances"]), edge_prob=float(opts["edge_prob"]),
            shots=int(opts["shots"]), seed=seed, optimizer=_optimizer(opts, seed), backend=opts["backend"],
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None


def cmd_sweep(args) -> int:
    opts = merged_options(args)
    if not opts["out"]:
        raise CliError("sweep needs --out")
    config = sweep_config(opts)
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2) + "\n")

    def progress(done, total):
        print(f"\r{done}/{total} tasks", end="", file=sys.stderr, flush=True)

    records = run_sweep(config, out / "records.jsonl", workers=int(opts["workers"]),
                        resume=bool(opts["resume"]), progress=progress)
    print(file=sys.stderr)
    reports = _reports_or_empty(records, float(opts["epsilon"]))
    for path in emit_outputs(records, reports, out):
        print(path)
    return 0


def _reports_or_empty(records, epsilon):
    by_curve = {}
    for r in records:
        by_curve.setdefault((r["model"], r["n"], r["L"]), set()).add(r["p"])
    usable = [r for r in records if len(by_curve[(r["model"], r["n"], r["L"])]) >= 3]
    return threshold_reports(usable, epsilon) if usable else []


def _records_from(path: str) -> list[dict]:
    p = Path(path)
    if p.is_dir():
        p = p / "records.csv"
    if not p.exists():
        raise CliError(f"no records at {p}")
    return read_records_csv(p)


def cmd_threshold(args) -> int:
    opts = merged_options(args)
    records = _records_from(args.records)
    try:
        reports = threshold_reports(records, float(opts["epsilon"]))
    except ValueError as exc:
        raise CliError(str(exc)) from None
    for r in reports:
        flags = f"  [{', '.join(r.flags)}]" if r.flags else ""
        print(f"{r.model:26s} n={r.n} L={r.L:<3d} baseline={r.baseline:.4f} "
              f"saturation={r.saturation:.4f} p*={r.p_star:.3g}{flags}")
    groups = {}
    for r in reports:
        groups.setdefault((r.n, r.L), []).append(r)
    for (n, L), group in sorted(groups.items()):
        if len(group) > 1:
            summary = compare_models(group)
            print(f"n={n} L={L} ordering by p*: {' >= '.join(summary.ordering)}")
            for c in summary.pairs:
                print(f"  {c.a} vs {c.b}: {c.relation} ({c.steps:+d} grid steps)")
    if opts["out"]:
        out = Path(opts["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / "thresholds.json").write_text(json.dumps([r.to_dict() for r in reports], indent=2) + "\n")
    return 0


def cmd_plot_data(args) -> int:
    opts = merged_options(args)
    if not opts["out"]:
        raise CliError("plot-data needs --out")
    records = _records_from(args.records)
    out = Path(opts["out"])
    for name, text in plot_tables(records).items():
        path = out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="catvqa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, single=False):
        p.add_argument("--config", help="JSON file of option values; flags override it")
        p.add_argument("--noise-model", help=f"one of {', '.join(MODEL_TAGS)}" + ("" if single else ", comma separated"))
        p.add_argument("--noise-level", help="V, or LO:HI:COUNT log-spaced")
        p.add_argument("--layers", help="L, or LO:HI")
        p.add_argument("--qubits", help="n, or LO:HI")
        p.add_argument("--shots", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--native-toffoli", choices=("on", "off"))
        p.add_argument("--optimizer-iters", type=int, help="cost evaluations per optimizer start")
        p.add_argument("--restarts", type=int, help="independent optimizer starts, best kept")
        p.add_argument("--backend", choices=("auto", "density", "trajectory"))
        p.add_argument("--out", help="output directory")

    for name, fn, algo in (("run-qaoa", cmd_run_qaoa, "qaoa"), ("run-vqls", cmd_run_vqls, "vqls")):
        p = sub.add_parser(name, help=f"optimize one {algo.upper()} instance")
        common(p, single=True)
        p.add_argument("--problem", help="JSON problem file" + (" (n_vertices, edges)" if algo == "qaoa" else " (n, layers)"))
        p.add_argument("--edge-prob", type=float)
        p.add_argument("--dump-circuit", help="write the built circuit here")
        p.add_argument("--dump-transpiled", help="write the transpiled, scheduled circuit here")
        p.set_defaults(func=fn)

    p = sub.add_parser("sweep", help="run a parameter sweep")
    common(p)
    p.add_argument("--algorithm", choices=("qaoa", "vqls"))
    p.add_argument("--instances", type=int)
    p.add_argument("--edge-prob", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--resume", action="store_const", const=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("threshold", help="extract thresholds from sweep records")
    p.add_argument("records", help="records.csv or a sweep output directory")
    p.add_argument("--config")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("plot-data", help="write plot-ready tables from sweep records")
    p.add_argument("records", help="records.csv or a sweep output directory")
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot_data)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError, OSError, KeyError) as exc:
        print(f"catvqa: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
