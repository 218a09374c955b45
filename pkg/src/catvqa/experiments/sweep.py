"""Parameter sweeps: problem instances x noise levels x layers x models.

Every random choice is keyed by what it describes, never by execution order:

* the graph of instance i on n vertices depends on (seed, n, i);
* the initial point and the shot streams depend on (seed, algorithm, n, L, i).

Noise model and p are deliberately left out of the keys, so curves over p
share their graphs, starting points and sampling noise (common random
numbers), and any worker count produces the same records.
"""
from __future__ import annotations

import json
import os
import warnings
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from ..noise import model_from_tag, MODEL_TAGS
from ..simulator import RngStream
from ..transpiler import gate_census
from ..vqa import Graph, OptimizerConfig, QaoaObjective, VqlsObjective, optimize

ALGORITHMS = ("qaoa", "vqls")

# stream-key tags
_GRAPH, _INIT, _SHOTS, _FINAL = 1, 2, 3, 4

RECORD_FIELDS = ("model", "p", "n", "L", "instance", "final_cost", "iterations", "shots", "seed", "depth")


def default_p_grid() -> tuple[float, ...]:
    """Two points per decade from 1e-9 to 1e-1."""
    return tuple(10.0 ** (e / 2) for e in range(-18, -1))


@dataclass(frozen=True)
class SweepConfig:
    algorithm: str = "qaoa"
    models: tuple[str, ...] = ("agnostic-layer",)
    p_grid: tuple[float, ...] = field(default_factory=default_p_grid)
    n_values: tuple[int, ...] = (5,)
    layers: tuple[int, ...] = tuple(range(1, 11))
    instances: int = 100
    edge_prob: float = 0.6
    shots: int = 10_000
    seed: int = 0
    optimizer: OptimizerConfig = field(default_factory=lambda: OptimizerConfig(max_evaluations=400))
    backend: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "layers", tuple(int(L) for L in self.layers))
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        for name in ("models", "p_grid", "n_values", "layers"):
            if not getattr(self, name):
                raise ValueError(f"{name} must not be empty")
        for tag in self.models:
            if tag not in MODEL_TAGS:
                raise ValueError(f"unknown noise model {tag!r}")
        if any(p < 0 for p in self.p_grid):
            raise ValueError("noise levels must be >= 0")
        if not 0 < self.edge_prob <= 1:
            raise ValueError("edge probability must lie in (0, 1]")
        if self.instances < 1 or self.shots < 1:
            raise ValueError("instances and shots must be >= 1")
        if min(self.layers) < 1:
            raise ValueError("layer counts must be >= 1")
        if min(self.n_values) < (2 if self.algorithm == "qaoa" else 1):
            raise ValueError("problem size too small")
        if self.backend not in ("auto", "density", "trajectory"):
            raise ValueError(f"unknown backend {self.backend!r}")

    def tasks(self) -> list[tuple]:
        return [
            (m, p, n, L, i)
            for m in self.models
            for p in self.p_grid
            for n in self.n_values
            for L in self.layers
            for i in range(self.instances)
        ]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["optimizer"] = asdict(self.optimizer)
        return d


def random_graph(n: int, edge_prob: float, stream: RngStream) -> Graph:
    """Erdos-Renyi G(n, edge_prob); an edgeless draw is redrawn from the next substream."""
    if n < 2:
        raise ValueError("a graph with an edge needs n >= 2")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    attempt = 0
    while True:
        u = stream.child(attempt).generator().random(len(pairs))
        edges = [e for e, x in zip(pairs, u) if x < edge_prob]
        if edges:
            return Graph(n, edges)
        attempt += 1


def instance_graph(config: SweepConfig, n: int, instance: int) -> Graph:
    return random_graph(n, config.edge_prob, RngStream(config.seed, (_GRAPH, n, instance)))


def _algo_id(config: SweepConfig) -> int:
    return ALGORITHMS.index(config.algorithm)


def build_objective(config: SweepConfig, model_tag: str, p: float, n: int, L: int, instance: int):
    model = model_from_tag(model_tag)
    key = (_algo_id(config), n, L, instance)
    stream = RngStream(config.seed, (_SHOTS,) + key)
    if config.algorithm == "qaoa":
        return QaoaObjective(instance_graph(config, n, instance), L, model, p, config.shots, stream, config.backend)
    return VqlsObjective(n, L, model, p, config.shots, stream, config.backend)


def clip_noise_level(model_tag: str, p: float) -> float:
    p_max = float(model_from_tag(model_tag).p_max)
    if p > p_max:
        warnings.warn(f"p={p:g} exceeds the {model_tag} model's maximum {p_max:g}; clipped", stacklevel=2)
        return p_max
    return p


def run_task(config: SweepConfig, task: tuple) -> dict:
    """Optimize one (model, p, n, L, instance) point and score the result.

    The reported cost is a fresh shot estimate at the best parameters found,
    from its own stream, so it is not biased low by picking the luckiest
    evaluation of the search.
    """
    model_tag, p, n, L, instance = task
    p_eff = clip_noise_level(model_tag, p)
    objective = build_objective(config, model_tag, p_eff, n, L, instance)
    key = (_algo_id(config), n, L, instance)
    result = optimize(objective, config.optimizer, RngStream(config.seed, (_INIT,) + key), dim=objective.dim)
    objective.stream = RngStream(config.seed, (_FINAL,) + key)
    objective.n_evals = 0
    final = float(np.clip(objective(result.params), 0.0, 1.0))
    schedule = objective.schedule(result.params)
    return {
        "model": model_tag,
        "p": p,
        "n": n,
        "L": L,
        "instance": instance,
        "final_cost": final,
        "iterations": result.iterations,
        "shots": config.shots,
        "seed": config.seed,
        "depth": schedule.depth,
        "evaluations": result.evaluations,
        "converged": result.converged,
        "census": gate_census(schedule.to_circuit()).as_dict(),
    }


def record_key(record: dict) -> tuple:
    return (record["model"], float(record["p"]), int(record["n"]), int(record["L"]), int(record["instance"]))


def load_records(path: Path) -> list[dict]:
    """Records from a JSON-lines checkpoint; a torn last line is ignored."""
    records = []
    if not path.exists():
        return records
    with open(path) as fh:
        for line in fh:
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError:
                break
    return records


def run_sweep(
    config: SweepConfig,
    checkpoint: str | os.PathLike | None = None,
    workers: int = 1,
    resume: bool = False,
    progress=None,
) -> list[dict]:
    """Run every task of ``config``; returns records sorted by task key.

    With a checkpoint path each finished task is appended as one JSON line, so
    an interrupted run restarted with ``resume=True`` only does what is missing.
    """
    done: dict[tuple, dict] = {}
    path = Path(checkpoint) if checkpoint is not None else None
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        kept = load_records(path) if resume else []
        for rec in kept:
            done[record_key(rec)] = rec
        # rewrite so a torn tail from an interrupted run does not linger
        with open(path, "w") as fh:
            fh.writelines(json.dumps(rec, sort_keys=True) + "\n" for rec in kept)
    todo = [t for t in config.tasks() if (t[0], float(t[1]), t[2], t[3], t[4]) not in done]
    sink = open(path, "a") if path is not None else None
    try:
        for rec in _execute(config, todo, workers):
            done[record_key(rec)] = rec
            if sink is not None:
                sink.write(json.dumps(rec, sort_keys=True) + "\n")
                sink.flush()
            if progress is not None:
                progress(len(done), len(config.tasks()))
    finally:
        if sink is not None:
            sink.close()
    wanted = {(t[0], float(t[1]), t[2], t[3], t[4]) for t in config.tasks()}
    return sorted((r for k, r in done.items() if k in wanted), key=record_key)


def _execute(config: SweepConfig, tasks: list[tuple], workers: int) -> Iterable[dict]:
    if workers <= 1 or len(tasks) <= 1:
        for task in tasks:
            yield run_task(config, task)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_task, config, task) for task in tasks]
        for fut in as_completed(futures):
            yield fut.result()
