"""QAOA for unweighted MaxCut with the edge-normalized cost."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..circuit import Circuit, GateKind, GateOp
from ..noise import NoiseModel
from ..simulator import RngStream
from .objective import Objective, shot_cost


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = tuple(sorted(tuple(sorted((int(a), int(b)))) for a, b in self.edges))
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate edge")
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop on vertex {a}")
            if not 0 <= a < b < self.n_vertices:
                raise ValueError(f"edge ({a}, {b}) outside {self.n_vertices} vertices")
        if not edges:
            raise ValueError("graph needs at least one edge")
        object.__setattr__(self, "edges", edges)

    @property
    def n_edges(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class QaoaParams:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if len(self.gammas) != len(self.betas):
            raise ValueError("need as many gammas as betas")

    @property
    def layers(self) -> int:
        return len(self.gammas)

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "QaoaParams":
        x = np.asarray(x, dtype=float)
        if x.size % 2:
            raise ValueError("QAOA parameter vector must have even length")
        half = x.size // 2
        return cls(tuple(x[:half]), tuple(x[half:]))

    def to_vector(self) -> np.ndarray:
        return np.array(self.gammas + self.betas)


def maxcut_cost_classical(graph: Graph, x: Sequence[int]) -> float:
    """1 - (cut edges) / n_E for a +-1 vertex assignment."""
    x = np.asarray(x)
    if x.shape != (graph.n_vertices,) or not np.all(np.isin(x, (-1, 1))):
        raise ValueError(f"assignment must be {graph.n_vertices} entries of +-1")
    total = sum(1 - x[i] * x[j] for i, j in graph.edges)
    return 1.0 - total / (2 * graph.n_edges)


def maxcut_cost_table(graph: Graph) -> np.ndarray:
    """Classical cost of every bitstring; bit 0 maps to x=+1, bit 1 to x=-1."""
    n = graph.n_vertices
    idx = np.arange(2**n)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1
    i, j = np.array(graph.edges).T
    cut = (bits[:, i] != bits[:, j]).sum(axis=1)
    return 1.0 - cut / graph.n_edges


def build_qaoa_circuit(graph: Graph, params: QaoaParams, measure: bool = True) -> Circuit:
    """|+>^n, then per layer exp(-i g w ZZ) on every edge and exp(-i b X) on every qubit.

    Only the ZZ part of the cost Hamiltonian enters the circuit, with weight
    w = 1 / (2 n_E); its constant part just shifts the measured cost.
    Layer marks sit before the first layer and after every layer.
    """
    n = graph.n_vertices
    w = 1.0 / (2 * graph.n_edges)
    ops = [GateOp(GateKind.PREP_PLUS, (q,)) for q in range(n)]
    marks = [len(ops)]
    for gamma, beta in zip(params.gammas, params.betas):
        for i, j in graph.edges:
            ops += [
                GateOp(GateKind.CNOT, (i, j)),
                GateOp(GateKind.RZ, (j,), 2 * gamma * w),
                GateOp(GateKind.CNOT, (i, j)),
            ]
        for q in range(n):
            ops += [GateOp(GateKind.H, (q,)), GateOp(GateKind.RZ, (q,), 2 * beta), GateOp(GateKind.H, (q,))]
        marks.append(len(ops))
    if measure:
        ops += [GateOp(GateKind.MEASURE_Z, (q,)) for q in range(n)]
    return Circuit(n, ops, marks)


class QaoaObjective(Objective):
    """Shot-estimated QAOA cost as a function of the flat (gammas, betas) vector."""

    def __init__(self, graph: Graph, layers: int, model: NoiseModel, p: float, shots: int,
                 stream: RngStream, backend: str = "auto"):
        super().__init__(model, p, shots, stream, backend)
        self.graph = graph
        self.layers = layers
        self.values = maxcut_cost_table(graph)

    @property
    def dim(self) -> int:
        return 2 * self.layers

    def circuit(self, x) -> Circuit:
        return build_qaoa_circuit(self.graph, QaoaParams.from_vector(x))

    def cost_from_counts(self, counts: np.ndarray) -> float:
        return float(counts @ self.values) / counts.sum()

    def cost_from_probabilities(self, probs: np.ndarray) -> float:
        return float(probs @ self.values)


def qaoa_cost(graph: Graph, params: QaoaParams, noise: NoiseModel, p: float, shots: int | None,
              rng: RngStream | np.random.Generator, backend: str = "auto") -> float:
    """Mean classical MaxCut cost of the measured bitstrings.

    ``shots=None`` gives the exact noisy expectation instead of a shot estimate.
    """
    if params.layers == 0:
        # no layers: uniform superposition, every edge cut with probability 1/2
        circuit = Circuit(graph.n_vertices, [GateOp(GateKind.PREP_PLUS, (q,)) for q in range(graph.n_vertices)])
    else:
        circuit = build_qaoa_circuit(graph, params)
    return shot_cost(circuit, maxcut_cost_table(graph), noise, p, shots, rng, backend)
