"""VQLS with A = identity and a flat target, scored by a SWAP test.

Register layout: ancilla on qubit 0, the ansatz register psi on qubits
1..n and the target register b on qubits n+1..2n.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..circuit import Circuit, GateKind, GateOp
from ..noise import NoiseModel
from ..simulator import RngStream
from .objective import Objective, shot_cost


@dataclass(frozen=True)
class VqlsProblem:
    n: int
    layers: int
    thetas: tuple[float, ...]
    A: str = "identity"
    b: str = "flat"

    def __post_init__(self):
        if self.n < 1 or self.layers < 1:
            raise ValueError("VQLS needs n >= 1 and layers >= 1")
        if self.A != "identity":
            raise ValueError(f"only A='identity' is supported, got {self.A!r}")
        if self.b != "flat":
            raise ValueError(f"only b='flat' is supported, got {self.b!r}")
        thetas = tuple(float(t) for t in self.thetas)
        if len(thetas) != self.n_params:
            raise ValueError(f"{self.layers} layers on {self.n} qubits need {self.n_params} angles, got {len(thetas)}")
        object.__setattr__(self, "thetas", thetas)

    @property
    def params_per_layer(self) -> int:
        return self.n

    @property
    def n_params(self) -> int:
        return self.layers * self.params_per_layer

    @property
    def n_qubits(self) -> int:
        return 2 * self.n + 1

    def with_thetas(self, thetas) -> "VqlsProblem":
        return VqlsProblem(self.n, self.layers, tuple(thetas), self.A, self.b)


def ansatz_ops(n: int, thetas, offset: int = 0) -> tuple[list[GateOp], list[int]]:
    """RY on every qubit then a CNOT chain, per layer; returns ops and layer ends."""
    ops: list[GateOp] = []
    ends = []
    thetas = np.asarray(thetas, dtype=float).reshape(-1, n)
    for layer in thetas:
        ops += [GateOp(GateKind.RY, (offset + q,), float(t)) for q, t in enumerate(layer)]
        ops += [GateOp(GateKind.CNOT, (offset + q, offset + q + 1)) for q in range(n - 1)]
        ends.append(len(ops))
    return ops, ends


def controlled_swap(control: int, a: int, b: int) -> list[GateOp]:
    return [
        GateOp(GateKind.CNOT, (b, a)),
        GateOp(GateKind.TOFFOLI, (control, a, b)),
        GateOp(GateKind.CNOT, (b, a)),
    ]


def build_vqls_circuit(problem: VqlsProblem) -> Circuit:
    """SWAP test between V(theta)|0> and H^n|0>, read out on the ancilla.

    The ancilla is prepared in |+> and measured in the X basis, which is the
    bias-preserving form of the usual H ... H, MeasureZ pair.
    Layer marks sit before the first ansatz layer and after every layer.
    """
    n = problem.n
    psi = list(range(1, n + 1))
    b_reg = list(range(n + 1, 2 * n + 1))
    ops = [GateOp(GateKind.PREP_PLUS, (0,))]
    ops += [GateOp(GateKind.H, (q,)) for q in b_reg]
    marks = [len(ops)]
    body, ends = ansatz_ops(n, problem.thetas, offset=1)
    ops += body
    marks += [marks[0] + e for e in ends]
    for a, b in zip(psi, b_reg):
        ops += controlled_swap(0, a, b)
    ops.append(GateOp(GateKind.MEASURE_X, (0,)))
    return Circuit(problem.n_qubits, ops, marks)


def swap_test_cost(p0: float) -> float:
    """1 - |<b|psi>|^2 from the ancilla-0 probability, clamped to [0, 1]."""
    return float(min(1.0, max(0.0, 2.0 * (1.0 - p0))))


# ancilla outcome 0 scores 1, outcome 1 scores 0, so the mean is P(0)
_ANCILLA_ZERO = np.array([1.0, 0.0])


class VqlsObjective(Objective):
    def __init__(self, n: int, layers: int, model: NoiseModel, p: float, shots: int | None,
                 stream: RngStream, backend: str = "auto"):
        super().__init__(model, p, shots, stream, backend)
        self.problem = VqlsProblem(n, layers, (0.0,) * (n * layers))
        self.values = _ANCILLA_ZERO

    @property
    def dim(self) -> int:
        return self.problem.n_params

    def circuit(self, x) -> Circuit:
        return build_vqls_circuit(self.problem.with_thetas(x))

    def clamp(self, p0: float) -> float:
        return swap_test_cost(p0)


def vqls_cost(problem: VqlsProblem, noise: NoiseModel, p: float, shots: int | None,
              rng: RngStream | np.random.Generator | None, backend: str = "auto") -> float:
    p0 = shot_cost(build_vqls_circuit(problem), _ANCILLA_ZERO, noise, p, shots, rng, backend)
    return swap_test_cost(p0)
