"""
Rewriting circuits into the restricted simulation basis {RZ, CNOT, X, Z, H}
plus CZ and, when native, the Toffoli.

All rewrites hold up to a global phase. T and T-dagger do not exist in the
basis, so the Toffoli decomposition uses RZ(+-pi/4) in their place.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .circuit import Circuit, GateKind, GateOp, schedule_asap

# Never rewritten: state preparation and terminal readout.
PASSTHROUGH = frozenset({GateKind.PREP_PLUS, GateKind.MEASURE_Z, GateKind.MEASURE_X})

_CORE = frozenset({GateKind.RZ, GateKind.CNOT, GateKind.X, GateKind.Z, GateKind.H, GateKind.IDENTITY})


@dataclass(frozen=True)
class BasisSet:
    allowed: frozenset[GateKind]
    native_toffoli: bool

    def __post_init__(self):
        object.__setattr__(self, "allowed", frozenset(self.allowed))
        if not _CORE - {GateKind.IDENTITY} <= self.allowed:
            missing = sorted(k.value for k in _CORE - self.allowed - {GateKind.IDENTITY})
            raise ValueError(f"basis must contain RZ, CNOT, X, Z and H; missing {missing}")
        if (GateKind.TOFFOLI in self.allowed) != self.native_toffoli:
            raise ValueError("TOFFOLI must be in the basis exactly when native_toffoli is set")

    def __contains__(self, kind: GateKind) -> bool:
        return kind in self.allowed or kind in PASSTHROUGH


def default_basis(native_toffoli: bool = True, keep_cz: bool = True) -> BasisSet:
    allowed = set(_CORE)
    if keep_cz:
        allowed.add(GateKind.CZ)
    if native_toffoli:
        allowed.add(GateKind.TOFFOLI)
    return BasisSet(frozenset(allowed), native_toffoli)


def _rz(q: int, angle: float) -> GateOp:
    return GateOp(GateKind.RZ, (q,), angle)


def _h(q: int) -> GateOp:
    return GateOp(GateKind.H, (q,))


def _cnot(c: int, t: int) -> GateOp:
    return GateOp(GateKind.CNOT, (c, t))


def decompose_ry(q: int, theta: float) -> list[GateOp]:
    # RY(t) = S . H RZ(t) H . S^dagger, with S = RZ(pi/2) up to phase
    return [_rz(q, -math.pi / 2), _h(q), _rz(q, theta), _h(q), _rz(q, math.pi / 2)]


def decompose_cz(a: int, b: int) -> list[GateOp]:
    return [_h(b), _cnot(a, b), _h(b)]


def decompose_toffoli(a: int, b: int, t: int) -> list[GateOp]:
    """Six-CNOT Toffoli with controls ``a``, ``b`` and target ``t``."""
    T, TDG = math.pi / 4, -math.pi / 4
    return [
        _h(t),
        _cnot(b, t), _rz(t, TDG),
        _cnot(a, t), _rz(t, T),
        _cnot(b, t), _rz(t, TDG),
        _cnot(a, t), _rz(b, T), _rz(t, T),
        _h(t),
        _cnot(a, b), _rz(a, T), _rz(b, TDG),
        _cnot(a, b),
    ]


def _rewrite(op: GateOp, basis: BasisSet) -> list[GateOp]:
    if op.kind in basis:
        return [op]
    if op.kind is GateKind.RY:
        return decompose_ry(op.qubits[0], op.angle)
    if op.kind is GateKind.CZ:
        return decompose_cz(*op.qubits)
    if op.kind is GateKind.TOFFOLI:
        return decompose_toffoli(*op.qubits)
    if op.kind is GateKind.IDENTITY:
        return []
    raise ValueError(f"{op.kind.value} cannot be expressed in basis {sorted(k.value for k in basis.allowed)}")


def transpile(circuit: Circuit, basis: BasisSet) -> Circuit:
    """Rewrite every non-basis gate; layer marks follow the rewritten ops."""
    ops: list[GateOp] = []
    starts: list[int] = []
    for op in circuit.ops:
        starts.append(len(ops))
        ops.extend(_rewrite(op, basis))
    starts.append(len(ops))
    return Circuit(circuit.n_qubits, ops, [starts[m] for m in circuit.layer_marks])


@dataclass(frozen=True)
class Census:
    counts: dict[GateKind, int]
    depth: int

    def __getitem__(self, kind: GateKind) -> int:
        return self.counts.get(kind, 0)

    def as_dict(self) -> dict[str, int]:
        return {kind.value: self.counts.get(kind, 0) for kind in GateKind}


def gate_census(circuit: Circuit) -> Census:
    counts = Counter(op.kind for op in circuit.ops)
    return Census({kind: counts.get(kind, 0) for kind in GateKind}, schedule_asap(circuit).depth)
