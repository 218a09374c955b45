"""
Gate-level circuit representation and ASAP scheduling.

A ``Circuit`` is an immutable ordered list of ``GateOp`` over ``n_qubits``
qubits. Optional ``layer_marks`` are op indices at which an algorithmic layer
starts or ends; they are only consulted when a schedule has to respect layer
boundaries (layer-wise noise).

Qubit 0 is the most significant bit of a basis-state index, so the bitstring
"10" on two qubits means q0=1, q1=0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Sequence


class GateKind(Enum):
    PREP_PLUS = "PREP+"
    IDENTITY = "I"
    RZ = "RZ"
    X = "X"
    Z = "Z"
    H = "H"
    CZ = "CZ"
    CNOT = "CNOT"
    TOFFOLI = "TOFFOLI"
    RY = "RY"
    MEASURE_Z = "MZ"
    MEASURE_X = "MX"

    @property
    def arity(self) -> int:
        if self in (GateKind.CZ, GateKind.CNOT):
            return 2
        if self is GateKind.TOFFOLI:
            return 3
        return 1

    @property
    def has_angle(self) -> bool:
        return self in (GateKind.RZ, GateKind.RY)

    @property
    def is_measurement(self) -> bool:
        return self in (GateKind.MEASURE_Z, GateKind.MEASURE_X)

    @classmethod
    def from_label(cls, label: str) -> "GateKind":
        try:
            return cls(label.upper())
        except ValueError:
            raise ValueError(f"unknown gate label {label!r}") from None


@dataclass(frozen=True)
class GateOp:
    """One gate application. Controls come before targets in ``qubits``."""

    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != self.kind.arity:
            raise ValueError(
                f"{self.kind.value} acts on {self.kind.arity} qubit(s), got {self.qubits}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.kind.value} {self.qubits}")
        if self.kind.has_angle:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind.value} needs a finite angle, got {self.angle}")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.kind.value} takes no angle")

    def __str__(self) -> str:
        parts = [self.kind.value, *map(str, self.qubits)]
        if self.angle is not None:
            parts.append(repr(self.angle))
        return " ".join(parts)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple[GateOp, ...] = ()
    layer_marks: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "layer_marks", tuple(int(m) for m in self.layer_marks))
        if self.n_qubits < 1:
            raise ValueError("a circuit needs at least one qubit")
        measured: set[int] = set()
        touched: set[int] = set()
        for op in self.ops:
            for q in op.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"qubit {q} out of range for {self.n_qubits} qubits in {op}")
                if q in measured:
                    raise ValueError(f"qubit {q} used after its terminal measurement ({op})")
            if op.kind is GateKind.PREP_PLUS and op.qubits[0] in touched:
                raise ValueError(f"PREP+ must be the first operation on qubit {op.qubits[0]}")
            touched.update(op.qubits)
            if op.kind.is_measurement:
                measured.add(op.qubits[0])
        marks = self.layer_marks
        if any(not 0 <= m <= len(self.ops) for m in marks) or list(marks) != sorted(marks):
            raise ValueError(f"layer marks must be sorted indices in [0, {len(self.ops)}]")

    def __len__(self) -> int:
        return len(self.ops)

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        """Measured qubits in ascending order (the bit order of shot outcomes)."""
        return tuple(sorted(op.qubits[0] for op in self.ops if op.kind.is_measurement))

    def without_measurements(self) -> "Circuit":
        keep = [i for i, op in enumerate(self.ops) if not op.kind.is_measurement]
        return self._subset(keep)

    def _subset(self, keep: Sequence[int]) -> "Circuit":
        remap = _index_remap(len(self.ops), keep)
        return Circuit(self.n_qubits, [self.ops[i] for i in keep], [remap[m] for m in self.layer_marks])


def _index_remap(n_ops: int, keep: Sequence[int]) -> list[int]:
    # remap[i] = number of kept ops strictly before old index i
    remap = [0] * (n_ops + 1)
    kept = set(keep)
    count = 0
    for i in range(n_ops):
        remap[i] = count
        if i in kept:
            count += 1
    remap[n_ops] = count
    return remap


@dataclass(frozen=True)
class Schedule:
    """Circuit ops grouped into timesteps of qubit-disjoint gates.

    ``layer_marks`` are timestep positions: a mark ``k`` sits just before
    timestep ``k`` (``k == len(timesteps)`` means after the last one). They are
    only populated when the schedule was built with ``respect_layers=True``.
    """

    n_qubits: int
    timesteps: tuple[tuple[GateOp, ...], ...]
    layer_marks: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.timesteps)

    @property
    def depth(self) -> int:
        return len(self.timesteps)

    def ops(self) -> list[GateOp]:
        return [op for step in self.timesteps for op in step]

    def to_circuit(self) -> Circuit:
        flat: list[GateOp] = []
        starts = [0]
        for step in self.timesteps:
            starts.append(starts[-1] + len(step))
        for step in self.timesteps:
            flat.extend(step)
        op_marks = [starts[m] for m in self.layer_marks]
        return Circuit(self.n_qubits, flat, op_marks)

    @cached_property
    def _measured_before(self) -> tuple[frozenset[int], ...]:
        out = []
        measured: set[int] = set()
        for step in self.timesteps:
            out.append(frozenset(measured))
            measured.update(op.qubits[0] for op in step if op.kind.is_measurement)
        return tuple(out)

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        return tuple(sorted(op.qubits[0] for op in self.ops() if op.kind.is_measurement))


def schedule_asap(circuit: Circuit, respect_layers: bool = False) -> Schedule:
    """Greedy as-soon-as-possible layering.

    Each op lands in the first timestep after the last timestep holding an
    earlier op on any of its qubits. With ``respect_layers`` every layer mark
    also acts as a full-width fence, and the fence positions are returned as
    the schedule's ``layer_marks``.
    """
    last = [-1] * circuit.n_qubits
    steps: list[list[GateOp]] = []
    floor = 0
    marks = list(circuit.layer_marks) if respect_layers else []
    positions: list[int] = []
    mark_i = 0
    for index, op in enumerate(circuit.ops):
        while mark_i < len(marks) and marks[mark_i] == index:
            floor = len(steps)
            positions.append(floor)
            mark_i += 1
        t = max(floor, 1 + max(last[q] for q in op.qubits))
        if t == len(steps):
            steps.append([])
        steps[t].append(op)
        for q in op.qubits:
            last[q] = t
    while mark_i < len(marks):
        positions.append(len(steps))
        mark_i += 1
    return Schedule(circuit.n_qubits, tuple(tuple(s) for s in steps), tuple(positions))


def idle_qubits(schedule: Schedule, timestep_index: int, n_qubits: int | None = None) -> frozenset[int]:
    """Qubits untouched in a timestep, excluding qubits already measured."""
    if not 0 <= timestep_index < len(schedule.timesteps):
        raise IndexError(f"timestep {timestep_index} out of range [0, {len(schedule.timesteps)})")
    n = schedule.n_qubits if n_qubits is None else n_qubits
    touched = {q for op in schedule.timesteps[timestep_index] for q in op.qubits}
    return frozenset(range(n)) - touched - schedule._measured_before[timestep_index]


def dumps(circuit: Circuit) -> str:
    """Line-oriented text: ``GATE q0 [q1 [q2]] [angle]``; ``#`` lines are metadata."""
    lines = [f"# qubits {circuit.n_qubits}"]
    marks = list(circuit.layer_marks)
    for index in range(len(circuit.ops) + 1):
        while marks and marks[0] == index:
            lines.append("# layer")
            marks.pop(0)
        if index < len(circuit.ops):
            lines.append(str(circuit.ops[index]))
    return "\n".join(lines) + "\n"


def loads(text: str, n_qubits: int | None = None) -> Circuit:
    ops: list[GateOp] = []
    marks: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            words = line[1:].split()
            if words[:1] == ["qubits"] and n_qubits is None:
                n_qubits = int(words[1])
            elif words[:1] == ["layer"]:
                marks.append(len(ops))
            continue
        words = line.split()
        try:
            kind = GateKind.from_label(words[0])
            qubits = [int(w) for w in words[1 : 1 + kind.arity]]
            rest = words[1 + kind.arity :]
            angle = float(rest[0]) if kind.has_angle else None
            if len(rest) != int(kind.has_angle):
                raise ValueError("wrong number of fields")
            ops.append(GateOp(kind, tuple(qubits), angle))
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}: {exc}") from None
    if n_qubits is None:
        n_qubits = 1 + max((q for op in ops for q in op.qubits), default=0)
    return Circuit(n_qubits, ops, marks)
