"""Flattening a schedule plus a noise model into one ordered list of steps.

Every engine walks the same plan, so the i-th noise step is the i-th random
slot of a trajectory no matter which engine consumes it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..circuit import Circuit, GateKind, GateOp, Schedule, idle_qubits, schedule_asap
from ..noise import ErrorChannel, NoiseModel
from ..transpiler import transpile


class GateStep(NamedTuple):
    op: GateOp
    timestep: int


class NoiseStep(NamedTuple):
    channel: ErrorChannel
    qubits: tuple[int, ...]
    timestep: int
    origin: str  # "gate", "idle" or "layer"


@dataclass(frozen=True, eq=False)
class Plan:
    n_qubits: int
    steps: tuple[GateStep | NoiseStep, ...]
    measured: tuple[int, ...]
    x_basis: tuple[int, ...]

    @property
    def n_slots(self) -> int:
        return sum(isinstance(s, NoiseStep) for s in self.steps)

    def noise_steps(self) -> list[NoiseStep]:
        return [s for s in self.steps if isinstance(s, NoiseStep)]

    def angle_positions(self) -> list[int]:
        return [i for i, s in enumerate(self.steps) if isinstance(s, GateStep) and s.op.kind.has_angle]

    def with_angles(self, positions, angles) -> "Plan":
        """Same plan with the rotation angles at ``positions`` replaced."""
        steps = list(self.steps)
        for i, a in zip(positions, angles):
            op = steps[i].op
            steps[i] = GateStep(GateOp(op.kind, op.qubits, float(a)), steps[i].timestep)
        return Plan(self.n_qubits, tuple(steps), self.measured, self.x_basis)

    def structure(self) -> tuple:
        """Everything but the rotation angles."""
        return tuple(
            (s.op.kind, s.op.qubits, s.timestep) if isinstance(s, GateStep)
            else (id(s.channel), s.qubits, s.timestep) for s in self.steps
        ) + (self.measured, self.x_basis)


class PlanTemplate:
    """Plans of a parametric circuit whose compiled rotation angles are affine in x.

    Fitted from dim + 1 probe builds and checked against one more build at a
    random point; :meth:`fit` returns None when the circuit is not affine.
    """

    def __init__(self, base: Plan, positions: list[int], offset, matrix):
        self.base = base
        self.positions = positions
        self.offset = offset
        self.matrix = matrix

    @classmethod
    def fit(cls, build, dim: int, tol: float = 1e-9) -> "PlanTemplate | None":
        base = build(np.zeros(dim))
        positions = base.angle_positions()
        offset = np.array([base.steps[i].op.angle for i in positions])
        matrix = np.zeros((len(positions), dim))
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = 1.0
            probe = build(e)
            if probe.structure() != base.structure():
                return None
            matrix[:, j] = [probe.steps[i].op.angle for i in positions] - offset
        x = np.random.default_rng(12345).uniform(0, 2 * np.pi, dim)
        check = build(x)
        if check.structure() != base.structure():
            return None
        got = np.array([check.steps[i].op.angle for i in positions])
        if not np.allclose(got, offset + matrix @ x, rtol=0, atol=tol):
            return None
        return cls(base, positions, offset, matrix)

    def plan(self, x) -> Plan:
        return self.base.with_angles(self.positions, self.offset + self.matrix @ x)


def compile_circuit(circuit: Circuit, model: NoiseModel) -> Schedule:
    """Transpile to the model's basis and schedule it the way the model needs."""
    return schedule_asap(transpile(circuit, model.basis), respect_layers=model.layer_wise)


def build_plan(schedule: Schedule, model: NoiseModel) -> Plan:
    n = schedule.n_qubits
    if model.layer_wise and not schedule.layer_marks:
        raise ValueError("layer-wise noise needs a schedule built with declared layer boundaries")
    slabs: dict[int, int] = {}
    for mark in schedule.layer_marks if model.layer_wise else ():
        slabs[mark] = slabs.get(mark, 0) + 1

    steps: list[GateStep | NoiseStep] = []
    measured: set[int] = set()
    x_basis: list[int] = []

    def slab(position: int) -> None:
        for _ in range(slabs.get(position, 0)):
            for q in range(n):
                if q not in measured:
                    steps.append(NoiseStep(model.layer_channel, (q,), position, "layer"))

    for t, step in enumerate(schedule.timesteps):
        slab(t)
        for op in step:
            if op.kind.is_measurement:
                if op.kind is GateKind.MEASURE_X:
                    x_basis.append(op.qubits[0])
                continue
            steps.append(GateStep(op, t))
            for ch, qs in model.sites_for(op):
                if not ch.is_trivial:
                    steps.append(NoiseStep(ch, qs, t, "gate"))
        if model.idle_channel is not None and not model.idle_channel.is_trivial:
            for q in sorted(idle_qubits(schedule, t)):
                steps.append(NoiseStep(model.idle_channel, (q,), t, "idle"))
        measured.update(op.qubits[0] for op in step if op.kind.is_measurement)
    slab(len(schedule.timesteps))
    # a circuit without readout is read out in Z on every qubit
    measured_qubits = schedule.measured_qubits or tuple(range(n))
    return Plan(n, tuple(steps), measured_qubits, tuple(sorted(x_basis)))
