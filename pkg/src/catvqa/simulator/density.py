"""
Exact density-matrix evolution of a noisy schedule.

Used both as the test oracle for the trajectory sampler and as the fast path
for cost evaluation on small registers: the readout distribution it returns
is exactly the distribution a single trajectory shot is drawn from.
"""
from __future__ import annotations

import numpy as np

from ..circuit import GateKind, GateOp, Schedule
from ..noise import NoiseModel
from . import kernels
from .fused import FusedEvolution, FusedProgram
from .plan import GateStep, Plan, build_plan

DEFAULT_QUBIT_CAP = 6


class DensityEngine:
    """Evolves plans at a fixed noise level, caching compiled channel masks."""

    def __init__(self, model: NoiseModel, p: float, fused: bool = True):
        model.check(p)
        self.model = model
        self.p = float(p)
        self.fused = fused
        self._masks: dict[tuple, list] = {}
        self._superops: dict = {}
        self._programs: dict[tuple, FusedProgram] = {}

    def _channel(self, ch, qubits, n):
        key = (id(ch), qubits, n)
        steps = self._masks.get(key)
        if steps is None:
            steps = kernels.compile_channel_density(ch, qubits, n, self.p)
            self._masks[key] = steps
        return steps

    def evolve(self, plan: Plan) -> np.ndarray:
        """Final density tensor with shape ``(2,) * 2n`` (before readout)."""
        if self.fused:
            key = plan.structure()
            program = self._programs.get(key)
            if program is None:
                evolution = FusedEvolution(self.p, self._superops)
                program = self._programs[key] = FusedProgram(plan, evolution, noisy=self.p > 0.0)
            return program.run(plan)
        n = plan.n_qubits
        T = kernels.zero_density(n)
        noisy = self.p > 0.0
        for step in plan.steps:
            if isinstance(step, GateStep):
                T = kernels.apply_op_density(T, step.op, n)
            elif noisy:
                T = kernels.apply_compiled_channel(T, self._channel(step.channel, step.qubits, n))
        return T

    def readout(self, plan: Plan) -> np.ndarray:
        """Exact distribution over measured bitstrings (measured qubits ascending)."""
        n = plan.n_qubits
        T = self.evolve(plan)
        for q in plan.x_basis:
            T = kernels.apply_op_density(T, _hadamard(q), n)
        diag = np.real(T.reshape(2**n, 2**n).diagonal()).reshape((2,) * n)
        rest = tuple(q for q in range(n) if q not in plan.measured)
        marginal = diag.sum(axis=rest) if rest else diag
        probs = np.clip(marginal.reshape(-1), 0.0, None)
        return probs / probs.sum()


def _hadamard(q: int) -> GateOp:
    return GateOp(GateKind.H, (q,))


def density_oracle(
    schedule: Schedule, noise: NoiseModel, p: float, qubit_cap: int = DEFAULT_QUBIT_CAP
) -> np.ndarray:
    """Exact output density matrix (2^n x 2^n) of a noisy schedule."""
    if schedule.n_qubits > qubit_cap:
        raise ValueError(f"density oracle capped at {qubit_cap} qubits, got {schedule.n_qubits}")
    n = schedule.n_qubits
    T = DensityEngine(noise, p).evolve(build_plan(schedule, noise))
    rho = T.reshape(2**n, 2**n)
    trace = np.trace(rho).real
    if abs(trace - 1.0) > 1e-10:
        raise FloatingPointError(f"density matrix trace drifted to {trace}")
    return rho


def outcome_probabilities(schedule: Schedule, noise: NoiseModel, p: float, plan: Plan | None = None) -> np.ndarray:
    return DensityEngine(noise, p).readout(plan or build_plan(schedule, noise))
