"""Shared plumbing: parameters -> circuit -> noisy shots -> scalar cost."""
from __future__ import annotations

import numpy as np

from ..circuit import Circuit, Schedule
from ..noise import NoiseModel
from ..simulator import DensityEngine, Plan, PlanTemplate, RngStream, build_plan, compile_circuit, resolve_backend, sample_counts


def shot_cost(
    circuit: Circuit,
    values: np.ndarray,
    noise: NoiseModel,
    p: float,
    shots: int | None,
    rng: RngStream | np.random.Generator | None,
    backend: str = "auto",
    engine: DensityEngine | None = None,
) -> float:
    """Average of ``values`` (indexed by measured bitstring) over noisy shots."""
    schedule = compile_circuit(circuit, noise)
    plan = build_plan(schedule, noise)
    if shots is None:
        probs = (engine or DensityEngine(noise, p)).readout(plan)
        return float(probs @ values)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    counts = sample_counts(plan, noise, p, shots, rng, backend, engine)
    return float(counts @ values) / shots


class Objective:
    """Callable cost over a flat parameter vector.

    Evaluation k draws its shots from ``stream.child(k)``, so a run is
    reproducible from the seed alone and two objectives with the same stream
    see the same random numbers at the same evaluation index.
    """

    values: np.ndarray

    def __init__(self, model: NoiseModel, p: float, shots: int | None, stream: RngStream, backend: str = "auto"):
        model.check(p)
        if shots is not None and shots < 1:
            raise ValueError("shots must be >= 1")
        self.model = model
        self.p = float(p)
        self.shots = shots
        self.stream = stream
        self.backend = backend
        self.n_evals = 0
        self._engine = DensityEngine(model, p)
        self._template: PlanTemplate | None | bool = False

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def circuit(self, x) -> Circuit:
        raise NotImplementedError

    def clamp(self, cost: float) -> float:
        return cost

    def schedule(self, x) -> Schedule:
        return compile_circuit(self.circuit(x), self.model)

    def depth(self, x=None) -> int:
        """Depth of the compiled circuit (independent of the angles)."""
        x = np.zeros(self.dim) if x is None else x
        return self.schedule(x).depth

    def _build_plan(self, x) -> Plan:
        return build_plan(self.schedule(x), self.model)

    def plan(self, x) -> Plan:
        """Compiled plan at x; the gate structure is fitted once and reused."""
        if self._template is False:
            self._template = PlanTemplate.fit(self._build_plan, self.dim)
        if self._template is None:
            return self._build_plan(x)
        return self._template.plan(np.asarray(x, dtype=float))

    def exact(self, x) -> float:
        """Noisy expectation with infinitely many shots."""
        plan = self.plan(x)
        return self.clamp(float(self._engine.readout(plan) @ self.values))

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} parameters, got shape {x.shape}")
        k = self.n_evals
        self.n_evals += 1
        if self.shots is None:
            return self.exact(x)
        plan = self.plan(x)
        backend = resolve_backend(self.backend, plan.n_qubits)
        rng = self.stream.child(k)
        counts = sample_counts(plan, self.model, self.p, self.shots, rng, backend, self._engine)
        return self.clamp(float(counts @ self.values) / self.shots)
