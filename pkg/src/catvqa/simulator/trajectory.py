"""
Pure-state simulation with stochastic error injection, one trajectory per shot.

A shot consumes exactly ``plan.n_slots + 1`` uniforms, one per noise step and
one for the readout. Shot k of a stream reads the k-th window of that width
from the stream's PCG64 sequence (reached with ``advance``), so the batched
sampler reproduces :func:`run_shot` shot for shot, independent of batch size
or worker count.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..circuit import GateKind, GateOp, Schedule
from ..noise import ErrorChannel, NoiseModel, select_branch
from . import kernels
from .plan import GateStep, Plan, build_plan

NORM_TOL = 1e-9


@dataclass(frozen=True)
class RngStream:
    """Seed plus a tuple key naming an independent random stream."""

    seed: int
    key: tuple[int, ...] = ()

    def child(self, *more: int) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(int(k) for k in more))

    def bit_generator(self) -> np.random.PCG64:
        return np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.key))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(self.bit_generator())

    def window(self, start: int, count: int, width: int) -> np.ndarray:
        """Uniforms of windows start..start+count-1, each ``width`` long."""
        bits = self.bit_generator()
        bits.advance(start * width)
        return np.random.Generator(bits).random((count, width))


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    n: int

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        return cls(kernels.zero_state(n).reshape(-1), n)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**self.n:
            raise ValueError(f"{amps.size} amplitudes do not describe {self.n} qubits")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def apply_gate(state: StateVector, op: GateOp) -> StateVector:
    if any(not 0 <= q < state.n for q in op.qubits):
        raise ValueError(f"{op} does not fit a {state.n}-qubit state")
    T = kernels.apply_op(state.amplitudes.reshape((2,) * state.n), op)
    out = StateVector(T.reshape(-1), state.n)
    if abs(out.norm - 1.0) > NORM_TOL and abs(state.norm - 1.0) <= NORM_TOL:
        raise FloatingPointError(f"norm drifted to {out.norm} after {op}")
    return out


@dataclass(frozen=True)
class ShotResult:
    bits: tuple[int, ...]
    trajectory_log: list[tuple[int, tuple[int, ...], str]] | None = field(default=None, compare=False)


@lru_cache(maxsize=64)
def _cached_plan(schedule: Schedule, model: NoiseModel) -> Plan:
    return build_plan(schedule, model)


def _readout_probabilities(T: np.ndarray, plan: Plan, offset: int) -> np.ndarray:
    for q in plan.x_basis:
        T = kernels.apply_kind(T, GateKind.H, (q,), offset=offset)
    probs = np.abs(T) ** 2
    return probs.reshape(probs.shape[:offset] + (-1,))


def _bits_of(index, plan: Plan) -> np.ndarray:
    n = plan.n_qubits
    shifts = np.array([n - 1 - q for q in plan.measured])
    return ((np.asarray(index)[..., None] >> shifts) & 1).astype(np.uint8)


def _draw(cumulative: np.ndarray, u):
    """Side-right bucket search, scaled by the total so rounding cannot overflow."""
    k = np.searchsorted(cumulative, u * cumulative[-1], side="right")
    return np.minimum(k, len(cumulative) - 1)


def run_shot(
    schedule: Schedule,
    noise: NoiseModel,
    p: float,
    rng: RngStream,
    record: bool = False,
    plan: Plan | None = None,
    shot: int = 0,
) -> ShotResult:
    """Simulate trajectory number ``shot`` of ``rng`` and sample its terminal measurements."""
    noise.check(p)
    plan = plan or _cached_plan(schedule, noise)
    n = plan.n_qubits
    u = rng.window(shot, 1, plan.n_slots + 1)[0]
    T = kernels.zero_state(n)
    log = [] if record else None
    slot = 0
    for step in plan.steps:
        if isinstance(step, GateStep):
            T = kernels.apply_op(T, step.op)
            continue
        ch = step.channel
        branch = ch.branches[int(select_branch(ch.cumulative(p), u[slot]))]
        slot += 1
        if branch.op.is_identity:
            continue
        for err in branch.op.gate_ops(step.qubits):
            T = kernels.apply_op(T, err)
        if log is not None:
            log.append((step.timestep, step.qubits, branch.op.label))
    probs = _readout_probabilities(T, plan, 0)
    norm = probs.sum()
    if abs(norm - 1.0) > NORM_TOL:
        raise FloatingPointError(f"trajectory norm drifted to {norm}")
    index = int(_draw(np.cumsum(probs), u[-1]))
    return ShotResult(tuple(int(b) for b in _bits_of(index, plan)), log)


def shot_uniforms(plan: Plan, stream: RngStream, shots: int, start: int = 0) -> np.ndarray:
    return stream.window(start, shots, plan.n_slots + 1)


def _apply_noise_batch(T: np.ndarray, ch: ErrorChannel, qubits, cumulative, u) -> np.ndarray:
    k = np.minimum(select_branch(cumulative, u), len(ch.branches) - 1)
    hits = np.nonzero(k)[0] if ch.branches[0].op.is_identity else np.arange(len(k))
    if hits.size == 0:
        return T
    branch_of = k[hits]
    for b in np.unique(branch_of):
        op = ch.branches[int(b)].op
        if op.is_identity:
            continue
        rows = hits[branch_of == b]
        sub = T[rows]
        for err in op.gate_ops(qubits):
            sub = kernels.apply_op(sub, err, offset=1)
        T[rows] = sub
    return T


def sample_shots(
    plan: Plan,
    p: float,
    stream: RngStream,
    shots: int,
    block: int = 4096,
) -> np.ndarray:
    """Measured bits for ``shots`` trajectories, shape (shots, len(plan.measured)).

    Shot k uses window k of ``stream``; blocks only bound memory.
    """
    out = np.empty((shots, len(plan.measured)), dtype=np.uint8)
    cums = {}
    for step in plan.noise_steps():
        if id(step.channel) not in cums:
            cums[id(step.channel)] = step.channel.cumulative(p)
    n = plan.n_qubits
    for start in range(0, shots, block):
        size = min(block, shots - start)
        U = shot_uniforms(plan, stream, size, start)
        T = kernels.zero_state(n, batch=size)
        slot = 0
        for step in plan.steps:
            if isinstance(step, GateStep):
                T = kernels.apply_op(T, step.op, offset=1)
            else:
                T = np.ascontiguousarray(T)
                T = _apply_noise_batch(T, step.channel, step.qubits, cums[id(step.channel)], U[:, slot])
                slot += 1
        probs = _readout_probabilities(T, plan, 1)
        cum = np.cumsum(probs, axis=1)
        target = U[:, -1] * cum[:, -1]
        index = np.minimum((cum <= target[:, None]).sum(axis=1), cum.shape[1] - 1)
        out[start : start + size] = _bits_of(index, plan)
    return out
