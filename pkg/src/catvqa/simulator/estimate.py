"""Shot-based estimation of diagonal observables on the measured register."""
from __future__ import annotations

from typing import Callable, NamedTuple, Union

import numpy as np

from ..circuit import Schedule
from ..noise import NoiseModel
from .density import DensityEngine
from .plan import Plan, build_plan
from .trajectory import RngStream, sample_shots

# Registers up to this size are evaluated through the exact readout
# distribution when the backend is "auto".
AUTO_DENSITY_QUBITS = 8

Observable = Union[str, np.ndarray, Callable[[np.ndarray], np.ndarray]]


class Estimate(NamedTuple):
    mean: float
    stderr: float
    shots: int | None


def observable_values(observable: Observable, m: int) -> np.ndarray:
    """Observable as a value per measured bitstring index (2**m entries).

    Accepts a Z/I label over the measured qubits, a length-2**m vector, or a
    callable mapping an (k, m) bit array to k values.
    """
    if isinstance(observable, str):
        if len(observable) != m or set(observable) - {"I", "Z"}:
            raise ValueError(f"label {observable!r} must be {m} characters of I/Z")
        bits = all_bitstrings(m)
        mask = np.array([c == "Z" for c in observable])
        return np.where(bits[:, mask].sum(axis=1) % 2 == 1, -1.0, 1.0)
    if callable(observable):
        return np.asarray(observable(all_bitstrings(m)), dtype=float)
    values = np.asarray(observable, dtype=float)
    if values.shape != (2**m,):
        raise ValueError(f"observable vector must have {2**m} entries")
    return values


def all_bitstrings(m: int) -> np.ndarray:
    idx = np.arange(2**m)
    return ((idx[:, None] >> np.arange(m - 1, -1, -1)) & 1).astype(np.uint8)


def bits_to_index(bits: np.ndarray) -> np.ndarray:
    m = bits.shape[1]
    return bits.astype(np.int64) @ (1 << np.arange(m - 1, -1, -1))


def resolve_backend(backend: str, n_qubits: int) -> str:
    if backend == "auto":
        return "density" if n_qubits <= AUTO_DENSITY_QUBITS else "trajectory"
    if backend not in ("density", "trajectory"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def sample_counts(
    plan: Plan,
    model: NoiseModel,
    p: float,
    shots: int,
    rng: RngStream | np.random.Generator,
    backend: str = "trajectory",
    engine: DensityEngine | None = None,
) -> np.ndarray:
    """Histogram of measured bitstring indices over ``shots`` shots."""
    m = len(plan.measured)
    backend = resolve_backend(backend, plan.n_qubits)
    if backend == "trajectory":
        if not isinstance(rng, RngStream):
            raise TypeError("trajectory sampling needs an RngStream (one child stream per shot)")
        model.check(p)
        bits = sample_shots(plan, p, rng, shots)
        return np.bincount(bits_to_index(bits), minlength=2**m)
    engine = engine or DensityEngine(model, p)
    probs = engine.readout(plan)
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return gen.multinomial(shots, probs)


def estimate_from_counts(counts: np.ndarray, values: np.ndarray) -> Estimate:
    shots = int(counts.sum())
    mean = float(counts @ values) / shots
    if shots > 1:
        var = float(counts @ (values - mean) ** 2) / (shots - 1)
        stderr = float(np.sqrt(var / shots))
    else:
        stderr = float("nan")
    return Estimate(mean, stderr, shots)


def expectation(
    schedule: Schedule,
    noise: NoiseModel,
    p: float,
    observable: Observable,
    shots: int | None,
    rng: RngStream | np.random.Generator | None = None,
    backend: str = "trajectory",
) -> Estimate:
    """Mean of the observable over shots, with its standard error.

    ``shots=None`` returns the exact noisy expectation (density backend only).
    """
    plan = build_plan(schedule, noise)
    values = observable_values(observable, len(plan.measured))
    if shots is None:
        probs = DensityEngine(noise, p).readout(plan)
        return Estimate(float(probs @ values), 0.0, None)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if rng is None:
        raise ValueError("sampling needs an rng")
    counts = sample_counts(plan, noise, p, shots, rng, backend)
    return estimate_from_counts(counts, values)
