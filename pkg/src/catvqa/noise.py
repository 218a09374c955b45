"""
Stochastic error channels and the three noise models being compared.

Every channel is a categorical distribution over error operations whose
branch probabilities are polynomials (degree <= 2) in the common noise level
``p``. Coefficients are exact fractions, so normalization is checked
symbolically rather than numerically.

Error operations are applied after the ideal gate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Mapping, Sequence

import numpy as np

from .circuit import GateKind, GateOp
from .transpiler import BasisSet, default_basis

Coeffs = tuple[Fraction, Fraction, Fraction]

_ERROR_TERMS = {"X": 1, "Z": 1, "CZ": 2}


@dataclass(frozen=True)
class ErrorOp:
    """Product of elementary errors on the local qubits of a decorated gate.

    ``terms`` holds ``(name, local_qubits)`` pairs with name in X, Z, CZ.
    The empty product is the no-error branch. Term order only changes the
    global phase, which is never observable here.
    """

    terms: tuple[tuple[str, tuple[int, ...]], ...] = ()

    def __post_init__(self):
        terms = tuple((name, tuple(qs)) for name, qs in self.terms)
        for name, qs in terms:
            if _ERROR_TERMS.get(name) != len(qs):
                raise ValueError(f"bad error term {name}{qs}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def parse(cls, label: str) -> "ErrorOp":
        """``"I"``, ``"Z0"``, ``"X1Z1"``, ``"CZ01Z2"`` (digits are local qubits)."""
        if label == "I":
            return cls()
        terms = []
        i = 0
        while i < len(label):
            name = "CZ" if label.startswith("CZ", i) else label[i]
            i += len(name)
            width = _ERROR_TERMS.get(name)
            if width is None:
                raise ValueError(f"cannot parse error label {label!r}")
            terms.append((name, tuple(int(c) for c in label[i : i + width])))
            i += width
        return cls(tuple(terms))

    @property
    def is_identity(self) -> bool:
        return not self.terms

    @property
    def label(self) -> str:
        if not self.terms:
            return "I"
        return "".join(name + "".join(map(str, qs)) for name, qs in self.terms)

    def flips(self) -> tuple[int, ...]:
        """Local qubits whose computational-basis value the error toggles."""
        odd: set[int] = set()
        for name, qs in self.terms:
            if name == "X":
                odd ^= {qs[0]}
        return tuple(sorted(odd))

    def gate_ops(self, qubits: Sequence[int]) -> list[GateOp]:
        kinds = {"X": GateKind.X, "Z": GateKind.Z, "CZ": GateKind.CZ}
        return [GateOp(kinds[name], tuple(qubits[q] for q in qs)) for name, qs in self.terms]

    def diagonal_after_flips(self, arity: int) -> np.ndarray:
        """Signs d such that the error equals diag(d) . X^flips up to global phase.

        Returned with shape ``(2,) * arity`` on the local qubits.
        """
        bits = np.indices((2,) * arity).reshape(arity, -1)
        sign = np.ones(bits.shape[1])
        flipped = bits.copy()
        # terms act in order; each Z/CZ sign depends on the bits at that point
        for name, qs in self.terms:
            if name == "X":
                flipped[qs[0]] ^= 1
            elif name == "Z":
                sign = sign * np.where(flipped[qs[0]] == 1, -1.0, 1.0)
            else:
                sign = sign * np.where((flipped[qs[0]] & flipped[qs[1]]) == 1, -1.0, 1.0)
        # re-index the signs by the output basis state
        out = np.empty_like(sign)
        flat_out = np.ravel_multi_index(tuple(flipped), (2,) * arity)
        out[flat_out] = sign
        return out.reshape((2,) * arity)


def _coeffs(c0=0, c1=0, c2=0) -> Coeffs:
    return (Fraction(c0), Fraction(c1), Fraction(c2))


@dataclass(frozen=True)
class Branch:
    op: ErrorOp
    coeffs: Coeffs

    def probability(self, p: float) -> float:
        c0, c1, c2 = self.coeffs
        return float(c0) + float(c1) * p + float(c2) * p * p


@dataclass(frozen=True, eq=False)
class ErrorChannel:
    """Categorical error distribution on ``arity`` local qubits."""

    arity: int
    branches: tuple[Branch, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        total = [sum(b.coeffs[k] for b in self.branches) for k in range(3)]
        if total != [1, 0, 0]:
            raise ValueError(f"channel {self.name!r} is not normalized for all p: {total}")
        for b in self.branches:
            for _, qs in b.op.terms:
                if any(not 0 <= q < self.arity for q in qs):
                    raise ValueError(f"branch {b.op.label} leaves the {self.arity} channel qubits")

    def __eq__(self, other):
        if not isinstance(other, ErrorChannel):
            return NotImplemented
        return (self.arity, self.branches) == (other.arity, other.branches)

    def __hash__(self):
        return id(self)

    def __len__(self) -> int:
        return len(self.branches)

    def __repr__(self) -> str:
        inner = ", ".join(f"{b.op.label}:{_poly_str(b.coeffs)}" for b in self.branches)
        return f"ErrorChannel({self.name or self.arity}, {{{inner}}})"

    @property
    def is_trivial(self) -> bool:
        return all(b.op.is_identity for b in self.branches)

    @cached_property
    def _float_coeffs(self) -> np.ndarray:
        return np.array([[float(c) for c in b.coeffs] for b in self.branches])

    @cached_property
    def p_max(self) -> float:
        """Largest p in [0, 1] keeping every branch probability nonnegative."""
        limit = Fraction(1)
        for b in self.branches:
            limit = min(limit, _first_negative_crossing(b.coeffs))
        return float(limit)

    def check(self, p: float) -> None:
        if not (0.0 <= p <= self.p_max * (1 + 1e-12)):
            raise ValueError(f"noise level p={p} outside [0, {self.p_max}] for channel {self.name!r}")

    def probabilities(self, p: float) -> np.ndarray:
        self.check(p)
        c = self._float_coeffs
        probs = c[:, 0] + c[:, 1] * p + c[:, 2] * p * p
        # exact zeros at p = p_max can come out as -1e-17
        return np.clip(probs, 0.0, None)

    def cumulative(self, p: float) -> np.ndarray:
        cum = np.cumsum(self.probabilities(p))
        cum[-1] = 1.0
        return cum

    def as_list(self, p: float) -> list[tuple[str, float]]:
        return [(b.op.label, float(q)) for b, q in zip(self.branches, self.probabilities(p))]


def _poly_str(c: Coeffs) -> str:
    parts = []
    for k, v in enumerate(c):
        if v:
            parts.append(f"{v}" + ("" if k == 0 else "p" if k == 1 else "p^2"))
    return "+".join(parts) or "0"


def _first_negative_crossing(c: Coeffs) -> Fraction:
    c0, c1, c2 = c
    if c0 < 0:
        return Fraction(0)
    if c2 == 0:
        if c1 < 0:
            return -c0 / c1
        return Fraction(1)
    disc = float(c1 * c1 - 4 * c2 * c0)
    if disc <= 0:
        return Fraction(1)
    roots = sorted(((-float(c1) - s * math.sqrt(disc)) / (2 * float(c2))) for s in (1, -1))
    for r in roots:
        if r > 0:
            after = float(c0) + float(c1) * (r + 1e-9) + float(c2) * (r + 1e-9) ** 2
            if after < 0:
                return Fraction(r).limit_denominator(10**12)
    return Fraction(1)


def channel(arity: int, spec: Mapping[str, Coeffs], name: str = "") -> ErrorChannel:
    return ErrorChannel(arity, tuple(Branch(ErrorOp.parse(k), v) for k, v in spec.items()), name)


def phase_flip_channel() -> ErrorChannel:
    return channel(1, {"I": _coeffs(1, -1), "Z0": _coeffs(0, 1)}, "phase-flip")


def xz_coin_channel() -> ErrorChannel:
    """Independent X coin and Z coin, each with probability p, on one qubit."""
    return channel(
        1,
        {
            "I": _coeffs(1, -2, 1),
            "X0": _coeffs(0, 1, -1),
            "Z0": _coeffs(0, 1, -1),
            "X0Z0": _coeffs(0, 0, 1),
        },
        "xz-coins",
    )


@dataclass(frozen=True)
class ChannelSite:
    """A channel attached to a subset of a gate's qubits (by position)."""

    channel: ErrorChannel
    positions: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class NoiseModel:
    name: str
    gate_sites: Mapping[GateKind, tuple[ChannelSite, ...]]
    idle_channel: ErrorChannel | None
    native_toffoli: bool
    layer_channel: ErrorChannel | None = None
    placement: str = "post-gate"
    noiseless_kinds: frozenset[GateKind] = field(
        default=frozenset({GateKind.MEASURE_Z, GateKind.MEASURE_X})
    )

    @property
    def layer_wise(self) -> bool:
        return self.layer_channel is not None

    @property
    def basis(self) -> BasisSet:
        return default_basis(native_toffoli=self.native_toffoli)

    def sites_for(self, op: GateOp) -> list[tuple[ErrorChannel, tuple[int, ...]]]:
        if op.kind in self.noiseless_kinds:
            return []
        try:
            sites = self.gate_sites[op.kind]
        except KeyError:
            raise ValueError(
                f"noise model {self.name!r} has no channel for {op.kind.value}; transpile first"
            ) from None
        return [(s.channel, tuple(op.qubits[i] for i in s.positions)) for s in sites]

    def channels(self) -> Iterator[ErrorChannel]:
        seen: set[int] = set()
        extra = [self.idle_channel, self.layer_channel]
        every = [s.channel for sites in self.gate_sites.values() for s in sites] + extra
        for ch in every:
            if ch is not None and id(ch) not in seen:
                seen.add(id(ch))
                yield ch

    @cached_property
    def p_max(self) -> float:
        return min((ch.p_max for ch in self.channels()), default=1.0)

    def check(self, p: float) -> None:
        if not (0.0 <= p <= self.p_max * (1 + 1e-12)):
            raise ValueError(f"noise level p={p} outside [0, {self.p_max:.6g}] for model {self.name!r}")


_ONE_QUBIT_GATES = (GateKind.IDENTITY, GateKind.PREP_PLUS, GateKind.RZ, GateKind.X, GateKind.Z, GateKind.H)


def cat_model() -> NoiseModel:
    """Bias-preserving cat-qubit gates; only the Hadamard introduces bit flips."""
    phase = phase_flip_channel()
    hadamard = channel(1, {"I": _coeffs(1, -5), "Z0": _coeffs(0, 3), "X0": _coeffs(0, 2)}, "cat-H")
    cz = channel(2, {"I": _coeffs(1, -2), "Z0": _coeffs(0, 1), "Z1": _coeffs(0, 1)}, "cat-CZ")
    half = Fraction(1, 2)
    cnot = channel(
        2,
        {"I": _coeffs(1, -4), "Z0": _coeffs(0, 3), "Z1": _coeffs(0, half), "Z0Z1": _coeffs(0, half)},
        "cat-CNOT",
    )
    toffoli = channel(
        3,
        {
            "I": _coeffs(1, -6),
            "Z0": _coeffs(0, 1),
            "Z1": _coeffs(0, 1),
            "Z2": _coeffs(0, half),
            "CZ01": _coeffs(0, 3),
            "CZ01Z2": _coeffs(0, half),
        },
        "cat-Toffoli",
    )
    sites = {kind: (ChannelSite(phase, (0,)),) for kind in _ONE_QUBIT_GATES}
    sites[GateKind.H] = (ChannelSite(hadamard, (0,)),)
    sites[GateKind.CZ] = (ChannelSite(cz, (0, 1)),)
    sites[GateKind.CNOT] = (ChannelSite(cnot, (0, 1)),)
    sites[GateKind.TOFFOLI] = (ChannelSite(toffoli, (0, 1, 2)),)
    return NoiseModel("cat", sites, idle_channel=phase, native_toffoli=True)


def agnostic_gate_based(native_toffoli: bool = True) -> NoiseModel:
    """Every qubit touched by a gate independently gets an X coin and a Z coin."""
    coins = xz_coin_channel()
    kinds = [*_ONE_QUBIT_GATES, GateKind.CZ, GateKind.CNOT]
    if native_toffoli:
        kinds.append(GateKind.TOFFOLI)
    sites = {kind: tuple(ChannelSite(coins, (i,)) for i in range(kind.arity)) for kind in kinds}
    name = "agnostic-gate" if native_toffoli else "agnostic-gate-no-toffoli"
    return NoiseModel(name, sites, idle_channel=coins, native_toffoli=native_toffoli)


def agnostic_layer_wise() -> NoiseModel:
    """X and Z coins on every qubit before the first layer and after each layer."""
    kinds = [*_ONE_QUBIT_GATES, GateKind.CZ, GateKind.CNOT, GateKind.TOFFOLI]
    return NoiseModel(
        "agnostic-layer",
        {kind: () for kind in kinds},
        idle_channel=None,
        native_toffoli=True,
        layer_channel=xz_coin_channel(),
    )


def noiseless() -> NoiseModel:
    kinds = [*_ONE_QUBIT_GATES, GateKind.CZ, GateKind.CNOT, GateKind.TOFFOLI, GateKind.RY]
    return NoiseModel("none", {kind: () for kind in kinds}, idle_channel=None, native_toffoli=True)


MODEL_TAGS = ("cat", "agnostic-gate", "agnostic-gate-no-toffoli", "agnostic-layer", "none")


def model_from_tag(tag: str) -> NoiseModel:
    factories = {
        "cat": cat_model,
        "agnostic-gate": lambda: agnostic_gate_based(True),
        "agnostic-gate-no-toffoli": lambda: agnostic_gate_based(False),
        "agnostic-layer": agnostic_layer_wise,
        "none": noiseless,
    }
    try:
        return factories[tag]()
    except KeyError:
        raise ValueError(f"unknown noise model {tag!r}; choose from {', '.join(MODEL_TAGS)}") from None


def select_branch(cumulative: np.ndarray, u: float | np.ndarray):
    """Index of the branch whose cumulative bucket contains ``u``."""
    return np.searchsorted(cumulative, u, side="right")


def sample_channel(ch: ErrorChannel, p: float, rng: np.random.Generator) -> ErrorOp:
    """Draw one error operation using a single uniform variate."""
    k = int(select_branch(ch.cumulative(p), rng.random()))
    return ch.branches[min(k, len(ch.branches) - 1)].op


def theorem_noise_parameter(q_x: float, q_y: float, q_z: float) -> float:
    """Square root of the largest single-Pauli probability of a local channel."""
    return math.sqrt(max(q_x, q_y, q_z))


def pauli_probabilities(ch: ErrorChannel, p: float) -> tuple[float, float, float]:
    """(q_X, q_Y, q_Z) of a single-qubit channel at level p; XZ counts as Y."""
    if ch.arity != 1:
        raise ValueError("only single-qubit channels have per-qubit Pauli rates")
    q = {"X0": 0.0, "X0Z0": 0.0, "Z0": 0.0}
    for b, prob in zip(ch.branches, ch.probabilities(p)):
        if b.op.label in q:
            q[b.op.label] += prob
    return q["X0"], q["X0Z0"], q["Z0"]


def nibp_bound(n: int, layers: int, p: float, A: float = 1.0) -> float:
    """Gradient upper bound A * sqrt(n) * p**(L+1) for an L-layer noisy ansatz."""
    if n <= 0 or layers < 0 or p <= 0 or A <= 0:
        raise ValueError("nibp_bound needs positive n, p, A and nonnegative L")
    return A * math.sqrt(n) * p ** (layers + 1)
