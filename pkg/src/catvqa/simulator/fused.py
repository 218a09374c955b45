"""
Density evolution with superoperator fusion.

Every plan step (gate or error channel) becomes a superoperator on the few
qubits it touches. Steps on disjoint qubits commute, so consecutive steps are
merged into small pending blocks of at most two qubits (three for a Toffoli)
and a block is only contracted into the density tensor when a later step
straddles it. Pair-grouped index order is used throughout: the superoperator
of a k-qubit block acts on the index (r1, c1, r2, c2, ...).

The merge schedule depends only on the plan structure, so
:class:`FusedProgram` records it once and folds everything that does not
depend on a rotation angle. Re-running it with new angles only redoes the
work downstream of each rotation.
"""
from __future__ import annotations

import numpy as np

from ..circuit import GateKind, GateOp
from . import kernels
from .plan import GateStep, Plan

MAX_MERGE = 2

_ID4 = np.eye(4, dtype=complex)


def ops_matrix(ops, k: int) -> np.ndarray:
    """Dense matrix of a product of gates on local qubits 0..k-1 (first op acts first)."""
    basis = np.eye(2**k, dtype=complex).reshape((2**k,) + (2,) * k)
    for op in ops:
        basis = kernels.apply_op(basis, op, offset=1)
    return basis.reshape(2**k, 2**k).T.copy()


def liouville(U: np.ndarray) -> np.ndarray:
    """rho -> U rho U^dagger in pair-grouped order."""
    k = int(np.log2(U.shape[0]))
    S = np.kron(U, U.conj()).reshape((2,) * (4 * k))
    perm = [a for i in range(k) for a in (i, k + i)]
    perm = perm + [2 * k + a for a in perm]
    return S.transpose(perm).reshape(4**k, 4**k)


def embed(S: np.ndarray, positions, k: int) -> np.ndarray:
    """Superoperator on ``positions`` of a k-qubit block, identity elsewhere."""
    m = len(positions)
    if m == k and list(positions) == list(range(k)):
        return S
    order = list(positions) + [i for i in range(k) if i not in positions]
    full = np.kron(S, np.eye(4 ** (k - m), dtype=complex)).reshape((4,) * (2 * k))
    inv = list(np.argsort(order))
    return full.transpose(inv + [k + i for i in inv]).reshape(4**k, 4**k)


def channel_superop(channel, p: float) -> np.ndarray:
    k = channel.arity
    total = np.zeros((4**k, 4**k), dtype=complex)
    for branch, q in zip(channel.branches, channel.probabilities(p)):
        if q:
            total += q * liouville(ops_matrix(branch.op.gate_ops(range(k)), k))
    return total


def _rz_superop(theta: float) -> np.ndarray:
    return np.diag([1.0, np.exp(-1j * theta), np.exp(1j * theta), 1.0])


class FusedEvolution:
    """One pass over a plan; caches constant gate and channel superoperators."""

    def __init__(self, p: float, cache: dict):
        self.p = p
        self.cache = cache

    def gate_superop(self, op: GateOp) -> np.ndarray:
        if op.kind is GateKind.RZ:
            return _rz_superop(op.angle)
        if op.kind is GateKind.RY:
            return liouville(kernels.gate_matrix(GateKind.RY, op.angle))
        key = ("gate", op.kind)
        S = self.cache.get(key)
        if S is None:
            S = self.cache[key] = liouville(kernels.gate_matrix(op.kind))
        return S

    def noise_superop(self, channel) -> np.ndarray:
        key = ("noise", id(channel))
        S = self.cache.get(key)
        if S is None:
            S = self.cache[key] = channel_superop(channel, self.p)
        return S

    def run(self, plan: Plan, noisy: bool = True) -> np.ndarray:
        n = plan.n_qubits
        T = kernels.zero_density(n)
        blocks: dict[int, tuple[tuple[int, ...], np.ndarray]] = {}  # qubit -> shared block
        for step in plan.steps:
            if isinstance(step, GateStep):
                kind = step.op.kind
                if kind is GateKind.IDENTITY:
                    continue
                qubits, S = step.op.qubits, self.gate_superop(step.op)
            else:
                if not noisy:
                    continue
                qubits, S = step.qubits, self.noise_superop(step.channel)
            T = self._push(T, blocks, qubits, S, n)
        for block in {id(b): b for b in blocks.values()}.values():
            T = _contract(T, block, n)
        return T

    def _push(self, T, blocks, qubits, S, n):
        hit = list({id(b): b for q in qubits if (b := blocks.get(q)) is not None}.values())
        union = [q for b in hit for q in b[0]]
        union += [q for q in qubits if q not in union]
        if len(union) <= max(MAX_MERGE, len(qubits)) or (len(hit) == 1 and len(union) == len(hit[0][0])):
            if hit:
                M = hit[0][1]
                for b in hit[1:]:
                    M = _kron(M, b[1])
                covered = sum(len(b[0]) for b in hit)
                for _ in range(len(union) - covered):
                    M = _kron(M, _ID4)
                M = _compose(S, [union.index(q) for q in qubits], M, len(union))
            else:
                M = S
            block = (tuple(union), M)
        else:
            for b in hit:
                T = _contract(T, b, n)
                for q in b[0]:
                    del blocks[q]
            block = (tuple(qubits), S)
        for q in block[0]:
            blocks[q] = block
        return T


_PARAM, _KRON, _COMPOSE, _CONTRACT = range(4)


class FusedProgram:
    """The fused pass over one plan structure, compiled with constant folding.

    Values are either constant arrays, folded at compile time, or register
    numbers filled in by :meth:`run`. Only rotation gates start registers.
    """

    def __init__(self, plan: Plan, evolution: FusedEvolution, noisy: bool = True):
        self.n = n = plan.n_qubits
        self.evolution = evolution
        self.code: list[tuple] = []
        self.n_regs = 0
        self.T0: np.ndarray | None = None
        self._T = kernels.zero_density(n)
        self._defs: dict[int, int] = {}  # register -> defining instruction
        blocks: dict[int, list] = {}  # qubit -> shared [qubits, value]
        for i, step in enumerate(plan.steps):
            if isinstance(step, GateStep):
                kind = step.op.kind
                if kind is GateKind.IDENTITY:
                    continue
                if kind.has_angle:
                    S = self._emit(_PARAM, i)
                else:
                    S = evolution.gate_superop(step.op)
                qubits = step.op.qubits
            else:
                if not noisy:
                    continue
                qubits, S = step.qubits, evolution.noise_superop(step.channel)
            self._push(blocks, qubits, S)
        for block in {id(b): b for b in blocks.values()}.values():
            self._contract(block)
        if self.T0 is None:
            self.T0 = self._T
        del self._T, self._defs

    def _emit(self, opcode, *args) -> int:
        r = self.n_regs
        self.n_regs += 1
        self._defs[r] = len(self.code)
        self.code.append((opcode, r) + args)
        return r

    def _kron(self, A, B):
        if isinstance(A, np.ndarray) and isinstance(B, np.ndarray):
            return _kron(A, B)
        return self._emit(_KRON, A, B)

    def _compose(self, S, positions, M, k):
        if isinstance(S, np.ndarray) and isinstance(M, np.ndarray):
            return _compose(S, positions, M, k)
        if isinstance(S, np.ndarray):
            # every value feeds exactly one later step, so a constant that
            # follows a constant-times-register product can join the constant
            i = self._defs.get(M)
            prev = self.code[i] if i is not None else None
            if prev is not None and prev[0] == _COMPOSE and prev[5] == k and isinstance(prev[2], np.ndarray):
                merged = embed(S, positions, k) @ embed(prev[2], prev[3], k)
                self.code[i] = (_COMPOSE, M, merged, list(range(k)), prev[4], k)
                return M
        return self._emit(_COMPOSE, S, positions, M, k)

    def _contract(self, block) -> None:
        qubits, value = block
        if self.T0 is None and isinstance(value, np.ndarray):
            self._T = _contract(self._T, (qubits, value), self.n)
            return
        if self.T0 is None:
            self.T0 = self._T
        self.code.append((_CONTRACT, value) + _contraction_layout(qubits, self.n))

    def _push(self, blocks, qubits, S) -> None:
        hit = list({id(b): b for q in qubits if (b := blocks.get(q)) is not None}.values())
        union = [q for b in hit for q in b[0]]
        union += [q for q in qubits if q not in union]
        if len(union) <= max(MAX_MERGE, len(qubits)) or (len(hit) == 1 and len(union) == len(hit[0][0])):
            if hit:
                M = hit[0][1]
                for b in hit[1:]:
                    M = self._kron(M, b[1])
                covered = sum(len(b[0]) for b in hit)
                for _ in range(len(union) - covered):
                    M = self._kron(M, _ID4)
                M = self._compose(S, [union.index(q) for q in qubits], M, len(union))
            else:
                M = S
            block = [tuple(union), M]
        else:
            for b in hit:
                self._contract(b)
                for q in b[0]:
                    del blocks[q]
            block = [tuple(qubits), S]
        for q in block[0]:
            blocks[q] = block

    def run(self, plan: Plan) -> np.ndarray:
        """Density tensor for ``plan``, which must share the compiled structure."""
        steps = plan.steps
        regs: list = [None] * self.n_regs

        def get(v):
            return v if isinstance(v, np.ndarray) else regs[v]

        T = self.T0
        for ins in self.code:
            opcode = ins[0]
            if opcode == _COMPOSE:
                regs[ins[1]] = _compose(get(ins[2]), ins[3], get(ins[4]), ins[5])
            elif opcode == _PARAM:
                regs[ins[1]] = self.evolution.gate_superop(steps[ins[2]].op)
            elif opcode == _KRON:
                regs[ins[1]] = _kron(get(ins[2]), get(ins[3]))
            else:
                _, value, perm, inverse, d = ins
                shape = T.shape
                flat = T.transpose(perm).reshape(d, -1)
                T = (get(value) @ flat).reshape(shape).transpose(inverse)
        return T


def _kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    a, b = A.shape[0], B.shape[0]
    return np.multiply.outer(A, B).transpose(0, 2, 1, 3).reshape(a * b, a * b)


def _compose(S: np.ndarray, positions: list[int], M: np.ndarray, k: int) -> np.ndarray:
    """embed(S, positions, k) @ M, with fast paths for the common shapes."""
    m = len(positions)
    if m == k and positions == list(range(k)):
        return S @ M
    if m == 1:
        d = 4**k
        left = 4 ** positions[0]
        out = np.matmul(S, M.reshape(left, 4, -1))
        return out.reshape(d, d)
    if m == 2 and k == 2:  # positions == [1, 0]
        return S.reshape(4, 4, 4, 4).transpose(1, 0, 3, 2).reshape(16, 16) @ M
    return embed(S, positions, k) @ M


def _contraction_layout(qubits, n: int):
    """Axis order that puts a block's pair-grouped indices first, and its inverse."""
    axes = [a for q in qubits for a in (q, n + q)]
    perm = axes + [a for a in range(2 * n) if a not in axes]
    return tuple(perm), tuple(np.argsort(perm)), 4 ** len(qubits)


def _contract(T: np.ndarray, block, n: int) -> np.ndarray:
    qubits, S = block
    k = len(qubits)
    axes = [a for q in qubits for a in (q, n + q)]
    St = S.reshape((2,) * (4 * k))
    out = np.tensordot(St, T, axes=(list(range(2 * k, 4 * k)), axes))
    return np.moveaxis(out, list(range(2 * k)), axes)
