"""
Tensor kernels shared by the statevector, batched-trajectory and
density-matrix engines.

States are complex arrays whose qubit ``q`` lives on axis ``offset + q``.
A single statevector uses offset 0, a batch of trajectories offset 1, and a
density matrix applies each gate on the row axes (offset 0) and its complex
conjugate on the column axes (offset n).
"""
from __future__ import annotations

import math

import numpy as np

from ..circuit import GateKind, GateOp

_S = 1 / math.sqrt(2)


def _at(ndim: int, fixed: dict[int, int]) -> tuple:
    index = [slice(None)] * ndim
    for axis, value in fixed.items():
        index[axis] = slice(value, value + 1)
    return tuple(index)


def _mix(T: np.ndarray, axis: int, u00, u01, u10, u11) -> np.ndarray:
    lo, hi = _at(T.ndim, {axis: 0}), _at(T.ndim, {axis: 1})
    a0, a1 = T[lo], T[hi]
    out = np.empty_like(T)
    out[lo] = u00 * a0 + u01 * a1
    out[hi] = u10 * a0 + u11 * a1
    return out


def apply_kind(
    T: np.ndarray,
    kind: GateKind,
    qubits: tuple[int, ...],
    angle: float | None = None,
    offset: int = 0,
    conj: bool = False,
) -> np.ndarray:
    """Apply one gate's unitary (or its conjugate) to the qubit axes of ``T``.

    Never mutates ``T``; the result may be a view of it.
    """
    axes = [offset + q for q in qubits]
    if kind is GateKind.X:
        return np.flip(T, axes[0])
    if kind in (GateKind.H, GateKind.PREP_PLUS):
        return _mix(T, axes[0], _S, _S, _S, -_S)
    if kind is GateKind.RZ:
        half = -0.5j * angle if not conj else 0.5j * angle
        shape = [1] * T.ndim
        shape[axes[0]] = 2
        return T * np.array([np.exp(half), np.exp(-half)]).reshape(shape)
    if kind is GateKind.Z or kind is GateKind.CZ:
        out = T.copy()
        out[_at(T.ndim, {a: 1 for a in axes})] *= -1
        return out
    if kind is GateKind.CNOT or kind is GateKind.TOFFOLI:
        out = T.copy()
        sel = _at(T.ndim, {a: 1 for a in axes[:-1]})
        out[sel] = np.flip(T[sel], axes[-1])
        return out
    if kind is GateKind.RY:
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        return _mix(T, axes[0], c, -s, s, c)
    if kind is GateKind.IDENTITY or kind.is_measurement:
        return T
    raise ValueError(f"no kernel for {kind}")


def apply_op(T: np.ndarray, op: GateOp, offset: int = 0, conj: bool = False) -> np.ndarray:
    return apply_kind(T, op.kind, op.qubits, op.angle, offset, conj)


def gate_matrix(kind: GateKind, angle: float | None = None) -> np.ndarray:
    """Dense unitary on the gate's own qubits (first qubit most significant)."""
    k = kind.arity
    basis = np.eye(2**k, dtype=complex).reshape((2**k,) + (2,) * k)
    # column j of the matrix is the image of basis state j
    cols = apply_kind(basis, kind, tuple(range(k)), angle, offset=1)
    return cols.reshape(2**k, 2**k).T.copy()


def zero_state(n: int, batch: int | None = None) -> np.ndarray:
    shape = (2,) * n if batch is None else (batch,) + (2,) * n
    T = np.zeros(shape, dtype=complex)
    T[(slice(None),) * (batch is not None) + (0,) * n] = 1.0
    return T


def zero_density(n: int) -> np.ndarray:
    T = np.zeros((2,) * (2 * n), dtype=complex)
    T[(0,) * (2 * n)] = 1.0
    return T


def apply_op_density(T: np.ndarray, op: GateOp, n: int) -> np.ndarray:
    T = apply_op(T, op, offset=0)
    return apply_op(T, op, offset=n, conj=True)


def _broadcast_local(local: np.ndarray, axes: list[int], ndim: int) -> np.ndarray:
    """Place a tensor over ``axes`` (in that order) into a broadcastable shape."""
    order = np.argsort(axes)
    shape = [1] * ndim
    for a in axes:
        shape[a] = 2
    return np.ascontiguousarray(local.transpose(order)).reshape(shape)


def compile_channel_density(channel, qubits: tuple[int, ...], n: int, p: float) -> list:
    """Channel as a sum of masked flips: rho -> sum_f M_f * flip_f(rho).

    Each branch E = diag(d) X^f contributes q * (d d^T) to the mask of its
    flip pattern f, since E rho E^dagger = (d d^T) * (X^f rho X^f).
    """
    k = channel.arity
    groups: dict[tuple[int, ...], np.ndarray] = {}
    for branch, q in zip(channel.branches, channel.probabilities(p)):
        if q == 0.0:
            continue
        d = branch.op.diagonal_after_flips(k)
        term = q * np.multiply.outer(d, d)
        f = branch.op.flips()
        groups[f] = groups[f] + term if f in groups else term
    rows = [qubits[i] for i in range(k)]
    axes = rows + [n + q for q in rows]
    steps = []
    for f, mask in groups.items():
        flip_axes = tuple(qubits[i] for i in f) + tuple(n + qubits[i] for i in f)
        steps.append((flip_axes, _broadcast_local(mask, axes, 2 * n)))
    return steps


def apply_compiled_channel(T: np.ndarray, steps: list) -> np.ndarray:
    out = None
    for flip_axes, mask in steps:
        src = np.flip(T, flip_axes) if flip_axes else T
        term = src * mask
        out = term if out is None else out + term
    return T if out is None else out
