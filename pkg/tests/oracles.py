"""Independent dense-matrix references for the tests.

Nothing here reuses the package's kernels: gates are built from explicit
2x2 matrices with Kronecker products, channels from explicit Kraus sums.
"""
from __future__ import annotations

import itertools
from functools import reduce

import numpy as np

from catvqa.circuit import GateKind

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)


def rz(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def kron_all(mats):
    return reduce(np.kron, mats, np.eye(1, dtype=complex))


def on(n, placed: dict):
    """Tensor product with matrices at given qubits (qubit 0 most significant)."""
    return kron_all([placed.get(q, I2) for q in range(n)])


def single(kind, angle=None):
    return {
        GateKind.IDENTITY: I2,
        GateKind.X: X,
        GateKind.Z: Z,
        GateKind.H: H,
        GateKind.PREP_PLUS: H,
        GateKind.RZ: rz(angle) if angle is not None else None,
        GateKind.RY: ry(angle) if angle is not None else None,
    }[kind]


def op_unitary(op, n):
    q = op.qubits
    k = op.kind
    if k.is_measurement:
        return np.eye(2**n, dtype=complex)
    if k.arity == 1:
        return on(n, {q[0]: single(k, op.angle)})
    if k is GateKind.CNOT:
        return on(n, {q[0]: P0}) + on(n, {q[0]: P1, q[1]: X})
    if k is GateKind.CZ:
        return np.eye(2**n) - 2 * on(n, {q[0]: P1, q[1]: P1})
    if k is GateKind.TOFFOLI:
        both = on(n, {q[0]: P1, q[1]: P1})
        return np.eye(2**n) - both + on(n, {q[0]: P1, q[1]: P1, q[2]: X})
    raise ValueError(k)


def circuit_unitary(circuit):
    U = np.eye(2**circuit.n_qubits, dtype=complex)
    for op in circuit.ops:
        U = op_unitary(op, circuit.n_qubits) @ U
    return U


def zero_ket(n):
    v = np.zeros(2**n, dtype=complex)
    v[0] = 1
    return v


def statevector(circuit):
    return circuit_unitary(circuit) @ zero_ket(circuit.n_qubits)


def equal_up_to_phase(A, B, tol=1e-10):
    idx = np.unravel_index(np.argmax(np.abs(B)), B.shape)
    if abs(B[idx]) < tol:
        return np.allclose(A, B, atol=tol)
    phase = A[idx] / B[idx]
    return abs(abs(phase) - 1) < tol and np.allclose(A, phase * B, atol=tol)


def error_matrix(label: str, qubits, n):
    """Matrix of an error label such as 'Z0', 'X0Z0', 'CZ01Z2' on global qubits."""
    from catvqa.noise import ErrorOp

    M = np.eye(2**n, dtype=complex)
    for name, local in ErrorOp.parse(label).terms:
        g = [qubits[i] for i in local]
        if name == "X":
            E = on(n, {g[0]: X})
        elif name == "Z":
            E = on(n, {g[0]: Z})
        else:
            E = np.eye(2**n) - 2 * on(n, {g[0]: P1, g[1]: P1})
        M = E @ M
    return M


def apply_channel(rho, ch, qubits, n, p):
    out = np.zeros_like(rho)
    for label, q in ch.as_list(p):
        E = error_matrix(label, qubits, n)
        out += q * E @ rho @ E.conj().T
    return out


def noisy_density(schedule, model, p):
    """Kraus-sum evolution following the documented noise conventions.

    Post-gate errors, idle channel on every untouched and not yet measured
    qubit per timestep, layer slabs at the schedule's layer marks.
    """
    n = schedule.n_qubits
    rho = np.outer(zero_ket(n), zero_ket(n).conj())
    measured = set()
    slabs = list(schedule.layer_marks) if model.layer_wise else []

    def slab(pos, rho):
        for _ in range(slabs.count(pos)):
            for q in range(n):
                if q not in measured:
                    rho = apply_channel(rho, model.layer_channel, (q,), n, p)
        return rho

    for t, step in enumerate(schedule.timesteps):
        rho = slab(t, rho)
        touched = set()
        for op in step:
            touched.update(op.qubits)
            if op.kind.is_measurement:
                continue
            U = op_unitary(op, n)
            rho = U @ rho @ U.conj().T
            for ch, qs in model.sites_for(op):
                rho = apply_channel(rho, ch, qs, n, p)
        if model.idle_channel is not None:
            for q in range(n):
                if q not in touched and q not in measured:
                    rho = apply_channel(rho, model.idle_channel, (q,), n, p)
        measured.update(op.qubits[0] for op in step if op.kind.is_measurement)
    rho = slab(len(schedule.timesteps), rho)
    return rho


def readout_distribution(rho, n, measured, x_basis=()):
    for q in x_basis:
        U = on(n, {q: H})
        rho = U @ rho @ U.conj().T
    diag = np.real(np.diag(rho)).reshape((2,) * n)
    rest = tuple(q for q in range(n) if q not in measured)
    marg = diag.sum(axis=rest) if rest else diag
    return marg.reshape(-1)


def bits(n):
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=int)


def maxcut_bruteforce(n, edges):
    """Best cut size by enumeration."""
    best = 0
    for assign in itertools.product((0, 1), repeat=n):
        best = max(best, sum(assign[i] != assign[j] for i, j in edges))
    return best


def hc_matrix(n, edges):
    """Diagonal of H_C = 1 - (1/2 n_E) sum (1 - Z_i Z_j)."""
    b = bits(n)
    z = 1 - 2 * b
    total = sum(1 - z[:, i] * z[:, j] for i, j in edges)
    return 1 - total / (2 * len(edges))


def qaoa_state(n, edges, gammas, betas):
    """Dense |psi_L> with exp(-i gamma H_C) and exp(-i beta sum X)."""
    psi = np.full(2**n, 2 ** (-n / 2), dtype=complex)
    hc = hc_matrix(n, edges)
    for g, b in zip(gammas, betas):
        psi = np.exp(-1j * g * hc) * psi
        mixer = kron_all([np.cos(b) * I2 - 1j * np.sin(b) * X for _ in range(n)])
        psi = mixer @ psi
    return psi


def multinomial_agrees(counts, probs, confidence=0.9973):
    """Chi-square goodness of fit at the 3-sigma confidence level.

    Bins with zero expected probability must be empty; the rest are pooled
    into one chi-square statistic compared against its (1 - 0.27%) quantile.
    """
    from scipy.stats import chi2

    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    N = counts.sum()
    zero = probs < 1e-15
    if counts[zero].sum() > 0:
        return False, float("inf")
    live = ~zero
    if live.sum() <= 1:
        return True, 0.0
    expected = N * probs[live]
    stat = float(((counts[live] - expected) ** 2 / expected).sum())
    return stat <= chi2.ppf(confidence, live.sum() - 1), stat


def oracle_suite():
    """Ten small circuits covering every gate kind, both readout bases and partial readout."""
    from catvqa.circuit import Circuit, GateOp

    K = GateKind

    def g(kind, *qs, angle=None):
        return GateOp(kind, qs, angle)

    def circ(n, ops, marks=None):
        return Circuit(n, ops, marks if marks is not None else [0, len(ops)])

    return {
        "hadamard": circ(1, [g(K.H, 0), g(K.MEASURE_Z, 0)]),
        "z-on-plus": circ(1, [g(K.PREP_PLUS, 0), g(K.Z, 0), g(K.MEASURE_X, 0)], [1, 2]),
        "bell": circ(2, [g(K.H, 0), g(K.CNOT, 0, 1), g(K.MEASURE_Z, 0), g(K.MEASURE_Z, 1)], [0, 1, 2]),
        "ghz": circ(3, [g(K.H, 0), g(K.CNOT, 0, 1), g(K.CNOT, 1, 2)] + [g(K.MEASURE_Z, q) for q in range(3)]),
        "rotations": circ(
            2,
            [g(K.RY, 0, angle=0.7), g(K.RZ, 0, angle=1.1), g(K.H, 0), g(K.RY, 1, angle=-0.4), g(K.CZ, 0, 1),
             g(K.MEASURE_Z, 0), g(K.MEASURE_Z, 1)],
            [0, 3, 5],
        ),
        "toffoli": circ(3, [g(K.H, 0), g(K.H, 1), g(K.TOFFOLI, 0, 1, 2)] + [g(K.MEASURE_Z, q) for q in range(3)]),
        "qaoa-like": circ(
            3,
            [g(K.PREP_PLUS, q) for q in range(3)]
            + [g(K.CNOT, 0, 1), g(K.RZ, 1, angle=0.8), g(K.CNOT, 0, 1), g(K.CNOT, 1, 2), g(K.RZ, 2, angle=0.8),
               g(K.CNOT, 1, 2)]
            + [x for q in range(3) for x in (g(K.H, q), g(K.RZ, q, angle=0.6), g(K.H, q))]
            + [g(K.MEASURE_Z, q) for q in range(3)],
            [3, 18],
        ),
        "swap-test": circ(
            3,
            [g(K.PREP_PLUS, 0), g(K.RY, 1, angle=1.2), g(K.H, 2), g(K.CNOT, 2, 1), g(K.TOFFOLI, 0, 1, 2),
             g(K.CNOT, 2, 1), g(K.MEASURE_X, 0)],
            [0, 3, 6],
        ),
        "idle-heavy": circ(
            3, [g(K.X, 2), g(K.H, 0), g(K.IDENTITY, 0), g(K.H, 0), g(K.H, 0), g(K.CNOT, 0, 1), g(K.MEASURE_Z, 1),
                g(K.MEASURE_Z, 2)],
            [0, 2, 6],
        ),
        "mixed-bases": circ(
            3, [g(K.PREP_PLUS, 0), g(K.PREP_PLUS, 1), g(K.CZ, 0, 1), g(K.RY, 2, angle=2.1), g(K.MEASURE_X, 0),
                g(K.MEASURE_Z, 1), g(K.MEASURE_X, 2)],
            [2, 4],
        ),
    }
