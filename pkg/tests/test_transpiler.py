import math

import numpy as np
import pytest

import oracles
from catvqa.circuit import Circuit, GateKind, GateOp
from catvqa.transpiler import (
    BasisSet,
    decompose_cz,
    decompose_ry,
    decompose_toffoli,
    default_basis,
    gate_census,
    transpile,
)
from test_circuit import random_circuit

K = GateKind


def unitary_of(ops, n):
    return oracles.circuit_unitary(Circuit(n, ops))


@pytest.mark.parametrize("theta", [0.0, 0.3, -1.7, math.pi, 2.9])
def test_ry_decomposition(theta):
    got = unitary_of(decompose_ry(0, theta), 1)
    assert oracles.equal_up_to_phase(got, oracles.ry(theta))


def test_cz_decomposition():
    want = unitary_of([GateOp(K.CZ, (0, 1))], 2)
    assert oracles.equal_up_to_phase(unitary_of(decompose_cz(0, 1), 2), want)


@pytest.mark.parametrize("qubits", [(0, 1, 2), (2, 0, 1), (1, 2, 0)])
def test_toffoli_decomposition(qubits):
    want = unitary_of([GateOp(K.TOFFOLI, qubits)], 3)
    ops = decompose_toffoli(*qubits)
    assert oracles.equal_up_to_phase(unitary_of(ops, 3), want)
    census = gate_census(Circuit(3, ops))
    assert census[K.CNOT] == 6
    assert len(ops) == 15


def test_basis_requires_core():
    with pytest.raises(ValueError):
        BasisSet(frozenset({K.RZ, K.CNOT}), native_toffoli=False)
    with pytest.raises(ValueError):
        BasisSet(default_basis(True).allowed, native_toffoli=False)


@pytest.mark.parametrize("native", [True, False])
def test_output_in_basis(native):
    basis = default_basis(native_toffoli=native)
    c = random_circuit(np.random.default_rng(7), 4, 60)
    out = transpile(c, basis)
    assert all(op.kind in basis for op in out.ops)
    assert (K.TOFFOLI in {op.kind for op in out.ops}) == (native and K.TOFFOLI in {op.kind for op in c.ops})
    assert K.RY not in {op.kind for op in out.ops}


def test_without_cz_rewrites_cz():
    out = transpile(Circuit(2, [GateOp(K.CZ, (0, 1))]), default_basis(True, keep_cz=False))
    assert [op.kind for op in out.ops] == [K.H, K.CNOT, K.H]


def test_layer_marks_follow_rewrite():
    c = Circuit(3, [GateOp(K.RY, (0,), 0.2), GateOp(K.TOFFOLI, (0, 1, 2)), GateOp(K.H, (1,))], [0, 1, 2, 3])
    out = transpile(c, default_basis(native_toffoli=False))
    assert out.layer_marks == (0, 5, 20, 21)


def test_measurements_pass_through():
    c = Circuit(2, [GateOp(K.PREP_PLUS, (0,)), GateOp(K.MEASURE_X, (0,)), GateOp(K.MEASURE_Z, (1,))])
    assert transpile(c, default_basis(False)).ops == c.ops


def test_census_counts_and_depth():
    c = Circuit(3, [GateOp(K.H, (0,)), GateOp(K.CNOT, (0, 1)), GateOp(K.H, (2,))])
    census = gate_census(c)
    assert census[K.H] == 2 and census[K.CNOT] == 1 and census[K.TOFFOLI] == 0
    assert census.depth == 2
    assert census.as_dict()["H"] == 2
