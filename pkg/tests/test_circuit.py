import itertools

import numpy as np
import pytest

from catvqa.circuit import Circuit, GateKind, GateOp, Schedule, dumps, idle_qubits, loads, schedule_asap
from catvqa.vqa import Graph, QaoaParams, build_qaoa_circuit

K = GateKind


def op(kind, *qubits, angle=None):
    return GateOp(kind, qubits, angle)


def random_circuit(rng, n, length, kinds=None):
    kinds = kinds or [K.H, K.X, K.Z, K.RZ, K.RY, K.CNOT, K.CZ, K.TOFFOLI, K.IDENTITY]
    ops = []
    for _ in range(length):
        kind = kinds[rng.integers(len(kinds))]
        if kind.arity > n:
            continue
        qs = tuple(int(q) for q in rng.choice(n, kind.arity, replace=False))
        angle = float(rng.uniform(-np.pi, np.pi)) if kind.has_angle else None
        ops.append(GateOp(kind, qs, angle))
    return Circuit(n, ops)


class TestGateOp:
    @pytest.mark.parametrize("kind,qubits", [(K.H, (0, 1)), (K.CNOT, (0,)), (K.TOFFOLI, (0, 1))])
    def test_arity_checked(self, kind, qubits):
        with pytest.raises(ValueError):
            GateOp(kind, qubits)

    def test_repeated_qubit(self):
        with pytest.raises(ValueError):
            op(K.CNOT, 1, 1)

    @pytest.mark.parametrize("angle", [None, float("nan"), float("inf")])
    def test_rotation_needs_finite_angle(self, angle):
        with pytest.raises(ValueError):
            GateOp(K.RZ, (0,), angle)

    def test_fixed_gate_rejects_angle(self):
        with pytest.raises(ValueError):
            GateOp(K.H, (0,), 0.3)

    def test_labels_round_trip(self):
        for kind in GateKind:
            assert GateKind.from_label(kind.value) is kind
        with pytest.raises(ValueError):
            GateKind.from_label("SWAP")


class TestCircuit:
    def test_qubit_range(self):
        with pytest.raises(ValueError):
            Circuit(2, [op(K.H, 2)])

    def test_measurement_is_terminal(self):
        with pytest.raises(ValueError):
            Circuit(1, [op(K.MEASURE_Z, 0), op(K.H, 0)])

    def test_prep_plus_first(self):
        with pytest.raises(ValueError):
            Circuit(1, [op(K.H, 0), op(K.PREP_PLUS, 0)])

    def test_layer_marks_validated(self):
        with pytest.raises(ValueError):
            Circuit(1, [op(K.H, 0)], [2])
        with pytest.raises(ValueError):
            Circuit(1, [op(K.H, 0), op(K.H, 0)], [2, 1])

    def test_measured_qubits_sorted(self):
        c = Circuit(3, [op(K.MEASURE_Z, 2), op(K.MEASURE_X, 0)])
        assert c.measured_qubits == (0, 2)
        assert len(c.without_measurements()) == 0


class TestScheduleExamples:
    def test_disjoint_gates_share_a_step(self):
        s = schedule_asap(Circuit(2, [op(K.H, 0), op(K.H, 1), op(K.CNOT, 0, 1)]))
        assert s.timesteps == ((op(K.H, 0), op(K.H, 1)), (op(K.CNOT, 0, 1),))

    def test_same_qubit_serializes(self):
        s = schedule_asap(Circuit(1, [op(K.X, 0), op(K.Z, 0)]))
        assert s.timesteps == ((op(K.X, 0),), (op(K.Z, 0),))

    def test_empty(self):
        assert schedule_asap(Circuit(3)).depth == 0


def longest_path_depth(circuit):
    """Depth as the longest chain in the qubit-conflict dependency DAG."""
    ops = circuit.ops
    level = [1] * len(ops)
    for j in range(len(ops)):
        for i in range(j):
            if set(ops[i].qubits) & set(ops[j].qubits):
                level[j] = max(level[j], level[i] + 1)
    return max(level, default=0)


def test_qaoa_complete_graph_depth_matches_longest_path():
    graph = Graph(5, list(itertools.combinations(range(5), 2)))
    c = build_qaoa_circuit(graph, QaoaParams((0.4,), (0.9,)))
    assert schedule_asap(c).depth == longest_path_depth(c)


@pytest.mark.parametrize("seed", range(30))
def test_schedule_invariants_on_random_circuits(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    c = random_circuit(rng, n, int(rng.integers(0, 40)))
    s = schedule_asap(c)
    for step in s.timesteps:
        used = [q for o in step for q in o.qubits]
        assert len(used) == len(set(used))
    flat = s.ops()
    for q in range(n):
        assert [o for o in flat if q in o.qubits] == [o for o in c.ops if q in o.qubits]
    assert s.depth == longest_path_depth(c)
    again = schedule_asap(s.to_circuit())
    assert again.timesteps == s.timesteps


def test_layer_fences():
    c = Circuit(2, [op(K.H, 0), op(K.H, 0), op(K.H, 1)], layer_marks=[0, 2, 3])
    free = schedule_asap(c)
    fenced = schedule_asap(c, respect_layers=True)
    assert free.depth == 2 and free.layer_marks == ()
    # H q1 may not move above the fence at op 2
    assert fenced.depth == 3
    assert fenced.layer_marks == (0, 2, 3)
    assert fenced.to_circuit().layer_marks == (0, 2, 3)


class TestIdleQubits:
    def test_single_cnot(self):
        s = schedule_asap(Circuit(3, [op(K.CNOT, 0, 1)]))
        assert idle_qubits(s, 0) == {2}

    def test_full_cover(self):
        s = schedule_asap(Circuit(2, [op(K.CNOT, 0, 1)]))
        assert idle_qubits(s, 0) == frozenset()

    def test_measured_qubits_stop_idling(self):
        s = schedule_asap(Circuit(2, [op(K.MEASURE_Z, 0), op(K.H, 1), op(K.H, 1)]))
        assert idle_qubits(s, 0) == frozenset()
        assert idle_qubits(s, 1) == frozenset()

    def test_out_of_range(self):
        s = schedule_asap(Circuit(1, [op(K.H, 0)]))
        with pytest.raises(IndexError):
            idle_qubits(s, 1)

    def test_qaoa_layer_complement(self):
        graph = Graph(5, [(0, 1), (1, 2), (3, 4), (0, 4)])
        s = schedule_asap(build_qaoa_circuit(graph, QaoaParams((0.3,), (0.2,))))
        done = set()
        for t, step in enumerate(s.timesteps):
            touched = {q for o in step for q in o.qubits}
            assert idle_qubits(s, t) == set(range(5)) - touched - done
            done |= {o.qubits[0] for o in step if o.kind.is_measurement}


class TestSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(3)
        c = random_circuit(rng, 4, 30)
        c = Circuit(4, c.ops, [0, 10, 30])
        again = loads(dumps(c))
        assert again == c

    def test_format(self):
        text = dumps(Circuit(2, [op(K.RZ, 1, angle=0.5), op(K.CNOT, 0, 1)]))
        assert text.splitlines() == ["# qubits 2", "RZ 1 0.5", "CNOT 0 1"]

    @pytest.mark.parametrize("line", ["FOO 0", "CNOT 0", "RZ 0", "H 0 0.3"])
    def test_bad_lines(self, line):
        with pytest.raises(ValueError, match="line 1"):
            loads(line)


def test_schedule_is_a_value():
    s = Schedule(1, ((op(K.H, 0),),))
    assert s.depth == len(s) == 1
