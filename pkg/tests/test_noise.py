import math

import numpy as np
import pytest

from catvqa.circuit import GateKind, GateOp
from catvqa.experiments import default_p_grid
from catvqa.noise import (
    MODEL_TAGS,
    ErrorOp,
    agnostic_gate_based,
    agnostic_layer_wise,
    cat_model,
    channel,
    model_from_tag,
    nibp_bound,
    pauli_probabilities,
    sample_channel,
    theorem_noise_parameter,
)

K = GateKind


def probs_of(ch, p):
    return dict(ch.as_list(p))


class TestCatTable:
    p = 0.01

    def site(self, kind):
        (ch, _), = cat_model().sites_for(GateOp(kind, tuple(range(kind.arity))))
        return probs_of(ch, self.p)

    def test_hadamard_exact(self):
        assert self.site(K.H) == pytest.approx({"I": 0.95, "Z0": 0.03, "X0": 0.02}, abs=1e-15)

    @pytest.mark.parametrize("kind", [K.IDENTITY, K.PREP_PLUS, K.RZ, K.X, K.Z])
    def test_phase_flip_gates(self, kind):
        ops = GateOp(kind, (0,), 0.1 if kind.has_angle else None)
        (ch, qs), = cat_model().sites_for(ops)
        assert probs_of(ch, self.p) == pytest.approx({"I": 0.99, "Z0": 0.01})

    def test_cz(self):
        assert self.site(K.CZ) == pytest.approx({"I": 0.98, "Z0": 0.01, "Z1": 0.01})

    def test_cnot(self):
        assert self.site(K.CNOT) == pytest.approx({"I": 0.96, "Z0": 0.03, "Z1": 0.005, "Z0Z1": 0.005})

    def test_toffoli(self):
        want = {"I": 0.94, "Z0": 0.01, "Z1": 0.01, "Z2": 0.005, "CZ01": 0.03, "CZ01Z2": 0.005}
        assert self.site(K.TOFFOLI) == pytest.approx(want)

    def test_only_hadamard_flips_bits(self):
        for ch in cat_model().channels():
            for b in ch.branches:
                if ch.name != "cat-H":
                    assert b.op.flips() == ()

    def test_p_max(self):
        assert cat_model().p_max == pytest.approx(1 / 6)

    def test_idle_is_phase_flip(self):
        assert probs_of(cat_model().idle_channel, 0.2) == pytest.approx({"I": 0.8, "Z0": 0.2})


def test_xz_coins():
    for model in (agnostic_gate_based(), agnostic_layer_wise()):
        ch = model.layer_channel or model.idle_channel
        got = probs_of(ch, 0.1)
        assert got == pytest.approx({"I": 0.81, "X0": 0.09, "Z0": 0.09, "X0Z0": 0.01})


def test_gate_based_touches_every_qubit():
    model = agnostic_gate_based()
    assert [qs for _, qs in model.sites_for(GateOp(K.TOFFOLI, (2, 0, 1)))] == [(2,), (0,), (1,)]
    with pytest.raises(ValueError, match="transpile"):
        agnostic_gate_based(False).sites_for(GateOp(K.TOFFOLI, (0, 1, 2)))


def test_layer_wise_gates_are_clean():
    model = agnostic_layer_wise()
    assert model.sites_for(GateOp(K.CNOT, (0, 1))) == []
    assert model.idle_channel is None and model.layer_wise


@pytest.mark.parametrize("tag", MODEL_TAGS)
def test_soundness_on_grid(tag):
    model = model_from_tag(tag)
    for p in [*default_p_grid(), model.p_max]:
        if p > model.p_max:
            continue
        for ch in model.channels():
            q = ch.probabilities(p)
            assert (q >= 0).all()
            assert abs(q.sum() - 1) < 1e-12


def test_out_of_range_p():
    with pytest.raises(ValueError):
        cat_model().check(0.2)
    with pytest.raises(ValueError):
        cat_model().check(-1e-3)
    with pytest.raises(ValueError):
        model_from_tag("bogus")


def test_unnormalized_channel_rejected():
    with pytest.raises(ValueError, match="normalized"):
        channel(1, {"I": (1, -1, 0), "Z0": (0, 2, 0)})


@pytest.mark.parametrize("label", ["I", "Z0", "X1Z1", "CZ01Z2", "X0Z0"])
def test_error_label_round_trip(label):
    assert ErrorOp.parse(label).label == label


def test_bad_labels():
    with pytest.raises(ValueError):
        ErrorOp.parse("Y0")
    with pytest.raises(ValueError):
        ErrorOp.parse("CZ0")


def test_sampling_frequencies():
    ch = cat_model().sites_for(GateOp(K.H, (0,)))[0][0]
    rng = np.random.default_rng(0)
    draws = [sample_channel(ch, 0.1, rng).label for _ in range(20000)]
    for label, q in ch.as_list(0.1):
        freq = draws.count(label) / len(draws)
        assert abs(freq - q) < 4 * math.sqrt(q * (1 - q) / len(draws))


def test_pauli_rates_and_theorem_parameter():
    coins = agnostic_gate_based().idle_channel
    qx, qy, qz = pauli_probabilities(coins, 0.1)
    assert (qx, qy, qz) == pytest.approx((0.09, 0.01, 0.09))
    assert theorem_noise_parameter(qx, qy, qz) == pytest.approx(0.3)


def test_nibp_bound():
    assert nibp_bound(4, 2, 0.1, A=3.0) == pytest.approx(3 * 2 * 1e-3)
    assert nibp_bound(5, 3, 0.01) < nibp_bound(5, 1, 0.01)
    with pytest.raises(ValueError):
        nibp_bound(0, 1, 0.1)
