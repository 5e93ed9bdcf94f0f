import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from microkerr import dense
from microkerr.errors import UnknownMode
from microkerr.parity import (
    ParityClass,
    classify_phase,
    parity_measure,
    parity_phases,
    storage_hold_ratio,
)
from microkerr.polstate import basis_state, fidelity, from_amplitudes, from_dense, product_state, to_dense
from microkerr.readout import HomodyneModel, KerrChannel, ProbeState, cascaded_phase, differential_shift

MODES = ("u1", "u2", "d1", "d2")


def measure(state, ch, probe, model, rng, m1="u2", m2="d2", **kw):
    return parity_measure(state, m1, m2, ch, probe, model, rng, **kw)


class TestTruthTable:
    @pytest.mark.parametrize("bits, klass", [("HH", ParityClass.EVEN_HH), ("VV", ParityClass.EVEN_VV)])
    def test_even_inputs(self, bits, klass, channel, probe, ideal, rng):
        rec = measure(basis_state(["a", "b"], bits), channel, probe, ideal, rng, "a", "b")
        assert rec.outcome.klass == klass == rec.true_klass
        assert rec.outcome.probability == 1.0
        assert rec.outcome.probe_phase == parity_phases(channel)[klass]

    def test_odd_superposition_untouched(self, channel, probe, ideal, rng):
        s = from_amplitudes(["a", "b"], {"HV": 0.6, "VH": 0.8j})
        rec = measure(s, channel, probe, ideal, rng, "a", "b")
        assert rec.outcome.klass == ParityClass.ODD
        assert rec.outcome.probability == 1.0
        assert fidelity(rec.collapsed, s) >= 1 - 1e-12

    def test_phase_values(self, channel):
        th = parity_phases(channel)
        assert th[0] == 0.0
        assert th[1] == pytest.approx(differential_shift(1, channel), abs=1e-12)
        assert th[2] == pytest.approx(2 * differential_shift(1, channel), abs=1e-12)

    def test_odd_configurations_indistinguishable(self, channel):
        assert cascaded_phase(1, 0, channel) == cascaded_phase(0, 1, channel)


def test_concentration_collapse(channel, probe, ideal):
    x, y = 0.6, 0.8
    s = product_state([(x, y), (x, y)], [("u1", "u2"), ("d1", "d2")])
    rec = measure(s, channel, probe, ideal, np.random.default_rng(0))
    assert rec.class_probabilities[1] == pytest.approx(2 * (x * y) ** 2, abs=1e-15)
    assert rec.class_probabilities[0] == pytest.approx(y**4, abs=1e-15)
    assert rec.class_probabilities[2] == pytest.approx(x**4, abs=1e-15)

    # force the odd branch: uniforms just inside its cumulative window
    class U:
        def random(self):
            return y**4 + 1e-9

    rec = measure(s, channel, probe, ideal, U())
    assert rec.outcome.klass == ParityClass.ODD
    want = from_amplitudes(MODES, {"HHVV": 1, "VVHH": 1})
    assert fidelity(rec.collapsed, want) == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_class_probabilities_match_dense(seed):
    g = np.random.default_rng(seed)
    vec = dense.normalize(g.normal(size=16) + 1j * g.normal(size=16))
    s = from_dense(MODES, vec)
    ch = KerrChannel(chi=0.015, kappa2=0.1)
    rec = parity_measure(s, "u2", "d2", ch, ProbeState(40.0), HomodyneModel(), g)
    dv = to_dense(s)
    for count in range(3):
        mask = dense.h_count_mask(4, [1, 3], count)
        assert rec.class_probabilities[count] == pytest.approx(np.sum(np.abs(dv[mask]) ** 2), abs=1e-10)
    # the collapsed state is the dense projection onto the drawn class
    mask = dense.h_count_mask(4, [1, 3], int(rec.true_klass))
    proj = dense.normalize(np.where(mask, dv, 0))
    np.testing.assert_allclose(to_dense(rec.collapsed), proj, atol=1e-12)
    assert abs(sum(rec.class_probabilities) - 1) <= 1e-10


@pytest.mark.parametrize("bits", ["HHVV", "VVHH", "HVHV", "VHVH"])
def test_class_pure_inputs_are_invariant(bits, channel, probe, ideal, rng):
    s = from_amplitudes(MODES, {bits: 1, bits[::-1]: 1j}) if bits[1] != bits[3] else basis_state(MODES, bits)
    rec = measure(s, channel, probe, ideal, rng)
    assert fidelity(rec.collapsed, s) >= 1 - 1e-12


def test_repeatability(channel, probe, ideal):
    s = product_state([(0.6, 0.8), (0.6, 0.8)], [("u1", "u2"), ("d1", "d2")])
    g = np.random.default_rng(3)
    for _ in range(200):
        first = measure(s, channel, probe, ideal, g)
        second = measure(first.collapsed, channel, probe, ideal, g)
        assert second.outcome.klass == first.outcome.klass
        assert second.outcome.probability == 1.0


class TestClassifyPhase:
    def test_exact(self, channel):
        th = parity_phases(channel)
        assert classify_phase(th[1], channel) == ParityClass.ODD
        assert classify_phase(th[0], channel) == ParityClass.EVEN_VV

    def test_perturbed(self, channel):
        th = parity_phases(channel)
        assert classify_phase(th[2] + 1e-6, channel) == ParityClass.EVEN_HH
        assert classify_phase(th[2] - 1e-6, channel) == ParityClass.EVEN_HH


def test_gaussian_mode_at_operating_point_reads_true_class(channel, probe, gaussian):
    s = product_state([(0.6, 0.8), (0.6, 0.8)], [("u1", "u2"), ("d1", "d2")])
    g = np.random.default_rng(5)
    for _ in range(500):
        rec = measure(s, channel, probe, gaussian, g)
        assert not rec.misread
        assert 0 <= rec.homodyne_error < 1e-10


def test_weak_probe_misreads(channel, gaussian):
    s = product_state([(0.6, 0.8), (0.6, 0.8)], [("u1", "u2"), ("d1", "d2")])
    g = np.random.default_rng(5)
    recs = [measure(s, channel, ProbeState(1.0), gaussian, g) for _ in range(500)]
    assert any(r.misread for r in recs)
    # physics follows the true branch regardless of the readout
    for r in recs:
        assert r.collapsed.amplitudes.keys() <= {"HHHH", "HHVV", "VVHH", "VVVV"}


def test_mismatched_arms_split_odd_class(channel, probe, ideal, rng):
    other = KerrChannel(chi=channel.chi * 1.5, kappa2=channel.kappa2)
    s = from_amplitudes(["a", "b"], {"HV": 1, "VH": 1})
    rec = parity_measure(s, "a", "b", channel, probe, ideal, rng, ch2=other)
    assert rec.outcome.klass == ParityClass.ODD
    assert rec.outcome.probability == pytest.approx(0.5)
    assert len(rec.collapsed) == 1


def test_bad_modes(channel, probe, ideal, rng):
    s = basis_state(["a", "b"], "HH")
    with pytest.raises(ValueError):
        parity_measure(s, "a", "a", channel, probe, ideal, rng)
    with pytest.raises(UnknownMode):
        parity_measure(s, "a", "z", channel, probe, ideal, rng)


def test_storage_hold_ratio(channel):
    assert storage_hold_ratio(100.0, channel) == pytest.approx(100.0 / 20000.0)
    assert math.isfinite(storage_hold_ratio(0.0, channel))
