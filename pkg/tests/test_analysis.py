import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasewalk import analysis
from phasewalk.analysis import (
    DegenerateMeanWarning,
    FitDomainError,
    PhaseDistribution,
    circular_mean,
    circular_std,
    classical_rw_distribution,
    fit_power_law,
    local_maxima,
    phase_distribution,
    reduce_walker,
    state_phase_distribution,
    total_variation,
    wrap,
)
from phasewalk.ideal_walk import IdealWalkConfig, run_ideal
from phasewalk.quantum_core import coherent_state, fock_state, phase_basis, product_state

from conftest import random_state

UNIFORM_SPREAD = 1.814242132302386  # sqrt(mean wrapped theta^2) on a 64-point grid about 0


class TestReduceWalker:
    def test_product_state_is_pure(self):
        psi = fock_state(2, 5, np.array([0.6, 0.8j]))
        rho = reduce_walker(psi)
        expected = np.zeros((5, 5))
        expected[2, 2] = 1
        assert np.allclose(rho, expected)

    def test_entangled_state_is_mixed(self):
        amps = np.zeros(8, dtype=complex)
        amps[0 * 2 + 0] = amps[1 * 2 + 1] = 1 / math.sqrt(2)
        from phasewalk.quantum_core import StateVector

        rho = reduce_walker(StateVector(amps, 4))
        assert np.allclose(rho, np.diag([0.5, 0.5, 0, 0]))

    def test_trace_and_hermiticity(self):
        rho = reduce_walker(random_state(np.random.default_rng(3), 9))
        assert np.trace(rho) == pytest.approx(1.0)
        assert np.allclose(rho, rho.conj().T)


class TestPhaseDistribution:
    def test_phase_state_is_delta(self):
        s = 10
        walker = phase_basis(s)[:, 3]
        rho = np.outer(walker, walker.conj())
        p = phase_distribution(rho).probs
        assert p[3] == pytest.approx(1.0)
        assert np.sum(np.delete(p, 3)) < 1e-14

    def test_vacuum_uniform(self):
        p = state_phase_distribution(fock_state(0, 16, np.array([1, 0]))).probs
        assert np.allclose(p, 1 / 16)

    def test_coherent_state_double_sum(self):
        psi = coherent_state(1.5, 16, np.array([1, 0]))
        c = psi.as_grid()[:, 0]
        s = 16
        expected = []
        for j in range(s):
            th = 2 * math.pi * j / s
            total = 0j
            for n in range(16):
                for m in range(16):
                    total += c[n] * np.conj(c[m]) * np.exp(-1j * (n - m) * th)
            expected.append(total.real / s)
        got = state_phase_distribution(psi).probs
        assert np.max(np.abs(got - expected)) < 1e-13

    def test_state_path_matches_rho_path(self):
        psi = random_state(np.random.default_rng(7), 20)
        a = state_phase_distribution(psi).probs
        b = phase_distribution(reduce_walker(psi)).probs
        assert np.max(np.abs(a - b)) < 1e-13

    def test_full_grid_normalized(self):
        psi = random_state(np.random.default_rng(8), 15)
        assert state_phase_distribution(psi).probs.sum() == pytest.approx(1.0, abs=1e-12)

    def test_other_grid_needs_renormalize(self):
        psi = random_state(np.random.default_rng(9), 15)
        with pytest.raises(ValueError, match="renormalize"):
            state_phase_distribution(psi, 30)
        assert state_phase_distribution(psi, 30, True).probs.sum() == pytest.approx(1.0)

    def test_negative_probability_rejected(self):
        with pytest.raises(ValueError):
            PhaseDistribution(np.array([1.1, -0.1]), 2)

    def test_shape_checked(self):
        with pytest.raises(ValueError):
            PhaseDistribution(np.ones(3) / 3, 4)


class TestCircular:
    def test_wrap_range(self):
        assert wrap(math.pi) == pytest.approx(math.pi)
        assert wrap(-math.pi) == pytest.approx(math.pi)
        assert wrap(3 * math.pi / 2) == pytest.approx(-math.pi / 2)

    def test_delta_has_zero_spread(self):
        p = np.zeros(32)
        p[5] = 1
        assert circular_std(PhaseDistribution(p, 32)) == pytest.approx(0.0, abs=1e-12)

    def test_two_symmetric_peaks(self):
        s = 64
        p = np.zeros(s)
        p[6] = p[-6] = 0.5
        d = PhaseDistribution(p, s)
        assert circular_mean(d)[0] == pytest.approx(0.0, abs=1e-12)
        assert circular_std(d) == pytest.approx(6 * 2 * math.pi / s)

    def test_uniform_warns_and_uses_zero(self):
        d = PhaseDistribution(np.ones(64) / 64, 64)
        with pytest.warns(DegenerateMeanWarning):
            sig = circular_std(d)
        assert sig == pytest.approx(UNIFORM_SPREAD, abs=1e-12)

    def test_explicit_center_skips_warning(self):
        d = PhaseDistribution(np.ones(64) / 64, 64)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            circular_std(d, 0.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), shift=st.integers(-40, 40))
def test_spread_rotation_invariant(seed, shift):
    rng = np.random.default_rng(seed)
    p = rng.random(32) ** 4
    d = PhaseDistribution(p / p.sum(), 32)
    _, resultant = circular_mean(d)
    if resultant < 1e-6:
        return
    assert circular_std(d.rolled(shift)) == pytest.approx(circular_std(d), abs=1e-10)


class TestFit:
    def test_linear(self):
        fit = fit_power_law([(t, float(t)) for t in range(1, 8)])
        assert fit.zeta == pytest.approx(1.0, abs=1e-12)
        assert fit.xi == pytest.approx(0.0, abs=1e-12)

    def test_sqrt(self):
        fit = fit_power_law([(t, 2 * math.sqrt(t)) for t in range(1, 8)])
        assert fit.zeta == pytest.approx(0.5, abs=1e-12)
        assert fit.xi == pytest.approx(math.log(2), abs=1e-12)

    def test_window_and_stride(self):
        pts = [(t, t**0.7) for t in range(0, 26)]
        fit = fit_power_law(pts, (2, 10, 2))
        assert fit.window == (2, 4, 6, 8, 10)
        assert fit.zeta == pytest.approx(0.7, abs=1e-12)

    def test_too_few_points(self):
        with pytest.raises(FitDomainError):
            fit_power_law([(1, 1.0), (2, 2.0)])

    def test_nonpositive_sigma(self):
        with pytest.raises(FitDomainError):
            fit_power_law([(1, 1.0), (2, 0.0), (3, 3.0)])

    def test_zero_time_rejected(self):
        with pytest.raises(FitDomainError):
            fit_power_law([(0, 1.0), (2, 2.0), (3, 3.0)])

    def test_as_dict(self):
        d = fit_power_law([(t, float(t)) for t in range(1, 5)]).as_dict()
        assert set(d) == {"zeta", "xi", "window", "residual_rms"}


@settings(max_examples=50, deadline=None)
@given(zeta=st.floats(-2, 2), xi=st.floats(-3, 3))
def test_fit_recovers_planted_law(zeta, xi):
    pts = [(t, math.exp(xi) * t**zeta) for t in range(1, 12)]
    fit = fit_power_law(pts)
    assert fit.zeta == pytest.approx(zeta, abs=1e-10)
    assert fit.xi == pytest.approx(xi, abs=1e-10)


class TestClassical:
    def test_zero_steps(self):
        p = classical_rw_distribution(0, 0.3, 64).probs
        assert p[0] == 1

    def test_one_step(self):
        d = classical_rw_distribution(1, 2 * math.pi / 64 * 3, 64)
        assert d.probs[3] == pytest.approx(0.5)
        assert d.probs[-3] == pytest.approx(0.5)

    def test_normalized(self):
        for k in (1, 7, 25):
            assert classical_rw_distribution(k, 0.3, 64).probs.sum() == pytest.approx(1.0)

    def test_halfway_split(self):
        d = classical_rw_distribution(1, 0.5 * 2 * math.pi / 8, 8)
        assert d.probs[0] == pytest.approx(0.5)
        assert d.probs[1] == pytest.approx(0.25)
        assert d.probs[7] == pytest.approx(0.25)

    def test_diffusive_exponent(self):
        sig = [circular_std(classical_rw_distribution(k, 0.3, 64), 0.0) for k in range(26)]
        fit = fit_power_law(list(enumerate(sig)), (4, 10))
        assert fit.zeta == pytest.approx(0.5, abs=0.02)

    def test_negative_steps(self):
        with pytest.raises(ValueError):
            classical_rw_distribution(-1, 0.3, 8)


class TestSpreading:
    def test_frame_angles_undo_rotation(self):
        from phasewalk.quantum_core import rotate_walker

        states = run_ideal(IdealWalkConfig(steps=5, fock_dim=32))
        angles = [0.37 * k for k in range(6)]
        rotated = [rotate_walker(s, a) for s, a in zip(states, angles)]
        _, plain = analysis.spreading(states)
        _, undone = analysis.spreading(rotated, frame_angles=angles)
        assert np.allclose(plain, undone, atol=1e-12)

    def test_initial_spread_small(self, ideal_states):
        _, sig = analysis.spreading(ideal_states[:1])
        assert 0 < sig[0] < 0.2

    def test_wraparound_peak(self, ideal_states):
        # sigma keeps growing after the lobes reach +-pi/2 and turns over after they meet
        _, sig = analysis.spreading(ideal_states)
        assert 12 <= int(np.argmax(sig)) <= 18


def test_local_maxima_circular():
    p = np.zeros(16)
    p[0], p[8], p[4] = 0.5, 0.4, 0.05
    p[15] = 0.05
    assert local_maxima(PhaseDistribution(p, 16)) == [0, 8]


def test_ideal_three_peaks_at_step_four(ideal_states):
    d = state_phase_distribution(ideal_states[4])
    assert sorted(local_maxima(d)) == [0, 6, 58]


def test_total_variation():
    a = PhaseDistribution(np.array([1.0, 0, 0, 0]), 4)
    b = PhaseDistribution(np.array([0, 1.0, 0, 0]), 4)
    assert total_variation(a, b) == 1.0
    assert total_variation(a, a) == 0.0


def test_product_state_helper_roundtrip():
    psi = product_state(fock_state(1, 4), np.array([0, 1]))
    assert np.allclose(reduce_walker(psi), np.diag([0, 1, 0, 0]))
