import numpy as np
import pytest

from filtered_rf import qmath
from filtered_rf.dynamics import (
    default_tau_grid,
    first_order_coherence,
    steady_state,
    two_time_correlator,
)
from filtered_rf.system import EmitterParams, SystemModel, build_liouvillian

from oracles import bloch_rk4, bloch_steady_excited


def emitter_liouvillian(gamma=1.0, rabi=0.5):
    model = SystemModel(EmitterParams(gamma=gamma, rabi=rabi))
    return model, build_liouvillian(model)


class TestSteadyState:
    def test_undriven_is_ground_state(self):
        _, L = emitter_liouvillian(rabi=0.0)
        ss = steady_state(L)
        assert np.allclose(ss.rho, np.diag([1.0, 0.0]), atol=1e-12)

    def test_bloch_values_at_half_gamma_drive(self):
        model, L = emitter_liouvillian(rabi=0.5)
        ss = steady_state(L)
        assert abs(ss.rho[1, 1].real - 1.0 / 6.0) < 1e-12
        coherence = abs(np.trace(model.sigma @ ss.rho)) ** 2
        assert abs(coherence - 1.0 / 9.0) < 1e-12

    def test_saturation_limit(self):
        _, L = emitter_liouvillian(rabi=500.0)
        assert abs(steady_state(L).rho[1, 1].real - 0.5) < 1e-4

    def test_population_matches_analytic_for_many_drives(self):
        for rabi in (0.1, 0.5, 1.0, 2.0, 4.0):
            _, L = emitter_liouvillian(rabi=rabi)
            got = steady_state(L).rho[1, 1].real
            assert abs(got - bloch_steady_excited(1.0, rabi)) < 1e-12

    def test_physicality(self):
        _, L = emitter_liouvillian(rabi=2.3)
        ss = steady_state(L)
        assert abs(np.trace(ss.rho) - 1.0) < 1e-14
        assert np.allclose(ss.rho, ss.rho.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(ss.rho).min() >= -1e-10
        assert ss.residual < 1e-10 * np.linalg.norm(L, 2)


class TestTwoTimeCorrelator:
    def test_zero_delay_is_steady_expectation(self):
        model, L = emitter_liouvillian(rabi=0.8)
        ident = model.identity()
        number = model.sigma.conj().T @ model.sigma
        got = two_time_correlator(L, ident, ident, number, [0.0])[0]
        assert abs(got - bloch_steady_excited(1.0, 0.8)) < 1e-12

    def test_matches_rk4_regression_oracle(self):
        # <sigma^dag sigma (tau) | jump at 0>: evolve sigma rho sigma^dag.
        model, L = emitter_liouvillian(rabi=2.0)
        sigma = model.sigma
        number = sigma.conj().T @ sigma
        taus = np.linspace(0.0, 6.0, 13)
        got = two_time_correlator(L, sigma, sigma.conj().T, number, taus)

        rho_ss = steady_state(L).rho
        x0 = sigma @ rho_ss @ sigma.conj().T
        expected = bloch_rk4(x0, 1.0, 2.0, taus, step=1e-4)[:, 1, 1]
        assert np.max(np.abs(got - expected)) < 1e-8

    def test_trace_preservation_under_evolution(self):
        _, L = emitter_liouvillian(rabi=1.3)
        rng = np.random.default_rng(20)
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        prop = qmath.Propagator(L)
        for t in (0.0, 0.7, 4.0):
            evolved = qmath.unvec(prop.apply(qmath.vec(x), t))
            assert abs(np.trace(evolved) - np.trace(x)) < 1e-9

    def test_hermiticity_preserved(self):
        _, L = emitter_liouvillian(rabi=1.3)
        rng = np.random.default_rng(21)
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        prop = qmath.Propagator(L)
        a = qmath.unvec(prop.apply(qmath.vec(x.conj().T), 0.9))
        b = qmath.unvec(prop.apply(qmath.vec(x), 0.9)).conj().T
        assert np.allclose(a, b, atol=1e-10)

    def test_rejects_descending_taus(self):
        _, L = emitter_liouvillian()
        with pytest.raises(ValueError):
            two_time_correlator(L, np.eye(2), np.eye(2), np.eye(2), [1.0, 0.5])


class TestFirstOrderCoherence:
    def test_zero_delay_is_population(self):
        em = EmitterParams(gamma=1.0, rabi=0.5)
        g1 = first_order_coherence(em, [0.0])
        assert abs(g1[0] - 1.0 / 6.0) < 1e-12

    def test_long_time_factorization(self):
        em = EmitterParams(gamma=1.0, rabi=0.5)
        g1 = first_order_coherence(em, [50.0])
        assert abs(g1[0] - 1.0 / 9.0) < 1e-6

    def test_sideband_structure_at_strong_drive(self):
        # The Liouvillian eigenvalues carry the sideband splitting
        # sqrt(rabi^2 - (gamma/4)^2); at rabi = 5 gamma the FT of g1 shows
        # them as resolved peaks (at 2 gamma the dispersive parts reduce
        # them to shoulders).
        em = EmitterParams(gamma=1.0, rabi=5.0)
        _, L = emitter_liouvillian(rabi=5.0)
        splitting = np.sqrt(25.0 - 1.0 / 16.0)
        imag_parts = np.sort(np.linalg.eigvals(L).imag)
        assert abs(imag_parts[0] + splitting) < 1e-10
        assert abs(imag_parts[-1] - splitting) < 1e-10

        taus = np.linspace(0.0, 60.0, 12000)
        g1 = first_order_coherence(em, taus)
        fluct = g1 - g1[-1]
        omegas = np.linspace(-8.0, 8.0, 3201)
        kernel = np.exp(1j * np.outer(omegas, taus))
        spec = (kernel @ fluct).real * (taus[1] - taus[0]) / np.pi
        for sign in (-1, 1):
            window = (sign * omegas > 2.0) & (np.abs(omegas) < 8.0)
            peak = omegas[window][np.argmax(spec[window])]
            assert abs(abs(peak) - splitting) < 0.1


def test_default_tau_grid_spans():
    em = EmitterParams(gamma=2.0, rabi=1.0)
    taus = default_tau_grid(em)
    assert taus[0] == 0.0 and taus.size == 2001
    assert np.isclose(taus[-1], max(10.0, 10 * 2 * np.pi))
    taus = default_tau_grid(em, filter_widths=(0.05,))
    assert np.isclose(taus[-1], 400.0)
