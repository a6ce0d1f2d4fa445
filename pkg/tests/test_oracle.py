"""Quadrature reference vs the closed-form emission and CF routes."""

import math

import numpy as np
import pytest

from felight.electron import (ElectronPulse, IELSStage, ModulationSpectrum,
                              coherence_factor, coherence_factor_closed_drift,
                              iels_modulate)
from felight.emission import NoFilter, WindowFilter, emit_no_filter, emit_single_window
from felight.errors import ResolutionError
from felight.fock import expectation, trace_distance, validate_state
from felight.oracle import QuadratureSpec, cf_quadrature, rho_direct, spec_for


def iels_pulse(beta, drift=0.0, sigma_t=2.0, delta_t=1.5):
    return ElectronPulse(spectrum=iels_modulate(IELSStage(beta, drift=drift)),
                         sigma_t=sigma_t, delta_t=delta_t)


class TestCfQuadrature:
    def test_order_zero_is_unit_trace(self):
        pulse = iels_pulse(1.0, sigma_t=2.0, delta_t=6.0)
        spec = spec_for([pulse], max_frequency=40)
        assert abs(cf_quadrature(pulse, 0, spec) - 1.0) < 1e-8

    def test_matches_analytic_cf_formula(self):
        pulse = iels_pulse(2.0, drift=0.25, sigma_t=2.0, delta_t=1.0)
        spec = spec_for([pulse], max_frequency=70)
        for m in (0, 1, 2):
            ref = coherence_factor(pulse, m)
            assert abs(cf_quadrature(pulse, m, spec) - ref) < 1e-8

    def test_matches_closed_form_in_long_coherence_regime(self):
        pulse = iels_pulse(2.0, drift=0.25, sigma_t=2.0, delta_t=6.0)
        spec = spec_for([pulse], max_frequency=70)
        closed = coherence_factor_closed_drift(2.0, 0.25, 1)
        assert abs(cf_quadrature(pulse, 1, spec) - closed) < 1e-8

    def test_short_coherence_needs_the_finite_sigma_form(self):
        pulse = iels_pulse(1.2, drift=0.2, sigma_t=0.5, delta_t=0.0)
        spec = spec_for([pulse], max_frequency=60)
        val = cf_quadrature(pulse, 1, spec)
        assert abs(val - coherence_factor(pulse, 1)) < 1e-8
        lattice = pulse.spectrum.lattice_cf(1)
        assert abs(val - lattice) > 1e-3

    def test_resolution_check_triggers_on_coarse_grid(self):
        # at 16 points per cycle the sampling aliases the strong lattice
        # beats of a |beta| = 6 pulse back onto the probed order
        pulse = iels_pulse(6.0, drift=0.1, sigma_t=2.0, delta_t=0.0)
        with pytest.raises(ResolutionError):
            cf_quadrature(pulse, 1, QuadratureSpec(z_extent=16.0,
                                                   points_per_cycle=16))


class TestRhoDirect:
    def test_single_unmodulated_matches_no_filter(self):
        pulse = ElectronPulse(ModulationSpectrum.unmodulated(), sigma_t=2.0,
                              delta_t=2.0)
        n_max = 28
        spec = spec_for([pulse], max_frequency=n_max + 10)
        ref = emit_no_filter([pulse], 1.0, n_max=n_max)
        direct = rho_direct([pulse], 1.0, 0j, [NoFilter()], spec, n_max)
        validate_state(direct)
        assert trace_distance(direct, ref) < 1e-6

    def test_classical_limit_composes_displacements(self):
        # a wide flat comb mimics a point-like electron density at the cycle
        # origin: the emitted light approaches |alpha0 + beta0>
        K = 40
        amps = np.ones(2 * K + 1, dtype=complex) / math.sqrt(2 * K + 1)
        pulse = ElectronPulse(ModulationSpectrum(-K, amps), sigma_t=40.0)
        beta0, alpha0 = 0.6, 0.5 + 0.3j
        n_max = 24
        spec = QuadratureSpec(z_extent=40.0 * 8, points_per_cycle=2 * (n_max + K) + 24)
        state = rho_direct([pulse], beta0, alpha0, [NoFilter()], spec, n_max)
        A = abs(alpha0 + beta0)
        mean = expectation(state, "n").real
        field = expectation(state, "a")
        assert abs(mean - A ** 2) < 0.05
        assert abs(field - (alpha0 + beta0)) < 0.03

    def test_two_unmodulated_electrons_intensity(self):
        # jitter large enough that the residual mutual coherence term
        # 2 b0^2 |M_1|^2 sits below the tolerance
        pulse = ElectronPulse(ModulationSpectrum.unmodulated(), sigma_t=1.5,
                              delta_t=4.0)
        n_max = 26
        spec = spec_for([pulse, pulse], max_frequency=n_max + 10)
        state = rho_direct([pulse, pulse], 0.7, 0j, [NoFilter()] * 2, spec, n_max)
        validate_state(state)
        assert abs(expectation(state, "n").real - 2 * 0.49) < 1e-6

    def test_window_filter_matches_closed_form(self):
        pulse = iels_pulse(1.0, drift=0.0, sigma_t=2.0, delta_t=1.5)
        n_max = 26
        w = WindowFilter(s=0, delta_d=1.3)
        spec = spec_for([pulse], max_frequency=n_max + 30 + 4)
        direct = rho_direct([pulse], 1.0, 0j, [w], spec, n_max)
        ref = emit_single_window(pulse, 1.0, w, n_max=n_max)
        assert trace_distance(direct, ref.state) < 1e-6

    def test_rejects_filtered_two_electron_case(self):
        pulse = iels_pulse(0.5)
        spec = spec_for([pulse, pulse], max_frequency=30)
        with pytest.raises(NotImplementedError):
            rho_direct([pulse, pulse], 0.5, 0j,
                       [WindowFilter(0, 1.0), NoFilter()], spec, 10)

    def test_extent_guard(self):
        pulse = iels_pulse(0.5, sigma_t=5.0, delta_t=5.0)
        with pytest.raises(ValueError, match="cover"):
            rho_direct([pulse], 0.5, 0j, [NoFilter()],
                       QuadratureSpec(z_extent=20.0, points_per_cycle=64), 10)
