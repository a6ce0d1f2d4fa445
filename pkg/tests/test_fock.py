"""Fock-space state algebra: amplitudes, moments, targets and Wigner grids."""

import math

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.special import factorial

from felight.errors import TruncationError
from felight.fock import (Cat, Custom, PhotonicState, SqueezedVacuum,
                          TriangularCat, WignerGrid, check_truncation,
                          coherent_amplitude, coherent_vector, default_n_max,
                          expectation, fidelity, purity, target_factory,
                          trace_distance, validate_state, wigner)


def coherent_state(beta0, n_max):
    return PhotonicState.pure(
        coherent_vector(beta0, n_max) / np.linalg.norm(coherent_vector(beta0, n_max)))


class TestCoherentAmplitude:
    def test_vacuum_overlap(self):
        assert coherent_amplitude(0, 0.0) == 1.0

    def test_one_photon_unit_amplitude(self):
        assert abs(coherent_amplitude(1, 1.0) - math.exp(-0.5)) < 1e-15

    @pytest.mark.parametrize("beta0", [0.3, 1.0, 2.5, 4.0])
    def test_poisson_normalization(self, beta0):
        n = np.arange(61)
        assert abs(np.sum(coherent_amplitude(n, beta0) ** 2) - 1.0) < 1e-12

    def test_stable_at_large_arguments(self):
        vals = coherent_amplitude(np.arange(301), 10.0)
        assert np.all(np.isfinite(vals))
        assert abs(np.sum(vals ** 2) - 1.0) < 1e-10


class TestStateValidation:
    def test_mixed_requires_hermitian(self):
        rho = np.array([[0.5, 0.3], [0.1, 0.5]], dtype=complex)
        with pytest.raises(ValueError, match="hermitian"):
            PhotonicState.mixed(rho)

    def test_mixed_requires_unit_trace(self):
        with pytest.raises(ValueError, match="trace"):
            PhotonicState.mixed(np.diag([0.7, 0.7]).astype(complex))

    def test_mixed_requires_psd(self):
        with pytest.raises(ValueError, match="negative eigenvalue"):
            PhotonicState.mixed(np.diag([1.5, -0.5]).astype(complex))

    def test_pure_requires_norm(self):
        with pytest.raises(ValueError, match="norm"):
            PhotonicState.pure(np.array([1.0, 0.5]))

    def test_truncation_guard(self):
        amps = np.zeros(11, dtype=complex)
        amps[-1] = 1.0
        state = PhotonicState.pure(amps)
        with pytest.raises(TruncationError):
            check_truncation(state)


class TestPurity:
    def test_pure_is_one(self):
        assert purity(coherent_state(1.3, 40)) == 1.0

    def test_poissonian_diagonal(self):
        # dephased coherent state at beta0 = 1: purity = sum_n (e^-1/n!)^2
        n = np.arange(41)
        p = np.exp(-1.0) / factorial(n)
        state = PhotonicState.mixed(np.diag(p / p.sum()).astype(complex))
        expected = float(np.sum((np.exp(-1.0) / factorial(n)) ** 2))
        assert abs(purity(state) - expected) < 1e-12

    def test_maximally_mixed(self):
        d = 7
        state = PhotonicState.mixed(np.eye(d, dtype=complex) / d)
        assert abs(purity(state) - 1.0 / d) < 1e-14

    def test_outer_product_matches_pure(self):
        psi = coherent_state(0.8, 25)
        assert abs(purity(PhotonicState.mixed(psi.rho)) - 1.0) < 1e-10


class TestFidelity:
    def test_self_overlap(self):
        s = coherent_state(0.9, 30)
        assert fidelity(s, s) == 1.0

    def test_orthogonal_fock_states(self):
        a = np.zeros(6, dtype=complex)
        b = np.zeros(6, dtype=complex)
        a[1] = 1.0
        b[3] = 1.0
        assert fidelity(PhotonicState.pure(a), PhotonicState.pure(b)) == 0.0

    def test_opposite_parity_cats_are_orthogonal(self):
        even = target_factory(Cat(alpha=2.0, theta=0.0), 50)
        odd = target_factory(Cat(alpha=2.0, theta=math.pi), 50)
        assert fidelity(even, odd) < 1e-28

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValueError, match="mismatch"):
            fidelity(coherent_state(1.0, 10), coherent_state(1.0, 11))


class TestExpectation:
    def test_vacuum_photon_number(self):
        vac = PhotonicState.pure(np.eye(5, dtype=complex)[0])
        assert expectation(vac, "n") == 0.0

    def test_coherent_moments(self):
        beta0 = 1.2
        s = coherent_state(beta0, 50)
        assert abs(expectation(s, "n") - beta0 ** 2) < 1e-10
        assert abs(expectation(s, "adag2a2") - beta0 ** 4) < 1e-9
        assert abs(expectation(s, "a") - beta0) < 1e-10

    def test_fock_one(self):
        amps = np.zeros(5, dtype=complex)
        amps[1] = 1.0
        f1 = PhotonicState.pure(amps)
        assert expectation(f1, "n2") == 1.0
        assert expectation(f1, "a") == 0.0

    def test_mixed_field_matches_pure(self):
        s = coherent_state(0.7, 30)
        assert abs(expectation(PhotonicState.mixed(s.rho), "a")
                   - expectation(s, "a")) < 1e-12


class TestTargetFactory:
    def test_squeezed_zero_is_vacuum(self):
        s = target_factory(SqueezedVacuum(0.0), 20)
        assert abs(abs(s.amps[0]) - 1.0) < 1e-14

    def test_squeezed_amplitude_ratio(self):
        # a_{2(k+1)}/a_{2k} = -tanh(r) sqrt((2k+1)(2k+2))/(2(k+1))
        r = 0.6
        s = target_factory(SqueezedVacuum(r), 60)
        for k in (0, 3, 10):
            ratio = s.amps[2 * k + 2] / s.amps[2 * k]
            ref = -math.tanh(r) * math.sqrt((2 * k + 1) * (2 * k + 2)) / (2 * (k + 1))
            assert abs(ratio - ref) < 1e-12

    def test_even_cat_kills_odd_levels(self):
        s = target_factory(Cat(alpha=1.5, theta=0.0), 40)
        assert np.all(s.amps[1::2] == 0.0)

    def test_triangular_cat_mod_three_support(self):
        s = target_factory(TriangularCat(alpha=1.2, theta=2 * math.pi / 3), 42)
        mask = np.arange(43) % 3 != 0
        assert np.abs(s.amps[mask]).max() < 1e-15

    def test_truncation_error_when_cutoff_too_small(self):
        with pytest.raises(TruncationError):
            target_factory(Cat(alpha=3.0, theta=0.0), 6)

    def test_custom_passthrough(self):
        s = target_factory(Custom((0.0, 1.0)), 5)
        assert abs(s.amps[1] - 1.0) < 1e-15

    def test_default_n_max_rule(self):
        assert default_n_max(1.0) == 30
        assert default_n_max(2.0) == 60
        assert default_n_max(0.2) == 30


def brute_force_wigner(state, x, p, pad=40):
    """Independent displaced-parity evaluation via dense matrix exponentials.

    The space is padded well past the state's support so the truncated-ladder
    expm approximates the true displacement to beyond the test tolerance."""
    dim = state.n_max + 1 + pad
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    par = np.diag((-1.0) ** np.arange(dim)).astype(complex)
    alpha = (x + 1j * p) / math.sqrt(2.0)
    d = expm(alpha * a.conj().T - np.conj(alpha) * a)
    rho = np.zeros((dim, dim), dtype=complex)
    rho[: state.n_max + 1, : state.n_max + 1] = state.rho
    return float(np.real(np.trace(rho @ d @ par @ d.conj().T)) * 2.0 / math.pi)


class TestWigner:
    def test_vacuum_peak(self):
        vac = PhotonicState.pure(np.eye(8, dtype=complex)[0])
        grid = wigner(vac, [0.0], [0.0])
        assert abs(grid.values[0, 0] - 2.0 / math.pi) < 1e-12

    def test_fock_one_negative_at_origin(self):
        amps = np.zeros(8, dtype=complex)
        amps[1] = 1.0
        grid = wigner(PhotonicState.pure(amps), [0.0], [0.0])
        assert abs(grid.values[0, 0] + 2.0 / math.pi) < 1e-12

    def test_pure_and_mixed_agree(self):
        s = target_factory(Cat(alpha=1.0, theta=0.5), 25)
        xs = np.linspace(-2, 2, 7)
        ps = np.linspace(-2, 2, 7)
        w1 = wigner(s, xs, ps).values
        w2 = wigner(PhotonicState.mixed(s.rho), xs, ps).values
        assert np.abs(w1 - w2).max() < 1e-10

    def test_matches_brute_force_on_cat(self):
        s = target_factory(Cat(alpha=2.0, theta=math.pi / 2), 40)
        xs = [-2.0 * math.sqrt(2.0), -0.4, 0.0, 1.1, 2.0 * math.sqrt(2.0)]
        ps = [0.0, 0.6]
        grid = wigner(s, xs, ps)
        for i, x in enumerate(xs):
            for j, p in enumerate(ps):
                assert abs(grid.values[i, j] - brute_force_wigner(s, x, p)) < 1e-9

    def test_cat_lobes_and_fringes(self):
        # coherent pieces at +-2 sit at x = +-2 sqrt(2); fringes oscillate between
        s = target_factory(Cat(alpha=2.0, theta=math.pi / 2), 45)
        xs = np.linspace(-5, 5, 201)
        grid = wigner(s, xs, [0.0])
        vals = grid.values[:, 0]
        lobe = 2.0 * math.sqrt(2.0)
        i_lobe = np.argmin(np.abs(xs - lobe))
        assert vals[i_lobe] > 0.8 * (2.0 / math.pi) / 2.0
        ps = np.linspace(-3, 3, 301)
        mid = wigner(s, [0.0], ps).values[0]
        assert mid.min() < -0.1  # interference fringes go negative

    def test_grid_mass_near_unity(self):
        s = target_factory(Cat(alpha=1.5, theta=0.0), 40)
        xs = np.linspace(-7, 7, 141)
        grid = wigner(s, xs, xs)
        assert abs(grid.grid_mass() - 1.0) < 0.02

    def test_marginal_matches_quadrature_density_for_gaussian(self):
        # vacuum: integrating W over p gives 2 * |psi(x)|^2 with psi the
        # ground-state Gaussian pi^{-1/4} e^{-x^2/2}
        vac = PhotonicState.pure(np.eye(12, dtype=complex)[0])
        xs = np.linspace(-3, 3, 25)
        ps = np.linspace(-8, 8, 161)
        grid = wigner(vac, xs, ps)
        marg = 0.5 * np.trapezoid(grid.values, ps, axis=1)
        ref = np.exp(-xs ** 2) / math.sqrt(math.pi)
        assert np.abs(marg - ref).max() < 0.01 * ref.max()


def test_trace_distance_basics():
    a = coherent_state(1.0, 20)
    b = coherent_state(1.0, 20)
    assert trace_distance(a, b) < 1e-14
    c = PhotonicState.pure(np.eye(21, dtype=complex)[5])
    d = trace_distance(a, c)
    assert 0.9 < d <= 1.0 + 1e-12
