"""Photonic state of the mode after interaction with N uncorrelated electrons.

The no-filter and exact-sideband routes evaluate the multinomial expansion of
the displaced-vacuum matrix elements.  The expansion is organized as products
of per-electron generating polynomials: the composition sums with their
multinomial coefficients become polynomial convolutions, evaluated with
direct (not FFT) convolution so tiny high-order coefficients keep relative
accuracy under the factorial rescaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np
from scipy.signal import convolve2d
from scipy.special import erf, gammaln, jv

from .electron import ElectronPulse, IELSStage, ModulationSpectrum, coherence_factor, iels_modulate
from .errors import EmptySelectionError, TruncationError, UnphysicalInputError
from .fock import (PhotonicState, check_truncation, coherent_vector,
                   default_n_max, expectation)
from .special import gamma_upper_regularized

_MAX_FACTORIAL_INDEX = 170  # float64 overflows past 170!


class NoFilter:
    """Keep every scattering event."""

    def __repr__(self):
        return "NoFilter()"


@dataclass(frozen=True)
class WindowFilter:
    """Keep final momenta within s +- delta_d (units omega0/v)."""

    s: int
    delta_d: float

    def __post_init__(self):
        if not self.delta_d > 0:
            raise ValueError("delta_d must be positive")


@dataclass(frozen=True)
class ExactFilter:
    """Keep only the exact sideband s."""

    s: int


PostFilter = Union[NoFilter, WindowFilter, ExactFilter]


@dataclass(frozen=True)
class EmissionStats:
    intensity: float
    g_factor: float
    fluct: float


@dataclass(frozen=True)
class FilterOutcome:
    state: PhotonicState
    p_success: float


class CatClosedForm(NamedTuple):
    state: PhotonicState
    p_success: float
    pf_raw: float  # unnormalized closed-form constant, for identity checks


# ---------------------------------------------------------------------------
# composition helpers (also exercised directly by the test suite)
# ---------------------------------------------------------------------------

def compositions(total: int, parts: int):
    """All ordered splits of `total` into `parts` nonnegative integers."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def multinomial(total: int, parts: Sequence[int]) -> int:
    if sum(parts) != total:
        return 0
    out = math.factorial(total)
    for p in parts:
        out //= math.factorial(p)
    return out


def _series_cutoff(q: float, tol: float = 1e-16, cap: int = 60) -> int:
    """Smallest k with remainder of sum q^j/j! below tol (relative to e^q)."""
    term, total = 1.0, 1.0
    for k in range(1, cap + 1):
        term *= q / k
        total += term
        if term < tol * total and k > q:
            return k
    return cap


# ---------------------------------------------------------------------------
# single electron, no filter / injected CF table
# ---------------------------------------------------------------------------

def single_electron_state(cf: Callable[[int], complex], beta0: float,
                          n_max: int | None = None) -> PhotonicState:
    """rho_nn' = <n|b0><b0|n'> M(n'-n) normalized by trace.

    cf maps an integer momentum order to the electron coherence factor, so a
    pre-filtered or synthetic CF table can be injected directly.
    """
    if n_max is None:
        n_max = default_n_max(beta0)
    coh = coherent_vector(beta0, n_max)
    orders = np.arange(-(n_max), n_max + 1)
    table = np.array([cf(int(m)) for m in orders])
    nn = np.arange(n_max + 1)
    rho = np.outer(coh, coh) * table[(nn[None, :] - nn[:, None]) + n_max]
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.real(np.trace(rho))
    state = PhotonicState.mixed(rho)
    check_truncation(state)
    return state


def emit_no_filter(pulses: Sequence[ElectronPulse], beta0: float,
                   n_max: int | None = None,
                   check_tail: bool = True) -> PhotonicState:
    """Mode state for N <= 3 uncorrelated electrons with every event kept.

    check_tail=False skips the top-level truncation guard, for controlled
    comparisons against reference evaluations at deliberately small cutoffs.
    """
    n_el = len(pulses)
    if n_el < 1:
        raise ValueError("need at least one electron pulse")
    if n_el > 3:
        raise ValueError(
            "emit_no_filter supports N <= 3; use emission_stats for photon "
            "statistics at larger N")
    if n_max is None:
        n_max = default_n_max(n_el * beta0)
    if n_el == 1:
        return single_electron_state(
            lambda m: coherence_factor(pulses[0], m), beta0, n_max)

    k_max = _series_cutoff(0.5 * (n_el * beta0) ** 2 + 1.0)
    jmax = n_max + 2 * k_max
    if jmax > _MAX_FACTORIAL_INDEX:
        raise TruncationError(
            f"n_max={n_max} with k_max={k_max} exceeds the float64 factorial "
            "range; pass a smaller n_max")
    jj, kk = np.meshgrid(np.arange(jmax + 1), np.arange(jmax + 1), indexing="ij")
    invfact = np.exp(-gammaln(jj + 1) - gammaln(kk + 1))
    phi = None
    for pulse in pulses:
        cf_pos = np.array([coherence_factor(pulse, m) for m in range(jmax + 1)])
        table = np.concatenate([np.conj(cf_pos[:0:-1]), cf_pos])
        g = table[(kk - jj) + jmax] * invfact
        phi = g if phi is None else convolve2d(phi, g)[: jmax + 1, : jmax + 1]
    phi_hat = phi * np.exp(gammaln(jj + 1) + gammaln(kk + 1))

    ks = np.arange(k_max + 1)
    coef = (-0.5 * beta0 ** 2) ** ks * np.exp(-gammaln(ks + 1))
    weights = np.outer(coef, coef)  # (k, k') -> coef_k coef_k'
    shift = ks[:, None] + ks[None, :]
    rho = np.empty((n_max + 1, n_max + 1), dtype=complex)
    for n in range(n_max + 1):
        for npr in range(n, n_max + 1):
            acc = np.sum(weights * phi_hat[n + shift, npr + shift])
            pref = beta0 ** (n + npr) * math.exp(
                -0.5 * (gammaln(n + 1) + gammaln(npr + 1)))
            rho[n, npr] = pref * acc
            rho[npr, n] = np.conj(rho[n, npr])
    rho /= np.real(np.trace(rho))
    state = PhotonicState.mixed(0.5 * (rho + rho.conj().T))
    if check_tail:
        check_truncation(state)
    return state


# ---------------------------------------------------------------------------
# single electron, finite post-selection window
# ---------------------------------------------------------------------------

def emit_single_window(pulse: ElectronPulse, beta0: float,
                       w: WindowFilter, n_max: int | None = None) -> FilterOutcome:
    """Conditional mode state when the final electron momentum lands in the
    window s +- delta_d, with the event probability.

    rho_nn' ~ <n|b0><b0|n'> sum_{l,l'} c_l conj(c_l')
              exp(-(l-l'+n'-n)^2 (sigma_t^2+dt^2)/2)
              (1/2) [erf(sqrt2 sigma_t (delta_d + x0))
                     + erf(sqrt2 sigma_t (delta_d - x0))],
    x0 = (l+l')/2 - ((n+n')/2 + s); p_success is its trace.
    """
    if not np.isfinite(pulse.sigma_t):
        raise ValueError("emit_single_window needs a finite sigma_t")
    if n_max is None:
        n_max = default_n_max(beta0)
    c = pulse.spectrum.amps
    base = pulse.spectrum.offset
    npts = c.size
    j = np.arange(npts)
    outer = np.outer(c, np.conj(c))
    u = (j[:, None] + j[None, :]) + 2 * base
    v = j[:, None] - j[None, :]
    u_vals = np.arange(2 * base, 2 * (base + npts - 1) + 1)
    v_vals = np.arange(-(npts - 1), npts)
    t = np.zeros((u_vals.size, v_vals.size), dtype=complex)
    np.add.at(t, (u.ravel() - u_vals[0], v.ravel() - v_vals[0]), outer.ravel())

    s_vals = np.arange(0, 2 * n_max + 1)        # n + n'
    x0 = u_vals[:, None] / 2.0 - (s_vals[None, :] / 2.0 + w.s)
    root2st = math.sqrt(2.0) * pulse.sigma_t
    bracket = 0.5 * (erf(root2st * (w.delta_d + x0)) + erf(root2st * (w.delta_d - x0)))
    p_vs = t.T @ bracket                        # (v, S)

    sig2 = pulse.sigma_t ** 2 + pulse.delta_t ** 2
    d_vals = np.arange(-n_max, n_max + 1)       # n' - n
    gauss = np.exp(-0.5 * (v_vals[None, :] + d_vals[:, None]) ** 2 * sig2)
    g2 = gauss @ p_vs                           # (D, S)

    coh = coherent_vector(beta0, n_max)
    nn = np.arange(n_max + 1)
    rho = np.outer(coh, coh) * g2[(nn[None, :] - nn[:, None]) + n_max,
                                  nn[:, None] + nn[None, :]]
    trace = float(np.real(np.trace(rho)))
    if trace < 1e-30:
        raise EmptySelectionError("post-selection window has no weight")
    rho = 0.5 * (rho + rho.conj().T) / trace
    state = PhotonicState.mixed(rho)
    check_truncation(state)
    return FilterOutcome(state=state, p_success=trace)


# ---------------------------------------------------------------------------
# exact sideband post-selection
# ---------------------------------------------------------------------------

def emit_exact(spectra: Sequence[ModulationSpectrum], beta0: float,
               s: Sequence[int], n_max: int | None = None,
               k_tail_tol: float = 1e-10) -> FilterOutcome:
    """Pure mode state when every electron is measured on an exact sideband.

    Assumes infinite coherence time (lattice spectra).  For one electron the
    amplitudes are alpha_n ~ <n|b0> c_{n+s}; for 2 <= N <= 4 the multinomial
    expansion runs with the inner series capped at k_max = 40 and checked to
    leave amplitude tail below k_tail_tol.
    """
    n_el = len(spectra)
    if n_el < 1 or n_el != len(s):
        raise ValueError("spectra and s must be equal-length and nonempty")
    if n_el > 4:
        raise ValueError("emit_exact supports N <= 4")
    if n_max is None:
        n_max = default_n_max(n_el * beta0)

    if n_el == 1:
        # evaluate two levels past the cutoff: post-selected states may end
        # exactly at n_max (band-limited spectra), which is not a truncation
        coh = coherent_vector(beta0, n_max + 2)
        nn = np.arange(n_max + 3)
        amps = coh * np.array([spectra[0].amplitude(int(n + s[0])) for n in nn])
        p = float(np.sum(np.abs(amps[: n_max + 1]) ** 2))
        if p <= 0.0:
            raise EmptySelectionError("empty post-selection")
        if float(np.sum(np.abs(amps[n_max + 1:]) ** 2)) > 1e-8 * p:
            raise TruncationError("post-selected state leaks past n_max")
        state = PhotonicState.pure(amps[: n_max + 1] / math.sqrt(p))
        return FilterOutcome(state=state, p_success=p)

    k_max = min(40, max(_series_cutoff(0.5 * (n_el * beta0) ** 2 + 1.0), 8))
    amax = n_max + 2 + k_max  # two extra levels feed the leak check below
    if amax > _MAX_FACTORIAL_INDEX:
        raise TruncationError("n_max too large for the combinatorial path")
    aa, bb = np.meshgrid(np.arange(amax + 1), np.arange(k_max + 1), indexing="ij")
    invfact = np.exp(-gammaln(aa + 1) - gammaln(bb + 1))
    psi = None
    for spec, s_i in zip(spectra, s):
        m = np.array([[spec.amplitude(int(a - b + s_i)) for b in range(k_max + 1)]
                      for a in range(amax + 1)])
        g = m * invfact
        psi = g if psi is None else convolve2d(psi, g)[: amax + 1, : k_max + 1]
    psi_hat = psi * np.exp(gammaln(aa + 1) + gammaln(bb + 1))

    ks = np.arange(k_max + 1)
    coef = (-0.5 * beta0 ** 2) ** ks * np.exp(-gammaln(ks + 1))
    nn = np.arange(n_max + 3)
    contrib = coef[None, :] * psi_hat[nn[:, None] + ks[None, :], ks[None, :]]
    if beta0 > 0:
        pref = np.exp(nn * math.log(beta0) - 0.5 * gammaln(nn + 1))
    else:
        pref = np.where(nn == 0, 1.0, 0.0)
    amps = pref * contrib.sum(axis=1)
    tail = np.abs(contrib[:, -1]).max()
    if tail > k_tail_tol * max(np.abs(contrib).max(), 1e-300):
        raise TruncationError("inner series not converged at k_max = 40")
    p = float(np.sum(np.abs(amps[: n_max + 1]) ** 2))
    if p <= 0.0:
        raise EmptySelectionError("empty post-selection")
    if float(np.sum(np.abs(amps[n_max + 1:]) ** 2)) > 1e-8 * p:
        raise TruncationError("post-selected state leaks past n_max")
    state = PhotonicState.pure(amps[: n_max + 1] / math.sqrt(p))
    return FilterOutcome(state=state, p_success=p)


# ---------------------------------------------------------------------------
# photon statistics for any N
# ---------------------------------------------------------------------------

def emission_stats(cfs: Sequence[tuple[complex, complex]],
                   beta0: float) -> EmissionStats:
    """Intensity, <a^dag^2 a^2> and intensity fluctuations for N electrons.

    cfs lists per-electron coherence factors (M_1, M_2) at orders one and
    two; order zero is unity and negative orders follow by conjugation.
    Raises UnphysicalInputError when the implied fluctuations are negative.
    """
    n_el = len(cfs)
    if n_el < 1:
        raise ValueError("need at least one electron")
    m1 = np.array([c[0] for c in cfs], dtype=complex)
    table = {}
    for i, (a, b) in enumerate(cfs):
        table[i] = {0: 1.0 + 0j, 1: complex(a), 2: complex(b),
                    -1: np.conj(complex(a)), -2: np.conj(complex(b))}

    total = np.sum(m1)
    cross = np.abs(total) ** 2 - np.sum(np.abs(m1) ** 2)
    intensity = beta0 ** 2 * (n_el + float(np.real(cross)))

    comps = []
    for i in range(n_el):
        vec = [0] * n_el
        vec[i] = 2
        comps.append((tuple(vec), 1))
    for i in range(n_el):
        for jdx in range(i + 1, n_el):
            vec = [0] * n_el
            vec[i] = vec[jdx] = 1
            comps.append((tuple(vec), 2))

    g = 0j
    for mvec, cm in comps:
        for pvec, cp in comps:
            prod = 1.0 + 0j
            for i in range(n_el):
                prod *= table[i][pvec[i] - mvec[i]]
                if prod == 0:
                    break
            g += cm * cp * prod
    g_factor = beta0 ** 4 * float(np.real(g))

    fluct = intensity + g_factor - intensity ** 2
    if fluct < -1e-9:
        raise UnphysicalInputError(
            f"unphysical CF input: intensity fluctuations {fluct:.3e} < 0")
    return EmissionStats(intensity=intensity, g_factor=g_factor, fluct=fluct)


def cf_pair_physical(m1: complex, m2: complex, tol: float = 1e-12) -> bool:
    """True when (1, M_1, M_2) extends to the Fourier sequence of some
    nonnegative density: the 3x3 Toeplitz moment matrix is PSD."""
    t = np.array([[1.0, np.conj(m1), np.conj(m2)],
                  [m1, 1.0, np.conj(m1)],
                  [m2, m1, 1.0]], dtype=complex)
    return bool(np.linalg.eigvalsh(t).min() >= -tol)


# ---------------------------------------------------------------------------
# asymptotic cat state from a strong single stage
# ---------------------------------------------------------------------------

def truncated_iels_spectrum(beta_abs: float, beta_phase: float, s: int,
                            n_trunc: int) -> ModulationSpectrum:
    """Driftless stage spectrum restricted to lattice indices s..s+n_trunc."""
    full = iels_modulate(IELSStage(beta_abs=beta_abs, beta_phase=beta_phase))
    return full.restrict(s, s + n_trunc)


def cat_closed_form(beta_abs: float, beta_phase: float, s: int,
                    n_max_trunc: int, beta0: float) -> CatClosedForm:
    """Asymptotic strong-coupling state on sidebands s..s+n_max_trunc.

    Amplitudes follow <n|chi>[1 + e^{i theta}(-1)^n] with chi =
    -i beta0 e^{i beta_phase} and theta = s pi + pi/2 - 4|beta|.  pf_raw is
    the closed-form constant
    2 [Gamma(n+1, b0^2) + (-1)^s e^{-2 b0^2} sin(4|beta|) Gamma(n+1, -b0^2)]/n!,
    which equals the direct amplitude sum; p_success rescales it by the
    asymptotic sideband weight 1/(4 pi |beta| N2) of the truncated spectrum.
    """
    theta = s * math.pi + math.pi / 2.0 - 4.0 * beta_abs
    chi_phase = -1j * np.exp(1j * beta_phase)
    n = np.arange(n_max_trunc + 1)
    mag = coherent_vector(beta0, n_max_trunc)
    amps = mag * chi_phase ** n * (1.0 + np.exp(1j * theta) * (-1.0) ** n)
    norm_sq = float(np.sum(np.abs(amps) ** 2))
    if norm_sq <= 0.0:
        raise EmptySelectionError("cat amplitudes vanish identically")
    state = PhotonicState.pure(amps / math.sqrt(norm_sq))

    pf_raw = 2.0 * (gamma_upper_regularized(n_max_trunc, beta0 ** 2)
                    + (-1) ** s * math.exp(-2.0 * beta0 ** 2)
                    * math.sin(4.0 * beta_abs)
                    * gamma_upper_regularized(n_max_trunc, -beta0 ** 2))
    band = np.arange(s, s + n_max_trunc + 1)
    nsq = float(np.sum(jv(band, 2.0 * beta_abs) ** 2))
    p_success = pf_raw / (4.0 * math.pi * beta_abs * nsq) if beta_abs > 0 else float("nan")
    return CatClosedForm(state=state, p_success=p_success, pf_raw=pf_raw)


def expectation_field(outcome: FilterOutcome) -> complex:
    """<a> of the filtered state."""
    return expectation(outcome.state, "a")
