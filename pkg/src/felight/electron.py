"""Electron modulation states, coherence factors and phase-space diagnostics.

Units are dimensionless throughout: longitudinal momentum in omega0/v,
position in v/omega0, time in 1/omega0.  A spectrum produced by a modulation
stage at laser frequency h*omega0 occupies lattice indices that are multiples
of h.  The drift parameter is the dimensionless ratio d/z_T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, jv

from .errors import EmptyPreFilterError

NORM_TOL = 1e-12
_TAIL_TOL = 1e-14


def _truncation_order(beta_abs: float) -> int:
    """Harmonic-index cutoff L: tail mass of J_l(2b) beyond |l| <= L is < 1e-14."""
    twob = 2.0 * beta_abs
    return int(math.ceil(twob + 10.0 * twob ** (1.0 / 3.0) + 10.0)) if twob > 0 else 2


@dataclass(frozen=True)
class ModulationSpectrum:
    """Complex sideband amplitudes c_l on the integer momentum lattice.

    amps[i] is the amplitude at lattice index offset + i.  harmonic records
    the generating laser frequency in units of omega0 (occupied indices are
    then multiples of it).
    """

    offset: int
    amps: np.ndarray
    harmonic: int = 1

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amps must be a nonempty 1-d array")
        if self.harmonic < 1:
            raise ValueError("harmonic must be >= 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "offset", int(self.offset))

    @classmethod
    def unmodulated(cls) -> "ModulationSpectrum":
        return cls(offset=0, amps=np.array([1.0 + 0j]))

    def indices(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.amps.size)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def normalize(self) -> "ModulationSpectrum":
        n = math.sqrt(self.norm_sq())
        if n == 0.0:
            raise ValueError("cannot normalize a zero spectrum")
        return ModulationSpectrum(self.offset, self.amps / n, self.harmonic)

    def amplitude(self, index: int) -> complex:
        i = int(index) - self.offset
        return complex(self.amps[i]) if 0 <= i < self.amps.size else 0j

    def restrict(self, lo: int, hi: int) -> "ModulationSpectrum":
        """Keep lattice indices lo..hi (inclusive), renormalized."""
        idx = self.indices()
        keep = (idx >= lo) & (idx <= hi)
        if not np.any(np.abs(self.amps[keep]) > 0):
            raise EmptyPreFilterError("empty pre-filter")
        amps = np.where(keep, self.amps, 0.0)
        first = int(np.argmax(keep))
        last = len(keep) - int(np.argmax(keep[::-1])) - 1
        return ModulationSpectrum(self.offset + first, amps[first:last + 1],
                                  self.harmonic).normalize()

    def lattice_cf(self, m: int) -> complex:
        """Infinite-coherence-time CF: sum_l c_l conj(c_{l+m})."""
        m = int(m)
        c = self.amps
        if abs(m) >= c.size:
            return 0j
        if m >= 0:
            return complex(np.sum(c[: c.size - m] * np.conj(c[m:])))
        return complex(np.conj(np.sum(c[: c.size + m] * np.conj(c[-m:]))))

    def autocorrelation(self) -> tuple[np.ndarray, np.ndarray]:
        """Lags v and S_v = sum_l c_l conj(c_{l-v}) for all lags."""
        c = self.amps
        s = np.correlate(c, c, mode="full")
        lags = np.arange(-(c.size - 1), c.size)
        return lags, s


@dataclass(frozen=True)
class ElectronPulse:
    """Modulation spectrum with Gaussian coherence time and arrival jitter."""

    spectrum: ModulationSpectrum
    sigma_t: float
    delta_t: float = 0.0

    def __post_init__(self):
        if not self.sigma_t > 0:
            raise ValueError("sigma_t must be positive")
        if self.delta_t < 0:
            raise ValueError("delta_t must be nonnegative")


@dataclass(frozen=True)
class IELSStage:
    """Single inelastic light-scattering stage plus free drift.

    beta_phase is arg(-beta); drift is d/z_T measured with the stage's own
    laser frequency.
    """

    beta_abs: float
    beta_phase: float = 0.0
    harmonic: int = 1
    drift: float = 0.0

    def __post_init__(self):
        if self.beta_abs < 0:
            raise ValueError("beta_abs must be nonnegative")
        if self.drift < 0:
            raise ValueError("drift must be nonnegative")
        if self.harmonic < 1:
            raise ValueError("harmonic must be >= 1")


@dataclass(frozen=True)
class PreFilter:
    """Momentum pre-selection window [delta_max - delta_d, delta_max]."""

    delta_max: float
    delta_d: float

    def __post_init__(self):
        if not self.delta_d > 0:
            raise ValueError("delta_d must be positive")


def iels_modulate(stage: IELSStage) -> ModulationSpectrum:
    """Sideband amplitudes after one IELS stage and drift.

    c_l = J_l(2|beta|) exp(i l arg(-beta)) exp(-2 pi i l^2 d/z_T) at harmonic
    index l, placed on the omega0 lattice at l*harmonic and truncated where
    the discarded Bessel tail mass is below 1e-14.
    """
    L = _truncation_order(stage.beta_abs)
    ell = np.arange(-L, L + 1)
    c = jv(ell, 2.0 * stage.beta_abs) * np.exp(
        1j * ell * stage.beta_phase - 2j * np.pi * ell ** 2 * stage.drift)
    tail = abs(1.0 - float(np.sum(np.abs(c) ** 2)))
    if tail > _TAIL_TOL:
        raise ValueError(f"sideband truncation left tail mass {tail:.2e}")
    h = stage.harmonic
    if h == 1:
        amps = c
    else:
        amps = np.zeros((2 * L * h + 1), dtype=complex)
        amps[::h] = c
    return ModulationSpectrum(offset=-L * h, amps=amps,
                              harmonic=h).normalize()


def _sigma_sq_total(pulse: ElectronPulse) -> float:
    return pulse.sigma_t ** 2 + pulse.delta_t ** 2


def coherence_factor(pulse: ElectronPulse, m: int) -> complex:
    """CF at momentum m*omega0/v:
    sum_{l,l'} c_l conj(c_{l'}) exp(-(l - l' + m)^2 (sigma_t^2 + dt^2)/2).

    Reduces to the lattice sum for sigma_t -> inf.
    """
    m = int(m)
    if not np.isfinite(pulse.sigma_t):
        return pulse.spectrum.lattice_cf(m)
    lags, s = pulse.spectrum.autocorrelation()
    w = np.exp(-0.5 * (lags + m) ** 2 * _sigma_sq_total(pulse))
    return complex(np.sum(s * w))


def coherence_factor_closed_drift(beta_abs: float, drift: float, m: int) -> complex:
    """Closed form for an IELS stage after drift, at infinite coherence time:
    i^m sign(sin(2 pi m d))^m J_m(4 |beta sin(2 pi m d)|), with arg(-beta)=0.
    """
    m = int(m)
    if m == 0:
        return 1.0 + 0j
    sn = math.sin(2.0 * math.pi * m * drift)
    if sn == 0.0:
        return 0j
    return complex((1j ** m) * (math.copysign(1.0, sn) ** m)
                   * jv(m, 4.0 * beta_abs * abs(sn)))


def _pair_tables(spectrum: ModulationSpectrum):
    """T[u, v] = c_j conj(c_j') indexed by u = j + j' and v = j - j'."""
    c = spectrum.amps
    n = c.size
    outer = np.outer(c, np.conj(c))
    base = spectrum.offset
    j = np.arange(n)
    u = (j[:, None] + j[None, :]) + 2 * base   # j + j'
    v = j[:, None] - j[None, :]                 # j - j'
    return outer, u, v


def projected_coherence_factor(pulse: ElectronPulse, m: int, q) -> complex | np.ndarray:
    """PCF at order m and momentum offset q from the central momentum.

    Gaussian envelope and Gaussian jitter are folded in analytically; the
    momentum integral of the result reproduces the CF.
    """
    if not np.isfinite(pulse.sigma_t):
        raise ValueError("projected coherence factor needs a finite sigma_t")
    q = np.asarray(q, dtype=float)
    st2 = pulse.sigma_t ** 2
    outer, u, v = _pair_tables(pulse.spectrum)
    damp = np.exp(-0.5 * (v + int(m)) ** 2 * _sigma_sq_total(pulse))
    weights = outer * damp
    pref = math.sqrt(2.0 * st2 / math.pi)
    flat_u = u.ravel()
    flat_w = weights.ravel()
    keep = np.abs(flat_w) > 1e-18
    gauss = np.exp(-2.0 * st2 * (q.reshape(-1, 1) - flat_u[keep] / 2.0) ** 2)
    out = pref * gauss @ flat_w[keep]
    return complex(out[0]) if q.ndim == 0 else out.reshape(q.shape)


def electron_wigner(pulse: ElectronPulse, z_grid, q_grid) -> np.ndarray:
    """Phase-space density W_e(z, q) on the grid, shape (len(z), len(q))."""
    if not np.isfinite(pulse.sigma_t):
        raise ValueError("electron Wigner function needs a finite sigma_t")
    z = np.asarray(z_grid, dtype=float)
    q = np.asarray(q_grid, dtype=float)
    st2 = pulse.sigma_t ** 2
    sig_env = st2 + pulse.delta_t ** 2
    envelope = math.sqrt(st2 / sig_env) * np.exp(-0.5 * z ** 2 / sig_env)
    outer, u, v = _pair_tables(pulse.spectrum)
    u_vals = np.unique(u)
    v_vals = np.unique(v)
    # T[u, v] regrouped: W = (1/pi) env(z) sum_u gauss_u(q) sum_v T_uv e^{i v z}
    t = np.zeros((u_vals.size, v_vals.size), dtype=complex)
    iu = np.searchsorted(u_vals, u.ravel())
    iv = np.searchsorted(v_vals, v.ravel())
    np.add.at(t, (iu, iv), outer.ravel())
    phase = np.exp(1j * np.outer(v_vals, z))       # (v, z)
    zsum = t @ phase                                # (u, z)
    gauss = np.exp(-2.0 * st2 * (q[None, :] - u_vals[:, None] / 2.0) ** 2)  # (u, q)
    w = np.real(zsum.T @ gauss) / math.pi          # (z, q)
    return w * envelope[:, None]


def _window_limits(filt: PreFilter, m: int) -> tuple[int, int]:
    """Closed lattice window for the order-m sum: edges use the floor rule,
    a sideband exactly at delta_max or delta_max - delta_d is kept."""
    lo = math.floor(filt.delta_max - filt.delta_d) - min(0, m)
    hi = math.floor(filt.delta_max) - max(0, m)
    return lo, hi


def prefilter_cf(stage: IELSStage, filt: PreFilter, m: int, *,
                 sigma_t: float | None = None,
                 delta_t: float = 0.0) -> tuple[complex, float]:
    """CF of a stage spectrum after a momentum pre-filter, with its success
    probability M0.

    The default is the infinite-coherence window sum over lattice indices
    floor(delta_max - delta_d) - min(0, m) .. floor(delta_max) - max(0, m),
    which keeps exactly the pairs (l, l+m) whose endpoints both lie in the
    closed window [floor(delta_max - delta_d), floor(delta_max)].  The
    returned table is therefore the autocorrelation of a restricted spectrum
    and stays a positive-definite sequence.  Passing sigma_t switches to the
    finite-coherence form in which each sideband enters through erf-smoothed
    window edges.
    """
    spectrum = iels_modulate(stage)
    m = int(m)
    if sigma_t is None:
        return _prefilter_cf_lattice(spectrum, filt, m)
    return _prefilter_cf_finite(spectrum, filt, m, sigma_t, delta_t)


def _prefilter_cf_lattice(spectrum: ModulationSpectrum, filt: PreFilter,
                          m: int) -> tuple[complex, float]:
    idx = spectrum.indices()
    c = spectrum.amps
    lo0, hi0 = _window_limits(filt, 0)
    keep0 = (idx >= lo0) & (idx <= hi0)
    m0 = float(np.sum(np.abs(c[keep0]) ** 2))
    if m0 <= 1e-300:
        raise EmptyPreFilterError("empty pre-filter")
    lo, hi = _window_limits(filt, m)
    if hi < lo:
        # window holds fewer sidebands than the order: no beat at m
        return 0j, m0
    keep = (idx >= lo) & (idx <= hi)
    shifted = np.zeros_like(c)
    src = idx + m
    ok = (src >= idx[0]) & (src <= idx[-1])
    shifted[ok] = c[src[ok] - idx[0]]
    num = complex(np.sum(c[keep] * np.conj(shifted[keep])))
    return num / m0, m0


def _prefilter_cf_finite(spectrum: ModulationSpectrum, filt: PreFilter,
                         m: int, sigma_t: float,
                         delta_t: float) -> tuple[complex, float]:
    outer, u, v = _pair_tables(spectrum)
    sig2 = sigma_t ** 2 + delta_t ** 2
    st = sigma_t / math.sqrt(2.0)

    def unnormalized(k: int) -> complex:
        if abs(k) > filt.delta_d:
            return 0j
        kp, km = max(0, k), min(0, k)
        damp = np.exp(-0.5 * (v + k) ** 2 * sig2)
        e1 = erf((2.0 * filt.delta_max - 2.0 * kp - u + k) * st)
        e2 = erf((u - k + 2.0 * km - 2.0 * filt.delta_max + 2.0 * filt.delta_d) * st)
        return complex(0.5 * np.sum(outer * damp * (e1 + e2)))

    m0 = unnormalized(0).real
    if m0 <= 1e-300:
        raise EmptyPreFilterError("empty pre-filter")
    return unnormalized(m) / m0, m0
