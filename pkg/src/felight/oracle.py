"""Brute-force quadrature references for the closed-form emission routes.

Deliberately slow and simple: the mode state is assembled by trapezoid
integration of the coherent-superposition representation over real space,
with a built-in step-halving consistency check.  Periodic-aware sampling (an
integer number of points per optical cycle) keeps the lattice phases alias
free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .electron import ElectronPulse
from .emission import ExactFilter, NoFilter, PostFilter, WindowFilter
from .errors import ResolutionError
from .fock import PhotonicState

_RICHARDSON_TOL = 1e-5


@dataclass(frozen=True)
class QuadratureSpec:
    """Half-range and sampling density of the real-space trapezoid grid."""

    z_extent: float
    points_per_cycle: int = 64

    def __post_init__(self):
        if self.points_per_cycle < 16:
            raise ValueError("points_per_cycle must be at least 16")
        if not self.z_extent > 0:
            raise ValueError("z_extent must be positive")


def spec_for(pulses: Sequence[ElectronPulse], max_frequency: float) -> QuadratureSpec:
    """Extent covering 8 sigma_eff of every pulse, sampling above Nyquist of
    the stated bandwidth (units omega0/v)."""
    sig = max(math.sqrt(p.sigma_t ** 2 + p.delta_t ** 2) for p in pulses)
    extent = 2.0 * math.pi * math.ceil(8.0 * sig / (2.0 * math.pi))
    ppc = max(16, 2 * int(math.ceil(max_frequency)) + 24)
    return QuadratureSpec(z_extent=extent, points_per_cycle=ppc)


def _check_extent(spec: QuadratureSpec, pulses: Sequence[ElectronPulse]) -> None:
    need = max(6.0 * p.sigma_t + 6.0 * p.delta_t for p in pulses)
    if spec.z_extent < need:
        raise ValueError(
            f"z_extent {spec.z_extent} does not cover the pulse support {need:.1f}")


def _grid(spec: QuadratureSpec, refine: int = 1) -> tuple[np.ndarray, float]:
    step = 2.0 * math.pi / (spec.points_per_cycle * refine)
    n = int(math.ceil(spec.z_extent / step))
    z = step * np.arange(-n, n + 1)
    return z, step


def _pair_envelope(pulse: ElectronPulse, zc: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Jitter-averaged Gaussian envelope rho_env(z, z') in center/difference
    coordinates zc = (z+z')/2, y = z-z'."""
    st2 = pulse.sigma_t ** 2
    s_env = st2 + pulse.delta_t ** 2
    return np.exp(-0.5 * zc ** 2 / s_env - y ** 2 / (8.0 * st2)) \
        / math.sqrt(2.0 * math.pi * s_env)


def _comb(pulse: ElectronPulse, z: np.ndarray) -> np.ndarray:
    idx = pulse.spectrum.indices()
    return np.exp(1j * np.outer(z, idx)) @ pulse.spectrum.amps


def _coherent_cols(gamma: np.ndarray, n_max: int) -> np.ndarray:
    """Column k is the Fock expansion of |gamma_k>, shape (n_max+1, len(gamma))."""
    out = np.empty((n_max + 1, gamma.size), dtype=complex)
    out[0] = np.exp(-0.5 * np.abs(gamma) ** 2)
    for n in range(1, n_max + 1):
        out[n] = out[n - 1] * gamma / math.sqrt(n)
    return out


def _kernel(filt: PostFilter, y: np.ndarray) -> np.ndarray:
    """Detector response F(z - z') for one electron."""
    if isinstance(filt, NoFilter):
        raise ValueError("no kernel for the unfiltered case")
    if isinstance(filt, WindowFilter):
        out = np.empty_like(y)
        small = np.abs(y) < 1e-12
        out[small] = filt.delta_d / math.pi
        ys = y[~small]
        out[~small] = np.sin(filt.delta_d * ys) / (math.pi * ys)
        return out * np.exp(-1j * filt.s * y)
    if isinstance(filt, ExactFilter):
        return np.exp(-1j * filt.s * y) / (2.0 * math.pi)
    raise TypeError(f"unknown filter {filt!r}")


def _rho_once(pulses, beta0, alpha0, filters, spec, n_max, refine) -> np.ndarray:
    z, step = _grid(spec, refine)
    n_el = len(pulses)
    if n_el == 1:
        pulse, filt = pulses[0], filters[0]
        comb = _comb(pulse, z)
        if isinstance(filt, NoFilter):
            dens = _pair_envelope(pulse, z, np.zeros_like(z)) * np.abs(comb) ** 2
            cols = _coherent_cols(alpha0 + beta0 * np.exp(-1j * z), n_max)
            return (cols * (dens * step)) @ cols.conj().T
        zc = 0.5 * (z[:, None] + z[None, :])
        y = z[:, None] - z[None, :]
        w = _pair_envelope(pulse, zc, y) * np.outer(comb, np.conj(comb)) \
            * _kernel(filt, y) * step ** 2
        cols = _coherent_cols(alpha0 + beta0 * np.exp(-1j * z), n_max)
        return cols @ w @ cols.conj().T
    # two electrons, no filtering: diagonal-density double integral
    dens = []
    for pulse in pulses:
        comb = _comb(pulse, z)
        dens.append(_pair_envelope(pulse, z, np.zeros_like(z)) * np.abs(comb) ** 2)
    rho = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for i1, z1 in enumerate(z):
        gamma = alpha0 + beta0 * (np.exp(-1j * z1) + np.exp(-1j * z))
        cols = _coherent_cols(gamma, n_max)
        w = dens[0][i1] * dens[1] * step ** 2
        rho += (cols * w) @ cols.conj().T
    return rho


def rho_direct(pulses: Sequence[ElectronPulse], beta0: float, alpha0: complex,
               filters: Sequence[PostFilter], spec: QuadratureSpec,
               n_max: int) -> PhotonicState:
    """Mode density matrix by direct quadrature of the coherent-superposition
    integral; trace normalized.

    Supports one electron with any filter, or two uncorrelated electrons
    without filtering (the filtered two-electron case is a genuinely
    four-dimensional integral and is out of reach of this oracle).
    """
    n_el = len(pulses)
    if n_el < 1 or n_el > 2:
        raise ValueError("rho_direct supports N <= 2")
    if len(filters) != n_el:
        raise ValueError("one filter entry per electron")
    if n_el == 2 and not all(isinstance(f, NoFilter) for f in filters):
        raise NotImplementedError("filtered two-electron quadrature not supported")
    _check_extent(spec, pulses)

    coarse = _rho_once(pulses, beta0, alpha0, filters, spec, n_max, refine=1)
    fine = _rho_once(pulses, beta0, alpha0, filters, spec, n_max, refine=2)
    coarse /= np.real(np.trace(coarse))
    fine /= np.real(np.trace(fine))
    drift = float(np.abs(fine - coarse).max())
    if drift > _RICHARDSON_TOL:
        raise ResolutionError(
            f"quadrature drift {drift:.2e} on step halving; refine the spec")
    rho = 0.5 * (fine + fine.conj().T)
    return PhotonicState.mixed(rho / np.real(np.trace(rho)))


def cf_quadrature(pulse: ElectronPulse, m: int, spec: QuadratureSpec) -> complex:
    """Coherence factor by trapezoid integration of the real-space density."""
    _check_extent(spec, [pulse])

    def once(refine: int) -> complex:
        z, step = _grid(spec, refine)
        comb = _comb(pulse, z)
        dens = _pair_envelope(pulse, z, np.zeros_like(z)) * np.abs(comb) ** 2
        return complex(np.sum(dens * np.exp(1j * m * z)) * step)

    coarse, fine = once(1), once(2)
    if abs(fine - coarse) > _RICHARDSON_TOL:
        raise ResolutionError("CF quadrature did not converge on step halving")
    return fine
