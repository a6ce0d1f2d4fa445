"""Truncated-Fock-space algebra for the optical mode.

States are either pure amplitude vectors or density matrices on the levels
0..n_max.  The Wigner convention is W(alpha) = (2/pi) Tr[rho D(alpha) P
D(alpha)^dag] with alpha = (x + i p)/sqrt(2), so the vacuum peaks at 2/pi and
the grid mass satisfies sum(W) dx dp = 2 Tr rho.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import TruncationError

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
PURE_NORM_TOL = 1e-10
TAIL_TOL = 1e-8


class PhotonicState:
    """Pure or mixed state of the mode on Fock levels 0..n_max."""

    def __init__(self, amps=None, rho=None, validate: bool = True):
        if (amps is None) == (rho is None):
            raise ValueError("provide exactly one of amps or rho")
        if amps is not None:
            self.amps = np.asarray(amps, dtype=complex)
            if self.amps.ndim != 1 or self.amps.size == 0:
                raise ValueError("pure state needs a nonempty 1-d amplitude vector")
            self._rho = None
        else:
            self.amps = None
            self._rho = np.asarray(rho, dtype=complex)
            if self._rho.ndim != 2 or self._rho.shape[0] != self._rho.shape[1]:
                raise ValueError("density matrix must be square")
        if validate:
            validate_state(self)

    @classmethod
    def pure(cls, amps, validate: bool = True) -> "PhotonicState":
        return cls(amps=amps, validate=validate)

    @classmethod
    def mixed(cls, rho, validate: bool = True) -> "PhotonicState":
        return cls(rho=rho, validate=validate)

    @property
    def is_pure(self) -> bool:
        return self.amps is not None

    @property
    def n_max(self) -> int:
        return (self.amps.size if self.is_pure else self._rho.shape[0]) - 1

    @property
    def rho(self) -> np.ndarray:
        """Density matrix (outer product for pure states)."""
        if self.is_pure:
            return np.outer(self.amps, self.amps.conj())
        return self._rho

    def populations(self) -> np.ndarray:
        if self.is_pure:
            return np.abs(self.amps) ** 2
        return np.real(np.diag(self._rho))

    def __repr__(self) -> str:
        kind = "pure" if self.is_pure else "mixed"
        return f"PhotonicState({kind}, n_max={self.n_max})"


def validate_state(state: PhotonicState,
                   herm_tol: float = HERMITICITY_TOL,
                   trace_tol: float = TRACE_TOL,
                   psd_tol: float = PSD_TOL) -> None:
    """Raise if the state violates normalization, hermiticity or positivity."""
    if state.is_pure:
        norm = float(np.sum(np.abs(state.amps) ** 2))
        if abs(norm - 1.0) > PURE_NORM_TOL:
            raise ValueError(f"pure state norm {norm} is off unity")
        return
    rho = state.rho
    herm = np.abs(rho - rho.conj().T).max()
    if herm > herm_tol:
        raise ValueError(f"density matrix not hermitian (deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr} is off unity")
    evmin = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    if evmin < -psd_tol:
        raise ValueError(f"density matrix has negative eigenvalue {evmin:.3e}")


def check_truncation(state: PhotonicState, tol: float = TAIL_TOL) -> None:
    """Raise TruncationError when the top Fock level carries visible weight."""
    if state.is_pure:
        mass = float(np.abs(state.amps[-1]) ** 2)
    else:
        mass = float(max(np.real(state.rho[-1, -1]), np.abs(state.rho[-1, :]).max()))
    if mass > tol:
        raise TruncationError(
            f"top Fock level holds mass {mass:.3e} > {tol:.0e}; increase n_max")


def default_n_max(amplitude: float) -> int:
    """Cutoff heuristic 10*max(1, amplitude^2) + 20 for coherent-like states."""
    return int(np.ceil(10.0 * max(1.0, float(amplitude) ** 2))) + 20


def coherent_amplitude(n, beta0: float):
    """<n|beta0> = exp(-beta0^2/2) beta0^n / sqrt(n!), evaluated in log space."""
    n = np.asarray(n)
    if np.any(n < 0):
        raise ValueError("photon number must be nonnegative")
    if beta0 < 0:
        raise ValueError("beta0 must be nonnegative")
    if beta0 == 0.0:
        out = np.where(n == 0, 1.0, 0.0)
        return float(out) if out.ndim == 0 else out.astype(float)
    out = np.exp(-0.5 * beta0 ** 2 + n * np.log(beta0) - 0.5 * gammaln(n + 1))
    return float(out) if out.ndim == 0 else out


def coherent_vector(beta0: float, n_max: int) -> np.ndarray:
    return coherent_amplitude(np.arange(n_max + 1), beta0)


def purity(state: PhotonicState) -> float:
    """Tr rho^2; exactly 1.0 for pure states."""
    if state.is_pure:
        return 1.0
    rho = state.rho
    return float(np.real(np.trace(rho @ rho)))


def fidelity(a: PhotonicState, b: PhotonicState) -> float:
    """|<a|b>|^2 between two pure states of equal truncation."""
    if not (a.is_pure and b.is_pure):
        raise ValueError("fidelity is defined here for pure states only")
    if a.n_max != b.n_max:
        raise ValueError(f"dimension mismatch: {a.n_max} vs {b.n_max}")
    return float(np.abs(np.vdot(a.amps, b.amps)) ** 2)


def expectation(state: PhotonicState, op: str) -> complex:
    """Expectation value of one of the operators 'n', 'n2', 'a', 'adag2a2'."""
    n = np.arange(state.n_max + 1, dtype=float)
    if op == "n":
        return complex(np.sum(state.populations() * n))
    if op == "n2":
        return complex(np.sum(state.populations() * n ** 2))
    if op == "adag2a2":
        return complex(np.sum(state.populations() * n * (n - 1)))
    if op == "a":
        if state.is_pure:
            v = state.amps
            return complex(np.sum(np.conj(v[:-1]) * v[1:] * np.sqrt(n[1:])))
        rho = state.rho
        # Tr[rho a] = sum_m sqrt(m) rho[m, m-1]
        return complex(np.sum(np.sqrt(n[1:]) * np.diag(rho, k=-1)))
    raise ValueError(f"unknown operator {op!r}")


def trace_distance(a: PhotonicState, b: PhotonicState) -> float:
    """(1/2) || rho_a - rho_b ||_1."""
    diff = a.rho - b.rho
    return float(0.5 * np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())


# ---------------------------------------------------------------------------
# target-state factory
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SqueezedVacuum:
    r: float


@dataclass(frozen=True)
class Cat:
    alpha: complex
    theta: float


@dataclass(frozen=True)
class TriangularCat:
    alpha: complex
    theta: float


@dataclass(frozen=True)
class Custom:
    amps: tuple


TargetState = Union[SqueezedVacuum, Cat, TriangularCat, Custom]

_FACTORY_TAIL_TOL = 1e-8


def _squeezed_weights(r: float, count: int) -> np.ndarray:
    """Unnormalized amplitudes on 0..count-1: even levels (-tanh r)^k sqrt((2k)!)/(2^k k!)."""
    amps = np.zeros(count)
    if r == 0.0:
        amps[0] = 1.0
        return amps
    t = np.tanh(r)
    ks = np.arange((count + 1) // 2)
    logmag = 0.5 * gammaln(2 * ks + 1) - ks * np.log(2.0) - gammaln(ks + 1) \
        + ks * np.log(abs(t))
    amps[2 * ks] = np.sign(-t) ** ks * np.exp(logmag)
    return amps


def _cat_weights(alpha: complex, theta: float, count: int, corners: int) -> np.ndarray:
    """<n|alpha> * sum_k exp(i k n theta') with two or three coherent corners."""
    n = np.arange(count)
    mag = coherent_amplitude(n, abs(alpha))
    ph = np.ones(count, dtype=complex) if alpha == 0 else (alpha / abs(alpha)) ** n
    if corners == 2:
        comb = 1.0 + np.exp(1j * theta) * (-1.0) ** n
    else:
        comb = 1.0 + np.exp(1j * n * theta) + np.exp(2j * n * theta)
    return mag * ph * comb


def target_factory(target: TargetState, n_max: int) -> PhotonicState:
    """Normalized amplitude vector of the requested target on 0..n_max.

    Raises TruncationError when more than 1e-8 of the state's weight lies
    above the cutoff.
    """
    ext = n_max + 1 + 400
    if isinstance(target, SqueezedVacuum):
        raw = _squeezed_weights(target.r, ext).astype(complex)
    elif isinstance(target, Cat):
        raw = _cat_weights(target.alpha, target.theta, ext, corners=2)
    elif isinstance(target, TriangularCat):
        raw = _cat_weights(target.alpha, target.theta, ext, corners=3)
    elif isinstance(target, Custom):
        raw = np.zeros(ext, dtype=complex)
        amps = np.asarray(target.amps, dtype=complex)
        if amps.size > n_max + 1:
            raise TruncationError("custom amplitudes exceed the requested cutoff")
        raw[: amps.size] = amps
    else:
        raise TypeError(f"unknown target {target!r}")
    total = float(np.sum(np.abs(raw) ** 2))
    if total == 0.0:
        raise ValueError("target state has zero norm")
    tail = float(np.sum(np.abs(raw[n_max + 1:]) ** 2)) / total
    if tail > _FACTORY_TAIL_TOL:
        raise TruncationError(
            f"target keeps mass {tail:.3e} above n_max={n_max}; raise the cutoff")
    amps = raw[: n_max + 1]
    return PhotonicState.pure(amps / np.linalg.norm(amps))


# ---------------------------------------------------------------------------
# Wigner function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WignerGrid:
    xs: np.ndarray
    ps: np.ndarray
    values: np.ndarray  # shape (len(xs), len(ps)), real

    def grid_mass(self) -> float:
        """Cell-weighted sum of W/2 over the grid; ~Tr rho when it covers the state."""
        dx = self.xs[1] - self.xs[0] if self.xs.size > 1 else 1.0
        dp = self.ps[1] - self.ps[0] if self.ps.size > 1 else 1.0
        return float(self.values.sum() * dx * dp / 2.0)


def wigner(state: PhotonicState, xs, ps) -> WignerGrid:
    """W(x, p) = (2/pi) Tr[rho D(2 alpha) P], alpha = (x + i p)/sqrt(2).

    Uses <m|D(g)|n> = sqrt(n!/m!) g^{m-n} e^{-|g|^2/2} L_n^{m-n}(|g|^2) for
    m >= n; hermiticity of rho folds the (n, m) and (m, n) terms into one
    real contribution per pair.
    """
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    alpha = (xs[:, None] + 1j * ps[None, :]) / np.sqrt(2.0)
    gamma = (2.0 * alpha).ravel()
    agsq = np.abs(gamma) ** 2
    env = np.exp(-0.5 * agsq)
    rho = state.rho
    dim = rho.shape[0]
    parity = (-1.0) ** np.arange(dim)
    acc = np.zeros(gamma.size)
    gamma_k = np.ones_like(gamma)  # gamma^k, updated per off-diagonal order k
    for k in range(dim):
        if k > 0:
            gamma_k = gamma_k * gamma
        for n in range(dim - k):
            m = n + k
            r = rho[n, m]
            if abs(r) < 1e-18:
                continue
            pref = np.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)))
            lag = eval_genlaguerre(n, k, agsq)
            term = pref * env * lag
            if k == 0:
                acc += parity[n] * np.real(r) * term
            else:
                acc += parity[n] * 2.0 * np.real(r * gamma_k) * term
    values = (2.0 / np.pi) * acc.reshape(len(xs), len(ps))
    return WignerGrid(xs=xs, ps=ps, values=values)
