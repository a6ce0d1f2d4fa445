"""Special-function kernels: Bessel J tables and the upper incomplete gamma.

scipy.special supplies the one-off evaluations; the table routine here exists
for hot loops (the synthesis optimizer evaluates J_0..J_L for thousands of
arguments per descent step).  Both routes are held to double precision by the
sum-rule and recurrence tests in the test suite.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a soft accelerator
    njit = None

__all__ = ["bessel_j_table", "gamma_upper_regularized"]


def _miller_kernel(xv, L, start, cols, norm):
    """Backward recurrence over all arguments at once; fills cols and norm."""
    n_arg = xv.shape[0]
    for i in range(n_arg):
        x = xv[i]
        jp = 0.0
        jc = 1e-30
        nrm = 0.0
        for k in range(start, 0, -1):
            jm = (2.0 * k / x) * jc - jp
            jp = jc
            jc = jm
            if k - 1 <= L:
                cols[i, k - 1] = jc
            if (k - 1) % 2 == 0 and k - 1 > 0:
                nrm += 2.0 * jc
            if abs(jc) > 1e250:  # rescale before overflow
                jc *= 1e-250
                jp *= 1e-250
                nrm *= 1e-250
                for c in range(L + 1):
                    cols[i, c] *= 1e-250
        nrm += jc  # adds J_0
        for c in range(L + 1):
            cols[i, c] /= nrm
        norm[i] = nrm


if njit is not None:
    _miller_kernel = njit(cache=True)(_miller_kernel)


def bessel_j_table(x: np.ndarray, max_order: int) -> np.ndarray:
    """J_0(x)..J_max_order(x) for nonnegative arguments, shape (len(x), L+1).

    Miller's backward recurrence, normalized with J_0 + 2*sum_k J_{2k} = 1.
    Negative orders follow from J_{-n} = (-1)^n J_n at the call site.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("bessel_j_table requires x >= 0")
    L = int(max_order)
    out = np.zeros((x.size, L + 1))
    flat = x.ravel()
    small = flat < 1e-12
    out[small, 0] = 1.0
    big = ~small
    if np.any(big):
        xv = np.ascontiguousarray(flat[big])
        top = max(L, float(np.ceil(xv.max())))
        start = int(top + np.sqrt(40.0 * top)) + 20
        start += start % 2  # even start keeps the normalization sum aligned
        cols = np.zeros((xv.size, L + 1))
        norm = np.empty(xv.size)
        _miller_kernel(xv, L, start, cols, norm)
        out[big] = cols
    return out.reshape(x.shape + (L + 1,))


def gamma_upper_regularized(n: int, x: float) -> float:
    """Gamma(n+1, x)/n! for integer n >= 0 and any real x (negative allowed).

    Equals exp(-x) * sum_{k<=n} x^k/k!, the form that stays meaningful when
    x < 0 where the usual regularized routines are undefined.
    """
    if n < 0 or n != int(n):
        raise ValueError("order must be a nonnegative integer")
    term = 1.0
    total = 1.0
    for k in range(1, int(n) + 1):
        term *= x / k
        total += term
    return float(np.exp(-x) * total)
