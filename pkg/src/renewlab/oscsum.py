"""Oscillatory power-tail sums: the polylogarithm on the unit circle.

Everything here serves one evaluation: Li_g(e^{i theta}) for 0 < g < 1,
accurate to ~1e-13 absolute, uniformly in theta, vectorized over theta.
The characteristic function of a lattice law with power-tail increments
reduces to this function, and local-limit and eigenvalue checks need it at
up to ~1e5 points per call, nearly all with |theta| well below 1e-2.

The sum sum_{m>=1} m^-g e^{i m theta} is split at a cutoff J into a direct
part (z-power recurrence, vectorized) and a tail sum_{m>J}. The tail is an
Euler-Maclaurin expansion around the integral int_J+1^inf x^-g e^{i th x}dx
when |theta| is small enough for the Bernoulli corrections to converge
(the production regime), and an Abel-Plana contour integral otherwise
(|theta| up to pi, used by validation grids and single-point checks).

The leading integral needs I(A) = int_A^inf y^-g e^{iy} dy on A in
(0, inf); it is assembled from the closed form at A=0, a power series on
[0, 1], Gauss-Legendre panels on [1, 40], and the large-A asymptotic
series, with the regime boundaries chosen so neighboring routes overlap at
machine precision.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache

import numpy as np

from ._quad import gl_rule

__all__ = ["polylog_circle", "osc_tail_integral", "power_tail_sum"]

# B_2, B_4, ..., B_10 over (2r)!
_BERN_OVER_FACT = [
    1.0 / 6.0 / math.factorial(2),
    -1.0 / 30.0 / math.factorial(4),
    1.0 / 42.0 / math.factorial(6),
    -1.0 / 30.0 / math.factorial(8),
    5.0 / 66.0 / math.factorial(10),
]


def _poch(a: float, n: int) -> float:
    out = 1.0
    for j in range(n):
        out *= a + j
    return out


def _head_series(gamma: float, A) -> np.ndarray:
    """int_0^A y^-g e^{iy} dy for 0 < A <= 1, as a power series in A."""
    A = np.asarray(A, dtype=float)
    out = np.zeros(A.shape, dtype=complex)
    term_pow = A ** (1.0 - gamma)
    for m in range(30):
        coef = (1j**m) / (math.factorial(m) * (m + 1.0 - gamma))
        out += coef * term_pow
        term_pow = term_pow * A
    return out


@lru_cache(maxsize=64)
def _head_panel_rule(gamma: float, A: float):
    edges = np.arange(1.0, A, math.pi / 2.0)
    edges = np.append(edges, A)
    gx, gw = gl_rule(16)
    half = 0.5 * np.diff(edges)
    mid = edges[:-1] + half
    nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    wts = (half[:, None] * gw[None, :]).ravel()
    return nodes, wts


def osc_tail_integral(gamma: float, A: float) -> complex:
    """I(A) = int_A^inf y^-g e^{iy} dy for scalar A > 0."""
    if A > 40.0:
        # by-parts asymptotic, truncated where terms stop shrinking
        acc = 0.0 + 0.0j
        term = A**-gamma
        best = math.inf
        for s in range(60):
            contrib = ((-1j) ** s) * term
            if abs(term) > best:
                break
            best = abs(term)
            acc += contrib
            term *= (gamma + s) / A
            if term < 1e-18 * abs(acc):
                acc += ((-1j) ** (s + 1)) * term
                break
        return 1j * cmath.exp(1j * A) * acc
    full = math.gamma(1.0 - gamma) * cmath.exp(1j * math.pi * (1.0 - gamma) / 2.0)
    if A <= 1.0:
        return full - complex(_head_series(gamma, A))
    nodes, wts = _head_panel_rule(gamma, float(A))
    head = complex(_head_series(gamma, 1.0))
    head += complex(np.sum(wts * nodes**-gamma * np.exp(1j * nodes)))
    return full - head


def _osc_tail_integral_vec(gamma: float, A: np.ndarray) -> np.ndarray:
    """Vectorized I(A) for the production regime A <= 1 (scalar fallback otherwise)."""
    out = np.empty(A.shape, dtype=complex)
    small = A <= 1.0
    if np.any(small):
        full = math.gamma(1.0 - gamma) * cmath.exp(1j * math.pi * (1.0 - gamma) / 2.0)
        out[small] = full - _head_series(gamma, A[small])
    rest = np.flatnonzero(~small)
    for i in rest:
        out[i] = osc_tail_integral(gamma, float(A[i]))
    return out


def _g_derivative(gamma: float, theta: np.ndarray, M: float, order: int) -> np.ndarray:
    """d^order/dx^order of x^-g e^{i theta x} at x = M, vectorized over theta."""
    acc = np.zeros(theta.shape, dtype=complex)
    for j in range(order + 1):
        coef = (
            math.comb(order, j)
            * ((-1.0) ** j)
            * _poch(gamma, j)
            * M ** (-gamma - j)
        )
        acc += coef * (1j * theta) ** (order - j)
    return acc * np.exp(1j * theta * M)


def power_tail_sum(gamma: float, theta, M: int) -> np.ndarray:
    """T(M) = sum_{m>=M} m^-g e^{i m theta} for 0 < theta <= ~0.7 (vector theta).

    Euler-Maclaurin around the tail integral; the Bernoulli corrections
    shrink like (theta/2pi)^2 per order, which bounds the usable theta.
    """
    th = np.asarray(theta, dtype=float)
    A = th * M
    lead = th ** (gamma - 1.0) * _osc_tail_integral_vec(gamma, A)
    corr = 0.5 * _g_derivative(gamma, th, float(M), 0)
    for r, b in enumerate(_BERN_OVER_FACT, start=1):
        corr -= b * _g_derivative(gamma, th, float(M), 2 * r - 1)
    return lead + corr


def _abel_plana_tail(gamma: float, theta: float, M: int) -> complex:
    """T(M) by the Abel-Plana formula, valid for any 0 < theta < 2 pi.

    sum_{m>=M} g(m) = int_M^inf g + g(M)/2
                      + i int_0^inf [g(M+it) - g(M-it)] / (e^{2 pi t} - 1) dt
    with g analytic and decaying; for g(x) = x^-g e^{i theta x} the upper
    branch decays like e^{-theta t} and the lower grows like e^{theta t},
    beaten by the e^{2 pi t} denominator whenever theta < 2 pi.
    """
    lead = theta ** (gamma - 1.0) * osc_tail_integral(gamma, theta * M)
    half = 0.5 * M**-gamma * cmath.exp(1j * theta * M)

    t_hi = 40.0 / (2.0 * math.pi - theta)
    edges = np.geomspace(1e-6, t_hi, 40)
    edges = np.concatenate(([0.0], edges))
    gx, gw = gl_rule(16)
    half_w = 0.5 * np.diff(edges)
    mid = edges[:-1] + half_w
    t = (mid[:, None] + half_w[:, None] * gx[None, :]).ravel()
    wts = (half_w[:, None] * gw[None, :]).ravel()

    up = np.exp(-gamma * np.log(M + 1j * t)) * np.exp(-theta * t)
    dn = np.exp(-gamma * np.log(M - 1j * t)) * np.exp(theta * t)
    kernel = (up - dn) / np.expm1(2.0 * math.pi * t)
    contour = 1j * cmath.exp(1j * theta * M) * complex(np.sum(wts * kernel))
    return lead + half + contour


def _direct_sum(gamma: float, theta: np.ndarray, J: int) -> np.ndarray:
    """sum_{m=1}^{J} m^-g e^{i m theta} by a z-power recurrence."""
    z = np.exp(1j * theta)
    w = z.copy()
    acc = w.astype(complex)
    for m in range(2, J + 1):
        w = w * z
        acc += m**-gamma * w
    return acc


def polylog_circle(gamma: float, theta) -> np.ndarray:
    """Li_g(e^{i theta}) for theta in [-pi, pi], theta != 0, vectorized.

    theta = 0 is the divergence point of the series (the function's
    analytic continuation is finite there only for g > 1) and is rejected;
    callers special-case the z = 1 limit of their own expressions.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0,1)")
    arr = np.asarray(theta, dtype=float)
    scalar = arr.ndim == 0
    th = np.atleast_1d(arr).astype(float)
    if np.any(th == 0.0) or np.any(np.abs(th) > math.pi + 1e-12):
        raise ValueError("theta must be nonzero and within [-pi, pi]")
    out = np.empty(th.shape, dtype=complex)
    mag = np.abs(th)

    small = mag <= 0.04
    mid = (mag > 0.04) & (mag <= 0.7)
    large = mag > 0.7
    for mask, J in ((small, 64), (mid, 768)):
        if np.any(mask):
            t = mag[mask]
            out[mask] = _direct_sum(gamma, t, J) + power_tail_sum(gamma, t, J + 1)
    for i in np.flatnonzero(large):
        t = float(mag[i])
        out[i] = complex(_direct_sum(gamma, np.array([t]), 768)[0]) + _abel_plana_tail(
            gamma, t, 769
        )

    neg = th < 0
    out[neg] = np.conj(out[neg])
    return complex(out[0]) if scalar else out
