"""Pure-power normalizing sequences and the weighted grid sums they control.

A counting normalizer a(n) = scale * n^index (index in (0,1)) fixes three
derived objects used everywhere downstream:

* its inverse a_inv(k) = (k/scale)^(1/index), the time scale at which k
  events have typically accumulated;
* the occupation rate u(n) = index * a(n) / n, the n-th term weight in
  tied-down sums;
* the grid x_{k,n} = n / a_inv(k), which turns sums over event counts k
  into Riemann sums against the one-sided stable density.

The module evaluates both sides of that Riemann approximation: the exact
weighted lattice sum over k (with an arithmetic-progression filter) and
the limiting integral it converges to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._quad import gl_rule
from .stable import StableFamily, stable_density
from .weights import resolve_weight

__all__ = [
    "RegVarying",
    "rv_eval",
    "rv_inverse",
    "u_rate",
    "LatticeWindowSum",
    "OrbitWindowSum",
    "lemma22_sum",
    "lemma22_limit",
    "equidist_average",
]


@dataclass(frozen=True)
class RegVarying:
    """a(n) = scale * n^index with index in (0,1) and scale > 0."""

    index: float
    scale: float

    def __post_init__(self):
        if not (math.isfinite(self.index) and 0.0 < self.index < 1.0):
            raise ValueError(f"index must lie in (0,1), got {self.index}")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ValueError(f"scale must be positive, got {self.scale}")

    def __call__(self, n):
        return rv_eval(self, n)

    def inverse(self, k):
        return rv_inverse(self, k)

    def rate(self, n):
        return u_rate(self, n)


def rv_eval(a: RegVarying, n):
    """a(n) for real n > 0 (vectorized)."""
    arr = np.asarray(n, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("a(n) is defined for n > 0")
    out = a.scale * np.power(arr, a.index)
    return float(out) if arr.ndim == 0 else out


def rv_inverse(a: RegVarying, k):
    """The exact functional inverse: rv_inverse(a, rv_eval(a, n)) == n."""
    arr = np.asarray(k, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("the inverse is defined for k > 0")
    out = np.power(arr / a.scale, 1.0 / a.index)
    return float(out) if arr.ndim == 0 else out


def u_rate(a: RegVarying, n):
    """u(n) = index * a(n) / n, the tied-down weight of a single time slot."""
    arr = np.asarray(n, dtype=float)
    out = a.index * a.scale * np.power(arr, a.index - 1.0)
    return float(out) if arr.ndim == 0 else out


class LatticeWindowSum(NamedTuple):
    """Value of a windowed grid sum, with an explicit empty-window flag.

    An empty window (no grid point lands in [c, d] with an admissible
    residue) yields value=nan and empty=True rather than a silent zero.
    """

    value: float
    terms: int
    empty: bool


def lemma22_sum(
    a: RegVarying,
    p: int,
    xi: int,
    interval: tuple[float, float],
    g,
    c: float,
    d: float,
    n: int,
) -> LatticeWindowSum:
    """Exact windowed grid sum converging to lemma22_limit as n grows.

    Computes (1/u(n)) * sum over k = 1..n of
        g(x_{k,n}^(-index)) * p * f_Z(x_{k,n}) / a_inv(k)
    restricted to grid points x_{k,n} = n / a_inv(k) inside [c, d] and to
    slots where (n - k*xi) mod p falls in the half-open sub-interval
    `interval` of [0, p). Terms are accumulated with exact (fsum) summation
    so the result is independent of any batching of the work.
    """
    if p < 1 or int(p) != p:
        raise ValueError("p must be a positive integer")
    if math.gcd(int(xi), int(p)) != 1:
        raise ValueError(f"xi={xi} and p={p} must be coprime")
    if not (0.0 < c < d):
        raise ValueError("need 0 < c < d")
    if n < 1:
        raise ValueError("n must be >= 1")
    p = int(p)
    xi = int(xi)
    w_lo, w_hi = float(interval[0]), float(interval[1])
    if not (0.0 <= w_lo < w_hi <= p):
        raise ValueError(f"interval must be a nonempty sub-interval of [0,{p})")
    gw = resolve_weight(g)
    fam = StableFamily(a.index)

    # x_{k,n} in [c, d]  <=>  a(n/d) <= k <= a(n/c)
    k_min = max(1, math.ceil(rv_eval(a, n / d) - 1e-9))
    k_max = min(n, math.floor(rv_eval(a, n / c) + 1e-9))
    if k_max < k_min:
        return LatticeWindowSum(math.nan, 0, True)

    k = np.arange(k_min, k_max + 1, dtype=np.int64)
    r = (n - k * xi) % p
    k = k[(r >= w_lo) & (r < w_hi)]
    x = n / rv_inverse(a, k.astype(float))
    inside = (x >= c) & (x <= d)
    k, x = k[inside], x[inside]
    if k.size == 0:
        return LatticeWindowSum(math.nan, 0, True)

    gamma = a.index
    terms = gw(x**-gamma) * p * stable_density(fam, x) / rv_inverse(a, k.astype(float))
    total = math.fsum(terms.tolist())
    return LatticeWindowSum(total / u_rate(a, n), int(k.size), False)


def lemma22_limit(
    family: StableFamily,
    g,
    lo: float,
    hi: float,
    interval_length: float,
) -> float:
    """interval_length * Int_lo^hi g(x^(-gamma)) x^(-gamma) f_Z(x) dx.

    Fixed-panel Gauss-Legendre on a log-spaced subdivision; weight kinks
    (clamp) are inserted as panel edges so the rule keeps spectral accuracy.
    """
    if not (0.0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    gw = resolve_weight(g)
    gamma = family.gamma

    edges = set(np.geomspace(lo, hi, 24).tolist())
    for y_kink in gw.kink_points():
        x_kink = y_kink ** (-1.0 / gamma)
        if lo < x_kink < hi:
            edges.add(x_kink)
    edges = np.array(sorted(edges))

    gx, gwts = gl_rule(16)
    half = 0.5 * np.diff(edges)
    mid = edges[:-1] + half
    nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    wts = (half[:, None] * gwts[None, :]).ravel()
    vals = gw(nodes**-gamma) * nodes**-gamma * stable_density(family, nodes)
    return interval_length * float((wts * vals).sum())


class OrbitWindowSum(NamedTuple):
    """Weighted visit mass of an orbit window, with its equidistribution target."""

    value: float
    companion: float


def equidist_average(
    weights,
    xi: float,
    p: float,
    window: tuple[float, float],
    x0: float = 0.0,
) -> OrbitWindowSum:
    """Weighted count of orbit visits to a window on the circle of length p.

    Returns sum over n >= 1 of weights[n-1] * 1(x0 + n*xi mod p in window),
    together with the companion value (total weight) * |window| / p that
    equidistribution predicts. The slow-variation hypotheses on the weights
    are the caller's responsibility; they are not enforced here.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a nonempty 1-d sequence")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if not (p > 0):
        raise ValueError("p must be positive")
    w_lo, w_hi = float(window[0]), float(window[1])
    if not (0.0 <= w_lo <= w_hi <= p):
        raise ValueError(f"window must be a sub-interval of [0,{p})")
    n = np.arange(1, w.size + 1, dtype=float)
    pos = np.mod(x0 + n * xi, p)
    hit = (pos >= w_lo) & (pos < w_hi)
    value = math.fsum(w[hit].tolist())
    companion = math.fsum(w.tolist()) * (w_hi - w_lo) / p
    return OrbitWindowSum(value, companion)
