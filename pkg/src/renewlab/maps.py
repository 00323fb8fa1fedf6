"""Intermittent interval maps and their induced return statistics.

Two families of maps of [0,1], each with a neutral fixed point at the
origin where the local behavior x -> x (1 + const * x^(1/gamma)) makes the
return time to the right half interval heavy tailed with index gamma:

    T family   x (1 + (2 x)^(1/gamma)) on [0, 1/2),  2 x - 1 on [1/2, 1]
    R family   x (1 + (kappa x)^(1/gamma)) mod 1

Everything here is organized around the inducing interval [1/2, 1]: exact
branch evaluation (``map_step``), the first-return map (``first_return``,
``return_time_sample``, ``return_time_tail``), an Ulam discretization of
the induced transfer operator (``ulam_matrix``), the shape of the infinite
invariant density (``infinite_density_profile``), and the occupation-time
estimators whose limit laws live in ``stable`` (``darling_kac_empirical``,
``map_tied_down_estimate``).

For the T family the left branch is invertible with a one-sided Newton
iteration, which gives the preimage table q_m = (left branch)^(-m)(1/2).
A point of [0, 1/2) in [q_{m+1}, q_m) climbs back to [1/2, 1] in exactly
m+1 steps, so the table converts return-time questions into table lookups
and is the backbone of the samplers and of the deep-orbit closure in the
Ulam construction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Union

import numpy as np

from .backend import USING_NUMBA, njit
from .errors import NonReturnError, NumericalError
from .rng import stream_keys_block, uniform_block, uniform_keys
from .stable import StableFamily, ml_density, tied_down_expect
from .weights import Weight, resolve_weight

__all__ = [
    "MapSpec",
    "InducedOrbit",
    "UlamMatrix",
    "DensityProfile",
    "DarlingKacResult",
    "TiedDownReport",
    "map_step",
    "first_return",
    "return_time_sample",
    "return_time_tail",
    "ulam_matrix",
    "infinite_density_profile",
    "occupation_sample",
    "darling_kac_empirical",
    "map_tied_down_estimate",
    "fit_power_exponent",
]

OMEGA = (0.5, 1.0)

# Depth of the preimage table behind the deep-orbit closure. Landing
# histograms drift by well under 1e-4 per bin beyond depth ~1000, so any
# start below q[_PROFILE_DEPTH] can be routed through one tabulated
# landing profile instead of being iterated.
_PROFILE_DEPTH = 4096

# Default preimage-table depth for the return-time sampler; samples that
# would exceed it are reported right-censored as depth + 1.
_TABLE_DEPTH = 1 << 17

# Extended precision threshold for scalar orbits: below this the float64
# increment x (2x)^(1/gamma) can fall under one ulp of x and the climb
# would silently stall.
_TINY = 2.0 ** -30


# ----------------------------------------------------------------------
# map specification
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class MapSpec:
    """One map of [0,1]: family tag, tail index gamma, R-family slope kappa.

    kappa is only meaningful for the R family; it is validated either way
    so that a spec is always printable and hashable.
    """

    family: str
    gamma: float
    kappa: int = 2

    def __post_init__(self):
        if self.family not in ("T", "R"):
            raise ValueError(f"family must be 'T' or 'R', got {self.family!r}")
        g = self.gamma
        if not (isinstance(g, (int, float)) and math.isfinite(g)):
            raise ValueError(f"gamma must be a finite real, got {g!r}")
        if not 0.0 < g <= 1.0:
            raise ValueError(f"gamma must lie in (0,1], got {g}")
        object.__setattr__(self, "gamma", float(g))
        k = self.kappa
        if int(k) != k or k < 2:
            raise ValueError(f"kappa must be an integer >= 2, got {k!r}")
        object.__setattr__(self, "kappa", int(k))
        _check_branches(self)

    @property
    def exponent(self) -> float:
        """The branch exponent 1/gamma."""
        return 1.0 / self.gamma

    def step(self, x):
        return map_step(self, x)

    def first_return(self, x, cap: int = 1_000_000) -> "InducedOrbit":
        return first_return(self, x, cap)


def _check_branches(spec: MapSpec) -> None:
    """Construction-time sanity: each branch strictly increasing on a grid."""
    s = 1.0 / spec.gamma
    if spec.family == "T":
        left = np.linspace(0.0, 0.5, 4097, endpoint=False)
        vals = left * (1.0 + (2.0 * left) ** s)
        pieces = [vals, 2.0 * np.linspace(0.5, 1.0, 4097) - 1.0]
    else:
        x = np.linspace(0.0, 1.0, 8193)
        pieces = [x * (1.0 + (spec.kappa * x) ** s)]
    for vals in pieces:
        if not np.all(np.isfinite(vals)):
            raise ValueError("branch formula produced non-finite values")
        if np.any(np.diff(vals) <= 0.0):
            raise ValueError("branch is not strictly monotone on its domain")


def map_step(spec: MapSpec, x):
    """One application of the map. Scalar in, scalar out; arrays vectorize.

    Scalars are evaluated through the same one-element vector path, so a
    scalar call and an array call agree to the last bit (0-d and 1-d
    power go through different numpy loops otherwise).
    """
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((arr < 0.0) | (arr > 1.0)) or not np.all(np.isfinite(arr)):
        raise ValueError("x must lie in [0,1]")
    s = spec.exponent
    if spec.family == "T":
        lo = arr < 0.5
        out = np.where(lo, arr * (1.0 + (2.0 * arr) ** s), 2.0 * arr - 1.0)
    else:
        lift = arr * (1.0 + (spec.kappa * arr) ** s)
        out = lift - np.floor(lift)
    if not np.all(np.isfinite(out)):
        raise NumericalError("branch evaluation produced non-finite values", math.inf, 0.0)
    return float(out[0]) if np.ndim(x) == 0 else out


# ----------------------------------------------------------------------
# first return to [1/2, 1]
# ----------------------------------------------------------------------


class InducedOrbit(NamedTuple):
    """One first-return event of the induced map on [1/2, 1]."""

    start: float
    phi: int
    landing: float


def first_return(spec: MapSpec, x, cap: int = 1_000_000) -> InducedOrbit:
    """Iterate the exact map from x in [1/2,1] until it re-enters [1/2,1].

    Near the neutral fixed point the float64 increment of the left branch
    can drop below one ulp, so T-family climbs switch to longdouble while
    the point is under 2^-30. Orbits that do not return within ``cap``
    steps raise NonReturnError; the origin itself is fixed, so x = 1/2
    (which maps straight onto it) fails immediately rather than after cap
    wasted iterations.
    """
    x = float(x)
    if not 0.5 <= x <= 1.0:
        raise ValueError("first_return starts on [1/2,1]")
    cap = int(cap)
    if cap < 1:
        raise ValueError("cap must be a positive integer")
    s = spec.exponent
    y = map_step(spec, x)
    phi = 1
    while y < 0.5:
        if phi >= cap:
            raise NonReturnError(cap, x)
        if spec.family == "T":
            if y == 0.0:
                raise NonReturnError(cap, x)
            if y < _TINY:
                w = np.longdouble(y)
                while w < _TINY and phi < cap:
                    w = w * (1.0 + (2.0 * w) ** np.longdouble(s))
                    phi += 1
                y = float(w)
                continue
            y = y * (1.0 + (2.0 * y) ** s)
        else:
            v = y * (1.0 + (spec.kappa * y) ** s)
            y = v - math.floor(v)
        phi += 1
    return InducedOrbit(x, phi, float(y))


# ----------------------------------------------------------------------
# preimage table of the T-family left branch
# ----------------------------------------------------------------------


@njit
def _qtable_fill(s: float, out: np.ndarray) -> None:  # pragma: no cover
    # out[m] solves x (1 + (2x)^s) = out[m-1]; Newton from the right
    # converges monotonically because the branch is convex increasing.
    q = 0.5
    out[0] = q
    for m in range(1, out.shape[0]):
        x = q
        for _ in range(64):
            t = (2.0 * x) ** s
            dx = (x * (1.0 + t) - q) / (1.0 + (1.0 + s) * t)
            x -= dx
            if abs(dx) <= 4e-17 * x:
                break
        out[m] = x
        q = x


@lru_cache(maxsize=8)
def _q_table(gamma: float, depth: int) -> np.ndarray:
    """q[m] = m-fold left-branch preimage of 1/2, for m = 0 .. depth."""
    out = np.empty(depth + 1)
    _qtable_fill(1.0 / gamma, out)
    out.setflags(write=False)
    return out


def return_time_tail(spec: MapSpec, depth: int = _TABLE_DEPTH) -> np.ndarray:
    """tail[m] = Lebesgue fraction of [1/2,1] with return time > m.

    T family only: tail[0] = 1, tail[1] = 1/2 (the right half of the
    inducing interval returns in one step), and tail[m+1] = q_m because a
    start x returns after more than m+1 steps exactly when 2x-1 < q_m.
    """
    if spec.family != "T":
        raise ValueError("the closed return-time table exists only for the T family")
    q = _q_table(spec.gamma, int(depth))
    return np.concatenate(([1.0], q))


def return_time_sample(
    spec: MapSpec,
    count: int,
    seed: int = 0,
    depth: int = _TABLE_DEPTH,
    cap: int = 1_000_000,
) -> np.ndarray:
    """Return times of ``count`` uniform starts on [1/2,1], right-censored.

    T family: exact lookup in the preimage table, which resolves return
    times up to depth + 1; longer ones are reported as depth + 2.
    R family: direct orbit iteration, censored at ``cap`` and reported
    as cap + 1.
    """
    count = int(count)
    if count < 1:
        raise ValueError("count must be positive")
    keys = stream_keys_block(seed, count)
    u = uniform_keys(keys, 0)
    if spec.family == "T":
        depth = int(depth)
        q = _q_table(spec.gamma, depth)
        # u plays the role of 2x-1, uniform on [0,1)
        idx = np.searchsorted(-q, -u, side="left")
        return (idx + 1).astype(np.int64)
    cap = int(cap)
    x0 = 0.5 + 0.5 * u
    out = np.empty(count, dtype=np.int64)
    if USING_NUMBA:
        _return_iter_kernel(x0, spec.exponent, float(spec.kappa), cap, out)
    else:
        out = _return_iter_block(x0, spec.exponent, float(spec.kappa), cap)
    return out


@njit
def _return_iter_kernel(x0, s, kap, cap, out):  # pragma: no cover
    for i in range(x0.shape[0]):
        x = x0[i]
        phi = cap + 1
        if s == 2.0:
            for j in range(cap):
                v = kap * x
                v = x * (1.0 + v * v)
                x = v - math.floor(v)
                if x >= 0.5:
                    phi = j + 1
                    break
        else:
            for j in range(cap):
                v = x * (1.0 + (kap * x) ** s)
                x = v - math.floor(v)
                if x >= 0.5:
                    phi = j + 1
                    break
        out[i] = phi


def _return_iter_block(x0, s, kap, cap):
    out = np.full(x0.shape[0], cap + 1, dtype=np.int64)
    x = x0.copy()
    alive = np.arange(x0.shape[0])
    for j in range(cap):
        v = x[alive] * (1.0 + (kap * x[alive]) ** s)
        x[alive] = v - np.floor(v)
        done = x[alive] >= 0.5
        if np.any(done):
            out[alive[done]] = j + 1
            alive = alive[~done]
            if alive.size == 0:
                break
    return out


# ----------------------------------------------------------------------
# Ulam discretization of the induced map
# ----------------------------------------------------------------------


@njit
def _climb_kernel(y, s, limit, out):  # pragma: no cover
    # y in (0, 1/2), guaranteed to exit within `limit` left-branch steps;
    # -1 marks the defensive failure path.
    for i in range(y.shape[0]):
        v = y[i]
        ok = False
        if s == 2.0:
            for _ in range(limit):
                if v >= 0.5:
                    ok = True
                    break
                v = v * (1.0 + 4.0 * v * v)
        else:
            for _ in range(limit):
                if v >= 0.5:
                    ok = True
                    break
                v = v * (1.0 + (2.0 * v) ** s)
        out[i] = v if ok else -1.0


def _climb_block(y, s, limit):
    v = y.copy()
    out = np.full(y.shape[0], -1.0)
    alive = np.arange(y.shape[0])
    for _ in range(limit):
        if alive.size == 0:
            break
        done = v[alive] >= 0.5
        if np.any(done):
            out[alive[done]] = v[alive[done]]
            alive = alive[~done]
            if alive.size == 0:
                break
        v[alive] = v[alive] * (1.0 + (2.0 * v[alive]) ** s)
    return out


@lru_cache(maxsize=8)
def _landing_profile(gamma: float, bins: int) -> tuple[np.ndarray, float]:
    """Limit landing histogram of deep T-family starts, on `bins` cells.

    Pushes a fine uniform grid on the depth-_PROFILE_DEPTH preimage
    interval through the left branch; every point lands in [1/2,1) after
    exactly _PROFILE_DEPTH + 1 steps. The histogram converges in depth
    much faster than the closure needs (the flow heuristic z^(-1-1/gamma)
    is off by tens of percent, so the tabulated profile is the ground
    truth here). Returns (cell masses summing to 1, depth threshold
    q[_PROFILE_DEPTH]).
    """
    q = _q_table(gamma, _PROFILE_DEPTH + 1)
    lo, hi = q[_PROFILE_DEPTH + 1], q[_PROFILE_DEPTH]
    npts = max(1 << 16, 512 * bins)
    y = np.linspace(lo, hi, npts + 2)[1:-1].copy()
    s = 1.0 / gamma
    if s == 2.0:
        for _ in range(_PROFILE_DEPTH + 1):
            y = y * (1.0 + 4.0 * y * y)
    else:
        for _ in range(_PROFILE_DEPTH + 1):
            y = y * (1.0 + (2.0 * y) ** s)
    stray = y < 0.5
    if np.any(stray):
        y[stray] = y[stray] * (1.0 + (2.0 * y[stray]) ** s)
    counts, _ = np.histogram(y, bins=np.linspace(0.5, 1.0, bins + 1))
    masses = counts / counts.sum()
    masses.setflags(write=False)
    return masses, float(q[_PROFILE_DEPTH])


class UlamMatrix:
    """Row-stochastic discretization of the induced map on [1/2,1].

    ``matrix[i, j]`` estimates the Lebesgue fraction of bin i whose
    first-return landing lies in bin j. ``warning`` carries the
    construction warning when the non-return rate exceeded 1e-6, else
    None.
    """

    def __init__(self, spec: MapSpec, edges: np.ndarray, matrix: np.ndarray,
                 points_per_bin: int, seed: int, warning: Optional[str]):
        self.spec = spec
        self.edges = edges
        self.matrix = matrix
        self.points_per_bin = points_per_bin
        self.seed = seed
        self.warning = warning
        self._decomp: Optional[tuple[np.ndarray, float]] = None

    @property
    def bins(self) -> int:
        return self.matrix.shape[0]

    def _eig(self) -> tuple[np.ndarray, float]:
        if self._decomp is None:
            w, v = np.linalg.eig(self.matrix.T)
            order = np.argsort(-np.abs(w))
            lead = order[0]
            pi = np.real(v[:, lead])
            if pi.sum() < 0.0:
                pi = -pi
            pi = np.clip(pi, 0.0, None)
            pi = pi / pi.sum()
            # polish: the eig residual of a nonnegative matrix can be
            # larger than the power-iteration fixed point
            for _ in range(256):
                nxt = pi @ self.matrix
                nxt = nxt / nxt.sum()
                if np.max(np.abs(nxt - pi)) < 1e-15:
                    pi = nxt
                    break
                pi = nxt
            slem = float(np.abs(w[order[1]])) if w.shape[0] > 1 else 0.0
            self._decomp = (pi, slem)
        return self._decomp

    def stationary(self) -> np.ndarray:
        """Left fixed probability vector (all entries >= 0)."""
        return self._eig()[0].copy()

    def slem(self) -> float:
        """Second largest eigenvalue modulus."""
        return self._eig()[1]


def ulam_matrix(
    spec: MapSpec,
    bins: int,
    points_per_bin: int = 1000,
    seed: int = 0,
    cap: int = 1_000_000,
) -> UlamMatrix:
    """Ulam matrix of the induced map by per-bin stratified sampling.

    Each bin contributes ``points_per_bin`` stratified random starts (one
    uniform per stratum, streams keyed by (seed, bin)). T-family starts
    below the tabulated preimage threshold are not iterated; their row
    mass is spread with the limit landing profile of deep orbits, which
    is what keeps rows stochastic without a non-return tail. R-family
    orbits are iterated up to ``cap``; censored points are dropped from
    their row (renormalizing it) and counted toward the non-return rate.
    """
    bins = int(bins)
    if bins < 16:
        raise ValueError("bins must be at least 16")
    ppb = int(points_per_bin)
    if ppb < 1000:
        raise ValueError("points_per_bin must be at least 1000")
    edges = np.linspace(0.5, 1.0, bins + 1)
    width = 0.5 / bins
    s = spec.exponent
    counts = np.zeros((bins, bins))
    censored_total = 0
    if spec.family == "T":
        profile, y_deep = _landing_profile(spec.gamma, bins)
    strata = (np.arange(ppb) + 0.0) / ppb
    keys = stream_keys_block(seed, bins)
    for i in range(bins):
        u = uniform_block(int(keys[i]), 0, ppb)
        x = edges[i] + (strata + u / ppb) * width
        if spec.family == "T":
            y0 = 2.0 * x - 1.0
            direct = y0 >= 0.5
            deep = y0 < y_deep
            mid = ~(direct | deep)
            if np.any(direct):
                _deposit(counts[i], y0[direct], bins)
            n_deep = int(np.count_nonzero(deep))
            if n_deep:
                counts[i] += n_deep * profile
            if np.any(mid):
                if USING_NUMBA:
                    landed = np.empty(int(np.count_nonzero(mid)))
                    _climb_kernel(y0[mid], s, _PROFILE_DEPTH + 8, landed)
                else:
                    landed = _climb_block(y0[mid], s, _PROFILE_DEPTH + 8)
                fail = landed < 0.0
                if np.any(fail):
                    counts[i] += int(np.count_nonzero(fail)) * profile
                    landed = landed[~fail]
                _deposit(counts[i], landed, bins)
            counts[i] /= ppb
        else:
            if USING_NUMBA:
                landed = np.empty(ppb)
                _r_landing_kernel(x, s, float(spec.kappa), cap, landed)
            else:
                landed = _r_landing_block(x, s, float(spec.kappa), cap)
            good = landed >= 0.0
            n_good = int(np.count_nonzero(good))
            censored_total += ppb - n_good
            if n_good == 0:
                raise NumericalError(
                    f"every start in bin {i} failed to return within the cap",
                    float(ppb), float(cap),
                )
            _deposit(counts[i], landed[good], bins)
            counts[i] /= n_good
    warning = None
    rate = censored_total / (bins * ppb)
    if rate > 1e-6:
        warning = (
            f"non-return rate {rate:.3e} above 1e-06 at cap={cap}; "
            "censored starts were dropped from their rows"
        )
        warnings.warn(warning, RuntimeWarning, stacklevel=2)
    return UlamMatrix(spec, edges, counts, ppb, seed, warning)


def _deposit(row: np.ndarray, landings: np.ndarray, bins: int) -> None:
    j = np.minimum((2.0 * bins * (landings - 0.5)).astype(np.int64), bins - 1)
    np.add.at(row, np.maximum(j, 0), 1.0)


@njit
def _r_landing_kernel(x0, s, kap, cap, out):  # pragma: no cover
    for i in range(x0.shape[0]):
        x = x0[i]
        out[i] = -1.0
        for _ in range(cap):
            v = x * (1.0 + (kap * x) ** s)
            x = v - math.floor(v)
            if x >= 0.5:
                out[i] = x
                break


def _r_landing_block(x0, s, kap, cap):
    out = np.full(x0.shape[0], -1.0)
    x = x0.copy()
    alive = np.arange(x0.shape[0])
    for _ in range(cap):
        if alive.size == 0:
            break
        v = x[alive] * (1.0 + (kap * x[alive]) ** s)
        x[alive] = v - np.floor(v)
        done = x[alive] >= 0.5
        if np.any(done):
            out[alive[done]] = x[alive][done]
            alive = alive[~done]
    return out


# ----------------------------------------------------------------------
# infinite invariant density (full-map transfer operator on graded bins)
# ----------------------------------------------------------------------


class DensityProfile(NamedTuple):
    """Stabilized invariant-density iterate, normalized to mean 1 on [1/2,1]."""

    x: np.ndarray
    density: np.ndarray
    exponent: float
    sup_diff: float
    iters: int


_OCTAVES = 14
_FIT_WINDOW = (1e-3, 1e-1)


def _graded_edges(bins: int) -> np.ndarray:
    """[0, 2^-_OCTAVES] floor bin, then `bins` uniform cells per octave."""
    parts = [np.array([0.0])]
    for k in range(_OCTAVES - 1, -1, -1):
        lo = 2.0 ** -(k + 1)
        parts.append(lo + (lo / bins) * np.arange(bins + 1))
    edges = np.unique(np.concatenate(parts))
    edges[-1] = 1.0
    return edges


def _full_map_matrix(spec: MapSpec, edges: np.ndarray) -> np.ndarray:
    """Row-stochastic mass-transport matrix of the full map on `edges`.

    Works branch by branch through the inverse of the (monotone) lift,
    evaluated on every cell edge with a vectorized Newton iteration, so
    entry (i, j) is exactly |bin_i ∩ preimage(bin_j)| / |bin_i| up to the
    Newton tolerance.
    """
    s = spec.exponent
    n = edges.shape[0] - 1
    mat = np.zeros((n, n))
    widths = np.diff(edges)
    if spec.family == "T":
        branches = [
            (_left_inverse(edges, s), None),
            ((edges + 1.0) / 2.0, None),
        ]
    else:
        kap = float(spec.kappa)
        top = 1.0 * (1.0 + kap ** s)
        nb = int(math.ceil(top - 1e-12))
        branches = []
        for j in range(nb):
            target = np.minimum(edges + j, top)
            branches.append((_lift_inverse(target, s, kap), None))
    for pre, _ in branches:
        lo_idx = np.searchsorted(edges, pre[:-1], side="right") - 1
        hi_idx = np.searchsorted(edges, pre[1:], side="left")
        for j in range(n):
            a, b = pre[j], pre[j + 1]
            if b <= a:
                continue
            i0, i1 = lo_idx[j], max(hi_idx[j] - 1, lo_idx[j])
            for i in range(i0, i1 + 1):
                ov = min(b, edges[i + 1]) - max(a, edges[i])
                if ov > 0.0:
                    mat[i, j] += ov / widths[i]
    return mat


def _left_inverse(targets: np.ndarray, s: float) -> np.ndarray:
    """Vectorized inverse of x (1 + (2x)^s) on [0,1], Newton from the right."""
    x = np.minimum(targets, 0.5)
    for _ in range(80):
        t = (2.0 * x) ** s
        dx = (x * (1.0 + t) - targets) / (1.0 + (1.0 + s) * t)
        x = x - dx
        if np.max(np.abs(dx)) <= 1e-16:
            break
    return np.clip(x, 0.0, 0.5)


def _lift_inverse(targets: np.ndarray, s: float, kap: float) -> np.ndarray:
    """Vectorized inverse of the R-family lift x (1 + (kappa x)^s) on [0,1]."""
    x = np.clip(targets / (1.0 + kap ** s) + 1e-3, 1e-12, 1.0)
    for _ in range(120):
        t = (kap * x) ** s
        dx = (x * (1.0 + t) - targets) / (1.0 + (1.0 + s) * t)
        x = np.clip(x - dx, 0.0, 1.0)
        if np.max(np.abs(dx)) <= 1e-15:
            break
    return x


def fit_power_exponent(x: np.ndarray, y: np.ndarray,
                       window: Optional[tuple[float, float]] = None) -> float:
    """Least-squares slope of log y against log x, optionally windowed."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0.0) & (y > 0.0)
    if window is not None:
        keep &= (x >= window[0]) & (x <= window[1])
    if np.count_nonzero(keep) < 2:
        raise ValueError("fewer than two positive points in the fit window")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def infinite_density_profile(spec: MapSpec, bins: int = 48,
                             iters: int = 200_000) -> DensityProfile:
    """Shape of the infinite invariant density by transfer-operator iteration.

    Iterates the full-map Ulam operator (uniform cells within octaves,
    octave widths halving toward 0, one floor cell below 2^-14) on the
    constant function, renormalizing every iterate to mean 1 on [1/2,1],
    and fits the power-law exponent on the window [1e-3, 1e-1]. The
    divergence at the origin means mass keeps draining into the floor
    cell; the profile above it stabilizes, and the last sup-norm change
    on [1/4,1] must come in under 1e-4 or NumericalError is raised.
    """
    bins = int(bins)
    if bins < 8:
        raise ValueError("bins must be at least 8 per octave")
    iters = int(iters)
    if iters < 2:
        raise ValueError("iters must be at least 2")
    edges = _graded_edges(bins)
    widths = np.diff(edges)
    centers = np.sqrt(edges[:-1] * np.maximum(edges[1:], 1e-300))
    mat = _full_map_matrix(spec, edges)
    try:
        from scipy.sparse import csr_matrix

        op = csr_matrix(mat.T)
    except ImportError:  # pragma: no cover
        op = mat.T
    omega = edges[:-1] >= 0.5
    bulk = edges[:-1] >= 0.25
    mass = widths.copy()
    prev_density = None
    sup_diff = math.inf
    for k in range(iters):
        mass = op @ mass
        mass = mass / (2.0 * mass[omega].sum())
        if k >= iters - 2:
            density = mass / widths
            if prev_density is not None:
                sup_diff = float(np.max(np.abs(density[bulk] - prev_density[bulk])))
            prev_density = density
    density = mass / widths
    if not math.isfinite(sup_diff) or sup_diff >= 1e-4:
        raise NumericalError(
            f"density iterate did not stabilize on [1/4,1] after {iters} steps",
            sup_diff,
            1e-4,
        )
    expo = fit_power_exponent(centers, density, _FIT_WINDOW)
    return DensityProfile(centers, density, expo, sup_diff, iters)


# ----------------------------------------------------------------------
# occupation statistics of the inducing interval
# ----------------------------------------------------------------------


class DarlingKacResult(NamedTuple):
    """Kolmogorov distance to the normalized occupation law, and its scale."""

    ks_distance: float
    a_hat: float


@njit
def _occupation_kernel(x0, n, fam, s, kap, out):  # pragma: no cover
    for t in range(x0.shape[0]):
        x = x0[t]
        c = 0
        if fam == 0 and s == 2.0:
            for _ in range(n):
                if x >= 0.5:
                    c += 1
                    x = 2.0 * x - 1.0
                else:
                    x = x * (1.0 + 4.0 * x * x)
        elif fam == 0:
            for _ in range(n):
                if x >= 0.5:
                    c += 1
                    x = 2.0 * x - 1.0
                else:
                    x = x * (1.0 + (2.0 * x) ** s)
        elif s == 2.0:
            for _ in range(n):
                if x >= 0.5:
                    c += 1
                v = kap * x
                v = x * (1.0 + v * v)
                x = v - math.floor(v)
        else:
            for _ in range(n):
                if x >= 0.5:
                    c += 1
                v = x * (1.0 + (kap * x) ** s)
                x = v - math.floor(v)
        out[t] = c


def _occupation_block(x0, n, fam, s, kap):
    x = x0.copy()
    c = np.zeros(x0.shape[0], dtype=np.int64)
    for _ in range(n):
        hit = x >= 0.5
        c += hit
        if fam == 0:
            x = np.where(hit, 2.0 * x - 1.0, x * (1.0 + (2.0 * x) ** s))
        else:
            v = x * (1.0 + (kap * x) ** s)
            x = v - np.floor(v)
    return c


def occupation_sample(spec: MapSpec, n: int, trials: int, seed: int = 0) -> np.ndarray:
    """Occupation counts of [1/2,1] over n steps, one int64 per start.

    Starts are uniform on [1/2,1] in independent seeded streams. This is
    the raw sample behind ``darling_kac_empirical``; it is public so data
    exports can histogram the same orbits the verdict was computed from.
    """
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be positive")
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    keys = stream_keys_block(seed, trials)
    x0 = 0.5 + 0.5 * uniform_keys(keys, 0)
    fam = 0 if spec.family == "T" else 1
    if USING_NUMBA:
        out = np.empty(trials, dtype=np.int64)
        _occupation_kernel(x0, n, fam, spec.exponent, float(spec.kappa), out)
        return out
    return _occupation_block(x0, n, fam, spec.exponent, float(spec.kappa))


def _ml_cdf_grid(gamma: float, y_max: float) -> tuple[np.ndarray, np.ndarray]:
    """CDF of the mean-1 occupation limit law on a dense grid, by quadrature."""
    fam = StableFamily(gamma)
    grid = np.linspace(0.0, max(y_max, 1.0), 8193)
    dens = np.empty_like(grid)
    dens[1:] = ml_density(fam, grid[1:])
    dens[0] = dens[1]
    cdf = np.concatenate(([0.0], np.cumsum((dens[1:] + dens[:-1]) * 0.5 * np.diff(grid))))
    return grid, np.minimum(cdf, 1.0)


def darling_kac_empirical(spec: MapSpec, n: int, trials: int,
                          seed: int = 0) -> DarlingKacResult:
    """Occupation counts of [1/2,1] over n steps against their limit law.

    Counts S = #{0 <= j < n : orbit step j in [1/2,1]} over uniform starts
    on [1/2,1], scales by the empirical mean a_hat, and returns the
    Kolmogorov distance between the scaled sample and the mean-1
    Mittag-Leffler law of index gamma.
    """
    trials = int(trials)
    if trials < 1000:
        raise ValueError("trials must be at least 1000")
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    if spec.gamma >= 1.0:
        raise ValueError("the occupation limit law degenerates at gamma = 1")
    counts = occupation_sample(spec, n, trials, seed)
    a_hat = float(counts.mean())
    scaled = np.sort(counts / a_hat)
    vals, cnt = np.unique(scaled, return_counts=True)
    cum = np.cumsum(cnt) / trials
    grid, cdf = _ml_cdf_grid(spec.gamma, float(vals[-1]) * 1.02)
    fv = np.interp(vals, grid, cdf)
    ks = float(np.max(np.maximum(np.abs(cum - fv), np.abs(fv - (cum - cnt / trials)))))
    return DarlingKacResult(ks, a_hat)


# ----------------------------------------------------------------------
# tied-down occupation deviation
# ----------------------------------------------------------------------


class TiedDownReport(NamedTuple):
    """Deviation of weighted return hits from their tied-down target.

    deviations[k] is D at checkpoints[k]: the absolute difference between
    the weighted hit frequency and u_hat(n) * E g(W), summed over n up to
    the checkpoint and normalized by a_hat at that checkpoint.
    """

    gamma: float
    n_max: int
    trials: int
    a_hat: float
    c_hat: float
    expected_weight: float
    checkpoints: tuple
    deviations: tuple


@njit
def _tied_count_kernel(x0, n_max, fam, s, kap, counts):  # pragma: no cover
    for t in range(x0.shape[0]):
        x = x0[t]
        if fam == 0 and s == 2.0:
            for j in range(1, n_max + 1):
                if x >= 0.5:
                    x = 2.0 * x - 1.0
                else:
                    x = x * (1.0 + 4.0 * x * x)
                if x >= 0.5:
                    counts[j] += 1
        elif fam == 0:
            for j in range(1, n_max + 1):
                if x >= 0.5:
                    x = 2.0 * x - 1.0
                else:
                    x = x * (1.0 + (2.0 * x) ** s)
                if x >= 0.5:
                    counts[j] += 1
        else:
            for j in range(1, n_max + 1):
                if s == 2.0:
                    v = kap * x
                    v = x * (1.0 + v * v)
                else:
                    v = x * (1.0 + (kap * x) ** s)
                x = v - math.floor(v)
                if x >= 0.5:
                    counts[j] += 1


@njit
def _tied_fill_kernel(x0, n_max, fam, s, kap, n_out, k_out):  # pragma: no cover
    idx = 0
    for t in range(x0.shape[0]):
        x = x0[t]
        k = 0
        for j in range(1, n_max + 1):
            if fam == 0:
                if x >= 0.5:
                    x = 2.0 * x - 1.0
                elif s == 2.0:
                    x = x * (1.0 + 4.0 * x * x)
                else:
                    x = x * (1.0 + (2.0 * x) ** s)
            else:
                if s == 2.0:
                    v = kap * x
                    v = x * (1.0 + v * v)
                else:
                    v = x * (1.0 + (kap * x) ** s)
                x = v - math.floor(v)
            if x >= 0.5:
                k += 1
                n_out[idx] = j
                k_out[idx] = k
                idx += 1


def _tied_visits_block(x0, n_max, fam, s, kap):
    """(n, k) pairs of every return hit, trial-ascending within each n."""
    x = x0.copy()
    k = np.zeros(x0.shape[0], dtype=np.int32)
    trial_ids = np.arange(x0.shape[0])
    n_parts, k_parts = [], []
    for j in range(1, n_max + 1):
        if fam == 0:
            hit = x >= 0.5
            x = np.where(hit, 2.0 * x - 1.0, x * (1.0 + (2.0 * x) ** s))
        else:
            v = x * (1.0 + (kap * x) ** s)
            x = v - np.floor(v)
        now = x >= 0.5
        if np.any(now):
            k[now] += 1
            n_parts.append(np.full(int(np.count_nonzero(now)), j, dtype=np.int32))
            k_parts.append(k[now].copy())
    del trial_ids
    if not n_parts:
        return np.empty(0, dtype=np.int32), np.empty(0, dtype=np.int32)
    return np.concatenate(n_parts), np.concatenate(k_parts)


def map_tied_down_estimate(
    spec: MapSpec,
    n_max: int,
    trials: int,
    g: Union[str, Weight, Callable] = "const",
    seed: int = 0,
    checkpoints: Optional[tuple] = None,
) -> TiedDownReport:
    """Deviation sums of weighted return hits from the tied-down target.

    For each n <= n_max the hit frequency q_n averages g(k / a_hat(n))
    over trials whose k-th return lands exactly at time n. The target is
    u_hat(n) E g(W), with a_hat(n) = c_hat n^gamma calibrated by
    darling_kac_empirical on the same orbits and u_hat(n) the discrete
    derivative gamma a_hat(n)/n. The report carries the normalized
    absolute deviation summed up to each checkpoint (default: n_max/10
    and n_max); it should shrink as the horizon grows.
    """
    trials = int(trials)
    if trials < 10_000:
        raise ValueError("trials must be at least 10^4")
    n_max = int(n_max)
    if n_max < 10:
        raise ValueError("n_max must be at least 10")
    if spec.gamma >= 1.0:
        raise ValueError("the tied-down limit law degenerates at gamma = 1")
    weight = resolve_weight(g)
    if checkpoints is None:
        checkpoints = (max(n_max // 10, 1), n_max)
    checkpoints = tuple(int(c) for c in checkpoints)
    if any(c < 1 or c > n_max for c in checkpoints):
        raise ValueError("checkpoints must lie in [1, n_max]")

    gamma = spec.gamma
    ks_cal, a_hat = darling_kac_empirical(spec, n_max, trials, seed)
    del ks_cal
    c_hat = a_hat / n_max ** gamma

    if weight.code == 0:
        expected = 1.0
    else:
        expected = tied_down_expect(StableFamily(gamma), weight)

    keys = stream_keys_block(seed, trials)
    x0 = 0.5 + 0.5 * uniform_keys(keys, 0)
    fam = 0 if spec.family == "T" else 1
    if USING_NUMBA:
        counts = np.zeros(n_max + 1, dtype=np.int64)
        _tied_count_kernel(x0, n_max, fam, spec.exponent, float(spec.kappa), counts)
        total = int(counts.sum())
        n_arr = np.empty(total, dtype=np.int32)
        k_arr = np.empty(total, dtype=np.int32)
        _tied_fill_kernel(x0, n_max, fam, spec.exponent, float(spec.kappa), n_arr, k_arr)
    else:
        n_arr, k_arr = _tied_visits_block(x0, n_max, fam, spec.exponent, float(spec.kappa))

    w = weight(k_arr / (c_hat * n_arr.astype(float) ** gamma))
    qhat = np.bincount(n_arr, weights=np.asarray(w, dtype=float), minlength=n_max + 1) / trials
    ns = np.arange(1, n_max + 1, dtype=float)
    target = gamma * c_hat * ns ** (gamma - 1.0) * expected
    absdev = np.abs(qhat[1:] - target)
    cum = np.cumsum(absdev)
    devs = tuple(float(cum[c - 1] / (c_hat * c ** gamma)) for c in checkpoints)
    return TiedDownReport(
        gamma, n_max, trials, a_hat, c_hat, float(expected), checkpoints, devs,
    )
