"""Heavy-tailed renewal laboratory: laws, tables, and limit profiles.

The objects here study partial sums S_k = phi_1 + ... + phi_k of iid
waiting times whose survival function decays like t^-gamma with
0 < gamma < 1, so the mean is infinite and the classical renewal theorem
does not apply. Two concrete families are provided:

* LatticeLaw: integer waiting times on xi + p*Z_{>=0} with the exactly
  summable survival P(phi > xi + p*j) = (j+2)^-gamma, which makes every
  downstream quantity computable in closed form or by exact convolution.
* ContinuousLaw: Pareto waiting times, P(phi > t) = (t/t0)^-gamma.

On top of the laws sit three computational routes:

* ConvolutionTable: dense k-step distributions P(phi_k = m) for small
  (K, M), the brute-force oracle everything else is checked against.
* Generating-function series: 1/(1 - F) inverted by Newton doubling gives
  sum_k P(phi_k = n) (and its k-weighted variants) for all n <= N in
  O(N log N), which is what makes the n = 1e4..1e5 regimes reachable with
  floating-point exactness rather than Monte Carlo noise.
* The characteristic function lattice_char, built on the circle
  polylogarithm, which yields single probabilities P(phi_n = k) by
  oscillatory quadrature at scales no table can hold.

The profile functions (srt_profile, tied_down_functional,
cesaro_deviation, periodic_llt_profile, nagaev_check) accept either a
LatticeLaw or a ConvolutionTable where that makes sense, because dense
tables are physically impossible at the large-n scales the
generating-function route handles (K ~ 30 a(N) rows of length N).

A note on periodic normalization: when gcd(xi, p) = 1, every large n is
hit by exactly one residue class of k, so the tied-down sum
sum_k P(phi_k = n) converges to u(n) with no factor of p; the p-fold boost
appears only in the per-slot local limit P(phi_n = k), where it is genuine.
All ratios below are normalized accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.fft import irfft, next_fast_len, rfft

from ._quad import panel_nodes
from .backend import USING_NUMBA, njit
from .errors import NumericalError, ResourceError
from .oscsum import polylog_circle
from .regvar import RegVarying, rv_eval, rv_inverse, u_rate
from .rng import nb_uniform, stream_key_ref, stream_keys_block, uniform_block, uniform_keys
from .stable import StableFamily, stable_char, stable_density, tied_down_expect
from .weights import (
    CODE_CONST,
    CODE_EXP_DECAY,
    CODE_IDENTITY,
    resolve_weight,
    weight_eval_scalar,
)

__all__ = [
    "tail_constant",
    "LatticeLaw",
    "ContinuousLaw",
    "build_continuous_law",
    "ConvolutionTable",
    "renewal_mass_series",
    "occupation_mass_series",
    "SrtProfile",
    "srt_profile",
    "tied_down_functional",
    "cesaro_deviation",
    "lattice_char",
    "LltProfile",
    "periodic_llt_profile",
    "NagaevPair",
    "nagaev_check",
    "McEstimate",
    "mc_tied_down_continuous",
]

_TABLE_CELL_BUDGET = 50_000_000


def tail_constant(gamma: float) -> float:
    """C(gamma) = 1 / (Gamma(1+gamma) Gamma(1-gamma)) = sin(pi gamma)/(pi gamma).

    The dimensionless constant linking a survival tail to its calibrated
    rate: if P(phi > t) ~ C(gamma)/a(t) then sum_{n<=N} u(n) ~ a(N) for
    u(n) = gamma a(n)/n.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0,1)")
    return 1.0 / (math.gamma(1.0 + gamma) * math.gamma(1.0 - gamma))


# ----------------------------------------------------------------------
# waiting-time laws
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeLaw:
    """Integer waiting times on xi + p*Z_{>=0} with survival (j+2)^-gamma.

    P(phi = xi + p*j) = (j+1)^-gamma - (j+2)^-gamma for j >= 0, which sums
    to one exactly (the survival telescopes), needs no normalization, and
    has survival P(phi > t) ~ p^gamma t^-gamma. The calibrated rate
    a(t) = tail_scale * t^gamma therefore carries
    tail_scale = tail_constant(gamma) * p^-gamma.

    gcd(xi, p) = 1 is required so that the step-p sublattices explored by
    the k-fold sums cycle through all residues.
    """

    gamma: float
    p: int = 1
    xi: int = 1
    tail_scale: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0,1)")
        if not (isinstance(self.p, (int, np.integer)) and self.p >= 1):
            raise ValueError("p must be a positive integer")
        if not (isinstance(self.xi, (int, np.integer)) and 1 <= self.xi <= self.p):
            raise ValueError("xi must be an integer in 1..p")
        if math.gcd(self.xi, self.p) != 1:
            raise ValueError("xi and p must be coprime")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "xi", int(self.xi))
        object.__setattr__(
            self, "tail_scale", tail_constant(self.gamma) * float(self.p) ** -self.gamma
        )

    def pmf(self, m) -> np.ndarray:
        """P(phi = m) for integer m (vectorized)."""
        arr = np.asarray(m)
        scalar = arr.ndim == 0
        mm = np.atleast_1d(arr).astype(np.int64)
        j, rem = np.divmod(mm - self.xi, self.p)
        out = np.zeros(mm.shape, dtype=float)
        on = (rem == 0) & (j >= 0)
        jf = j[on].astype(float)
        out[on] = (jf + 1.0) ** -self.gamma - (jf + 2.0) ** -self.gamma
        return float(out[0]) if scalar else out

    def tail(self, t) -> np.ndarray:
        """P(phi > t) for real t, exact on and off the lattice."""
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        tt = np.atleast_1d(arr).astype(float)
        j = np.floor((tt - self.xi) / self.p)
        out = np.where(tt < self.xi, 1.0, (np.maximum(j, 0.0) + 2.0) ** -self.gamma)
        return float(out[0]) if scalar else out

    def pmf_vector(self, M: int) -> np.ndarray:
        """The pmf as a dense array over 0..M."""
        f = np.zeros(int(M) + 1)
        if M >= self.xi:
            j = np.arange(0, (int(M) - self.xi) // self.p + 1)
            f[self.xi + self.p * j] = (j + 1.0) ** -self.gamma - (j + 2.0) ** -self.gamma
        return f

    def calibrated_rv(self) -> RegVarying:
        """The rate a(t) = tail_scale * t^gamma matched to this tail."""
        return RegVarying(self.gamma, self.tail_scale)

    def sample(self, seed: int, count: int) -> np.ndarray:
        """iid draws as float64 (values beyond 2^53 lose integer exactness)."""
        if count < 1:
            raise ValueError("count must be positive")
        u = uniform_block(stream_key_ref(seed, 0), 0, int(count))
        j = np.floor(u ** (-1.0 / self.gamma)) - 1.0
        return self.xi + self.p * j


@dataclass(frozen=True)
class ContinuousLaw:
    """Pareto waiting times: P(phi > t) = (t/t0)^-gamma for t >= t0.

    With drift set, values are discretized onto drift + Z by rounding the
    Pareto draw up to the next lattice point; the survival then agrees
    with the continuous one at lattice arguments. That variant exists for
    aperiodicity experiments and has no further closed forms attached.
    """

    gamma: float
    t0: float = 1.0
    drift: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0,1)")
        if not (np.isfinite(self.t0) and self.t0 > 0.0):
            raise ValueError("t0 must be positive and finite")

    def tail(self, t) -> np.ndarray:
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        tt = np.atleast_1d(arr).astype(float)
        out = np.where(tt < self.t0, 1.0, (tt / self.t0) ** -self.gamma)
        return float(out[0]) if scalar else out

    def median(self) -> float:
        return self.t0 * 2.0 ** (1.0 / self.gamma)

    def calibrated_rv(self) -> RegVarying:
        return RegVarying(self.gamma, tail_constant(self.gamma) * self.t0**-self.gamma)

    def sample(self, seed: int, count: int) -> np.ndarray:
        if count < 1:
            raise ValueError("count must be positive")
        u = uniform_block(stream_key_ref(seed, 0), 0, int(count))
        x = self.t0 * u ** (-1.0 / self.gamma)
        if self.drift is None:
            return x
        return self.drift + np.ceil(x - self.drift)


def build_continuous_law(gamma: float, t0: float = 1.0, drift: Optional[float] = None) -> ContinuousLaw:
    """Constructor sugar mirroring the lattice side."""
    return ContinuousLaw(gamma, t0, drift)


# ----------------------------------------------------------------------
# dense convolution tables (the small-scale oracle)
# ----------------------------------------------------------------------


@dataclass
class ConvolutionTable:
    """Dense k-step distributions P(phi_k = m) for k <= K, m <= M.

    Row k is exact to FFT roundoff; slots off the sublattice
    m in k*xi + p*Z_{>=0} are zeroed exactly, and `overflow[k]` carries the
    analytically accumulated mass beyond M, so that
    probs[k].sum() + overflow[k] == 1 is a live accuracy check rather than
    an identity made true by construction.
    """

    law: LatticeLaw
    K: int
    M: int
    probs: np.ndarray
    overflow: np.ndarray

    @classmethod
    def build(cls, law: LatticeLaw, K: int, M: int) -> "ConvolutionTable":
        K = int(K)
        M = int(M)
        if K < 1 or M < 1:
            raise ValueError("K and M must be positive")
        cells = (K + 1) * (M + 1)
        if cells > _TABLE_CELL_BUDGET:
            suggested = max(1, _TABLE_CELL_BUDGET // (K + 1) - 1)
            raise ResourceError(
                f"table of {K + 1} x {M + 1} = {cells} cells exceeds the "
                f"{_TABLE_CELL_BUDGET} cell budget; try M <= {suggested}",
                suggested=suggested,
            )
        f = law.pmf_vector(M)
        tail_from = law.tail(M - np.arange(M + 1).astype(float))
        nfft = next_fast_len(2 * M + 1, real=True)
        fhat = rfft(f, nfft)

        probs = np.zeros((K + 1, M + 1))
        overflow = np.zeros(K + 1)
        probs[0, 0] = 1.0
        idx = np.arange(M + 1)
        row = probs[0]
        for k in range(1, K + 1):
            overflow[k] = overflow[k - 1] + float(np.dot(row, tail_from))
            row = irfft(rfft(row, nfft) * fhat, nfft)[: M + 1]
            np.maximum(row, 0.0, out=row)
            off = (idx % law.p) != ((k * law.xi) % law.p)
            row[off] = 0.0
            lo = min(k * law.xi, M + 1)
            row[:lo] = 0.0
            probs[k] = row
        return cls(law, K, M, probs, overflow)

    def mass(self, k: int) -> float:
        """Total retained probability of row k."""
        return float(self.probs[k].sum())

    def column(self, n: int) -> np.ndarray:
        """P(phi_k = n) for k = 1..K."""
        return self.probs[1:, n].copy()


# ----------------------------------------------------------------------
# generating-function series (the large-n route)
# ----------------------------------------------------------------------


def _lin_conv(x: np.ndarray, y: np.ndarray, L: int) -> np.ndarray:
    n = next_fast_len(len(x) + len(y) - 1, real=True)
    return irfft(rfft(x, n) * rfft(y, n), n)[:L]


def _series_inverse(a: np.ndarray, L: int) -> np.ndarray:
    """Coefficients of 1/A(x) mod x^L by Newton doubling; needs a[0] = 1."""
    b = np.array([1.0])
    m = 1
    while m < L:
        m2 = min(2 * m, L)
        t = -_lin_conv(a[:m2], b, m2)
        t[0] += 2.0
        b = _lin_conv(b, t, m2)
        m = m2
    return b


def renewal_mass_series(law: LatticeLaw, N: int) -> np.ndarray:
    """r[n] = sum_{k>=1} P(phi_k = n) for n = 0..N (r[0] = 0).

    Computed as the coefficients of 1/(1 - F(x)) = 1 + sum_k F(x)^k, one
    Newton inversion, exact to FFT roundoff (~1e-15 absolute).
    """
    f = law.pmf_vector(N)
    a = -f
    a[0] += 1.0
    r = _series_inverse(a, int(N) + 1)
    r[0] = 0.0
    return r


def occupation_mass_series(law: LatticeLaw, N: int) -> np.ndarray:
    """s[n] = sum_{k>=1} k P(phi_k = n), the identity-weighted mass.

    Follows from sum_k k y^k = y/(1-y)^2 applied at y = F(x).
    """
    N = int(N)
    f = law.pmf_vector(N)
    a = -f
    a[0] += 1.0
    b = _series_inverse(a, N + 1)
    return _lin_conv(_lin_conv(f, b, N + 1), b, N + 1)


def _geometric_mass_at(law: LatticeLaw, n: int, y: float) -> float:
    """[x^n] 1/(1 - y F(x)) = sum_k y^k P(phi_k = n) for n >= 1."""
    f = law.pmf_vector(n)
    a = -y * f
    a[0] += 1.0
    return float(_series_inverse(a, int(n) + 1)[n])


def _occupation_column(law: LatticeLaw, n: int, tol: float = 1e-18) -> np.ndarray:
    """P(phi_k = n) for k = 1, 2, ... until the row mass certifies the stop.

    Row k holds F^k truncated past n, so entry n is exact. Once the
    retained mass q_k = P(phi_k <= n) drops below tol, the discarded
    remainder over all later k is at most q_k * q_1/(1 - q_1), which
    bounds any bounded-weight sum read off this column.
    """
    n = int(n)
    f = law.pmf_vector(n)
    nfft = next_fast_len(2 * n + 1, real=True)
    fhat = rfft(f, nfft)
    cap = int(64.0 * rv_eval(law.calibrated_rv(), max(n, 2))) + 16
    col = []
    row = f.copy()
    mass = float(row.sum())
    k = 1
    while True:
        col.append(float(row[n]))
        if mass < tol or k >= n:
            break
        if k > cap:
            raise NumericalError("occupation column failed to exhaust", mass, tol)
        row = irfft(rfft(row, nfft) * fhat, nfft)[: n + 1]
        np.maximum(row, 0.0, out=row)
        mass = float(row.sum())
        k += 1
    return np.asarray(col)


# ----------------------------------------------------------------------
# reachability on the (k, n) lattice
# ----------------------------------------------------------------------


def _first_admissible(law: LatticeLaw, n: int) -> tuple[int, bool]:
    """Smallest k >= 1 with k*xi = n (mod p), and whether phi_k = n is possible."""
    if law.p == 1:
        return 1, n >= 1
    k0 = (n * pow(law.xi, -1, law.p)) % law.p
    if k0 == 0:
        k0 = law.p
    return k0, k0 * law.xi <= n


def _reachable_array(law: LatticeLaw, ns: np.ndarray) -> np.ndarray:
    if law.p == 1:
        return ns >= 1
    k0 = (ns * pow(law.xi, -1, law.p)) % law.p
    k0 = np.where(k0 == 0, law.p, k0)
    return k0 * law.xi <= ns


def _law_of(source: Union[LatticeLaw, ConvolutionTable]) -> LatticeLaw:
    return source.law if isinstance(source, ConvolutionTable) else source


def _require_table_covers(table: ConvolutionTable, n: int) -> None:
    if n > table.M:
        raise ValueError(f"n={n} exceeds the table range M={table.M}")
    if table.K * table.law.xi < n:
        raise ValueError(
            f"table K={table.K} cannot hold every contributing k for n={n}; "
            f"need K >= {-(-n // table.law.xi)}"
        )


# ----------------------------------------------------------------------
# tied-down profiles
# ----------------------------------------------------------------------


class SrtProfile(NamedTuple):
    """The strong-renewal diagnostic at a single n."""

    tied_sum: float
    u_n: float
    ratio: float
    reachable: bool


def srt_profile(
    source: Union[LatticeLaw, ConvolutionTable],
    a: Optional[RegVarying],
    n: int,
) -> SrtProfile:
    """sum_{k<=n} P(phi_k = n) against the slot weight u(n).

    The ratio converges to 1 for reachable n (for any period, since
    exactly one residue class of k contributes); unreachable n report a
    zero sum and ratio with the flag down rather than raising.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    law = _law_of(source)
    if a is None:
        a = law.calibrated_rv()
    u_n = u_rate(a, n)
    _, reachable = _first_admissible(law, n)
    if not reachable:
        return SrtProfile(0.0, u_n, 0.0, False)
    if isinstance(source, ConvolutionTable):
        _require_table_covers(source, n)
        tied = float(source.probs[1:, n].sum())
    else:
        tied = float(renewal_mass_series(law, n)[n])
    return SrtProfile(tied, u_n, tied / u_n, True)


def tied_down_functional(
    source: Union[LatticeLaw, ConvolutionTable],
    a: Optional[RegVarying],
    n: int,
    g,
) -> float:
    """(1/u(n)) sum_k g(k / a(n)) P(phi_k = n), the tied-down g-average.

    Converges to E g(W_gamma) at reachable n, where W_gamma is the
    Mittag-Leffler occupation variable; returns exactly 0.0 at
    unreachable n. Catalogue weights ride the generating-function
    shortcuts; anything else walks the occupation column.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    law = _law_of(source)
    if a is None:
        a = law.calibrated_rv()
    weight = resolve_weight(g)
    _, reachable = _first_admissible(law, n)
    if not reachable:
        return 0.0
    a_n = rv_eval(a, n)
    u_n = u_rate(a, n)
    if isinstance(source, ConvolutionTable):
        _require_table_covers(source, n)
        ks = np.arange(1, source.K + 1, dtype=float)
        return float(np.dot(weight(ks / a_n), source.probs[1:, n])) / u_n
    if weight.code == CODE_CONST:
        return float(renewal_mass_series(law, n)[n]) / u_n
    if weight.code == CODE_IDENTITY:
        return float(occupation_mass_series(law, n)[n]) / (a_n * u_n)
    if weight.code == CODE_EXP_DECAY:
        y = math.exp(-weight.param / a_n)
        return _geometric_mass_at(law, n, y) / u_n
    col = _occupation_column(law, n)
    ks = np.arange(1, col.size + 1, dtype=float)
    return float(np.dot(weight(ks / a_n), col)) / u_n


def cesaro_deviation(
    source: Union[LatticeLaw, ConvolutionTable],
    a: Optional[RegVarying],
    N: int,
    g,
    family: Optional[StableFamily] = None,
) -> float:
    """(1/a(N)) sum_{n<=N} |A_n - u(n) 1_reach(n) E g(W)| with
    A_n = sum_k g(k/a(n)) P(phi_k = n).

    The averaged form of the tied-down limit: it decays even in regimes
    (gamma <= 1/2) where no slot-by-slot statement holds. The law route
    supports the const and identity weights (the ones with a
    generating-function form uniform in n); other weights need a table.
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    law = _law_of(source)
    if a is None:
        a = law.calibrated_rv()
    weight = resolve_weight(g)
    if family is None:
        family = StableFamily(law.gamma)
    expect = tied_down_expect(family, weight)
    ns = np.arange(1, N + 1)
    a_ns = rv_eval(a, ns)
    u_ns = u_rate(a, ns)
    reach = _reachable_array(law, ns)

    if isinstance(source, ConvolutionTable):
        _require_table_covers(source, N)
        ks = np.arange(1, source.K + 1, dtype=float)
        dev = 0.0
        for i, n in enumerate(ns):
            an = float(np.dot(weight(ks / a_ns[i]), source.probs[1:, n]))
            target = u_ns[i] * expect if reach[i] else 0.0
            dev += abs(an - target)
        return dev / rv_eval(a, N)
    if weight.code == CODE_CONST:
        masses = renewal_mass_series(law, N)[1:]
    elif weight.code == CODE_IDENTITY:
        masses = occupation_mass_series(law, N)[1:] / a_ns
    else:
        raise ValueError(
            "the law route supports const and identity weights; "
            "build a ConvolutionTable for other g"
        )
    target = np.where(reach, u_ns * expect, 0.0)
    return float(np.abs(masses - target).sum()) / rv_eval(a, N)


# ----------------------------------------------------------------------
# the lattice characteristic function and its consumers
# ----------------------------------------------------------------------


def _core_circle(gamma: float, theta: np.ndarray) -> np.ndarray:
    """The drift-free characteristic factor at z = e^{i theta}.

    With S = Li_gamma(z), the generating sum over the pmf
    (j+1)^-g - (j+2)^-g evaluates to (1 - (1-z) S / z) / z. The 1 - z
    difference is formed from half-angle pieces so tiny arguments keep
    full precision, and theta is folded into (-pi, pi] only when it
    actually leaves the interval (the fold costs absolute accuracy that
    small arguments cannot spare). The fold runs through |theta| so that
    +-theta land on exact negations and conjugate symmetry survives to
    the last bit.
    """
    th = np.array(theta, dtype=float, copy=True)
    outside = np.abs(th) > math.pi
    if np.any(outside):
        folded = np.mod(np.abs(th[outside]) + math.pi, 2.0 * math.pi) - math.pi
        th[outside] = np.where(th[outside] < 0.0, -folded, folded)
    core = np.ones(th.shape, dtype=complex)
    nz = th != 0.0
    if np.any(nz):
        t = th[nz]
        s = polylog_circle(gamma, t)
        z = np.exp(1j * t)
        one_minus_z = 2.0 * np.sin(0.5 * t) ** 2 - 1j * np.sin(t)
        core[nz] = (1.0 - one_minus_z * s / z) / z
    return core


def lattice_char(law: LatticeLaw, u) -> np.ndarray:
    """E exp(2 pi i u phi), vectorized over real u."""
    arr = np.asarray(u, dtype=float)
    scalar = arr.ndim == 0
    uu = np.atleast_1d(arr).astype(float)
    core = _core_circle(law.gamma, 2.0 * math.pi * law.p * uu)
    lam = np.exp(2j * math.pi * law.xi * uu) * core
    return complex(lam[0]) if scalar else lam


class NagaevPair(NamedTuple):
    """Characteristic-function check: n-th power vs the stable limit."""

    lhs: complex
    rhs: complex


def nagaev_check(
    law: LatticeLaw,
    t: float,
    n: int,
    family: Optional[StableFamily] = None,
    a: Optional[RegVarying] = None,
) -> NagaevPair:
    """lambda(t / a_inv(n))^n against E exp(2 pi i t Z).

    The left side is exact (pmf summation via the polylogarithm), so the
    gap measures the actual speed of the stable limit, not quadrature.
    """
    if family is None:
        family = StableFamily(law.gamma)
    if a is None:
        a = law.calibrated_rv()
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    b_n = rv_inverse(a, n)
    lhs = complex(lattice_char(law, float(t) / b_n)) ** n
    rhs = complex(stable_char(family, 2.0 * math.pi * float(t)))
    return NagaevPair(lhs, rhs)


class LltProfile(NamedTuple):
    """Local-limit comparison on a window of levels k at fixed n."""

    k: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray


def _llt_quadrature(law: LatticeLaw, n: int, ks: np.ndarray) -> np.ndarray:
    """P(phi_n = k) for reachable k by contour quadrature of lambda^n.

    The integral over u in (-1/2, 1/2] splits exactly into p identical
    windows around the alias points j/p (the core factor has period 1/p),
    whose root-of-unity prefactors sum to p on the admissible residue and
    to zero elsewhere. Only the window at the origin is quadratured:

        P(phi_n = k) = 2 p Re int_0^cut e^{2 pi i v (n xi - k)} C(v)^n dv

    with C(v) the drift-free core. The cut either reaches the exact
    half-window edge 1/(2p) or the point where |C|^n is below 1e-18.

    C has a v^gamma branch point at the origin, so uniform panels stall
    near 1e-7 accuracy no matter how many are used; a geometric grading
    of the panel edges toward zero restores spectral convergence. Panel
    width elsewhere is capped so one oscillation period of the largest
    |n xi - k| never spans more than a single panel.
    """
    g = law.gamma
    d = n * law.xi - ks.astype(np.int64)
    kp_max = float(np.max(np.abs(d))) if d.size else 1.0

    def core_pow(v):
        return _core_circle(g, 2.0 * math.pi * law.p * np.asarray(v, dtype=float)) ** n

    half_edge = 1.0 / (2.0 * law.p)
    theta_cut = (45.0 / (n * math.gamma(1.0 - g) * math.cos(0.5 * math.pi * g))) ** (1.0 / g)
    v_cut = min(theta_cut / (2.0 * math.pi * law.p), half_edge)
    while v_cut < half_edge and abs(core_pow([v_cut])[0]) > 1e-18:
        v_cut = min(v_cut * 1.25, half_edge)

    width = min(1.0 / (2.0 * max(kp_max, 1.0)), v_cut / 64.0)
    uniform = np.arange(0.0, v_cut, width)
    graded = v_cut * np.geomspace(1e-12, 1.0, 97)
    edges = np.unique(np.concatenate([uniform, graded]))
    nodes, wts = panel_nodes(edges, 16)
    weighted = wts * core_pow(nodes)
    wr, wi = weighted.real, weighted.imag

    out = np.empty(ks.shape, dtype=float)
    for i, dk in enumerate(d):
        phase = (2.0 * math.pi * float(dk)) * nodes
        out[i] = 2.0 * law.p * (np.cos(phase) @ wr - np.sin(phase) @ wi)
    return out


def periodic_llt_profile(
    source: Union[LatticeLaw, ConvolutionTable],
    a: Optional[RegVarying],
    n: int,
    kappa_window: tuple[float, float] = (0.5, 3.0),
    points: int = 257,
) -> LltProfile:
    """Triples (k, a_inv(n) P(phi_n = k), p 1_adm(k) f_Z(k / a_inv(n))).

    Levels k are sampled across the kappa window and snapped to the
    admissible residue class k = n xi (mod p); for p > 1 each sampled
    level also contributes its off-lattice neighbor k+1, whose lhs is an
    exact zero by the root-of-unity cancellation (not a small number).
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    lo, hi = float(kappa_window[0]), float(kappa_window[1])
    if not (0.0 < lo < hi):
        raise ValueError("the kappa window must satisfy 0 < lo < hi")
    law = _law_of(source)
    if a is None:
        a = law.calibrated_rv()
    b_n = rv_inverse(a, n)
    res = (n * law.xi) % law.p

    kappas = np.linspace(lo, hi, int(points))
    k_raw = np.rint(kappas * b_n).astype(np.int64)
    delta = (res - k_raw) % law.p
    k_reach = k_raw + np.where(delta <= law.p // 2, delta, delta - law.p)
    k_reach = np.unique(k_reach[k_reach >= 1])
    if law.p > 1:
        k_all = np.unique(np.concatenate([k_reach, k_reach + 1]))
    else:
        k_all = k_reach
    admissible = (k_all % law.p) == res if law.p > 1 else np.ones(k_all.shape, bool)

    lhs = np.zeros(k_all.shape, dtype=float)
    if isinstance(source, ConvolutionTable):
        if n > source.K:
            raise ValueError(f"table holds rows up to K={source.K}, need row n={n}")
        if k_all.max() > source.M:
            raise ValueError(f"table range M={source.M} cannot hold k up to {k_all.max()}")
        lhs[:] = source.probs[n, k_all]
    else:
        lhs[admissible] = _llt_quadrature(law, n, k_all[admissible])
    lhs *= b_n

    family = StableFamily(law.gamma)
    rhs = np.where(
        admissible, law.p * stable_density(family, k_all.astype(float) / b_n), 0.0
    )
    return LltProfile(k_all, lhs, rhs)


# ----------------------------------------------------------------------
# Monte Carlo for continuous windows
# ----------------------------------------------------------------------


class McEstimate(NamedTuple):
    """A Monte Carlo value with its standard error and trial count."""

    estimate: float
    stderr: float
    trials: int


@njit
def _mc_window_kernel(keys, inv_g, t0, lo, hi, inv_b, code, param, out):  # pragma: no cover
    for t in range(keys.shape[0]):
        key = keys[t]
        total = 0.0
        s = 0.0
        k = 0
        while True:
            u = nb_uniform(key, np.uint64(k))
            s += t0 * u ** (-inv_g)
            k += 1
            if s > hi:
                break
            if s > lo:
                total += weight_eval_scalar(code, param, k * inv_b)
        out[t] = total


def _mc_window_block(keys, inv_g, t0, lo, hi, inv_b, weight, cap):
    out = np.zeros(keys.shape[0])
    s = np.zeros(keys.shape[0])
    alive = np.arange(keys.shape[0])
    k = 0
    while alive.size:
        u = uniform_keys(keys[alive], k)
        s_alive = s[alive] + t0 * u ** (-inv_g)
        s[alive] = s_alive
        k += 1
        if k > cap:
            raise NumericalError("window walk failed to clear the window", float(alive.size), 0.0)
        in_win = (s_alive > lo) & (s_alive <= hi)
        if np.any(in_win):
            out[alive[in_win]] += float(weight(k * inv_b))
        alive = alive[s_alive <= hi]
    return out


def mc_tied_down_continuous(
    law: ContinuousLaw,
    a: Optional[RegVarying],
    n: float,
    window: tuple[float, float],
    g="const",
    trials: int = 100_000,
    seed: int = 0,
) -> McEstimate:
    """Monte Carlo for (1/u(n)) sum_k E[g(k/a(n)) 1(S_k - n in window)].

    Every trial walks its partial sums through the shifted window
    (n + window is an interval of fixed width), crediting g(k / a(n)) for
    each index k whose sum lands inside; the per-trial totals are averaged
    and divided by u(n). The limit is |window| * E g(W_gamma), with no
    1/|window| normalization applied. Trials use disjoint counter streams
    keyed by (seed, trial), so results are independent of any batching.
    """
    if not isinstance(law, ContinuousLaw):
        raise TypeError("mc_tied_down_continuous expects a ContinuousLaw")
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be positive")
    lo, hi = float(window[0]), float(window[1])
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValueError("window must be a finite interval with lo < hi")
    n = float(n)
    if n <= 0.0:
        raise ValueError("n must be positive")
    if law.drift is not None:
        raise ValueError("the window estimator targets the continuous variant")
    if a is None:
        a = law.calibrated_rv()
    weight = resolve_weight(g)
    a_n = rv_eval(a, n)
    u_n = u_rate(a, n)
    keys = stream_keys_block(seed, trials)
    cap = int(64.0 * rv_eval(a, n + max(hi, 1.0))) + 16

    if USING_NUMBA and weight.code >= 0:
        out = np.empty(trials)
        _mc_window_kernel(
            keys,
            1.0 / law.gamma,
            law.t0,
            n + lo,
            n + hi,
            1.0 / a_n,
            weight.code,
            weight.param,
            out,
        )
    else:
        out = _mc_window_block(keys, 1.0 / law.gamma, law.t0, n + lo, n + hi, 1.0 / a_n, weight, cap)

    est = float(out.mean()) / u_n
    se = float(out.std(ddof=1)) / math.sqrt(trials) / u_n
    return McEstimate(est, se, trials)
