"""Local time at zero of the lazy simple walk, free and tied down.

The walk steps -1, 0, +1 with probabilities 1/4, 1/2, 1/4 (the stay
probability is a parameter, the default is the interesting case). Its
local time L_n = #{1 <= k <= n : S_k = 0} is a discrete occupation time
with index 1/2: unconditionally L_n / E(L_n) approaches the mean-1
Mittag-Leffler law, while conditioning on the bridge event S_n = 0
size-biases the limit. Everything here is exact dynamic programming
except ``bridge_local_time_mc``, the rejection sampler used to check the
DP from the outside.

Two independent exact routes are kept deliberately. ``BridgeTable`` runs
the forward DP over (position, count) states and stores the whole joint
law; it is transparent but quadratic in memory. ``bridge_local_time_exact``
goes through the first-passage law of the origin: a bridge with L_n = k
ends with its k-th zero visit at time n, so P(S_n = 0, L_n = k) is the
k-fold convolution of the first-passage pmf evaluated at n. The two
routes must agree to float accuracy, and the convolution route is the
one that reaches n = 2000 quickly.

Visits are counted at times 1..n, never at time 0. The convention is
load-bearing for fixtures: with it, a bridge always has L_n >= 1 because
time n itself is a zero visit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .backend import USING_NUMBA, njit
from .errors import ResourceError
from .rng import nb_uniform, stream_keys_block, uniform_keys

__all__ = [
    "WalkLaw",
    "BridgeTable",
    "BridgeLocalTime",
    "BridgeMcResult",
    "first_passage_pmf",
    "return_probabilities",
    "expected_local_time",
    "bridge_local_time_exact",
    "bridge_local_time_moments",
    "bridge_local_time_mc",
    "local_time_sample",
]

# Exact joint DP above this horizon would hold more than (2n+1)(n+1)
# float64 states; the convolution route stays O(n^2) time, O(n) space.
_HORIZON_CAP = 2000


@dataclass(frozen=True)
class WalkLaw:
    """Lazy simple walk: steps -1, 0, +1 with masses (1-stay)/2, stay.

    Any stay probability in (0,1) keeps the walk aperiodic (the zero step
    is in the support) with mean zero and variance 1 - stay.
    """

    stay: float = 0.5

    def __post_init__(self):
        s = self.stay
        if not (isinstance(s, (int, float)) and math.isfinite(s) and 0.0 < s < 1.0):
            raise ValueError(f"stay probability must lie in (0,1), got {s!r}")
        object.__setattr__(self, "stay", float(s))

    @property
    def step_pmf(self) -> tuple:
        half = 0.5 * (1.0 - self.stay)
        return ((-1, half), (0, self.stay), (1, half))

    @property
    def variance(self) -> float:
        return 1.0 - self.stay


def _check_horizon(n) -> int:
    n = int(n)
    if n < 1:
        raise ValueError("horizon n must be a positive integer")
    if n > _HORIZON_CAP:
        raise ResourceError(
            f"exact bridge DP is capped at n <= {_HORIZON_CAP}",
            suggested=_HORIZON_CAP,
        )
    return n


def return_probabilities(law: WalkLaw, n: int) -> np.ndarray:
    """r[j] = P(S_j = 0) for j = 0..n, by position-space DP."""
    n = _check_horizon(n)
    half = 0.5 * (1.0 - law.stay)
    pos = np.zeros(2 * n + 1)
    pos[n] = 1.0
    r = np.empty(n + 1)
    r[0] = 1.0
    for j in range(1, n + 1):
        nxt = law.stay * pos
        nxt[1:] += half * pos[:-1]
        nxt[:-1] += half * pos[1:]
        pos = nxt
        r[j] = pos[n]
    return r


def first_passage_pmf(law: WalkLaw, n: int) -> np.ndarray:
    """f[j] = P(first return of the walk to 0 happens at step j), j <= n.

    Same DP as ``return_probabilities`` with the origin made absorbing:
    mass entering position 0 is recorded and removed. f[0] = 0, and the
    lazy step makes f[1] = stay.
    """
    n = _check_horizon(n)
    half = 0.5 * (1.0 - law.stay)
    pos = np.zeros(2 * n + 1)
    pos[n] = 1.0
    f = np.zeros(n + 1)
    for j in range(1, n + 1):
        nxt = law.stay * pos
        nxt[1:] += half * pos[:-1]
        nxt[:-1] += half * pos[1:]
        f[j] = nxt[n]
        nxt[n] = 0.0
        pos = nxt
    return f


def expected_local_time(law: WalkLaw, n: int) -> float:
    """E(L_n) = sum of return probabilities over steps 1..n.

    This is the empirical return sequence of the walk; it grows like
    sqrt(2 n / (pi (1 - stay))) and is the natural normalization a_hat(n)
    for every local-time limit statement in this module.
    """
    return float(return_probabilities(law, n)[1:].sum())


class BridgeLocalTime(NamedTuple):
    """Exact conditional law of the local time on the bridge event."""

    n: int
    pmf: np.ndarray
    p_bridge: float


def bridge_local_time_exact(law: WalkLaw, n: int) -> BridgeLocalTime:
    """Exact pmf of L_n given S_n = 0 via first-passage convolutions.

    The k-th entry of the pmf is f^(*k)(n) / P(S_n = 0): a bridge whose
    local time is k has its k-th zero visit exactly at time n. Columns
    are convolved on their live support, and the loop stops once the
    whole column underflows to zero (every later local-time value then
    has probability below the float64 floor).
    """
    n = _check_horizon(n)
    f = first_passage_pmf(law, n)
    joint = np.zeros(n + 1)
    col = np.array([1.0])  # f^(*0) restricted to its support {0}
    lo = 0
    for k in range(1, n + 1):
        # support of f^(*k) starts at k; cap it at n
        col = np.convolve(col, f[1 : n - lo + 1])[: n - lo]
        lo += 1
        if not col.any():
            break
        joint[k] = col[n - lo]
    p_bridge = float(joint.sum())
    return BridgeLocalTime(n, joint / p_bridge, p_bridge)


def bridge_local_time_moments(law: WalkLaw, n: int, j: int) -> float:
    """E((L_n / a_hat(n))^j | S_n = 0) with a_hat(n) = E(L_n).

    The normalizer is the unconditional mean, so for j = 1 this is the
    size-biasing ratio E(L_n | bridge) / E(L_n), which approaches pi/2 as
    the horizon grows.
    """
    j = int(j)
    if j not in (0, 1, 2, 3):
        raise ValueError("moment order must be one of 0, 1, 2, 3")
    if j == 0:
        return 1.0
    exact = bridge_local_time_exact(law, n)
    a_hat = expected_local_time(law, n)
    k = np.arange(exact.pmf.shape[0], dtype=float)
    return float(np.sum(exact.pmf * (k / a_hat) ** j))


class BridgeTable:
    """Joint pmf of (S_n, L_n) by forward DP over (position, count).

    The table is (2n+1) x (n+1): row i holds end position i - n. It is
    quadratic in memory and is the transparent cross-check route; for
    n in the hundreds and above prefer ``bridge_local_time_exact``.
    """

    def __init__(self, law: WalkLaw, n: int, table: np.ndarray):
        self.law = law
        self.n = n
        self.table = table

    @classmethod
    def build(cls, law: WalkLaw, n: int) -> "BridgeTable":
        n = _check_horizon(n)
        half = 0.5 * (1.0 - law.stay)
        table = np.zeros((2 * n + 1, n + 1))
        table[n, 0] = 1.0
        for _ in range(n):
            nxt = law.stay * table
            nxt[1:, :] += half * table[:-1, :]
            nxt[:-1, :] += half * table[1:, :]
            # a step that lands on 0 advances the local-time count
            nxt[n, 1:] = nxt[n, :-1]
            nxt[n, 0] = 0.0
            table = nxt
        return cls(law, n, table)

    def total_mass(self) -> float:
        return float(self.table.sum())

    def position_pmf(self) -> np.ndarray:
        """Marginal law of S_n, indexed by position + n."""
        return self.table.sum(axis=1)

    def conditional_local_time(self, position: int = 0) -> np.ndarray:
        """pmf of L_n given S_n = position."""
        position = int(position)
        if abs(position) > self.n:
            raise ValueError("position is outside the reachable range")
        row = self.table[position + self.n]
        mass = row.sum()
        if mass <= 0.0:
            raise ValueError(f"S_n = {position} has probability zero")
        return row / mass


# ----------------------------------------------------------------------
# rejection-sampled bridges
# ----------------------------------------------------------------------


class BridgeMcResult(NamedTuple):
    """Empirical conditional law of L_n from rejection-sampled bridges."""

    n: int
    trials: int
    accepted: int
    acceptance_rate: float
    pmf: np.ndarray


@njit
def _bridge_walk_kernel(keys, n, t_minus, t_stay, out):  # pragma: no cover
    for t in range(keys.shape[0]):
        key = keys[t]
        pos = 0
        lt = 0
        for k in range(n):
            u = nb_uniform(key, k)
            if u < t_minus:
                pos -= 1
            elif u >= t_stay:
                pos += 1
            if pos == 0:
                lt += 1
        out[t] = lt if pos == 0 else -1


def _bridge_walk_block(keys, n, t_minus, t_stay):
    trials = keys.shape[0]
    pos = np.zeros(trials, dtype=np.int64)
    lt = np.zeros(trials, dtype=np.int64)
    for k in range(n):
        u = uniform_keys(keys, k)
        pos += (u >= t_stay).astype(np.int64) - (u < t_minus).astype(np.int64)
        lt += pos == 0
    return np.where(pos == 0, lt, -1)


def bridge_local_time_mc(law: WalkLaw, n: int, trials: int,
                         seed: int = 0) -> BridgeMcResult:
    """Empirical law of L_n given S_n = 0 by rejection sampling.

    Simulates ``trials`` independent walks and keeps the ones that end
    at the origin. The acceptance rate decays like n^(-1/2), so the
    sampler refuses to continue when fewer than trials^(1/2) bridges
    came through (the empirical pmf would be noise at that point).
    """
    trials = int(trials)
    if trials < 10_000:
        raise ValueError("trials must be at least 10^4")
    n = int(n)
    if n < 1:
        raise ValueError("horizon n must be a positive integer")
    t_minus = 0.5 * (1.0 - law.stay)
    t_stay = t_minus + law.stay
    keys = stream_keys_block(seed, trials)
    if USING_NUMBA:
        out = np.empty(trials, dtype=np.int64)
        _bridge_walk_kernel(keys, n, t_minus, t_stay, out)
    else:
        out = _bridge_walk_block(keys, n, t_minus, t_stay)
    kept = out[out >= 0]
    accepted = int(kept.shape[0])
    rate = accepted / trials
    if accepted < math.sqrt(trials):
        suggested = max(4 * trials, 10_000)
        raise ResourceError(
            f"only {accepted} of {trials} walks hit the bridge event; "
            f"rerun with at least {suggested} trials",
            suggested=suggested,
        )
    pmf = np.bincount(kept, minlength=n + 1) / accepted
    return BridgeMcResult(n, trials, accepted, rate, pmf)


@njit
def _local_time_kernel(keys, n, t_minus, t_stay, out):  # pragma: no cover
    for t in range(keys.shape[0]):
        key = keys[t]
        pos = 0
        lt = 0
        for k in range(n):
            u = nb_uniform(key, k)
            if u < t_minus:
                pos -= 1
            elif u >= t_stay:
                pos += 1
            if pos == 0:
                lt += 1
        out[t] = lt


def _local_time_block(keys, n, t_minus, t_stay):
    trials = keys.shape[0]
    pos = np.zeros(trials, dtype=np.int64)
    lt = np.zeros(trials, dtype=np.int64)
    for k in range(n):
        u = uniform_keys(keys, k)
        pos += (u >= t_stay).astype(np.int64) - (u < t_minus).astype(np.int64)
        lt += pos == 0
    return lt


def local_time_sample(law: WalkLaw, n: int, trials: int, seed: int = 0) -> np.ndarray:
    """Unconditional local times L_n over independent walks (int64)."""
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be positive")
    n = int(n)
    if n < 1:
        raise ValueError("horizon n must be a positive integer")
    t_minus = 0.5 * (1.0 - law.stay)
    t_stay = t_minus + law.stay
    keys = stream_keys_block(seed, trials)
    if USING_NUMBA:
        out = np.empty(trials, dtype=np.int64)
        _local_time_kernel(keys, n, t_minus, t_stay, out)
        return out
    return _local_time_block(keys, n, t_minus, t_stay)
