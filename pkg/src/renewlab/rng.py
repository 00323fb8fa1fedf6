"""Counter-based random numbers shared by every sampler in the package.

All Monte Carlo code draws from a pure function

    (seed, stream, counter) -> uint64

built from the splitmix64 finalizer. ``stream`` is a trial index (or any
other partition label), ``counter`` the draw index within the stream, so

  * reruns with the same seed are bit-identical,
  * results do not depend on how trials are batched or scheduled,
  * the numba kernels and the numpy fallback consume the very same numbers.

Three equivalent implementations are kept deliberately: a python-int
reference (the ground truth the tests pin down), numpy array generators for
vectorized fallback paths, and numba-friendly scalars for jitted loops.
"""

from __future__ import annotations

import numpy as np

from .backend import njit

_MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15  # splitmix64 increment, 2^64 / phi
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# ----------------------------------------------------------------------
# python-int reference implementation
# ----------------------------------------------------------------------


def mix64_ref(z: int) -> int:
    """splitmix64 finalizer on python ints (reference implementation)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def stream_key_ref(seed: int, stream: int) -> int:
    """Derive the per-stream key; two finalizer rounds decorrelate streams."""
    k = mix64_ref((seed + GOLDEN) & _MASK)
    return mix64_ref((k + (stream * GOLDEN)) & _MASK)


def u64_ref(key: int, ctr: int) -> int:
    return mix64_ref((key + (ctr * GOLDEN)) & _MASK)


def uniform_ref(key: int, ctr: int) -> float:
    """Uniform on the strictly open interval (0,1).

    52 high bits plus a half offset: v + 0.5 is exactly representable for
    every v < 2^52, so the value is never rounded to 0.0 or 1.0 and all
    evaluation paths produce bit-identical floats.
    """
    return ((u64_ref(key, ctr) >> 12) + 0.5) * 2.0**-52


# ----------------------------------------------------------------------
# numpy array generators (used by the pure-numpy kernel fallbacks)
# ----------------------------------------------------------------------

_G64 = np.uint64(GOLDEN)
_M1_64 = np.uint64(_MIX1)
_M2_64 = np.uint64(_MIX2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S12 = np.uint64(12)


def _mix64_arr(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1_64
    z = (z ^ (z >> _S27)) * _M2_64
    return z ^ (z >> _S31)


def u64_block(key: int, start: int, count: int) -> np.ndarray:
    """uint64 outputs for counters start..start+count-1 of one stream."""
    ctr = np.arange(start, start + count, dtype=np.uint64)
    return _mix64_arr(np.uint64(key) + ctr * _G64)


def uniform_block(key: int, start: int, count: int) -> np.ndarray:
    """float64 uniforms in (0,1) for a counter range of one stream."""
    bits = u64_block(key, start, count)
    return ((bits >> _S12).astype(np.float64) + 0.5) * 2.0**-52


def stream_keys_block(seed: int, streams) -> np.ndarray:
    """Vectorized stream_key: pass an array of stream indices or a count."""
    if np.isscalar(streams):
        streams = np.arange(int(streams))
    s = np.asarray(streams, dtype=np.uint64)
    k = np.uint64(mix64_ref(int(seed) + GOLDEN))
    return _mix64_arr(k + s * _G64)


def uniform_keys(keys: np.ndarray, ctr: int) -> np.ndarray:
    """One uniform per stream, all at the same counter.

    Block-parallel kernels advance many streams in lockstep; this draws
    the same value uniform_ref(key, ctr) would for each key. The counter
    offset is reduced mod 2^64 in exact integer arithmetic because numpy
    warns on scalar uint64 wraparound (array wraparound is silent).
    """
    off = np.uint64((int(ctr) * GOLDEN) & _MASK)
    return (
        (_mix64_arr(np.asarray(keys, dtype=np.uint64) + off) >> _S12).astype(np.float64)
        + 0.5
    ) * 2.0**-52


# ----------------------------------------------------------------------
# numba scalar versions (bodies rely on native uint64 wraparound)
# ----------------------------------------------------------------------


@njit
def nb_mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit
def nb_stream_key(seed, stream):
    g = np.uint64(0x9E3779B97F4A7C15)
    k = nb_mix64(np.uint64(seed) + g)
    return nb_mix64(k + np.uint64(stream) * g)


@njit
def nb_u64(key, ctr):
    g = np.uint64(0x9E3779B97F4A7C15)
    return nb_mix64(np.uint64(key) + np.uint64(ctr) * g)


@njit
def nb_uniform(key, ctr):
    bits = nb_u64(key, ctr)
    return (np.float64(bits >> np.uint64(12)) + 0.5) * (2.0**-52)
