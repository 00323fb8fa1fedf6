"""The catalogue of weight functions used across profiles and estimators.

Every estimator that averages g(occupation ratio) takes its g in this form
so that compiled kernels can evaluate the common cases without boxing a
Python callable: a Weight is (code, param) plus a vectorized reference
implementation. Arbitrary callables are wrapped with code -1 and are only
usable on the interpreted paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .backend import njit

__all__ = ["Weight", "WEIGHTS", "resolve_weight", "weight_eval_scalar"]

CODE_CONST = 0
CODE_IDENTITY = 1
CODE_EXP_DECAY = 2
CODE_CLAMP = 3
CODE_GENERIC = -1


@dataclass(frozen=True)
class Weight:
    """A named weight function g with a kernel-friendly (code, param) form."""

    name: str
    code: int
    param: float
    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        out = self.fn(arr)
        return float(out) if arr.ndim == 0 else out

    def kink_points(self) -> tuple[float, ...]:
        """Argument values where g is continuous but not smooth."""
        if self.code == CODE_CLAMP:
            return (self.param,)
        return ()


WEIGHTS: dict[str, Weight] = {
    "const": Weight("const", CODE_CONST, 0.0, lambda x: np.ones_like(x)),
    "identity": Weight("identity", CODE_IDENTITY, 0.0, lambda x: x + 0.0),
    "exp-decay": Weight("exp-decay", CODE_EXP_DECAY, 1.0, lambda x: np.exp(-x)),
    "clamp": Weight("clamp", CODE_CLAMP, 3.0, lambda x: np.minimum(x, 3.0)),
}


def resolve_weight(g: Union[str, Weight, Callable]) -> Weight:
    """Accept a catalogue name, a Weight, or any callable."""
    if isinstance(g, Weight):
        return g
    if isinstance(g, str):
        try:
            return WEIGHTS[g]
        except KeyError:
            raise ValueError(
                f"unknown weight {g!r}; catalogue: {sorted(WEIGHTS)}"
            ) from None
    if callable(g):
        return Weight(getattr(g, "__name__", "custom"), CODE_GENERIC, 0.0, np.vectorize(g, otypes=[float]))
    raise TypeError(f"cannot interpret {g!r} as a weight function")


@njit
def weight_eval_scalar(code: int, param: float, x: float) -> float:
    """Scalar catalogue evaluation, callable from compiled kernels."""
    if code == CODE_CONST:
        return 1.0
    if code == CODE_IDENTITY:
        return x
    if code == CODE_EXP_DECAY:
        return math.exp(-param * x)
    if code == CODE_CLAMP:
        return min(x, param)
    return math.nan
