"""Small quadrature helpers: Gauss-Legendre panels on explicit edges."""

from __future__ import annotations

import numpy as np

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gl_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the order-point Gauss-Legendre rule on [-1,1]."""
    rule = _GL_CACHE.get(order)
    if rule is None:
        rule = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = rule
    return rule


def panel_nodes(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """All nodes and weights for GL panels between consecutive edges.

    Returns flat arrays of length (len(edges)-1)*order; integrating any
    f is then simply (weights * f(nodes)).sum().
    """
    x, w = gl_rule(order)
    lo = edges[:-1]
    half = 0.5 * (edges[1:] - lo)
    mid = lo + half
    nodes = mid[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def phase_edges(total: float, first: float, slope, t_end: float) -> np.ndarray:
    """Edges 0=t_0<...<t_K=t_end that keep the running phase increment small.

    ``slope(t)`` bounds the phase derivative on [t, t_end]; each step takes
    t_{i+1} = t_i + total_phase_step / slope(t_i), with ``first`` the end of
    the initial panel (which must already have bounded phase).
    """
    edges = [0.0, min(first, t_end)]
    while edges[-1] < t_end:
        t = edges[-1]
        step = total / max(slope(t), 1e-300)
        edges.append(min(t + step, t_end))
    return np.asarray(edges)
