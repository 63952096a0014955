"""Small Gauss-Legendre helpers shared by the quadrature-heavy modules."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Nodes and weights on [-1, 1] (read-only arrays)."""
    t, w = np.polynomial.legendre.leggauss(n)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def panel_rule(edges, n):
    """Composite rule on consecutive ``edges`` along the last axis.

    Returns nodes and weights of shape ``edges.shape[:-1] + (panels * n,)``.
    Zero-length panels get zero weight.
    """
    edges = np.asarray(edges, dtype=float)
    t, w = gauss_legendre(n)
    lo = edges[..., :-1, None]
    hi = edges[..., 1:, None]
    half = 0.5 * (hi - lo)
    nodes = lo + half * (t + 1.0)
    weights = half * w
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)
