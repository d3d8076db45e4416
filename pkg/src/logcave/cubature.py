"""Cubature rules used by the smoothed-density evaluator.

* combinatorial (Grundmann-Moller) rules of odd degree on the unit
  simplex, for the outer integral after one dimension has been reduced
  analytically;
* composite Gauss-Legendre panels on [0, 1] for the d = 2 case.

Rules are returned as (points, weights) with points in the coordinates
(u_1, ..., u_d) of the unit simplex; weights integrate f over the simplex
(they sum to its volume 1/d!).  Grundmann-Moller weights of index s >= 1
carry mixed signs.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import factorial

import numpy as np


def _compositions(total: int, parts: int):
    """All tuples of `parts` non-negative integers summing to `total`."""
    for cuts in combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for c in cuts:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 2 - prev)
        yield tuple(out)


@lru_cache(maxsize=None)
def grundmann_moller(d: int, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Rule of degree 2s+1 on the d-dimensional unit simplex.

    Returns (points (N x d), weights (N,)); exact for polynomials of
    total degree <= 2s + 1.
    """
    pts = []
    wts = []
    for i in range(s + 1):
        denom = d + 1 + 2 * (s - i)
        w = ((-1) ** i * 2.0 ** (-2 * s) * denom**(2 * s + 1)
             / (factorial(i) * factorial(d + 1 + 2 * s - i)))
        for k in _compositions(s - i, d + 1):
            # barycentric (2k+1)/denom; drop the implicit first coordinate
            pts.append([(2 * kj + 1) / denom for kj in k[1:]])
            wts.append(w)
    return np.asarray(pts, dtype=float), np.asarray(wts, dtype=float)


def subdivide_triangle(verts: np.ndarray) -> list[np.ndarray]:
    """Split a 2-D triangle (3 x 2 vertex array) into 4 congruent halves."""
    a, b, c = verts
    ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
    return [np.array([a, ab, ca]), np.array([ab, b, bc]),
            np.array([ca, bc, c]), np.array([ab, bc, ca])]


def map_rule_to_simplex(verts: np.ndarray, pts: np.ndarray,
                        wts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Affinely transplant a unit-simplex rule onto the simplex ``verts``
    ((d+1) x d array).  Weights are rescaled by the Jacobian."""
    v0 = verts[0]
    M = (verts[1:] - v0).T
    jac = abs(np.linalg.det(M))
    return v0 + pts @ M.T, wts * jac


@lru_cache(maxsize=None)
def gauss_legendre_panels(n_nodes: int, n_panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    x = (x + 1) / 2
    w = w / 2
    h = 1.0 / n_panels
    pts = np.concatenate([(i + x) * h for i in range(n_panels)])
    wts = np.tile(w * h, n_panels)
    return pts, wts
