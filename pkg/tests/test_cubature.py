from itertools import product
from math import factorial, prod

import numpy as np
import pytest

from logcave.cubature import (gauss_legendre_panels, grundmann_moller,
                              map_rule_to_simplex, subdivide_triangle)


def simplex_monomial_integral(alpha) -> float:
    """Exact integral of prod u_i^alpha_i over the unit simplex:
    prod(alpha_i!) / (d + sum alpha_i)!."""
    d = len(alpha)
    return prod(factorial(a) for a in alpha) / factorial(d + sum(alpha))


@pytest.mark.parametrize("d,s", [(1, 2), (2, 2), (2, 4), (3, 3), (3, 4), (4, 3)])
def test_grundmann_moller_monomial_exactness(d, s):
    pts, wts = grundmann_moller(d, s)
    degree = 2 * s + 1
    for alpha in product(range(degree + 1), repeat=d):
        if sum(alpha) > degree:
            continue
        vals = np.prod(pts ** np.asarray(alpha), axis=1)
        assert np.dot(vals, wts) == pytest.approx(
            simplex_monomial_integral(alpha), rel=1e-10, abs=1e-14)


def test_grundmann_moller_weights_sum_to_volume():
    for d in (1, 2, 3, 4):
        _, wts = grundmann_moller(d, 4)
        assert wts.sum() == pytest.approx(1.0 / factorial(d), rel=1e-12)


def test_subdivide_triangle_partitions_area():
    tri = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
    parts = subdivide_triangle(tri)
    assert len(parts) == 4
    area = sum(abs(np.linalg.det((p[1:] - p[0]).T)) / 2 for p in parts)
    assert area == pytest.approx(2.0, rel=1e-12)


def test_map_rule_to_simplex_preserves_integrals():
    pts, wts = grundmann_moller(2, 3)
    verts = np.array([[1.0, 1.0], [3.0, 1.5], [0.5, 4.0]])
    mpts, mwts = map_rule_to_simplex(verts, pts, wts)

    def g(x):
        return x[:, 0] ** 2 + 0.5 * x[:, 1]

    # split and integrate piecewise; totals must agree
    total = np.dot(g(mpts), mwts)
    sub_total = 0.0
    for part in subdivide_triangle(verts):
        sp, sw = map_rule_to_simplex(part, pts, wts)
        sub_total += np.dot(g(sp), sw)
    assert sub_total == pytest.approx(total, rel=1e-12)


def test_gauss_legendre_panels_exact_for_polynomials():
    x, w = gauss_legendre_panels(8, 4)
    assert w.sum() == pytest.approx(1.0, rel=1e-13)
    for k in range(12):
        assert np.dot(x**k, w) == pytest.approx(1.0 / (k + 1), rel=1e-12)


def test_gauss_legendre_panels_cover_unit_interval():
    x, _ = gauss_legendre_panels(16, 8)
    assert x.min() > 0 and x.max() < 1
    assert len(x) == 16 * 8
