"""Independent numeric oracles used by the tests.

These deliberately avoid the package's own evaluation paths: divided
differences via mpmath at high precision, and simplex integration by a
tensor Gauss-Legendre rule under the Duffy-style substitution

    u_1 = t_1, u_2 = t_2 (1 - t_1), ..., u_d = t_d prod_{j<d} (1 - t_j),

whose Jacobian is prod_j (1 - t_j)^{d-j}.  For smooth integrands this
converges spectrally, so modest node counts give near machine precision.
"""

import mpmath as mp
import numpy as np


def mp_divided_difference_exp(nodes, prec: int = 80) -> float:
    """exp[y_0, ..., y_m] by the recursive definition at high precision."""
    with mp.workdps(prec):
        # divided differences are symmetric; sorting makes equal endpoints
        # of a sub-range imply a fully confluent (all-equal) sub-range
        ys = sorted(mp.mpf(repr(float(y))) for y in nodes)
        table = [mp.e**y for y in ys]
        m = len(ys)
        for length in range(1, m):
            nxt = []
            for i in range(m - length):
                lo, hi = ys[i], ys[i + length]
                if lo == hi:
                    # derivative of order `length` of exp over length!
                    nxt.append(mp.e**lo / mp.factorial(length))
                else:
                    nxt.append((table[i + 1] - table[i]) / (hi - lo))
            table = nxt
        return float(table[0])


def simplex_gauss_nodes(d: int, n_per_dim: int):
    """(points (N x d), weights (N,)) integrating over the unit simplex."""
    x, w = np.polynomial.legendre.leggauss(n_per_dim)
    x = (x + 1) / 2
    w = w / 2
    grids = np.meshgrid(*([x] * d), indexing="ij")
    wgrids = np.meshgrid(*([w] * d), indexing="ij")
    t = np.stack([g.ravel() for g in grids], axis=1)       # N x d
    wt = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    u = np.empty_like(t)
    rem = np.ones(t.shape[0])
    jac = np.ones(t.shape[0])
    for j in range(d):
        u[:, j] = t[:, j] * rem
        jac *= rem
        rem = rem * (1.0 - t[:, j])
    return u, wt * jac


def simplex_integral(g, d: int, n_per_dim: int = 80) -> float:
    """Integral of a vectorised g over the d-dimensional unit simplex."""
    u, w = simplex_gauss_nodes(d, n_per_dim)
    return float(np.dot(np.asarray(g(u), dtype=float), w))
