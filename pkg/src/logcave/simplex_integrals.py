"""Exponential integrals over the unit simplex and tent-density moments.

The building block is

    J_m(y_0, ..., y_m) = int_{U_m} exp(sum_l u_l y_l) du_1 ... du_m,
    u_0 = 1 - sum_{l>=1} u_l,

which equals the divided difference of exp at the nodes y_0, ..., y_m.
Partial derivatives of J_m are divided differences with repeated nodes,
so the first and second moments of a tent density reduce to sums of
J_{d+1} and J_{d+2} evaluations over the simplices of its triangulation.

Two evaluation strategies are used:

* a closed form (sum of exponentials over products of pairwise gaps) when
  all arguments are well separated -- fast and fully vectorised;
* a series expansion about the mean argument otherwise (the closed form
  has removable singularities at coincident arguments), combined across
  well-separated clusters by the divided-difference recurrence.

The maximum argument is always factored out before exponentiation.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .exceptions import NumericalBreakdown

#: pairwise-gap threshold below which the closed form is abandoned
SEP_THRESHOLD = 1e-4
#: cancellation guard: closed-form results whose largest term exceeds this
#: multiple of the result are recomputed with the series/recurrence engine
_COND_MAX = 1e4
#: node ranges below this are evaluated by series, larger by recurrence
_CLUSTER = 0.5
_SERIES_TERMS = 40
#: batched fallback handles whole rows by series up to this node range
_BATCH_RANGE = 4.0


# ---------------------------------------------------------------------------
# scalar engine: divided differences of exp with arbitrary node multiplicity


def _series_dd(z: np.ndarray) -> float:
    """exp[z_0..z_m] for nodes with small spread, via the expansion
    exp[z] = e^{zbar} * sum_k h_k(z - zbar) / (m + k)!  where h_k is the
    complete homogeneous symmetric polynomial."""
    m = len(z) - 1
    zbar = z.mean()
    w = z - zbar
    h = np.zeros(_SERIES_TERMS)
    h[0] = 1.0
    for wj in w:
        for k in range(1, _SERIES_TERMS):
            h[k] += wj * h[k - 1]
    total = 0.0
    fk = float(factorial(m))
    for k in range(_SERIES_TERMS):
        total += h[k] / fk
        fk *= m + k + 1
    return float(np.exp(zbar) * total)


def dd_exp(nodes) -> float:
    """Divided difference of exp at the given nodes (repeats allowed).

    This is J_m(nodes) for m = len(nodes) - 1.  Accurate for any argument
    configuration: clustered sub-ranges are evaluated by series, and
    well-separated ranges combined by the recurrence, whose divisors are
    then bounded away from zero.
    """
    w = np.sort(np.asarray(nodes, dtype=float))
    m = len(w) - 1
    shift = w[-1]
    z = w - shift
    table = {}
    for length in range(m + 1):
        for i in range(m + 1 - length):
            j = i + length
            if z[j] - z[i] <= _CLUSTER:
                table[i, j] = _series_dd(z[i : j + 1])
            else:
                table[i, j] = (table[i + 1, j] - table[i, j - 1]) / (z[j] - z[i])
    return float(np.exp(shift) * table[0, m])


def j_function(args) -> float:
    """J_{m}(y_0, ..., y_m): the exponential integral over the unit simplex.

    Uses the closed form when all pairwise gaps exceed ``SEP_THRESHOLD``
    (after factoring out the maximum argument) and the series/recurrence
    engine otherwise.
    """
    y = np.asarray(args, dtype=float)
    if y.ndim != 1 or len(y) < 2:
        raise ValueError("j_function expects a vector of at least two arguments")
    if not np.all(np.isfinite(y)):
        raise NumericalBreakdown("non-finite argument to j_function")
    diffs = y[:, None] - y[None, :]
    off = ~np.eye(len(y), dtype=bool)
    if np.abs(diffs[off]).min() > SEP_THRESHOLD:
        shift = y.max()
        z = y - shift
        prods = np.where(off, z[:, None] - z[None, :], 1.0).prod(axis=1)
        terms = np.exp(z) / prods
        total = terms.sum()
        # cancellation guard: the closed form loses ~eps * max|term| / |sum|
        if np.abs(terms).max() <= _COND_MAX * total:
            return float(np.exp(shift) * total)
    return dd_exp(y)


# ---------------------------------------------------------------------------
# batched series fallback: whole rows at once
#
# The divided-difference series about the mid-range node is accurate to
# ~1e-13 whenever the node range is at most _BATCH_RANGE, which covers the
# rows the closed form rejects during fitting (near-coincident heights).
# Wider rows fall through to the scalar cluster/recurrence engine.


def _chs_append(h: np.ndarray, w: np.ndarray) -> None:
    """Extend complete homogeneous symmetric tables h (rows x K) in place
    by one node per row, with centred offsets ``w`` (rows,)."""
    for k in range(1, h.shape[1]):
        h[:, k] += w * h[:, k - 1]


def _series_sum(h: np.ndarray, m: int) -> np.ndarray:
    """Per-row sum_k h_k / (m + k)! for tables of order-m differences."""
    inv = np.array([1.0 / factorial(m + k) for k in range(h.shape[1])])
    return h @ inv


def _chs_base(H: np.ndarray):
    """Centred offsets, exp(centre) and the base table for rows ``H``."""
    c = 0.5 * (H.max(axis=1) + H.min(axis=1))
    W = H - c[:, None]
    h = np.zeros((H.shape[0], _SERIES_TERMS))
    h[:, 0] = 1.0
    for j in range(H.shape[1]):
        _chs_append(h, W[:, j])
    return W, np.exp(c), h


def _fallback_values(H: np.ndarray) -> np.ndarray:
    out = np.empty(H.shape[0])
    small = H.max(axis=1) - H.min(axis=1) <= _BATCH_RANGE
    if small.any():
        _, e, h = _chs_base(H[small])
        out[small] = e * _series_sum(h, H.shape[1] - 1)
    for i in np.flatnonzero(~small):
        out[i] = dd_exp(H[i])
    return out


def _fallback_gradients(H: np.ndarray) -> np.ndarray:
    k = H.shape[1]
    out = np.empty_like(H)
    small = H.max(axis=1) - H.min(axis=1) <= _BATCH_RANGE
    if small.any():
        W, e, h = _chs_base(H[small])
        # one doubled node per entry; amortise the appends over a single
        # (rows * k)-sized table
        ha = np.repeat(h, k, axis=0)
        _chs_append(ha, W.ravel())
        out[small] = e[:, None] * _series_sum(ha, k).reshape(-1, k)
    for i in np.flatnonzero(~small):
        row = H[i]
        out[i] = [dd_exp(np.append(row, row[l])) for l in range(k)]
    return out


def _fallback_hessians(H: np.ndarray) -> np.ndarray:
    k = H.shape[1]
    out = np.empty((H.shape[0], k, k))
    small = H.max(axis=1) - H.min(axis=1) <= _BATCH_RANGE
    if small.any():
        W, e, h = _chs_base(H[small])
        # two extra nodes per entry (a and b each doubled); amortise over a
        # (rows * k * k)-sized table and symmetrise afterwards
        ha = np.repeat(np.repeat(h, k, axis=0), k, axis=0)
        wa = np.repeat(W, k, axis=1).ravel()
        wb = np.tile(W, (1, k)).ravel()
        _chs_append(ha, wa)
        _chs_append(ha, wb)
        sub = _series_sum(ha, k + 1).reshape(-1, k, k)
        ii = np.arange(k)
        sub[:, ii, ii] *= 2.0
        out[small] = e[:, None, None] * sub
    for i in np.flatnonzero(~small):
        row = H[i]
        hrow = np.empty((k, k))
        for a in range(k):
            hrow[a, a] = 2.0 * dd_exp(np.concatenate([row, [row[a], row[a]]]))
            for b in range(a + 1, k):
                hrow[a, b] = hrow[b, a] = dd_exp(np.concatenate([row, [row[a], row[b]]]))
        out[i] = hrow
    return out


# ---------------------------------------------------------------------------
# vectorised evaluation over batches of simplex-height rows


def _row_gaps(H: np.ndarray) -> np.ndarray:
    """Minimum pairwise |gap| per row of H (rows are argument tuples)."""
    k = H.shape[1]
    diffs = np.abs(H[:, :, None] - H[:, None, :])
    diffs[:, np.arange(k), np.arange(k)] = np.inf
    return diffs.min(axis=(1, 2))


def _closed_parts(H: np.ndarray):
    """Shared intermediates for the closed-form value/gradient/Hessian.

    Returns (shift, t, R, S) where, per row, t_a = e^{z_a} / prod_{b != a}
    (z_a - z_b) with z = H - shift, R_ab = 1/(z_a - z_b) off-diagonal
    (zero on the diagonal), and S_a = sum_b R_ab.
    """
    k = H.shape[1]
    shift = H.max(axis=1, keepdims=True)
    z = H - shift
    D = z[:, :, None] - z[:, None, :]
    eye = np.eye(k, dtype=bool)
    prods = np.where(eye, 1.0, D).prod(axis=2)
    t = np.exp(z) / prods
    with np.errstate(divide="ignore"):
        R = np.where(eye, 0.0, 1.0 / np.where(eye, 1.0, D))
    S = R.sum(axis=2)
    return shift[:, 0], t, R, S


def j_values(H: np.ndarray) -> np.ndarray:
    """J_{k-1} for every row of H (batch of argument tuples)."""
    H = np.asarray(H, dtype=float)
    out = np.empty(H.shape[0])
    good = _row_gaps(H) > SEP_THRESHOLD
    if good.any():
        shift, t, _, _ = _closed_parts(H[good])
        total = t.sum(axis=1)
        ok = np.abs(t).max(axis=1) <= _COND_MAX * np.abs(total)
        out[good] = np.exp(shift) * total
        good[np.flatnonzero(good)[~ok]] = False
    if not good.all():
        out[~good] = _fallback_values(H[~good])
    return out


def j_gradients(H: np.ndarray) -> np.ndarray:
    """dJ/dy_l for every row: J_k evaluations with one doubled node."""
    H = np.asarray(H, dtype=float)
    out = np.empty_like(H)
    good = _row_gaps(H) > SEP_THRESHOLD
    if good.any():
        shift, t, R, S = _closed_parts(H[good])
        grad = np.einsum("ra,rab->rb", t, R) + t * (1.0 - S)
        out[good] = np.exp(shift)[:, None] * grad
        # guard against cancellation at the row scale: tiny entries only
        # enter downstream sums, so absolute accuracy suffices for them
        big = (np.abs(t) * (1.0 + np.abs(R).max(axis=2) + np.abs(S))).max(axis=1)
        ok = big <= _COND_MAX * np.abs(grad).max(axis=1)
        good[np.flatnonzero(good)[~ok]] = False
    if not good.all():
        out[~good] = _fallback_gradients(H[~good])
    return out


def j_values_and_gradients(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(J, dJ/dy) for every row, sharing the closed-form intermediates.

    Equivalent to ``(j_values(H), j_gradients(H))`` but roughly twice as
    fast; this is the inner loop of the tent fit.
    """
    H = np.asarray(H, dtype=float)
    vals = np.empty(H.shape[0])
    grads = np.empty_like(H)
    good = _row_gaps(H) > SEP_THRESHOLD
    if good.any():
        shift, t, R, S = _closed_parts(H[good])
        total = t.sum(axis=1)
        grad = np.einsum("ra,rab->rb", t, R) + t * (1.0 - S)
        e = np.exp(shift)
        vals[good] = e * total
        grads[good] = e[:, None] * grad
        big = (np.abs(t) * (1.0 + np.abs(R).max(axis=2) + np.abs(S))).max(axis=1)
        ok = (np.abs(t).max(axis=1) <= _COND_MAX * np.abs(total)) \
            & (big <= _COND_MAX * np.abs(grad).max(axis=1))
        good[np.flatnonzero(good)[~ok]] = False
    if not good.all():
        bad = ~good
        vals[bad] = _fallback_values(H[bad])
        grads[bad] = _fallback_gradients(H[bad])
    return vals, grads


def j_hessians(H: np.ndarray) -> np.ndarray:
    """d2J/dy_a dy_b for every row: J_{k+1} with two extra nodes.

    Off-diagonal entries are divided differences with nodes y_a, y_b each
    doubled; diagonal entries are twice the difference with y_a tripled.
    """
    H = np.asarray(H, dtype=float)
    m, k = H.shape
    out = np.empty((m, k, k))
    good = _row_gaps(H) > SEP_THRESHOLD
    if good.any():
        shift, t, R, S = _closed_parts(H[good])
        S2 = (R**2).sum(axis=2)
        # sum_k t_k R_ka R_kb (diagonal of R is zero, so k != a, b)
        base = np.einsum("rk,rka,rkb->rab", t, R, R)
        corr_a = t[:, :, None] * R * (1.0 - R - S[:, :, None])      # a-index first
        hess = base + corr_a + np.swapaxes(corr_a, 1, 2)
        diag = 2.0 * np.einsum("rk,rka->ra", t, R**2) + t * (1.0 - 2.0 * S + S**2 + S2)
        ii = np.arange(k)
        hess[:, ii, ii] = diag
        out[good] = np.exp(shift)[:, None, None] * hess
        big = (np.abs(t) * (1.0 + np.abs(R).max(axis=2) + np.abs(S)) ** 2).max(axis=1)
        ok = big <= _COND_MAX * np.abs(hess).max(axis=(1, 2))
        good[np.flatnonzero(good)[~ok]] = False
    if not good.all():
        out[~good] = _fallback_hessians(H[~good])
    return out


# ---------------------------------------------------------------------------
# tent-density moments


@dataclass(frozen=True)
class MomentSummary:
    """First and second moments of a fitted tent density, together with the
    sample moments and the smoothing covariance A = Sigma_hat - Sigma_tilde."""

    mean: np.ndarray           # integral of x f-hat (should equal the sample mean)
    second_moment: np.ndarray  # integral of x x^T f-hat
    sigma_tilde: np.ndarray    # covariance of the tent density
    sigma_hat: np.ndarray      # sample covariance, divisor n - 1
    a_hat: np.ndarray          # sigma_hat - sigma_tilde
    sample_mean: np.ndarray
    normalization: float       # integral of f-hat (should be 1)


def tent_moments(points: np.ndarray, simplices: np.ndarray, dets: np.ndarray,
                 heights: np.ndarray):
    """(integral, mean integral, second moment) of exp(tent) over the hull.

    ``heights`` are the tent values at all rows of ``points``; only the
    rows referenced by ``simplices`` enter.
    """
    V = points[simplices]            # m x (d+1) x d
    Hh = heights[simplices]          # m x (d+1)
    vals = j_values(Hh)
    grads = j_gradients(Hh)
    hess = j_hessians(Hh)
    total = float((dets * vals).sum())
    mean = np.einsum("m,mld,ml->d", dets, V, grads)
    second = np.einsum("m,mad,mbe,mab->de", dets, V, V, hess)
    return total, mean, 0.5 * (second + second.T)


def second_moment_tent(tent) -> MomentSummary:
    """Moment summary of a fitted tent (see :class:`MomentSummary`)."""
    pts = tent.tri.points
    n = pts.shape[0]
    total, mean, second = tent_moments(pts, tent.tri.simplices, tent.tri.dets,
                                       tent.heights)
    if not (np.isfinite(total) and np.all(np.isfinite(mean)) and np.all(np.isfinite(second))):
        raise NumericalBreakdown("non-finite moment integral")
    xbar = pts.mean(axis=0)
    # centred at the sample mean; reduces to  second - xbar xbar^T  because
    # the tent mean coincides with the sample mean at the optimum
    sigma_tilde = second - np.outer(xbar, mean) - np.outer(mean, xbar) + np.outer(xbar, xbar)
    sigma_tilde = 0.5 * (sigma_tilde + sigma_tilde.T)
    centered = pts - xbar
    sigma_hat = centered.T @ centered / (n - 1)
    a_hat = 0.5 * ((sigma_hat - sigma_tilde) + (sigma_hat - sigma_tilde).T)
    return MomentSummary(
        mean=mean,
        second_moment=second,
        sigma_tilde=sigma_tilde,
        sigma_hat=sigma_hat,
        a_hat=a_hat,
        sample_mean=xbar,
        normalization=total,
    )


def trace_a_hat(summary: MomentSummary) -> float:
    """tr(A-hat), the smoothing-covariance trace (the test statistic)."""
    return float(np.trace(summary.a_hat))
