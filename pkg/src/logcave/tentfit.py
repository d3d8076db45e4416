"""Log-concave maximum likelihood estimation.

The log-density of the MLE is a *tent function*: the least concave
majorant of poles (X_i, y_i), piecewise affine over a triangulation of
the convex hull of the data.  The pole heights minimise the convex
objective

    sigma(y) = -(1/n) sum_i y_i + int_{C_n} exp(tent_y(x)) dx,

whose integral term is a sum of J-function evaluations over the simplices
of the majorant's triangulation.

The minimisation runs a quasi-Newton method on sigma (the objective is
smooth wherever the majorant's triangulation is locally stable, which is
the generic situation along the iteration path), followed by an exact
Newton polish over the (d+1)-parameter family of affine shifts
y_i -> y_i + c^T X_i + e.  Affine shifts leave the triangulation
untouched, so the polish subproblem is smooth, and its stationarity
conditions are precisely the normalization and mean identities
int f = 1 and int x f = mean(X).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import ConvexHull, QhullError

from .exceptions import NoConvergence
from .geometry import Dataset, Triangulation, as_dataset, build_triangulation, convex_hull_triangulate
from .simplex_integrals import j_values, j_values_and_gradients

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 20000
#: normalization residual required for convergence
NORM_RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class TentFunction:
    """The fitted log-concave MLE.

    ``heights[i]`` is log f-hat(X_i); ``b``/``beta`` give the affine piece
    b_j^T x - beta_j of the log-density on simplex j of ``tri``.
    """

    tri: Triangulation
    heights: np.ndarray   # per data point, n
    b: np.ndarray         # m x d
    beta: np.ndarray      # m
    objective: float
    converged: bool

    @property
    def n(self) -> int:
        return self.tri.points.shape[0]

    @property
    def d(self) -> int:
        return self.tri.points.shape[1]

    def log_density(self, x) -> np.ndarray:
        """log f-hat at the query points; -inf outside the hull.

        The tent is concave, so inside the hull it is the minimum of its
        affine pieces; this avoids point location entirely.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.full(x.shape[0], -np.inf)
        inside = self.tri.contains(x)
        if inside.any():
            xi = x[inside]
            vals = np.full(xi.shape[0], np.inf)
            for lo in range(0, self.b.shape[0], 4096):
                chunk = slice(lo, lo + 4096)
                vals = np.minimum(vals, (xi @ self.b[chunk].T - self.beta[chunk]).min(axis=1))
            out[inside] = vals
        return out

    def density(self, x) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_density(x))

    def to_dict(self) -> dict:
        return {
            "dim": self.d,
            "points": self.tri.points.tolist(),
            "heights": self.heights.tolist(),
            "simplices": self.tri.simplices.tolist(),
            "b": self.b.tolist(),
            "beta": self.beta.tolist(),
            "objective": self.objective,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "TentFunction":
        pts = np.asarray(payload["points"], dtype=float)
        tri = build_triangulation(pts, np.asarray(payload["simplices"], dtype=int))
        return cls(
            tri=tri,
            heights=np.asarray(payload["heights"], dtype=float),
            b=np.asarray(payload["b"], dtype=float),
            beta=np.asarray(payload["beta"], dtype=float),
            objective=float(payload.get("objective", np.nan)),
            converged=bool(payload.get("converged", True)),
        )


def tent_eval(tent: TentFunction, x) -> np.ndarray:
    """Density of the MLE at query points (0 outside the hull)."""
    return tent.density(x)


# ---------------------------------------------------------------------------
# least concave majorant


def concave_majorant(points: np.ndarray, y: np.ndarray):
    """Triangulation (simplices, |D_j|) induced by the least concave
    majorant of the poles (X_i, y_i): the upper facets of the lifted hull."""
    n, d = points.shape
    scale = max(1.0, float(np.abs(y).max()))
    lifted = np.column_stack([points, y])
    try:
        hull = ConvexHull(lifted, qhull_options="Qt")
    except QhullError:
        try:
            hull = ConvexHull(lifted, qhull_options="Qt QJ")
        except QhullError:
            # poles are affine in x: any hull triangulation works
            tri = convex_hull_triangulate(points)
            return tri.simplices, tri.dets
    normals = hull.equations[:, :-1]
    upper = normals[:, -1] > 1e-12
    simplices = hull.simplices[upper]
    verts = points[simplices]
    dets = np.abs(np.linalg.det(verts[:, 1:, :] - verts[:, :1, :]))
    keep = dets > 1e-12 * max(dets.sum(), 1e-300)
    return simplices[keep], dets[keep]


def _sigma_and_grad(points: np.ndarray, y: np.ndarray):
    """Objective sigma(y) and a subgradient.

    Poles strictly below the roof contribute only through the linear term;
    majorant vertices additionally receive the derivative of the integral.
    """
    n = points.shape[0]
    simplices, dets = concave_majorant(points, y)
    H = y[simplices]
    vals, jgrads = j_values_and_gradients(H)
    integral = float((dets * vals).sum())
    grad = np.full(n, -1.0 / n)
    if not np.isfinite(integral):
        # overflow region: push all heights down
        return 1e300, np.ones(n)
    contrib = dets[:, None] * jgrads
    np.add.at(grad, simplices.ravel(), contrib.ravel())
    return -float(y.mean()) + integral, grad


def objective(points: np.ndarray, y: np.ndarray) -> float:
    """sigma(y) (exposed for tests and diagnostics)."""
    return _sigma_and_grad(np.asarray(points, dtype=float), np.asarray(y, dtype=float))[0]


def _affine_polish(points: np.ndarray, y: np.ndarray, simplices, dets):
    """Minimise sigma over affine shifts y + X c + e with the majorant's
    triangulation held fixed (exact: affine shifts preserve it).

    At the minimiser, int exp(tent) = 1 and int x exp(tent) = mean(X).
    """
    n, d = points.shape
    xbar = points.mean(axis=0)
    H = y[simplices]            # m x (d+1)
    V = points[simplices]       # m x (d+1) x d

    def fun_grad(v):
        c, e = v[:d], v[d]
        hs = H + V @ c + e
        vals, jgrads = j_values_and_gradients(hs)
        integral = float((dets * vals).sum())
        if not np.isfinite(integral):
            return 1e300, np.ones(d + 1)
        grads = dets[:, None] * jgrads
        gc = np.einsum("ml,mld->d", grads, V) - xbar
        ge = grads.sum() - 1.0
        return -float(y.mean()) - xbar @ c - e + integral, np.append(gc, ge)

    res = minimize(fun_grad, np.zeros(d + 1), jac=True, method="BFGS",
                   options={"gtol": 1e-12, "maxiter": 400})
    c, e = res.x[:d], res.x[d]
    return y + points @ c + e


def _pieces(points: np.ndarray, simplices: np.ndarray, heights: np.ndarray):
    """Affine pieces (b_j, beta_j) interpolating the pole heights."""
    V = points[simplices]                           # m x (d+1) x d
    k = V.shape[1]
    A = np.concatenate([V, -np.ones((V.shape[0], k, 1))], axis=2)
    sol = np.linalg.solve(A, heights[simplices][..., None])[..., 0]
    return sol[:, :-1], sol[:, -1]


def _uniform_tent(data: Dataset) -> TentFunction:
    """Analytic solution for n = d + 1: the uniform density on the simplex."""
    tri = convex_hull_triangulate(data)
    h = -np.log(tri.volume())
    heights = np.full(data.n, h)
    b, beta = _pieces(tri.points, tri.simplices, heights)
    sigma = -h + 1.0
    return TentFunction(tri=tri, heights=heights, b=b, beta=beta,
                        objective=sigma, converged=True)


def _initial_heights(points: np.ndarray) -> np.ndarray:
    """Gaussian log-density start: distinct, correctly scaled heights."""
    n, d = points.shape
    xbar = points.mean(axis=0)
    centered = points - xbar
    cov = centered.T @ centered / max(n - 1, 1)
    cov += 1e-9 * np.trace(cov) / d * np.eye(d)
    L = np.linalg.cholesky(cov)
    z = np.linalg.solve(L, centered.T)
    logdet = 2.0 * np.log(np.diag(L)).sum()
    return -0.5 * (z**2).sum(axis=0) - 0.5 * (d * np.log(2 * np.pi) + logdet)


def fit_lcmle(data, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
              init: np.ndarray | None = None,
              raise_on_failure: bool = False) -> TentFunction:
    """Fit the log-concave maximum likelihood estimator.

    ``init`` optionally warm-starts the pole heights (used by bootstrap
    refits).  If the optimiser stalls before reaching ``tol`` the best
    iterate is returned with ``converged=False`` (or :class:`NoConvergence`
    is raised when ``raise_on_failure``).
    """
    if not isinstance(data, Dataset):
        data = as_dataset(data)
    points = data.points
    n, d = data.n, data.d
    if n == d + 1:
        return _uniform_tent(data)

    y = np.asarray(init, dtype=float).copy() if init is not None else _initial_heights(points)
    upper = float(np.abs(y).max()) + 200.0
    bounds = [(-1e6, upper)] * n

    sigma_prev = np.inf
    converged = False
    iters_left = max_iter
    for _ in range(4):
        res = minimize(lambda v: _sigma_and_grad(points, v), y, jac=True,
                       method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": iters_left, "ftol": tol * 1e-2,
                                "gtol": 1e-9, "maxcor": 25})
        y = res.x
        iters_left = max(iters_left - res.nit, 50)
        simplices, dets = concave_majorant(points, y)
        y = _affine_polish(points, y, simplices, dets)
        sigma, _ = _sigma_and_grad(points, y)
        if abs(sigma_prev - sigma) < tol * max(1.0, abs(sigma)):
            converged = True
            break
        sigma_prev = sigma

    simplices, dets = concave_majorant(points, y)
    H = y[simplices]
    residual = abs(float((dets * j_values(H)).sum()) - 1.0)
    if residual > NORM_RESIDUAL_TOL:
        y = _affine_polish(points, y, simplices, dets)
        simplices, dets = concave_majorant(points, y)
        residual = abs(float((dets * j_values(y[simplices])).sum()) - 1.0)
    converged = converged and residual <= NORM_RESIDUAL_TOL

    tri = build_triangulation(points, simplices)
    b, beta = _pieces(points, tri.simplices, y)
    # lift every pole onto the roof so heights[i] = log f-hat(X_i) exactly
    heights = np.min(points @ b.T - beta, axis=1)
    heights = np.maximum(heights, y)
    sigma, _ = _sigma_and_grad(points, heights)
    tent = TentFunction(tri=tri, heights=heights, b=b, beta=beta,
                        objective=float(sigma), converged=bool(converged))
    if raise_on_failure and not converged:
        raise NoConvergence(
            f"fit stalled: normalization residual {residual:.2e}", tent=tent)
    return tent
