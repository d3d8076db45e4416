"""Desk-scale experiments: ISE comparisons against kernel estimates,
projection and independence checks, and the breast-cancer classification
pipeline.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.stats import multivariate_normal

from .classify import boundary_grid, train
from .exceptions import MalformedInput
from .geometry import Dataset, as_dataset
from .rng import make_rng
from .simplex_integrals import second_moment_tent, trace_a_hat
from .smoothed import evaluate, smooth_tent
from .tentfit import fit_lcmle

DEFAULT_MIXTURE_WEIGHTS = (0.4, 0.6)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    d: int
    n: int
    replications: int
    seed: int
    output: str | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")


# ---------------------------------------------------------------------------
# data generation


def gen_mixture(d: int, mu_norm: float, n: int, seed: int,
                weights=DEFAULT_MIXTURE_WEIGHTS) -> Dataset:
    """n draws from w1 N(0, I) + w2 N(mu, I) with mu = mu_norm * e1."""
    if mu_norm < 0:
        raise ValueError("mu_norm must be non-negative")
    w1, w2 = weights
    if not np.isclose(w1 + w2, 1.0) or w1 < 0 or w2 < 0:
        raise ValueError("weights must be non-negative and sum to one")
    rng = make_rng(seed, 11)
    comp = rng.random(n) < w2
    x = rng.standard_normal((n, d))
    x[comp, 0] += mu_norm
    return as_dataset(x)


def mixture_density(d: int, mu_norm: float, weights=DEFAULT_MIXTURE_WEIGHTS):
    """Callable density of the generating mixture."""
    w1, w2 = weights
    mu = np.zeros(d)
    mu[0] = mu_norm

    def f(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return (w1 * multivariate_normal.pdf(x, mean=np.zeros(d), cov=np.eye(d))
                + w2 * multivariate_normal.pdf(x, mean=mu, cov=np.eye(d)))

    return f


# ---------------------------------------------------------------------------
# integrated squared error


def ise(estimate_fn, true_fn, d: int, mu_norm: float, mc_points: int,
        seed: int, weights=DEFAULT_MIXTURE_WEIGHTS):
    """Importance-sampled ISE against a mixture truth.

    The proposal widens the truth (unit-variance components inflated to
    variance 4) so the integrand's tails are covered; returns
    (estimate, std_error).
    """
    rng = make_rng(seed, 13)
    w1, w2 = weights
    comp = rng.random(mc_points) < w2
    x = 2.0 * rng.standard_normal((mc_points, d))
    x[comp, 0] += mu_norm
    mu = np.zeros(d)
    mu[0] = mu_norm
    q = (w1 * multivariate_normal.pdf(x, mean=np.zeros(d), cov=4 * np.eye(d))
         + w2 * multivariate_normal.pdf(x, mean=mu, cov=4 * np.eye(d)))
    vals = (np.asarray(estimate_fn(x)) - np.asarray(true_fn(x))) ** 2 / q
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(mc_points))


def kde_density(points: np.ndarray, h: float):
    """Gaussian kernel density with scalar bandwidth matrix h^2 I."""
    pts = np.asarray(points, dtype=float)
    n, d = pts.shape
    lognorm = -0.5 * d * np.log(2 * np.pi) - d * np.log(h) - np.log(n)

    def f(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty(x.shape[0])
        for lo in range(0, x.shape[0], 2048):
            xi = x[lo : lo + 2048]
            d2 = ((xi[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
            m = -0.5 * d2 / h**2
            top = m.max(axis=1)
            out[lo : lo + 2048] = top + np.log(np.exp(m - top[:, None]).sum(axis=1))
        return np.exp(out + lognorm)

    return f


def bandwidth_grid(n: int, d: int, size: int = 20) -> np.ndarray:
    """Log-spaced scalar bandwidths spanning [0.05, 2] * n^(-1/(d+4))."""
    scale = n ** (-1.0 / (d + 4))
    return np.exp(np.linspace(np.log(0.05), np.log(2.0), size)) * scale


def oracle_kde_ise(points, true_fn, d: int, mu_norm: float, grid=None,
                   mc_points: int = 4096, seed: int = 0,
                   weights=DEFAULT_MIXTURE_WEIGHTS):
    """ISE of the kernel estimate at the bandwidth minimising ISE against
    the (known) truth; returns (best_ise, best_h, all_ises)."""
    pts = np.asarray(points, dtype=float)
    if grid is None:
        grid = bandwidth_grid(pts.shape[0], pts.shape[1])
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("bandwidth grid is empty")
    ises = np.array([
        ise(kde_density(pts, h), true_fn, d, mu_norm, mc_points, seed,
            weights=weights)[0]
        for h in grid])
    best = int(ises.argmin())
    return float(ises[best]), float(grid[best]), ises


def _normal_mixture(rng, n, means, sds, weights=(0.5, 0.5)):
    comp = rng.random(n) < weights[1]
    return np.where(comp, means[1] + sds[1] * rng.standard_normal(n),
                    means[0] + sds[0] * rng.standard_normal(n))


#: bivariate product densities with unimodal but non-log-concave marginals,
#: used as power benchmarks for the log-concavity test
NONLOGCONCAVE_CASES = ("normal-scale-mixtures", "t4-pair", "mixture-t4",
                       "mixture-gamma")


def gen_nonlogconcave(case: str, n: int, seed: int) -> Dataset:
    """n draws from a bivariate density of independent components, each
    unimodal but not log-concave (scale mixtures, heavy tails or skew)."""
    rng = make_rng(seed, 23)
    if case == "normal-scale-mixtures":
        x = _normal_mixture(rng, n, (0.0, 0.0), (0.5, 2.0))
        y = _normal_mixture(rng, n, (0.0, 2.0), (0.5, 2.0))
    elif case == "t4-pair":
        x = rng.standard_t(4, n)
        y = rng.standard_t(4, n)
    elif case == "mixture-t4":
        x = _normal_mixture(rng, n, (0.0, 2.0), (0.5, 2.0))
        y = rng.standard_t(4, n)
    elif case == "mixture-gamma":
        x = _normal_mixture(rng, n, (0.0, 2.0), (0.5, np.sqrt(5.0)))
        y = rng.gamma(2.0, 1.0, n)
    else:
        raise ValueError(f"unknown case {case!r}; one of {NONLOGCONCAVE_CASES}")
    return as_dataset(np.column_stack([x, y]))


# ---------------------------------------------------------------------------
# projection and independence checks


def sample_symmetrized_pareto(alpha: float, sigma: float, n: int,
                              rng: np.random.Generator) -> np.ndarray:
    """Draws with density (alpha/2 sigma)(1 + |x|/sigma)^-(alpha+1): a
    random sign times an inverse-CDF Pareto tail draw."""
    u = rng.random(n)
    mag = sigma * (u ** (-1.0 / alpha) - 1.0)
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return (sign * mag)[:, None]


def pareto_projection_check(alpha: float, sigma: float, n: int, seed: int,
                            tol: float = 1e-6) -> float:
    """tr(A) of the fit on symmetrised-Pareto draws.

    The population target is Var(P) - Var(Laplace(rate (alpha-1)/sigma)) =
    2 sigma^2 / ((alpha-1)(alpha-2)) - 2 sigma^2 / (alpha-1)^2.
    """
    if alpha <= 2:
        raise ValueError("alpha must exceed 2 for a finite variance")
    rng = make_rng(seed, 17)
    x = sample_symmetrized_pareto(alpha, sigma, n, rng)
    tent = fit_lcmle(x, tol=tol)
    return trace_a_hat(second_moment_tent(tent))


def independence_check(n: int, seed: int, rho: float = 0.0,
                       grid_size: int = 15, tol: float = 1e-6):
    """Mean absolute gap |log f-joint - log f-1 - log f-2| over the central
    grid, for a bivariate Gaussian sample with correlation ``rho``.

    With rho = 0 the population gap is zero (smoothing and projection both
    preserve independence); a correlated sample is the negative control.
    """
    if n < 200:
        raise ValueError("n must be at least 200")
    rng = make_rng(seed, 19)
    z = rng.standard_normal((n, 2))
    x = np.column_stack([z[:, 0], rho * z[:, 0] + np.sqrt(1 - rho**2) * z[:, 1]])
    joint = smooth_tent(fit_lcmle(x, tol=tol))
    m1 = smooth_tent(fit_lcmle(x[:, :1], tol=tol))
    m2 = smooth_tent(fit_lcmle(x[:, 1:], tol=tol))
    # central region: the product of per-coordinate 5%-95% sample ranges
    lo = np.quantile(x, 0.05, axis=0)
    hi = np.quantile(x, 0.95, axis=0)
    g1 = np.linspace(lo[0], hi[0], grid_size)
    g2 = np.linspace(lo[1], hi[1], grid_size)
    gx, gy = np.meshgrid(g1, g2)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    lj = evaluate(joint, nodes, log=True)
    l1 = evaluate(m1, nodes[:, :1], log=True)
    l2 = evaluate(m2, nodes[:, 1:], log=True)
    return float(np.abs(lj - l1 - l2).mean())


# ---------------------------------------------------------------------------
# Wisconsin pipeline


def load_wisconsin(csv_path=None):
    """(features (569 x 30), labels) from the bundled or a user CSV."""
    if csv_path is None:
        ref = resources.files("logcave.data") / "wdbc.csv"
        text = ref.read_text().splitlines()
    else:
        with open(csv_path, newline="") as fh:
            text = fh.read().splitlines()
    reader = csv.reader(text)
    header = next(reader)
    if header[-1] != "diagnosis":
        raise MalformedInput("expected a trailing 'diagnosis' column", line=1)
    feats, labels = [], []
    for i, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise MalformedInput(f"row has {len(row)} fields, expected {len(header)}",
                                 line=i)
        try:
            feats.append([float(v) for v in row[:-1]])
        except ValueError as exc:
            raise MalformedInput(f"non-numeric feature: {exc}", line=i) from exc
        labels.append(row[-1])
    return np.asarray(feats), np.asarray(labels)


def pca_2d(features: np.ndarray, standardize: bool = True):
    """Project onto the top-2 principal components.

    Returns (scores (n x 2), variance fraction captured).  Standardizing
    the features first is what reproduces the documented 63% figure.
    """
    x = np.asarray(features, dtype=float)
    x = x - x.mean(axis=0)
    if standardize:
        x = x / x.std(axis=0, ddof=1)
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    frac = float((s[:2] ** 2).sum() / (s**2).sum())
    return x @ vt[:2].T, frac


def wisconsin_pipeline(csv_path=None, L2: float = 1.0, standardize: bool = True,
                       resolution: int = 128, tol: float = 1e-6,
                       margin: float = 1.0):
    """PCA to 2-D, per-class smoothed fits, boundary grid at loss (1, L2).

    Classes are ordered alphabetically (benign, malignant), so L2 is the
    cost of missing a malignant case.
    """
    feats, labels = load_wisconsin(csv_path)
    scores, frac = pca_2d(feats, standardize=standardize)
    model = train(scores, labels, losses=(1.0, float(L2)), tol=tol)
    lo = scores.min(axis=0) - margin
    hi = scores.max(axis=0) + margin
    grid = boundary_grid(model, (lo[0], hi[0]), (lo[1], hi[1]), resolution)
    return {
        "model": model,
        "variance_fraction": frac,
        "counts": dict(zip(model.label_names, model.counts.tolist())),
        "grid": grid,
        "scores": scores,
        "labels": labels,
    }
