import numpy as np
import pytest

from logcave import harness as hs
from logcave.exceptions import MalformedInput
from logcave.rng import make_rng


def test_gen_mixture_moments():
    data = hs.gen_mixture(2, 3.0, 50_000, seed=0)
    # mean of the first coordinate is w2 * mu_norm
    assert data.points[:, 0].mean() == pytest.approx(0.6 * 3.0, abs=0.05)
    assert data.points[:, 1].mean() == pytest.approx(0.0, abs=0.05)


def test_mixture_density_integrates_to_one():
    f = hs.mixture_density(1, 1.5)
    xs = np.linspace(-8, 10, 4001)[:, None]
    assert np.trapz(f(xs), xs[:, 0]) == pytest.approx(1.0, abs=1e-6)


def test_ise_of_truth_is_zero():
    f = hs.mixture_density(2, 1.0)
    val, se = hs.ise(f, f, 2, 1.0, 2000, seed=1)
    assert val == 0.0 and se == 0.0


def test_ise_detects_wrong_density():
    f = hs.mixture_density(2, 1.0)
    g = hs.mixture_density(2, 0.0)
    val, se = hs.ise(g, f, 2, 1.0, 8000, seed=2)
    assert val > 4 * se > 0


def test_kde_density_normalizes():
    pts = make_rng(0, 91).standard_normal((200, 2))
    f = hs.kde_density(pts, h=0.5)
    xs = np.linspace(-6, 6, 101)
    gx, gy = np.meshgrid(xs, xs)
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    step = xs[1] - xs[0]
    assert f(grid).sum() * step**2 == pytest.approx(1.0, abs=2e-2)


def test_oracle_bandwidth_is_interior():
    truth = hs.mixture_density(2, 1.0)
    pts = hs.gen_mixture(2, 1.0, 100, seed=3).points
    best_ise, best_h, ises = hs.oracle_kde_ise(pts, truth, 2, 1.0, seed=3)
    grid = hs.bandwidth_grid(100, 2)
    k = int(np.argmin(ises))
    assert 0 < k < len(grid) - 1          # U-shaped, not an endpoint
    assert best_ise == ises.min()
    assert best_h == grid[k]


def test_symmetrized_pareto_sampler_moments():
    rng = make_rng(4, 91)
    x = hs.sample_symmetrized_pareto(3.0, 1.0, 200_000, rng)[:, 0]
    # symmetric; E X^2 = 2 sigma^2 / ((alpha-1)(alpha-2)) = 1 at (3, 1)
    assert x.mean() == pytest.approx(0.0, abs=0.02)
    assert np.median(np.abs(x)) == pytest.approx(2 ** (1 / 3.0) - 1, abs=0.01)


def test_pareto_projection_check_runs_small():
    tr = hs.pareto_projection_check(3.0, 1.0, 300, seed=5)
    assert np.isfinite(tr) and tr > 0


def test_independence_check_orders():
    gap0 = hs.independence_check(400, seed=6)
    gap9 = hs.independence_check(400, seed=6, rho=0.9)
    assert gap0 < gap9
    assert gap9 > 3 * gap0


def test_load_wisconsin_counts():
    feats, labels = hs.load_wisconsin()
    assert feats.shape == (569, 30)
    counts = dict(zip(*np.unique(labels, return_counts=True)))
    assert counts == {"benign": 357, "malignant": 212}


def test_load_wisconsin_rejects_malformed(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("f1,diagnosis\n1.0,benign\nnotanumber,malignant\n")
    with pytest.raises(MalformedInput) as exc:
        hs.load_wisconsin(str(bad))
    assert exc.value.line == 3


def test_pca_2d_variance_fraction():
    feats, _ = hs.load_wisconsin()
    scores, frac = hs.pca_2d(feats, standardize=True)
    assert scores.shape == (569, 2)
    assert 0.61 <= frac <= 0.65
    _, frac_raw = hs.pca_2d(feats, standardize=False)
    assert frac_raw > 0.95     # raw scales are dominated by two features


def test_gen_nonlogconcave_cases():
    for case in hs.NONLOGCONCAVE_CASES:
        data = hs.gen_nonlogconcave(case, 300, seed=7)
        assert data.points.shape == (300, 2)
        again = hs.gen_nonlogconcave(case, 300, seed=7)
        np.testing.assert_array_equal(data.points, again.points)
    with pytest.raises(ValueError):
        hs.gen_nonlogconcave("nope", 100, seed=0)


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        hs.ExperimentConfig(scenario="ise", d=2, n=10, replications=0, seed=0)
