import numpy as np
import pytest

from logcave import classify as cl
from logcave.exceptions import ClassTooSmall, DimensionUnsupported
from logcave.rng import make_rng


@pytest.fixture(scope="module")
def two_class_model():
    rng = make_rng(0, 81)
    a = rng.standard_normal((50, 2))
    b = rng.standard_normal((50, 2)) + [2.5, 0.0]
    pts = np.vstack([a, b])
    labels = np.array(["neg"] * 50 + ["pos"] * 50)
    return cl.train(pts, labels), pts, labels


def test_train_orders_classes_and_counts(two_class_model):
    model, _, _ = two_class_model
    assert model.label_names == ("neg", "pos")
    assert model.counts.tolist() == [50, 50]
    np.testing.assert_array_equal(model.losses, [1.0, 1.0])
    assert model.K == 2 and model.d == 2


def test_predict_separates_clusters(two_class_model):
    model, pts, labels = two_class_model
    pred = cl.predict(model, np.array([[-0.5, 0.0], [3.0, 0.0]]))
    assert pred.tolist() == [0, 1]
    # scalar input gives a scalar index
    assert cl.predict(model, np.array([3.0, 0.0])) == 1
    # training error is small on well-separated clusters
    assert cl.empirical_risk(model, pts, labels) < 0.2


def test_loss_scaling_moves_the_boundary(two_class_model):
    model, _, _ = two_class_model
    x = np.array([[1.25, 0.0]])  # near the balanced boundary
    base = cl.predict(model, x, losses=[1.0, 1.0])[0]
    heavy_pos = cl.predict(model, x, losses=[1e-6, 1e6])[0]
    heavy_neg = cl.predict(model, x, losses=[1e6, 1e-6])[0]
    assert heavy_pos == 1 and heavy_neg == 0
    assert base in (0, 1)


def test_equal_scores_tie_to_first_class():
    rng = make_rng(1, 81)
    pts = rng.standard_normal((40, 2))
    labels = np.array(["a", "b"] * 20)
    model = cl.train(pts[:20], labels[:20])
    # identical class models: build a classifier with two copies
    twin = cl.ClassifierModel(
        class_models=(model.class_models[0], model.class_models[0]),
        counts=np.array([10, 10]), losses=np.array([1.0, 1.0]),
        label_names=("a", "b"), _hash="twin")
    pred = cl.predict(twin, np.array([[0.0, 0.0], [1.0, 1.0]]))
    assert np.all(pred == 0)


def test_empirical_risk_is_loss_weighted(two_class_model):
    model, pts, labels = two_class_model
    r1 = cl.empirical_risk(model, pts, labels, losses=[1.0, 1.0])
    r5 = cl.empirical_risk(model, pts, labels, losses=[1.0, 1.0 + 1e-12])
    assert r1 == pytest.approx(r5, abs=1e-9)
    # scaling both losses by 3 scales the risk by 3 only if predictions
    # are unchanged, which equal scaling guarantees
    r3 = cl.empirical_risk(model, pts, labels, losses=[3.0, 3.0])
    assert r3 == pytest.approx(3.0 * r1, rel=1e-12)


def test_class_too_small_raises():
    pts = make_rng(2, 81).standard_normal((20, 2))
    labels = np.array(["a"] * 17 + ["b"] * 3)   # 3 < d + 2
    with pytest.raises(ClassTooSmall):
        cl.train(pts, labels)


def test_degenerate_class_raises():
    rng = make_rng(3, 81)
    pts = np.vstack([rng.standard_normal((20, 2)),
                     np.column_stack([np.arange(6.0), np.arange(6.0)])])
    labels = np.array(["a"] * 20 + ["b"] * 6)   # class b is collinear
    with pytest.raises(ClassTooSmall):
        cl.train(pts, labels)


def test_boundary_grid_shape_and_cache(two_class_model):
    model, _, _ = two_class_model
    cl._GRID_CACHE.clear()
    grid = cl.boundary_grid(model, (-3, 5), (-3, 3), 16)
    assert grid["resolution"] == 16
    assert np.asarray(grid["labels"]).shape == (16, 16)
    assert np.asarray(grid["class_density_grids"]).shape == (2, 16, 16)
    assert len(cl._GRID_CACHE) == 1
    # a loss sweep must reuse the cached density grids
    grid2 = cl.boundary_grid(model, (-3, 5), (-3, 3), 16,
                             losses_override=[1.0, 100.0])
    assert len(cl._GRID_CACHE) == 1
    np.testing.assert_array_equal(grid["class_density_grids"],
                                  grid2["class_density_grids"])


def test_boundary_region_grows_with_loss(two_class_model):
    model, _, _ = two_class_model
    g1 = cl.boundary_grid(model, (-3, 5), (-3, 3), 32,
                          losses_override=[1.0, 1.0])
    g2 = cl.boundary_grid(model, (-3, 5), (-3, 3), 32,
                          losses_override=[1.0, 50.0])
    m1 = np.asarray(g1["labels"]) == 1
    m2 = np.asarray(g2["labels"]) == 1
    assert m2[m1].all()            # the class-1 region only grows
    assert m2.sum() > m1.sum()


def test_grid_rejects_bad_inputs(two_class_model):
    model, _, _ = two_class_model
    with pytest.raises(ValueError):
        cl.boundary_grid(model, (-3, 5), (-3, 3), 8)
    with pytest.raises(ValueError):
        cl.boundary_grid(model, (-3, 5), (-3, 3), 16, losses_override=[1.0])
    rng = make_rng(4, 81)
    pts3 = rng.standard_normal((40, 3))
    labels = np.array(["a"] * 20 + ["b"] * 20)
    m3 = cl.train(pts3, labels)
    with pytest.raises(DimensionUnsupported):
        cl.boundary_grid(m3, (-3, 3), (-3, 3), 16)


def test_content_hash_distinguishes_models(two_class_model):
    model, pts, labels = two_class_model
    other = cl.train(pts + 0.1, labels)
    assert model.content_hash() != other.content_hash()
    again = cl.train(pts, labels)
    assert model.content_hash() == again.content_hash()
