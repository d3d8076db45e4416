import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from logcave.estimators import (LogConcaveDensity, SmoothedLogConcaveClassifier,
                                SmoothedLogConcaveDensity)
from logcave.rng import make_rng


def test_density_estimator_fit_score():
    X = make_rng(0, 111).standard_normal((50, 2))
    est = LogConcaveDensity().fit(X)
    assert est.n_features_in_ == 2
    scores = est.score_samples(X)
    assert scores.shape == (50,)
    assert est.score(X) == pytest.approx(scores.mean())


def test_unfitted_raises():
    with pytest.raises(NotFittedError):
        LogConcaveDensity().score_samples(np.zeros((2, 2)))


def test_get_set_params_roundtrip():
    est = SmoothedLogConcaveDensity(tol=1e-5)
    assert est.get_params()["tol"] == 1e-5
    est.set_params(tol=1e-4)
    assert est.tol == 1e-4


def test_smoothed_estimator_samples_and_trace():
    X = make_rng(1, 111).standard_normal((60, 2))
    est = SmoothedLogConcaveDensity().fit(X)
    draws = est.sample(200, random_state=3)
    assert draws.shape == (200, 2)
    assert est.smoothing_trace_ > 0
    # smoothed log-density is finite everywhere
    assert np.isfinite(est.score_samples(np.array([[20.0, -20.0]]))).all()


def test_classifier_predict_and_proba():
    rng = make_rng(2, 111)
    X = np.vstack([rng.standard_normal((40, 2)),
                   rng.standard_normal((40, 2)) + 2.5])
    y = np.array([0] * 40 + [1] * 40)
    clf = SmoothedLogConcaveClassifier().fit(X, y)
    pred = clf.predict(np.array([[-0.5, 0.0], [3.0, 0.0]]))
    assert pred.tolist() == [0, 1]
    proba = clf.predict_proba(np.array([[-0.5, 0.0], [3.0, 0.0]]))
    np.testing.assert_allclose(proba.sum(axis=1), 1.0, rtol=1e-9)
    assert proba[0, 0] > 0.5 and proba[1, 1] > 0.5
    assert clf.score(X, y) > 0.8
