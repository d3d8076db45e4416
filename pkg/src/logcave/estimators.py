"""Scikit-learn style estimator facades over the fitting core.

These wrappers follow the fit/predict/score conventions (get_params and
set_params via BaseEstimator) so the models compose with scikit-learn
pipelines and model selection tools.  The functional API in the sibling
modules remains the primary interface.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, DensityMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import classify as _classify
from .simplex_integrals import trace_a_hat
from .smoothed import evaluate, sample, smooth_tent
from .tentfit import fit_lcmle


class LogConcaveDensity(BaseEstimator, DensityMixin):
    """The unsmoothed fit: log-density piecewise affine on the hull."""

    def __init__(self, tol: float = 1e-7, max_iter: int = 20000):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=2)
        self.tent_ = fit_lcmle(X, tol=self.tol, max_iter=self.max_iter)
        self.n_features_in_ = X.shape[1]
        return self

    def score_samples(self, X):
        check_is_fitted(self, "tent_")
        X = check_array(X)
        return self.tent_.log_density(X)

    def score(self, X, y=None):
        return float(self.score_samples(X).mean())


class SmoothedLogConcaveDensity(BaseEstimator, DensityMixin):
    """The smoothed fit: supported everywhere, infinitely differentiable."""

    def __init__(self, tol: float = 1e-7, max_iter: int = 20000):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=2)
        self.model_ = smooth_tent(fit_lcmle(X, tol=self.tol,
                                            max_iter=self.max_iter))
        self.n_features_in_ = X.shape[1]
        return self

    def score_samples(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return evaluate(self.model_, X, log=True)

    def score(self, X, y=None):
        return float(self.score_samples(X).mean())

    def sample(self, n_samples: int = 1, random_state: int = 0):
        check_is_fitted(self, "model_")
        return sample(self.model_, n_samples, seed=random_state)

    @property
    def smoothing_trace_(self) -> float:
        check_is_fitted(self, "model_")
        return trace_a_hat(self.model_.moments)


class SmoothedLogConcaveClassifier(BaseEstimator, ClassifierMixin):
    """Plug-in classifier maximising N_k L_k f-tilde_k(x)."""

    def __init__(self, losses=None, tol: float = 1e-6):
        self.losses = losses
        self.tol = tol

    def fit(self, X, y):
        X = check_array(X, ensure_min_samples=2)
        y = np.asarray(y)
        self.model_ = _classify.train(X, y, losses=self.losses, tol=self.tol)
        self.classes_ = np.unique(y)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        idx = _classify.predict(self.model_, X)
        return self.classes_[np.atleast_1d(idx)]

    def predict_log_proba(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        scores = _classify._log_scores(self.model_, X, self.model_.losses)
        from scipy.special import logsumexp
        return (scores - logsumexp(scores, axis=0)).T

    def predict_proba(self, X):
        return np.exp(self.predict_log_proba(X))
