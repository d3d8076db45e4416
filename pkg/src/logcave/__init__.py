"""Smoothed log-concave maximum likelihood estimation.

Fit the log-concave MLE on d-dimensional data, evaluate and sample its
Gaussian-smoothed version, test log-concavity with a bootstrap trace
test, classify with loss-weighted per-class density fits, and estimate
functionals of the fitted distribution by plug-in Monte Carlo.
"""

from .archive import load_model, make_archive, restore, save_model
from .classify import (ClassifierModel, boundary_grid, empirical_risk,
                       predict, train)
from .estimators import (LogConcaveDensity, SmoothedLogConcaveClassifier,
                         SmoothedLogConcaveDensity)
from .exceptions import (ClassTooSmall, DegenerateData, DimensionUnsupported,
                         FitFailure, LogcaveError, MalformedInput,
                         NoConvergence, NonFiniteFunctional,
                         NumericalBreakdown, SingularSmoothing)
from .functionals import (FunctionalEstimate, compile_expression,
                          estimate_functional_generic,
                          estimate_linear_functional)
from .geometry import Dataset, as_dataset
from .simplex_integrals import second_moment_tent, trace_a_hat
from .smoothed import (SmoothedModel, evaluate, sample, smooth_tent,
                       tv_bound)
from .tentfit import TentFunction, fit_lcmle
from .trace_test import TraceTestResult, run_trace_test

__version__ = "0.1.0"

__all__ = [
    "ClassTooSmall", "ClassifierModel", "Dataset", "DegenerateData",
    "DimensionUnsupported", "FitFailure", "FunctionalEstimate",
    "LogConcaveDensity", "LogcaveError", "MalformedInput", "NoConvergence",
    "NonFiniteFunctional", "NumericalBreakdown", "SingularSmoothing",
    "SmoothedLogConcaveClassifier", "SmoothedLogConcaveDensity",
    "SmoothedModel", "TentFunction", "TraceTestResult", "as_dataset",
    "boundary_grid", "compile_expression", "empirical_risk",
    "estimate_functional_generic", "estimate_linear_functional", "evaluate",
    "fit_lcmle", "load_model", "make_archive", "predict", "restore",
    "run_trace_test", "sample", "save_model", "second_moment_tent",
    "smooth_tent", "trace_a_hat", "train", "tv_bound",
]
