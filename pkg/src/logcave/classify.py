"""Plug-in classification with per-class smoothed density fits.

A point is assigned to the class maximising N_k L_k f-tilde_k(x), where
N_k is the class count and L_k the cost of missing true class k; ties go
to the smallest class index.  Because the class densities do not depend
on the losses, loss sweeps over a fixed evaluation grid reuse cached
density grids and need no refitting.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ClassTooSmall, DegenerateData, DimensionUnsupported
from .geometry import as_dataset
from .smoothed import SmoothedModel, eval_quadrature, evaluate, smooth_tent
from .tentfit import fit_lcmle

#: density-grid cache shared across classifier instances
_GRID_CACHE: dict[tuple, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


@dataclass(frozen=True)
class ClassifierModel:
    class_models: tuple[SmoothedModel, ...]
    counts: np.ndarray
    losses: np.ndarray
    label_names: tuple[str, ...]
    _hash: str = field(repr=False, default="")

    @property
    def K(self) -> int:
        return len(self.class_models)

    @property
    def d(self) -> int:
        return self.class_models[0].d

    def content_hash(self) -> str:
        return self._hash


def _model_hash(class_models, counts, label_names) -> str:
    h = hashlib.sha256()
    for m in class_models:
        h.update(json.dumps(m.tent.to_dict(), sort_keys=True).encode())
    h.update(np.asarray(counts, dtype=np.int64).tobytes())
    h.update("|".join(label_names).encode())
    return h.hexdigest()


def train(points, labels, losses=None, tol: float = 1e-6) -> ClassifierModel:
    """Fit one smoothed model per class.

    ``labels`` can be anything hashable; classes are ordered by first
    appearance of their sorted unique values.  ``losses`` defaults to all
    ones.
    """
    pts = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] != labels.shape[0]:
        raise ValueError("points and labels disagree in length")
    order = np.unique(labels)
    names = [str(v) for v in order]
    d = pts.shape[1]
    models = []
    counts = []
    for k, lab in enumerate(order):
        sub = pts[labels == lab]
        if sub.shape[0] < d + 2:
            raise ClassTooSmall(k, f"class {names[k]!r} has {sub.shape[0]} points, "
                                   f"needs at least {d + 2}")
        try:
            data = as_dataset(sub)
        except DegenerateData as exc:
            raise ClassTooSmall(k, f"class {names[k]!r}: {exc}") from exc
        models.append(smooth_tent(fit_lcmle(data, tol=tol)))
        counts.append(sub.shape[0])
    counts = np.asarray(counts, dtype=int)
    if losses is None:
        losses = np.ones(len(models))
    losses = np.asarray(losses, dtype=float)
    if losses.shape != (len(models),) or not np.all(losses > 0):
        raise ValueError("losses must be one positive number per class")
    return ClassifierModel(
        class_models=tuple(models), counts=counts, losses=losses,
        label_names=tuple(names),
        _hash=_model_hash(models, counts, names))


def _log_scores(model: ClassifierModel, x: np.ndarray,
                losses: np.ndarray) -> np.ndarray:
    """log(N_k L_k f-tilde_k(x)) for each class; k x npoints."""
    out = np.empty((model.K, x.shape[0]))
    for k, m in enumerate(model.class_models):
        dens = evaluate(m, x, method="auto", log=not m.singular)
        if m.singular:
            with np.errstate(divide="ignore"):
                dens = np.log(np.asarray(dens))
        out[k] = dens + np.log(model.counts[k]) + np.log(losses[k])
    return out


def predict(model: ClassifierModel, x, losses=None) -> np.ndarray:
    """Class index (0-based, ordered as label_names) of the maximiser of
    N_k L_k f-tilde_k; ties go to the smallest index."""
    losses = model.losses if losses is None else np.asarray(losses, dtype=float)
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    scores = _log_scores(model, pts, losses)
    idx = scores.argmax(axis=0)   # first (= smallest) index wins ties
    return idx if np.asarray(x).ndim > 1 else int(idx[0])


def empirical_risk(model: ClassifierModel, points, labels, losses=None) -> float:
    """Average loss-weighted misclassification: (1/m) sum L_{y_i} 1{miss}."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    labels = np.asarray(labels)
    if pts.shape[0] == 0:
        raise ValueError("test set is empty")
    losses = model.losses if losses is None else np.asarray(losses, dtype=float)
    name_to_idx = {name: k for k, name in enumerate(model.label_names)}
    truth = np.array([name_to_idx[str(v)] for v in labels])
    pred = predict(model, pts, losses=losses)
    return float((losses[truth] * (pred != truth)).mean())


def _density_grids(model: ClassifierModel, xlim, ylim, resolution: int):
    """Cached per-class log-density grids over the rectangle."""
    key = (model.content_hash(), float(xlim[0]), float(xlim[1]),
           float(ylim[0]), float(ylim[1]), int(resolution))
    hit = _GRID_CACHE.get(key)
    if hit is not None:
        return hit
    xs = np.linspace(xlim[0], xlim[1], resolution)
    ys = np.linspace(ylim[0], ylim[1], resolution)
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    grids = np.stack([
        eval_quadrature(m, nodes, log=True).reshape(resolution, resolution)
        for m in model.class_models])
    _GRID_CACHE[key] = (xs, ys, grids)
    return xs, ys, grids


def boundary_grid(model: ClassifierModel, xlim, ylim, resolution: int,
                  losses_override=None) -> dict:
    """Class labels and per-class density grids over a rectangle (d = 2).

    Repeated calls with different losses reuse the cached density grids,
    so loss sweeps cost only an argmax.
    """
    if model.d != 2:
        raise DimensionUnsupported(f"grid export needs d = 2, model has d = {model.d}")
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    losses = (model.losses if losses_override is None
              else np.asarray(losses_override, dtype=float))
    if losses.shape != (model.K,) or not np.all(losses > 0):
        raise ValueError("losses must be one positive number per class")
    xs, ys, log_grids = _density_grids(model, xlim, ylim, resolution)
    scores = (log_grids
              + np.log(model.counts)[:, None, None]
              + np.log(losses)[:, None, None])
    labels = scores.argmax(axis=0)
    return {
        "xlim": [float(xlim[0]), float(xlim[1])],
        "ylim": [float(ylim[0]), float(ylim[1])],
        "resolution": int(resolution),
        "labels": labels.tolist(),
        "class_density_grids": np.exp(log_grids).tolist(),
        "counts": model.counts.tolist(),
        "losses": losses.tolist(),
        "label_names": list(model.label_names),
    }
