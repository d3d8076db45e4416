"""HTTP API for the browser-based decision-boundary explorer.

Three JSON endpoints over a trained 2-D classifier:

- GET /meta           class names, counts, training losses, plot extents
- GET /grid           class-label and density grids for a loss setting
- GET /risk           held-out loss-weighted empirical risk for a loss setting

Grid responses are cached by (resolution, l2, extents) and returned
byte-identically on repeat requests.  Static files for the UI are served
from the bundled ``static`` directory at the root path.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np
from fastapi import FastAPI, Query
from fastapi.responses import FileResponse, Response

from .classify import ClassifierModel, boundary_grid, empirical_risk

L2_MIN, L2_MAX = 1e-2, 1e4
RES_MIN, RES_MAX = 16, 512
EXTENT_MARGIN = 1.0


def _error(status: int, message: str) -> Response:
    return Response(content=json.dumps({"error": message}), status_code=status,
                    media_type="application/json")


def default_extents(model: ClassifierModel) -> tuple[list, list]:
    """Plot rectangle: the union of class hulls plus a fixed margin."""
    verts = np.vstack([m.tent.tri.points for m in model.class_models])
    lo = verts.min(axis=0) - EXTENT_MARGIN
    hi = verts.max(axis=0) + EXTENT_MARGIN
    return [float(lo[0]), float(hi[0])], [float(lo[1]), float(hi[1])]


def build_app(model: ClassifierModel, holdout=None) -> FastAPI:
    """FastAPI app over a trained classifier.

    ``holdout`` is an optional (points, labels) pair backing /risk.
    """
    app = FastAPI(title="decision boundary explorer", docs_url=None,
                  redoc_url=None)
    grid_cache: dict[tuple, bytes] = {}
    risk_cache: dict[float, float] = {}
    two_d = model.d == 2
    if two_d:
        xlim0, ylim0 = default_extents(model)
    else:
        xlim0 = ylim0 = None

    def _losses(l2: float) -> np.ndarray:
        losses = model.losses.copy()
        losses[-1] = l2
        return losses

    @app.get("/meta")
    def meta():
        return {
            "classes": list(model.label_names),
            "counts": model.counts.tolist(),
            "losses": model.losses.tolist(),
            "d": model.d,
            "xlim": xlim0,
            "ylim": ylim0,
            "l2_range": [L2_MIN, L2_MAX],
            "resolution_range": [RES_MIN, RES_MAX],
            "has_holdout": holdout is not None,
        }

    @app.get("/grid")
    def grid(res: int = Query(default=128),
             l2: float = Query(default=1.0),
             xmin: float | None = None, xmax: float | None = None,
             ymin: float | None = None, ymax: float | None = None):
        if not two_d:
            return _error(409, f"model has d = {model.d}; grids need d = 2")
        if not (RES_MIN <= res <= RES_MAX):
            return _error(400, f"res must be in [{RES_MIN}, {RES_MAX}]")
        if not (np.isfinite(l2) and L2_MIN <= l2 <= L2_MAX):
            return _error(400, f"l2 must be in [{L2_MIN}, {L2_MAX}]")
        xlim = [xmin if xmin is not None else xlim0[0],
                xmax if xmax is not None else xlim0[1]]
        ylim = [ymin if ymin is not None else ylim0[0],
                ymax if ymax is not None else ylim0[1]]
        if not (np.isfinite(xlim).all() and np.isfinite(ylim).all()
                and xlim[0] < xlim[1] and ylim[0] < ylim[1]):
            return _error(400, "extents must be finite with min < max")
        key = (res, float(l2), xlim[0], xlim[1], ylim[0], ylim[1])
        blob = grid_cache.get(key)
        if blob is None:
            payload = boundary_grid(model, xlim, ylim, res,
                                    losses_override=_losses(l2))
            payload["l2"] = float(l2)
            blob = json.dumps(payload, sort_keys=True).encode()
            grid_cache[key] = blob
        return Response(content=blob, media_type="application/json")

    @app.get("/risk")
    def risk(l2: float = Query(default=1.0)):
        if not two_d:
            return _error(409, f"model has d = {model.d}; risk UI needs d = 2")
        if holdout is None:
            return _error(400, "no held-out data was provided at startup")
        if not (np.isfinite(l2) and L2_MIN <= l2 <= L2_MAX):
            return _error(400, f"l2 must be in [{L2_MIN}, {L2_MAX}]")
        value = risk_cache.get(float(l2))
        if value is None:
            pts, labels = holdout
            value = empirical_risk(model, pts, labels, losses=_losses(l2))
            risk_cache[float(l2)] = value
        return {"l2": float(l2), "risk": value, "n_holdout": len(holdout[0])}

    static_root = resources.files("logcave") / "static"

    @app.get("/")
    def index():
        path = static_root / "index.html"
        if not path.is_file():
            return _error(404, "UI assets not bundled")
        return FileResponse(str(path))

    @app.get("/static/{name}")
    def static_file(name: str):
        if "/" in name or name.startswith("."):
            return _error(400, "bad asset name")
        path = static_root / name
        if not path.is_file():
            return _error(404, f"no asset {name!r}")
        media = ("application/javascript" if name.endswith(".js")
                 else "text/css" if name.endswith(".css") else "text/html")
        return FileResponse(str(path), media_type=media)

    return app
