"""Model persistence: versioned JSON archives with content hashes.

Floats are serialized with full ``repr`` precision, so load(save(m))
round-trips every numeric field exactly.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .classify import ClassifierModel, _model_hash
from .exceptions import MalformedInput
from .smoothed import SmoothedModel, smooth_tent
from .tentfit import TentFunction

FORMAT_VERSION = 1
_KINDS = ("tent", "smoothed", "classifier")


def _payload_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _tent_payload(tent: TentFunction) -> dict:
    return tent.to_dict()


def _smoothed_payload(model: SmoothedModel) -> dict:
    return {"tent": model.tent.to_dict()}


def _classifier_payload(model: ClassifierModel) -> dict:
    return {
        "class_tents": [m.tent.to_dict() for m in model.class_models],
        "counts": model.counts.tolist(),
        "losses": model.losses.tolist(),
        "label_names": list(model.label_names),
    }


def make_archive(model) -> dict:
    """Wrap a tent, smoothed model or classifier in an archive dict."""
    if isinstance(model, TentFunction):
        kind, payload = "tent", _tent_payload(model)
    elif isinstance(model, SmoothedModel):
        kind, payload = "smoothed", _smoothed_payload(model)
    elif isinstance(model, ClassifierModel):
        kind, payload = "classifier", _classifier_payload(model)
    else:
        raise TypeError(f"cannot archive a {type(model).__name__}")
    return {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "payload": payload,
        "content_hash": _payload_hash(payload),
    }


def save_model(model, path: str) -> dict:
    archive = make_archive(model)
    with open(path, "w") as fh:
        json.dump(archive, fh)
    return archive


def restore(archive: dict):
    """Model object from an archive dict (inverse of make_archive)."""
    if not isinstance(archive, dict) or "kind" not in archive:
        raise MalformedInput("not a model archive")
    if archive.get("format_version") != FORMAT_VERSION:
        raise MalformedInput(
            f"unsupported archive format {archive.get('format_version')!r}")
    payload = archive.get("payload")
    if _payload_hash(payload) != archive.get("content_hash"):
        raise MalformedInput("archive content hash mismatch")
    kind = archive["kind"]
    if kind == "tent":
        return TentFunction.from_dict(payload)
    if kind == "smoothed":
        return smooth_tent(TentFunction.from_dict(payload["tent"]))
    if kind == "classifier":
        models = tuple(smooth_tent(TentFunction.from_dict(t))
                       for t in payload["class_tents"])
        counts = np.asarray(payload["counts"], dtype=int)
        names = tuple(payload["label_names"])
        return ClassifierModel(
            class_models=models, counts=counts,
            losses=np.asarray(payload["losses"], dtype=float),
            label_names=names,
            _hash=_model_hash(models, counts, names))
    raise MalformedInput(f"unknown archive kind {kind!r}")


def load_model(path: str):
    try:
        with open(path) as fh:
            archive = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON in {path}: {exc}") from exc
    return restore(archive)
