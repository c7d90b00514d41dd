"""Versioned JSON model files.

Floats are written with Python's shortest round-trip repr, so a saved model
reloads to bit-identical parameters. The Cholesky factors are stored too, which
keeps reloaded posteriors bitwise equal to the in-memory ones.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from pigmm.classifier import GenerativeClassifier
from pigmm.errors import ModelFormatError
from pigmm.features import FeaturePipeline
from pigmm.gaussian import GaussianComponent
from pigmm.mixture import FitReport, MixtureModel

FORMAT_VERSION = 1


def fingerprint(path):
    """SHA-256 of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _component_dict(c):
    return {
        "mean": c.mean.tolist(),
        "covariance": c.covariance.tolist(),
        "chol_lower": c.chol_lower.tolist(),
        "log_det": c.log_det,
        "ridge": c.ridge,
    }


def classifier_to_dict(clf, provenance=None):
    from pigmm import __version__

    provenance = dict(provenance or {})
    provenance.setdefault("tool_version", __version__)
    provenance["fit_reports"] = {
        cls: (m.fit_info.to_dict() if m.fit_info is not None else None)
        for cls, m in zip(clf.classes, clf.models)
    }
    return {
        "format_version": FORMAT_VERSION,
        "classifier": {
            "classes": list(clf.classes),
            "priors": clf.priors.tolist(),
            "reject_threshold": clf.reject_threshold,
            "fill_values": dict(clf.fill_values),
            "models": [
                {
                    "covariance_kind": m.covariance_kind,
                    "weights": m.weights.tolist(),
                    "components": [_component_dict(c) for c in m.components],
                }
                for m in clf.models
            ],
        },
        "pipeline": clf.pipeline.to_dict(),
        "provenance": provenance,
    }


def dumps(clf, provenance=None):
    return json.dumps(classifier_to_dict(clf, provenance), indent=2, sort_keys=True,
                      allow_nan=False, ensure_ascii=False) + "\n"


def save_model(clf, path, provenance=None):
    Path(path).write_text(dumps(clf, provenance), encoding="utf-8")


def classifier_from_dict(doc):
    """Rebuild a classifier; returns ``(classifier, provenance)``."""
    try:
        version = doc["format_version"]
        if not isinstance(version, int):
            raise ModelFormatError(f"format_version must be an integer, got {version!r}")
        if version > FORMAT_VERSION:
            raise ModelFormatError(
                f"model format_version {version} is newer than supported {FORMAT_VERSION}"
            )
        body = doc["classifier"]
        provenance = doc.get("provenance", {})
        reports = provenance.get("fit_reports", {})
        models = []
        for cls, m in zip(body["classes"], body["models"]):
            comps = []
            for c in m["components"]:
                comp = GaussianComponent.from_factor(
                    np.asarray(c["mean"], dtype=np.float64),
                    np.asarray(c["covariance"], dtype=np.float64),
                    np.asarray(c["chol_lower"], dtype=np.float64),
                    float(c.get("ridge", 0.0)),
                )
                if comp.log_det != c["log_det"]:
                    raise ModelFormatError("stored log_det disagrees with the stored factor")
                comps.append(comp)
            report = reports.get(cls)
            models.append(MixtureModel(
                np.asarray(m["weights"], dtype=np.float64), comps, m["covariance_kind"],
                FitReport.from_dict(report) if report else None,
            ))
        clf = GenerativeClassifier(
            classes=tuple(body["classes"]),
            models=tuple(models),
            priors=np.asarray(body["priors"], dtype=np.float64),
            pipeline=FeaturePipeline.from_dict(doc["pipeline"]),
            reject_threshold=body.get("reject_threshold"),
            fill_values={k: float(v) for k, v in body.get("fill_values", {}).items()},
        )
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed model file: {exc!r}") from None
    return clf, provenance


def load_model(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from None
    return classifier_from_dict(doc)
