"""Bot scoring, calibration and case-study statistics (native core)."""

import json

from ._botlab import (
    Calibration,
    Dataset,
    EscModel,
    IoError,
    LiteModel,
    ValidationError,
    VersionMismatch,
    auc,
    calibrate,
    cap_from_scores,
    cross_validate,
    load_dataset,
    select_training_sets,
    stars,
    synthesize,
    to_display,
    train_esc,
    train_lite,
)
from . import _botlab


def registry():
    return json.loads(_botlab.registry_json())


def score(model, payload):
    """Score one account payload (dict or JSON text); returns the report dict."""
    text = payload if isinstance(payload, str) else json.dumps(payload)
    return json.loads(model.score_json(text))


def mann_whitney_u(a, b):
    return json.loads(_botlab.mann_whitney_u_json(list(a), list(b)))


def two_proportion_z(k1, n1, k2, n2):
    return json.loads(_botlab.two_proportion_z_json(k1, n1, k2, n2))


def payload(dataset, index):
    return json.loads(dataset.payload_json(index))


def score_lite(model, user, probe_time):
    text = user if isinstance(user, str) else json.dumps(user)
    return model.score_user_json(text, probe_time)


__all__ = [
    "Calibration", "Dataset", "EscModel", "IoError", "LiteModel", "ValidationError",
    "VersionMismatch", "auc", "calibrate", "cap_from_scores", "cross_validate",
    "load_dataset", "mann_whitney_u", "payload", "registry", "score", "score_lite",
    "select_training_sets", "stars", "synthesize", "to_display", "train_esc",
    "train_lite", "two_proportion_z",
]
