"""JSON persistence for trained models.

Floats are written with ``repr`` precision, so a reloaded model predicts
bit-identically.
"""

from __future__ import annotations

import json
from pathlib import Path

from .search import TrainedModel


def dumps(model: TrainedModel) -> str:
    return json.dumps(model.to_dict(), sort_keys=True, allow_nan=False) + "\n"


def save_model(model: TrainedModel, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(model))
    return path


def load_model(path) -> TrainedModel:
    return TrainedModel.from_dict(json.loads(Path(path).read_text()))
