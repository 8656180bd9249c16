"""Labeled feature sets and dataset manifests."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError, ShapeError

CLASS_CATALOG: tuple[str, ...] = ("mature_shark", "shark_school", "baby_shark", "other")


@dataclass(frozen=True)
class LabeledSet:
    """Feature rows with one-hot targets."""

    inputs: np.ndarray   # (n, p)
    targets: np.ndarray  # (n, k) one-hot
    class_names: tuple[str, ...] | None = None

    def __post_init__(self):
        x = np.asarray(self.inputs, dtype=np.float64)
        y = np.asarray(self.targets, dtype=np.float64)
        if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0] or x.shape[0] < 1:
            raise ShapeError("inputs (n, p) and targets (n, k) must share n >= 1")
        ones = np.isclose(y, 1.0)
        zeros = np.isclose(y, 0.0)
        if not ((ones | zeros).all() and (ones.sum(axis=1) == 1).all()):
            raise ShapeError("targets must be one-hot rows")
        if self.class_names is not None and len(self.class_names) != y.shape[1]:
            raise ShapeError("class_names length must match target width")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "targets", y)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_classes(self) -> int:
        return self.targets.shape[1]

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.targets, axis=1)


def one_hot(labels, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ParameterError("label index out of range")
    out = np.zeros((labels.size, n_classes))
    out[np.arange(labels.size), labels] = 1.0
    return out


def load_manifest(path: str | Path, catalog: tuple[str, ...] = CLASS_CATALOG) -> list[dict]:
    """JSON array of {path, label}. Labels must be in the catalog, paths unique."""
    entries = json.loads(Path(path).read_text())
    if not isinstance(entries, list) or not entries:
        raise ParameterError("manifest must be a nonempty JSON array")
    seen = set()
    for entry in entries:
        if not isinstance(entry, dict) or "path" not in entry or "label" not in entry:
            raise ParameterError("each manifest entry needs 'path' and 'label'")
        if entry["label"] not in catalog:
            raise ParameterError(f"label {entry['label']!r} not in catalog {catalog}")
        if entry["path"] in seen:
            raise ParameterError(f"duplicate manifest path {entry['path']!r}")
        seen.add(entry["path"])
    return entries


def save_manifest(entries: list[dict], path: str | Path) -> None:
    Path(path).write_text(json.dumps(entries, indent=2, sort_keys=True) + "\n")
