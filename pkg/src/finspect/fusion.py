"""Decision-template fusion of classifier outputs, applied in two stages.

A decision profile stacks one membership row per classifier. Templates are
per-class means of training profiles. Fusing a query profile computes, per
classifier, the proximity of its row to each class template row, turns the
proximities into belief degrees, and multiplies beliefs across classifiers
into a per-class support. Supports are reported both raw and normalized;
the argmax is the same either way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBeliefError, ParameterError, ShapeError

_ROW_SUM_TOL = 1e-6
_DENOM_FLOOR = 1e-12


def _check_profile(profile) -> np.ndarray:
    p = np.asarray(profile, dtype=np.float64)
    if p.ndim != 2:
        raise ShapeError("decision profile must be 2-D (classifiers x classes)")
    if (p < -_ROW_SUM_TOL).any() or (p > 1 + _ROW_SUM_TOL).any():
        raise ParameterError("profile entries must lie in [0, 1]")
    if not np.allclose(p.sum(axis=1), 1.0, atol=_ROW_SUM_TOL):
        raise ParameterError("every profile row must sum to 1")
    return p


@dataclass(frozen=True)
class DecisionTemplates:
    """Per-class mean profiles, stacked as (n_classes, l, k)."""

    matrices: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=np.float64)
        c = np.asarray(self.counts, dtype=np.int64)
        if m.ndim != 3 or c.shape != (m.shape[0],):
            raise ShapeError("templates are (n_classes, l, k) with one count per class")
        if (c < 1).any():
            raise ParameterError("every class needs at least one training profile")
        m.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "matrices", m)
        object.__setattr__(self, "counts", c)

    @property
    def n_classes(self) -> int:
        return self.matrices.shape[0]


@dataclass(frozen=True)
class ClassSupport:
    raw: np.ndarray         # per-class belief products, unnormalized
    support: np.ndarray     # raw scaled to sum 1 (uniform on total conflict)
    predicted: int
    total_conflict: bool = False

    def to_dict(self) -> dict:
        return {
            "raw": self.raw.tolist(),
            "support": self.support.tolist(),
            "predicted": self.predicted,
            "total_conflict": self.total_conflict,
        }


def compute_templates(profiles, labels, n_classes: int) -> DecisionTemplates:
    """Elementwise mean of each class's training profiles."""
    stack = np.stack([_check_profile(p) for p in profiles])
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (stack.shape[0],):
        raise ShapeError("one label per profile")
    matrices, counts = [], []
    for j in range(n_classes):
        members = stack[labels == j]
        if members.shape[0] == 0:
            raise ParameterError(f"class {j} has no training profiles")
        matrices.append(members.mean(axis=0))
        counts.append(members.shape[0])
    return DecisionTemplates(np.stack(matrices), np.asarray(counts))


def proximity(template_rows, output_row) -> np.ndarray:
    """Inverse-distance weights of an output row against each class's row."""
    rows = np.atleast_2d(np.asarray(template_rows, dtype=np.float64))
    out = np.asarray(output_row, dtype=np.float64)
    if rows.shape[1] != out.shape[0]:
        raise ShapeError("template rows and output row must share length k")
    weights = 1.0 / (1.0 + np.linalg.norm(rows - out, axis=1))
    return weights / weights.sum()


def belief(lam: np.ndarray) -> np.ndarray:
    """Belief degrees pi_j = lam_j P_j / (1 - lam_j (1 - P_j)), P_j = prod_{r!=j}(1-lam_r)."""
    lam = np.asarray(lam, dtype=np.float64)
    k = lam.shape[0]
    out = np.empty(k)
    for j in range(k):
        others = np.prod(1.0 - np.delete(lam, j))
        denom = 1.0 - lam[j] * (1.0 - others)
        if denom <= _DENOM_FLOOR:
            raise DegenerateBeliefError("belief denominator vanished (total conflict of evidence)")
        out[j] = lam[j] * others / denom
    return out


def fuse(profile, templates: DecisionTemplates) -> ClassSupport:
    """Per-class product of belief degrees across classifiers."""
    p = _check_profile(profile)
    if templates.matrices.shape[1:] != p.shape:
        raise ParameterError("template classifier count does not match the profile")
    raw = np.ones(templates.n_classes)
    for i in range(p.shape[0]):
        lam = proximity(templates.matrices[:, i, :], p[i])
        raw *= belief(lam)
    total = raw.sum()
    if total <= 0.0:
        k = templates.n_classes
        return ClassSupport(raw, np.full(k, 1.0 / k), 0, total_conflict=True)
    return ClassSupport(raw, raw / total, int(np.argmax(raw)))


def two_stage_fuse(profiles_by_extractor, stage1_templates, stage2_templates):
    """Fuse each extractor's classifier rows, then fuse the stage-1 rows.

    Returns (final ClassSupport, list of stage-1 ClassSupports).
    """
    if len(profiles_by_extractor) != len(stage1_templates):
        raise ParameterError("one stage-1 template set per extractor")
    stage1 = [fuse(profile, tmpl)
              for profile, tmpl in zip(profiles_by_extractor, stage1_templates)]
    stage2_profile = np.stack([s.support for s in stage1])
    return fuse(stage2_profile, stage2_templates), stage1
