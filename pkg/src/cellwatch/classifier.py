"""Synthetic satisfaction classifier driven by an (FPR, TPR) working point.

Instead of training a model, predictions for non-respondents are generated
by flipping true labels with the configured false-positive and true-positive
rates, independently per user.  This isolates the effect of prediction error
on the detection pipeline from any particular learning algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClassifierSpec:
    fpr: float
    tpr: float
    label: str | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.fpr <= 1:
            raise ValueError(f"fpr must be in [0, 1], got {self.fpr}")
        if not 0 <= self.tpr <= 1:
            raise ValueError(f"tpr must be in [0, 1], got {self.tpr}")


PERFECT = ClassifierSpec(fpr=0.0, tpr=1.0, label="perfect")
ALL_SATISFIED = ClassifierSpec(fpr=0.0, tpr=0.0, label="all-satisfied")


def predict_labels(
    true_labels: np.ndarray,
    spec: ClassifierSpec,
    rng: np.random.Generator,
    uniforms: np.ndarray | None = None,
) -> np.ndarray:
    """Predict each label as 1 with probability TPR (if truly 1) or FPR (if truly 0).

    ``uniforms`` optionally supplies the per-user uniform draws, which lets a
    sweep hold the randomness fixed while varying the working point (common
    random numbers); when omitted, one draw per user is taken from ``rng``.
    """
    labels = np.asarray(true_labels)
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("true labels must be binary")
    u = rng.random(labels.shape) if uniforms is None else np.asarray(uniforms)
    if u.shape != labels.shape:
        raise ValueError("uniforms must match the label vector shape")
    hit_prob = np.where(labels == 1, spec.tpr, spec.fpr)
    return (u < hit_prob).astype(np.uint8)


def working_point_grid(step: float) -> list[ClassifierSpec]:
    """All (FPR, TPR) pairs on the inclusive grid {0, step, 2*step, ...} up to 1.

    With step 0.05 this yields the 21 x 21 = 441-point grid; the 20 x 20
    sub-grid excluding the 1.0 row and column is the usual headline count
    (see :func:`grid_info`).
    """
    if not 0 < step <= 1:
        raise ValueError(f"step must be in (0, 1], got {step}")
    values = []
    i = 0
    while i * step <= 1 + 1e-12:
        values.append(round(i * step, 12))
        i += 1
    return [ClassifierSpec(fpr=f, tpr=t) for f in values for t in values]


def grid_info(step: float) -> dict[str, int]:
    """Point counts for the inclusive grid and its sub-grid below 1.0."""
    points = working_point_grid(step)
    inner = sum(1 for p in points if p.fpr < 1 and p.tpr < 1)
    return {"grid_points": len(points), "inner_grid_points": inner}


def reference_working_points() -> list[ClassifierSpec]:
    """Published working points of a real satisfaction classifier, as fractions."""
    published = [(0.20, 0.33), (0.35, 0.50), (0.15, 0.26), (0.05, 0.09), (0.10, 0.16)]
    return [
        ClassifierSpec(fpr=f, tpr=t, label=f"fpr{int(round(f * 100))}-tpr{int(round(t * 100))}")
        for f, t in published
    ]
