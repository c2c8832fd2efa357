"""Site ranking by dissatisfaction responsibility and detection metrics.

A site's score sums the normalized visit times of its dissatisfied visitors,
counting only users for whom the site holds strictly more than a fraction
``xi`` of their own total time.  Sites are ranked by descending score and the
ranking is compared against the hidden under-performing set with
precision/recall at k and the area under the precision-recall curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mobility import VisitMatrix

LABELS_GT_ONLY = "gt_only"
LABELS_GT_PLUS_PREDICTED = "gt_plus_predicted"
LABELS_FULL_TRUTH = "full_truth"


@dataclass(frozen=True)
class RankingResult:
    scores: np.ndarray
    ranked_ids: np.ndarray
    labels_used: str

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=np.float64)
        ranked = np.asarray(self.ranked_ids, dtype=np.int64)
        if sorted(ranked.tolist()) != list(range(len(scores))):
            raise ValueError("ranked_ids must be a permutation of all site ids")
        if (np.diff(scores[ranked]) > 0).any():
            raise ValueError("scores must be non-increasing along the ranking")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "ranked_ids", ranked)

    def top_k(self, k: int) -> np.ndarray:
        return self.ranked_ids[:k]


@dataclass(frozen=True)
class DetectionMetrics:
    """Per-k precision/recall (k = 1..M) plus scalar summaries."""

    precision_at_k: np.ndarray
    recall_at_k: np.ndarray
    auc_pr: float
    recall_at_omega: float


def dissatisfied_visitors(
    visits: VisitMatrix,
    labels: np.ndarray,
    site: int,
    xi: float,
) -> np.ndarray:
    """Users labelled dissatisfied whose share at ``site`` strictly exceeds xi."""
    _check_xi(xi)
    labels = _check_labels(labels, visits.n_users)
    if not 0 <= site < visits.n_sites:
        raise ValueError(f"site id out of range: {site}")
    share = visits.t[:, site] / visits.t.sum(axis=1)
    return np.flatnonzero((labels == 1) & (share > xi))


def rank_sites(visits: VisitMatrix, labels: np.ndarray, xi: float) -> RankingResult:
    """Score and rank all sites; ties break towards the lower site id."""
    _check_xi(xi)
    labels = _check_labels(labels, visits.n_users)
    shares = visits.t / visits.t.sum(axis=1, keepdims=True)
    contributing = (labels == 1)[:, None] & (shares > xi)
    scores = np.where(contributing, shares, 0.0).sum(axis=0)
    ranked = np.lexsort((np.arange(len(scores)), -scores))
    return RankingResult(scores=scores, ranked_ids=ranked, labels_used=LABELS_FULL_TRUTH)


def precision_recall_at_k(
    ranked_ids: np.ndarray,
    underperforming: set[int] | frozenset[int],
    k: int,
) -> tuple[float, float]:
    m = len(ranked_ids)
    if not 1 <= k <= m:
        raise ValueError(f"k must be in [1, {m}], got {k}")
    if not underperforming:
        raise ValueError("under-performing set must be non-empty")
    hits = len(set(int(j) for j in ranked_ids[:k]) & set(underperforming))
    return hits / k, hits / len(underperforming)


def auc_precision_recall(
    ranked_ids: np.ndarray,
    underperforming: set[int] | frozenset[int],
) -> float:
    """Area under the precision-recall curve traced over k = 1..M.

    The curve starts at recall 0 with the k=1 precision and gains
    ``1/omega`` recall at every hit, so the area reduces to the mean of the
    precision values at the hit positions (the usual step integration; a
    zero-width segment contributes nothing).
    """
    m = len(ranked_ids)
    if m == 0 or not underperforming:
        raise ValueError("ranking and under-performing set must be non-empty")
    hits = np.isin(np.asarray(ranked_ids), list(underperforming)).astype(np.float64)
    precision = np.cumsum(hits) / np.arange(1, m + 1)
    return float((hits * precision).sum() / len(underperforming))


def compute_metrics(
    ranking: RankingResult,
    underperforming: set[int] | frozenset[int],
) -> DetectionMetrics:
    m = len(ranking.ranked_ids)
    omega = len(underperforming)
    if omega == 0:
        raise ValueError("under-performing set must be non-empty")
    hits = np.isin(ranking.ranked_ids, list(underperforming)).astype(np.float64)
    cum_hits = np.cumsum(hits)
    ks = np.arange(1, m + 1)
    precision = cum_hits / ks
    recall = cum_hits / omega
    return DetectionMetrics(
        precision_at_k=precision,
        recall_at_k=recall,
        auc_pr=float((hits * precision).sum() / omega),
        recall_at_omega=float(recall[omega - 1]),
    )


def detect(
    visits: VisitMatrix,
    gt_ids: np.ndarray,
    gt_labels: np.ndarray,
    predicted_ids: np.ndarray | None,
    predicted_labels: np.ndarray | None,
    xi: float,
    k: int,
) -> tuple[RankingResult, np.ndarray]:
    """Assemble labels from survey answers (plus optional predictions) and rank.

    Users in neither set are treated as satisfied and contribute nothing to
    any score.  ``k`` selects the reported shortlist of suspect sites.
    """
    n = visits.n_users
    gt_ids = np.asarray(gt_ids, dtype=np.int64)
    gt_labels = np.asarray(gt_labels)
    if gt_ids.shape != gt_labels.shape:
        raise ValueError("gt ids and labels must align")
    if len(gt_ids) and (gt_ids.min() < 0 or gt_ids.max() >= n):
        raise ValueError("gt ids out of range")

    labels = np.zeros(n, dtype=np.uint8)
    labels[gt_ids] = gt_labels

    if predicted_ids is None:
        mode = LABELS_FULL_TRUTH if len(set(gt_ids.tolist())) == n else LABELS_GT_ONLY
    else:
        predicted_ids = np.asarray(predicted_ids, dtype=np.int64)
        predicted_labels = np.asarray(predicted_labels)
        if predicted_ids.shape != predicted_labels.shape:
            raise ValueError("predicted ids and labels must align")
        overlap = set(gt_ids.tolist()) & set(predicted_ids.tolist())
        if overlap:
            raise ValueError(f"gt and predicted user sets overlap: {sorted(overlap)[:5]}")
        if len(predicted_ids) and (predicted_ids.min() < 0 or predicted_ids.max() >= n):
            raise ValueError("predicted ids out of range")
        labels[predicted_ids] = predicted_labels
        mode = LABELS_GT_PLUS_PREDICTED

    ranking = rank_sites(visits, labels, xi)
    ranking = RankingResult(scores=ranking.scores, ranked_ids=ranking.ranked_ids, labels_used=mode)
    return ranking, ranking.top_k(k)


def suggest_xi(visits: VisitMatrix) -> float:
    """Rule-of-thumb threshold: mean of the average top-1 and top-2 visit shares."""
    shares = np.sort(visits.shares(), axis=1)[:, ::-1]
    top1 = float(shares[:, 0].mean())
    top2 = float(shares[:, 1].mean()) if visits.n_sites > 1 else 0.0
    return 0.5 * (top1 + top2)


def _check_xi(xi: float) -> None:
    if not 0 < xi < 1:
        raise ValueError(f"xi must be in (0, 1), got {xi}")


def _check_labels(labels: np.ndarray, n_users: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (n_users,):
        raise ValueError("labels must have one entry per user")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be binary")
    return labels
