"""Chi-square histogram distance, k-NN majority voting, and retrieval scoring."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RankedRetrieval",
    "PrCurve",
    "chi_square",
    "chi_square_matrix",
    "knn_classify",
    "rank_references",
    "recall_precision",
    "pr_curve",
]


@dataclass(frozen=True)
class RankedRetrieval:
    """Database indices sorted by ascending distance to one query."""

    query_class: int
    ranked: np.ndarray
    distances: np.ndarray
    relevant: np.ndarray


@dataclass(frozen=True)
class PrCurve:
    """Mean recall/precision over queries at each retrieval depth k."""

    ks: np.ndarray
    recall: np.ndarray
    precision: np.ndarray


def _as_histograms(x, *, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a histogram or a matrix of histograms")
    return arr


def chi_square(x, y) -> float:
    """Half the sum of (x_i - y_i)^2 / (x_i + y_i); empty bins contribute 0."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape:
        raise ValueError(f"bin-count mismatch: {xa.shape} vs {ya.shape}")
    total = xa + ya
    diff = xa - ya
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(total > 0, diff * diff / np.where(total > 0, total, 1.0), 0.0)
    return 0.5 * float(terms.sum())


def chi_square_matrix(queries, references) -> np.ndarray:
    """Pairwise chi-square distances, queries on rows and references on columns."""
    q = _as_histograms(queries, name="queries")
    r = _as_histograms(references, name="references")
    if q.shape[1] != r.shape[1]:
        raise ValueError(f"bin-count mismatch: {q.shape[1]} vs {r.shape[1]}")
    total = q[:, None, :] + r[None, :, :]
    diff = q[:, None, :] - r[None, :, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(total > 0, diff * diff / np.where(total > 0, total, 1.0), 0.0)
    return 0.5 * terms.sum(axis=2)


def knn_classify(query, train_features, train_labels, k: int = 1) -> int:
    """Majority vote over the k nearest references by chi-square distance.

    Distance ties keep reference enumeration order. A vote tie goes to the
    tied class owning the single nearest member.
    """
    feats = _as_histograms(train_features, name="train_features")
    labels = np.asarray(train_labels)
    if feats.shape[0] == 0:
        raise ValueError("training set is empty")
    if labels.shape[0] != feats.shape[0]:
        raise ValueError("train_labels length does not match train_features")
    if k < 1 or k > feats.shape[0]:
        raise ValueError(f"k must be in [1, {feats.shape[0]}], got {k}")
    distances = chi_square_matrix(np.asarray(query)[None, :], feats)[0]
    order = np.argsort(distances, kind="stable")[:k]
    top_labels = labels[order]
    classes, votes = np.unique(top_labels, return_counts=True)
    best = votes.max()
    tied = classes[votes == best]
    if tied.size == 1:
        return int(tied[0])
    # Nearest member among the tied classes decides.
    for label in top_labels:
        if label in tied:
            return int(label)
    raise AssertionError("unreachable: tied classes come from top_labels")


def rank_references(query, query_class: int, db_features, db_labels) -> RankedRetrieval:
    """Order the whole database by ascending chi-square distance to the query.

    The sort is stable, so exact distance ties keep enumeration order.
    """
    feats = _as_histograms(db_features, name="db_features")
    labels = np.asarray(db_labels)
    if feats.shape[0] == 0:
        raise ValueError("reference database is empty")
    if labels.shape[0] != feats.shape[0]:
        raise ValueError("db_labels length does not match db_features")
    distances = chi_square_matrix(np.asarray(query)[None, :], feats)[0]
    order = np.argsort(distances, kind="stable")
    return RankedRetrieval(
        query_class=int(query_class),
        ranked=order,
        distances=distances[order],
        relevant=(labels[order] == query_class),
    )


def recall_precision(retrieval: RankedRetrieval, k: int, class_size: int) -> tuple[float, float]:
    """(recall, precision) at depth k for one ranked retrieval."""
    n = retrieval.ranked.size
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if class_size < 1:
        raise ValueError(f"class_size must be >= 1, got {class_size}")
    hits = int(retrieval.relevant[:k].sum())
    return hits / class_size, hits / k


def pr_curve(query_features, query_labels, db_features, db_labels, ks) -> PrCurve:
    """Mean recall/precision over all queries at each depth in ks.

    ks must be odd and ascending. Each query's class size is the number of
    database references sharing its label.
    """
    ks_arr = np.asarray(ks, dtype=np.int64)
    if ks_arr.size == 0:
        raise ValueError("ks must be nonempty")
    if (ks_arr % 2 == 0).any():
        raise ValueError("ks must be odd")
    if (np.diff(ks_arr) <= 0).any():
        raise ValueError("ks must be strictly ascending")
    q_feats = _as_histograms(query_features, name="query_features")
    q_labels = np.asarray(query_labels)
    db_labels_arr = np.asarray(db_labels)
    if q_feats.shape[0] == 0:
        raise ValueError("query set is empty")
    recalls = np.zeros(ks_arr.size, dtype=np.float64)
    precisions = np.zeros(ks_arr.size, dtype=np.float64)
    for q, label in zip(q_feats, q_labels):
        retrieval = rank_references(q, int(label), db_features, db_labels_arr)
        class_size = int((db_labels_arr == label).sum())
        for i, k in enumerate(ks_arr):
            r, p = recall_precision(retrieval, int(k), class_size)
            recalls[i] += r
            precisions[i] += p
    recalls /= q_feats.shape[0]
    precisions /= q_feats.shape[0]
    return PrCurve(ks=ks_arr, recall=recalls, precision=precisions)
