"""Cluster-validity indices and their combination into a single run score.

Per bin, the interim score multiplies the Davies-Bouldin index and the mean
index adequacy by the inverse silhouette. Across bins, the combined index is
the natural log of the profile-count-weighted sum of the per-bin interim
scores; lower is better, zero when the weighted sum is one, negative below.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import label_distance_sums, sqdist_matrix
from .errors import MetricError

SILHOUETTE_SAMPLE_CAP = 20_000


def _occupied(labels, n_clusters):
    counts = np.bincount(labels, minlength=n_clusters)
    return np.flatnonzero(counts > 0), counts


def dbi(x, labels, centroids) -> float:
    """Davies-Bouldin index: mean over clusters of the worst
    (scatter_i + scatter_j) / centroid_distance ratio."""
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    centroids = np.asarray(centroids, dtype=np.float64)
    occ, _ = _occupied(labels, centroids.shape[0])
    if occ.size < 2:
        raise MetricError("dbi needs at least 2 non-empty clusters")
    scatter = np.empty(occ.size)
    for i, k in enumerate(occ):
        member = x[labels == k]
        scatter[i] = np.sqrt(((member - centroids[k]) ** 2).sum(axis=1)).mean()
    sep = np.sqrt(sqdist_matrix(centroids[occ], centroids[occ]))
    worst = np.zeros(occ.size)
    for i in range(occ.size):
        for j in range(occ.size):
            if i == j:
                continue
            if sep[i, j] == 0.0:
                raise MetricError(
                    f"clusters {int(occ[i])} and {int(occ[j])} have identical centroids"
                )
            worst[i] = max(worst[i], (scatter[i] + scatter[j]) / sep[i, j])
    return float(worst.mean())


def mia(x, labels, centroids) -> float:
    """Mean index adequacy: root mean over clusters of the mean squared
    member-to-centroid distance."""
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    centroids = np.asarray(centroids, dtype=np.float64)
    occ, _ = _occupied(labels, centroids.shape[0])
    if occ.size < 1:
        raise MetricError("mia needs at least 1 non-empty cluster")
    per_cluster = np.empty(occ.size)
    for i, k in enumerate(occ):
        member = x[labels == k]
        per_cluster[i] = (((member - centroids[k]) ** 2).sum(axis=1)).mean()
    return float(np.sqrt(per_cluster.mean()))


def silhouette(x, labels, sample_cap=SILHOUETTE_SAMPLE_CAP, seed=0) -> float:
    """Mean silhouette (b - a) / max(a, b).

    Exact when the input has at most `sample_cap` rows; above that a seeded
    deterministic subsample of sample_cap rows is scored against itself so
    large runs stay reproducible. Singleton contributions are 0.
    """
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if np.unique(labels).size < 2:
        raise MetricError("silhouette needs at least 2 non-empty clusters")
    n = x.shape[0]
    if sample_cap is not None and n > sample_cap:
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(n, size=sample_cap, replace=False))
        x, labels = x[pick], labels[pick]
        if np.unique(labels).size < 2:
            raise MetricError("silhouette subsample lost all but one cluster")
        n = sample_cap
    # compact label ids
    uniq, compact = np.unique(labels, return_inverse=True)
    k = uniq.size
    sums, counts = label_distance_sums(x, compact, k)
    own = counts[compact]
    scores = np.zeros(n)
    other = sums / np.where(counts > 0, counts, 1)[None, :]
    other[np.arange(n), compact] = np.inf
    b = other.min(axis=1)
    multi = own > 1
    a = np.zeros(n)
    a[multi] = sums[np.arange(n), compact][multi] / (own[multi] - 1)
    denom = np.maximum(a, b)
    valid = multi & (denom > 0) & np.isfinite(b)
    scores[valid] = (b[valid] - a[valid]) / denom[valid]
    return float(scores.mean())


def ix_score(dbi_value, mia_value, silhouette_value) -> float:
    """Interim score dbi * mia / silhouette; undefined for silhouette <= 0."""
    if silhouette_value <= 0:
        raise MetricError("ix undefined: silhouette must be positive")
    return float(dbi_value * mia_value / silhouette_value)


def combined_index(per_bin, n_total) -> float:
    """Natural log of the bin-size-weighted sum of per-bin interim scores.

    `per_bin` is a sequence of (ix, n_bin) pairs whose counts must add up to
    n_total. Without pre-binning there is a single pair with n_bin == n_total.
    """
    pairs = list(per_bin)
    if not pairs:
        raise MetricError("combined_index needs at least one bin")
    counts = np.array([n for _, n in pairs], dtype=np.float64)
    scores = np.array([s for s, _ in pairs], dtype=np.float64)
    if counts.sum() != n_total:
        raise MetricError(f"bin counts sum to {counts.sum():g}, expected {n_total}")
    if np.any(~np.isfinite(scores)) or np.any(scores <= 0):
        raise MetricError("every ix must be finite and positive")
    return float(np.log(np.dot(counts / n_total, scores)))


@dataclass(frozen=True)
class BinQuant:
    """Validity indices of one bin's selected clustering."""

    bin_id: int
    n_bin: int
    dbi: float
    mia: float
    silhouette: float
    ix: float


@dataclass(frozen=True)
class QuantReport:
    bins: tuple
    ci: float
    n_total: int

    @classmethod
    def from_bins(cls, bins) -> "QuantReport":
        bins = tuple(bins)
        n_total = sum(b.n_bin for b in bins)
        ci = combined_index([(b.ix, b.n_bin) for b in bins], n_total)
        return cls(bins, ci, n_total)
