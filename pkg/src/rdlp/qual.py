"""Qualitative cluster-set measures: how faithfully each representative
profile stands for its members and how specific each cluster's context is.

Expressivity is captured by consumption-error metrics between a cluster's
representative demand and its members' demands, and by how often member peak
hours coincide with the representative's. Specificity is the Shannon entropy
of a categorical feature (weekday, month, demand percentile) within the
cluster: lower entropy means a more specific cluster. Usability checks the
membership-count distribution, the cluster-count ceiling and whether a
zero-consumption profile is represented.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import DataError, MetricError
from .profiles import ProfileSet

MEMBER_THRESHOLD = 10_490
MAX_CLUSTERS = 220
ZERO_TOTAL_TOL = 1e-6  # Amperes summed over the day
PERCENTILE_BINS = 100


@dataclass(frozen=True)
class ConsumptionErrors:
    mape: float
    mdape: float
    mdlq: float
    mdsyma: float
    n_excluded: int  # zero-demand members skipped


def consumption_errors(member_demands, rdlp_demand) -> ConsumptionErrors:
    """Error metrics between one representative demand and its member demands.

    mape/mdape are mean/median absolute percentage errors. mdlq is the median
    of ln(representative / member); mdsyma rescales the median absolute log
    ratio back to a percentage, 100 * (exp(median |ln Q|) - 1). Members with
    zero demand are excluded and counted.
    """
    if rdlp_demand <= 0:
        raise MetricError("representative demand must be positive")
    d = np.asarray(member_demands, dtype=np.float64)
    keep = d > 0
    n_excluded = int(d.size - keep.sum())
    d = d[keep]
    if d.size == 0:
        raise MetricError("no members with positive demand")
    ape = np.abs(d - rdlp_demand) / d
    lq = np.log(rdlp_demand / d)
    return ConsumptionErrors(
        mape=float(100.0 * ape.mean()),
        mdape=float(100.0 * np.median(ape)),
        mdlq=float(np.median(lq)),
        mdsyma=float(100.0 * (np.exp(np.median(np.abs(lq))) - 1.0)),
        n_excluded=n_excluded,
    )


def detect_peaks(profile) -> frozenset:
    """Peak hours of a 24-vector: local maxima above half the profile maximum.

    A plateau of equal values counts once, at its first index; the global
    maximum hour always qualifies. An all-zero profile has no peaks.
    """
    v = np.asarray(profile, dtype=np.float64)
    top = v.max()
    if top <= 0:
        return frozenset()
    threshold = 0.5 * top
    peaks = []
    n = v.size
    i = 0
    while i < n:
        j = i
        while j + 1 < n and v[j + 1] == v[i]:
            j += 1
        rises_in = i == 0 or v[i - 1] < v[i]
        falls_out = j == n - 1 or v[j + 1] < v[i]
        if rises_in and falls_out and v[i] > threshold:
            peaks.append(i)
        i = j + 1
    return frozenset(peaks)


def mpc_ratio(member_profiles, rdlp) -> float:
    """Mean peak coincidence ratio in [0, 1].

    Mean over members of the shared-peak-hour count with the representative,
    divided by the representative's peak count. Peak magnitudes are ignored.
    A representative without peaks scores 0.
    """
    rdlp_peaks = detect_peaks(rdlp)
    members = np.asarray(member_profiles, dtype=np.float64)
    if members.ndim != 2 or members.shape[0] == 0:
        raise DataError("mpc_ratio needs a non-empty member matrix")
    if not rdlp_peaks:
        return 0.0
    shared = sum(len(detect_peaks(row) & rdlp_peaks) for row in members)
    return shared / (members.shape[0] * len(rdlp_peaks))


def cluster_entropy(feature_values, n_feature_values) -> float:
    """Shannon entropy (bits) of the feature distribution within a cluster.

    Zero for a fully specific cluster, log2(n_feature_values) at uniform.
    """
    values = list(feature_values)
    if not values:
        raise DataError("cluster_entropy needs at least one member")
    _, counts = np.unique(np.asarray(values), return_counts=True)
    if counts.size > n_feature_values:
        raise DataError(f"more than {n_feature_values} distinct feature values")
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum())


def demand_percentile_features(pset: ProfileSet):
    """Percentile bin (0..99) of each profile's total and peak demand.

    The rank counts strictly smaller values over the whole set, so ties share
    a bin and n distinct values spread evenly over the 100 bins.
    """
    if len(pset) == 0:
        raise DataError("demand percentiles need a non-empty set")

    def bins(values):
        order = np.sort(values)
        rank = np.searchsorted(order, values, side="left")
        return (PERCENTILE_BINS * rank) // values.size

    return bins(pset.totals()), bins(pset.peaks())


@dataclass(frozen=True)
class ClusterQualScores:
    """Per-cluster qualitative measures (error fields None when undefined)."""

    cluster_id: int
    member_count: int
    mape_total: float | None
    mdape_total: float | None
    mdlq_total: float | None
    mdsyma_total: float | None
    mape_peak: float | None
    mdape_peak: float | None
    mdlq_peak: float | None
    mdsyma_peak: float | None
    mpc_ratio: float
    entropy_weekday: float
    entropy_month: float
    entropy_total_demand: float
    entropy_peak_demand: float
    n_zero_demand_excluded: int


_SCORE_FIELDS = [
    "mape_total",
    "mdape_total",
    "mdlq_total",
    "mdsyma_total",
    "mape_peak",
    "mdape_peak",
    "mdlq_peak",
    "mdsyma_peak",
    "mpc_ratio",
    "entropy_weekday",
    "entropy_month",
    "entropy_total_demand",
    "entropy_peak_demand",
]


def _errors_or_none(demands, rep):
    """Error tuple plus exclusion count; all-None when the metric is undefined."""
    if rep <= 0:
        return (None, None, None, None), int((demands <= 0).sum())
    try:
        e = consumption_errors(demands, rep)
    except MetricError:
        return (None, None, None, None), int((demands <= 0).sum())
    return (e.mape, e.mdape, e.mdlq, e.mdsyma), e.n_excluded


def score_cluster(
    cluster_id,
    member_values,
    member_weekdays,
    member_months,
    member_total_pct,
    member_peak_pct,
    rdlp,
) -> ClusterQualScores:
    """All qualitative measures for one cluster against its representative."""
    member_values = np.asarray(member_values, dtype=np.float64)
    totals = member_values.sum(axis=1)
    peaks = member_values.max(axis=1)
    rdlp = np.asarray(rdlp, dtype=np.float64)
    err_total, excl_total = _errors_or_none(totals, float(rdlp.sum()))
    err_peak, excl_peak = _errors_or_none(peaks, float(rdlp.max()))
    return ClusterQualScores(
        cluster_id=int(cluster_id),
        member_count=member_values.shape[0],
        mape_total=err_total[0],
        mdape_total=err_total[1],
        mdlq_total=err_total[2],
        mdsyma_total=err_total[3],
        mape_peak=err_peak[0],
        mdape_peak=err_peak[1],
        mdlq_peak=err_peak[2],
        mdsyma_peak=err_peak[3],
        mpc_ratio=mpc_ratio(member_values, rdlp),
        entropy_weekday=cluster_entropy(member_weekdays, 7),
        entropy_month=cluster_entropy(member_months, 12),
        entropy_total_demand=cluster_entropy(member_total_pct, PERCENTILE_BINS),
        entropy_peak_demand=cluster_entropy(member_peak_pct, PERCENTILE_BINS),
        n_zero_demand_excluded=excl_total + excl_peak,
    )


@dataclass(frozen=True)
class SetQualScores:
    """Size-weighted means over qualifying clusters, plus usability checks."""

    mape_total: float | None
    mdape_total: float | None
    mdlq_total: float | None
    mdsyma_total: float | None
    mape_peak: float | None
    mdape_peak: float | None
    mdlq_peak: float | None
    mdsyma_peak: float | None
    mpc_ratio: float | None
    entropy_weekday: float | None
    entropy_month: float | None
    entropy_total_demand: float | None
    entropy_peak_demand: float | None
    pct_clusters_above_threshold: float
    zero_profile_represented: bool
    n_clusters: int
    n_clusters_ok: bool
    n_qualifying: int
    n_zero_demand_excluded: int


def aggregate_set_scores(per_cluster, threshold=MEMBER_THRESHOLD, usability=None) -> SetQualScores:
    """Size-weighted mean of each per-cluster score over qualifying clusters.

    A cluster qualifies when it has more than `threshold` members; small
    clusters would overstate the set's performance. Scores a cluster lacks
    (None) are skipped for that measure with the weights renormalised.
    """
    scored = list(per_cluster)
    qualifying = [c for c in scored if c.member_count > threshold]
    if not qualifying:
        raise MetricError(f"no cluster exceeds the {threshold}-member threshold")
    agg = {}
    for name in _SCORE_FIELDS:
        weighted = [(c.member_count, getattr(c, name)) for c in qualifying if getattr(c, name) is not None]
        total = sum(w for w, _ in weighted)
        agg[name] = sum(w * v for w, v in weighted) / total if total else None
    usability = usability or {}
    pct = 100.0 * len(qualifying) / len(scored)
    return SetQualScores(
        pct_clusters_above_threshold=usability.get("pct_above_threshold", pct),
        zero_profile_represented=usability.get("zero_profile_represented", False),
        n_clusters=len(scored),
        n_clusters_ok=usability.get("n_clusters_ok", len(scored) <= MAX_CLUSTERS),
        n_qualifying=len(qualifying),
        n_zero_demand_excluded=sum(c.n_zero_demand_excluded for c in scored),
        **agg,
    )


def usability_scores(sizes, rdlps, threshold=MEMBER_THRESHOLD, max_clusters=MAX_CLUSTERS, zero_tol=ZERO_TOTAL_TOL):
    """Usability checks over a fitted cluster set.

    Returns (pct_above_threshold, zero_profile_represented, n_clusters_ok)
    computed over the non-empty clusters. Whether a zero-consumption profile
    is represented is automated as any representative whose total demand is
    below `zero_tol`.
    """
    sizes = np.asarray(sizes)
    rdlps = np.asarray(rdlps, dtype=np.float64)
    occupied = sizes > 0
    n_clusters = int(occupied.sum())
    if n_clusters == 0:
        raise MetricError("usability needs at least one non-empty cluster")
    pct = 100.0 * float((sizes[occupied] > threshold).sum()) / n_clusters
    rdlp_totals = np.nansum(rdlps[occupied], axis=1)
    zero_represented = bool((rdlp_totals < zero_tol).any())
    return pct, zero_represented, n_clusters <= max_clusters


def scores_as_dict(scores: SetQualScores) -> dict:
    return {f.name: getattr(scores, f.name) for f in fields(scores)}
