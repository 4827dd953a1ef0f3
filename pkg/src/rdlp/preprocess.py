"""Zero handling, per-profile normalisation and pre-binning.

Normalisation schemes (per 24-vector v):
    unit_norm  v / |v|2
    deminning  (v - min v) / sum(v - min v)
    zero_one   v / max v
    sa_norm    v / mean v            (profile mean becomes 1)
    none       v unchanged

Profiles for which the chosen denominator is zero (all-zero profiles, or a
constant profile under deminning) cannot be normalised; set-level helpers
exclude them and report the count instead of emitting NaNs.

Pre-binning partitions profiles before shape clustering, either by a
household's average monthly consumption (AMC) against configured ranges, or
data-driven by k-means over cumulative-consumption features.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import cluster as _cluster
from .errors import ConfigError, DataError
from .profiles import HOURS, ProfileSet

# Scale factor from hourly current readings (Amperes) to the consumption
# figure used for AMC binning: 230 per reading, annual total divided by 12.
AMC_VOLTAGE_FACTOR = 230.0

# Stand-in for the expert consumption ranges: lower bin bounds, ascending,
# first must be 0 so the bins cover [0, inf). Override in the config.
DEFAULT_AMC_EDGES = (0.0, 50.0, 150.0, 400.0, 600.0, 1200.0, 2500.0, 4000.0)


class NormalisationMethod(str, enum.Enum):
    NONE = "none"
    UNIT_NORM = "unit_norm"
    DEMINNING = "deminning"
    ZERO_ONE = "zero_one"
    SA_NORM = "sa_norm"


class UnnormalisableProfile(DataError):
    """The profile has a zero denominator under the chosen method."""


def _method(method) -> NormalisationMethod:
    try:
        return NormalisationMethod(method)
    except ValueError:
        names = ", ".join(m.value for m in NormalisationMethod)
        raise ConfigError(f"unknown normalisation {method!r} (one of: {names})") from None


def filter_zeros(pset: ProfileSet, keep_zeros: bool) -> ProfileSet:
    """Drop all-zero daily profiles unless keep_zeros. Errors if nothing is left."""
    if keep_zeros:
        return pset
    keep = np.flatnonzero(pset.totals() > 0)
    if keep.size == 0:
        raise DataError("zero filtering removed every profile; nothing to cluster")
    if keep.size == len(pset):
        return pset
    return pset.subset(keep)


def normalise(profile, method) -> np.ndarray:
    """Normalise one 24-vector. Raises UnnormalisableProfile on a zero denominator."""
    v = np.asarray(profile, dtype=np.float64)
    if v.shape != (HOURS,):
        raise DataError(f"expected a {HOURS}-vector, got shape {v.shape}")
    m = _method(method)
    if m is NormalisationMethod.NONE:
        return v.copy()
    if m is NormalisationMethod.UNIT_NORM:
        mag = float(np.linalg.norm(v))
        if mag == 0.0:
            raise UnnormalisableProfile("unit_norm: all-zero profile")
        return v / mag
    if m is NormalisationMethod.DEMINNING:
        shifted = v - v.min()
        total = float(shifted.sum())
        if total == 0.0:
            raise UnnormalisableProfile("deminning: constant profile")
        return shifted / total
    if m is NormalisationMethod.ZERO_ONE:
        top = float(v.max())
        if top == 0.0:
            raise UnnormalisableProfile("zero_one: all-zero profile")
        return v / top
    # sa_norm
    mean = float(v.sum()) / HOURS
    if mean == 0.0:
        raise UnnormalisableProfile("sa_norm: all-zero profile")
    return v / mean


def normalise_set(values: np.ndarray, method):
    """Normalise a (n, 24) matrix row-wise.

    Returns (matrix, kept_rows, n_excluded): un-normalisable rows are dropped
    and counted; kept_rows maps matrix rows back to input rows.
    """
    v = np.asarray(values, dtype=np.float64)
    m = _method(method)
    if m is NormalisationMethod.NONE:
        return v.copy(), np.arange(v.shape[0]), 0
    if m is NormalisationMethod.UNIT_NORM:
        denom = np.linalg.norm(v, axis=1)
        shifted = v
    elif m is NormalisationMethod.DEMINNING:
        shifted = v - v.min(axis=1, keepdims=True)
        denom = shifted.sum(axis=1)
    elif m is NormalisationMethod.ZERO_ONE:
        denom = v.max(axis=1) if v.size else np.empty(0)
        shifted = v
    else:  # sa_norm
        denom = v.sum(axis=1) / HOURS
        shifted = v
    kept = np.flatnonzero(denom > 0)
    out = shifted[kept] / denom[kept, None]
    return out, kept, v.shape[0] - kept.size


@dataclass(frozen=True)
class BinAssignment:
    """Bin id (1..n_bins) per profile of the set it was computed from."""

    bin_ids: np.ndarray
    n_bins: int

    def __post_init__(self):
        ids = np.asarray(self.bin_ids, dtype=np.int64)
        if ids.size and (ids.min() < 1 or ids.max() > self.n_bins):
            raise DataError("bin ids must lie in 1..n_bins")
        ids.setflags(write=False)
        object.__setattr__(self, "bin_ids", ids)

    def rows_in_bin(self, bin_id: int) -> np.ndarray:
        return np.flatnonzero(self.bin_ids == bin_id)


def amc(household_values: np.ndarray) -> float:
    """Average monthly consumption of one household.

    One twelfth of the 230-scaled sum of all readings; months without data
    contribute nothing, the divisor stays 12.
    """
    v = np.asarray(household_values, dtype=np.float64)
    if v.size == 0:
        raise DataError("amc needs at least one profile")
    return AMC_VOLTAGE_FACTOR * float(v.sum()) / 12.0


def prebin_amc(pset: ProfileSet, bin_edges=DEFAULT_AMC_EDGES) -> BinAssignment:
    """Bin every profile by its household's AMC.

    `bin_edges` are ascending lower bounds; bin i is [edge_i, edge_i+1) and the
    last bin is open-ended, so a value exactly on an edge goes to the higher
    bin. All profiles of a household share its bin.
    """
    edges = np.asarray(bin_edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 1:
        raise ConfigError("bin_edges must be a non-empty 1-D sequence")
    if np.any(np.diff(edges) <= 0):
        raise ConfigError("bin_edges must be strictly ascending")
    if edges[0] != 0.0:
        raise ConfigError("first bin edge must be 0 to cover [0, inf)")
    bin_ids = np.empty(len(pset), dtype=np.int64)
    for hid, rows in pset.household_rows().items():
        value = amc(pset.values[rows])
        # index of the last edge <= value, 1-based
        bin_ids[rows] = int(np.searchsorted(edges, value, side="right"))
    return BinAssignment(bin_ids, n_bins=edges.size)


def integral_features(pset: ProfileSet) -> np.ndarray:
    """Cumulative sum of each unit-norm profile with the raw maximum appended.

    All-zero profiles have no unit norm; they map to the all-zero feature
    vector so that keep-zeros experiments can still pre-bin them.
    """
    v = pset.values
    if v.shape[0] == 0:
        return np.empty((0, HOURS + 1))
    mags = np.linalg.norm(v, axis=1)
    safe = np.where(mags > 0, mags, 1.0)
    cum = np.cumsum(v / safe[:, None], axis=1)
    cum[mags == 0] = 0.0
    return np.hstack([cum, v.max(axis=1)[:, None]])


def prebin_integral_kmeans(pset: ProfileSet, n_bins: int = 8, rng_seed: int = 0) -> BinAssignment:
    """Data-driven pre-binning: k-means over the 25 integral features.

    Bin ids are relabelled 1..n_bins by ascending mean raw total demand so the
    numbering is stable across seeds.
    """
    if len(pset) < n_bins:
        raise DataError(f"need at least {n_bins} profiles to form {n_bins} bins")
    feats = integral_features(pset)
    fit = _cluster.kmeans(feats, n_bins, seed=rng_seed)
    totals = pset.totals()
    means = np.full(n_bins, np.inf)
    for k in range(n_bins):
        members = totals[fit.labels == k]
        if members.size:
            means[k] = members.mean()
    order = np.argsort(means, kind="stable")
    rank = np.empty(n_bins, dtype=np.int64)
    rank[order] = np.arange(1, n_bins + 1)
    return BinAssignment(rank[fit.labels], n_bins=n_bins)
