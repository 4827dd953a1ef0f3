"""k-means, square-map batch SOM and SOM+k-means over normalised profiles.

All fits are deterministic for a fixed seed. Cluster-set representatives in
raw Amperes (RDLPs) are computed as the element-wise mean of each cluster's
raw member profiles, which is well defined for every normalisation scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import assign_nearest, sqdist_matrix
from .errors import ParameterError

DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-6  # relative centroid shift
DEFAULT_EPOCHS = 50


@dataclass(frozen=True)
class KMeansFit:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    n_iter: int
    inertia_history: tuple


def _kmeanspp_init(x, m, rng):
    n = x.shape[0]
    centres = np.empty((m, x.shape[1]), dtype=np.float64)
    centres[0] = x[rng.integers(n)]
    closest = sqdist_matrix(x, centres[:1])[:, 0]
    for i in range(1, m):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(n, p=closest / total)
        else:
            idx = rng.integers(n)
        centres[i] = x[idx]
        np.minimum(closest, sqdist_matrix(x, centres[i : i + 1])[:, 0], out=closest)
    return centres


def _column_means(x, labels, m):
    counts = np.bincount(labels, minlength=m).astype(np.float64)
    sums = np.empty((m, x.shape[1]))
    for t in range(x.shape[1]):
        sums[:, t] = np.bincount(labels, weights=x[:, t], minlength=m)
    return sums, counts


def kmeans(x, m, seed=0, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL) -> KMeansFit:
    """Lloyd's algorithm with k-means++ seeding.

    Converges when the relative centroid shift drops below `tol` or after
    `max_iter` iterations. A cluster that empties is re-seeded from the point
    farthest from its assigned centroid, so cluster counts do not collapse.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ParameterError("kmeans expects a 2-D matrix")
    n = x.shape[0]
    m = int(m)
    if m < 1:
        raise ParameterError("m must be >= 1")
    if m > n:
        raise ParameterError(f"m={m} exceeds the {n} available profiles")
    rng = np.random.default_rng(seed)
    centres = _kmeanspp_init(x, m, rng)
    labels, sq = assign_nearest(x, centres)
    history = [float(sq.sum())]
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        sums, counts = _column_means(x, labels, m)
        new = centres.copy()
        occupied = counts > 0
        new[occupied] = sums[occupied] / counts[occupied, None]
        for k in np.flatnonzero(~occupied):
            far = int(np.argmax(sq))
            if sq[far] == 0.0:
                break  # fewer distinct points than clusters; leave centroid
            new[k] = x[far]
            sq[far] = 0.0
        shift = np.linalg.norm(new - centres) / max(np.linalg.norm(centres), 1e-300)
        centres = new
        labels, sq = assign_nearest(x, centres)
        history.append(float(sq.sum()))
        if shift < tol:
            break
    return KMeansFit(labels, centres, history[-1], n_iter, tuple(history))


@dataclass(frozen=True)
class SomFit:
    codebook: np.ndarray  # (side*side, dim), row-major over the square grid
    labels: np.ndarray  # best-matching unit per input row
    side: int
    unit_grid: np.ndarray = field(repr=False, default=None)


def som(x, side, seed=0, epochs=DEFAULT_EPOCHS) -> SomFit:
    """Batch self-organising map on a side x side square grid.

    Gaussian neighbourhood whose radius decays linearly from side/2 to 1 over
    the epochs; each profile is labelled by its best-matching unit.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ParameterError("som expects a non-empty 2-D matrix")
    side = int(side)
    if side < 2:
        raise ParameterError("map side must be >= 2")
    n, dim = x.shape
    units = side * side
    rng = np.random.default_rng(seed)
    pick = rng.choice(n, size=units, replace=n < units)
    codebook = x[pick].astype(np.float64).copy()
    grid = np.array([(r, c) for r in range(side) for c in range(side)], dtype=np.float64)
    grid_sq = sqdist_matrix(grid, grid)
    start, stop = side / 2.0, 1.0
    for e in range(epochs):
        frac = e / (epochs - 1) if epochs > 1 else 0.0
        radius = start + (stop - start) * frac
        h = np.exp(-grid_sq / (2.0 * radius * radius))
        labels, _ = assign_nearest(x, codebook)
        counts = np.bincount(labels, minlength=units).astype(np.float64)
        sums = np.empty((units, dim))
        for t in range(dim):
            sums[:, t] = np.bincount(labels, weights=x[:, t], minlength=units)
        num = h @ sums
        den = h @ counts
        upd = den > 0
        codebook[upd] = num[upd] / den[upd, None]
    labels, _ = assign_nearest(x, codebook)
    return SomFit(codebook, labels, side, grid)


@dataclass(frozen=True)
class SomKMeansFit:
    labels: np.ndarray  # final cluster per input row
    centroids: np.ndarray  # k-means centres over the codebook
    codebook: np.ndarray
    codebook_labels: np.ndarray  # k-means cluster per map unit
    side: int


def som_kmeans(x, side, m, seed=0, epochs=DEFAULT_EPOCHS) -> SomKMeansFit:
    """Dimensionality reduction by SOM followed by k-means on the codebook.

    Requires side*side > m; each profile inherits the k-means cluster of its
    best-matching unit.
    """
    side = int(side)
    m = int(m)
    if side * side <= m:
        raise ParameterError(f"som_kmeans needs side^2 > m, got side={side}, m={m}")
    sfit = som(x, side, seed=seed, epochs=epochs)
    kfit = kmeans(sfit.codebook, m, seed=seed)
    return SomKMeansFit(kfit.labels[sfit.labels], kfit.centroids, sfit.codebook, kfit.labels, side)


def compute_rdlp(raw_values, labels, n_clusters):
    """Per-cluster representative profile in original Amperes.

    The RDLP of a cluster is the element-wise mean of its raw member
    profiles. Returns (rdlps, sizes); empty clusters get a NaN row and are
    flagged by their zero size.
    """
    raw = np.asarray(raw_values, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (raw.shape[0],):
        raise ParameterError("labels must align with raw profile rows")
    sizes = np.bincount(labels, minlength=n_clusters)
    rdlps = np.full((n_clusters, raw.shape[1]), np.nan)
    for t in range(raw.shape[1]):
        col = np.bincount(labels, weights=raw[:, t], minlength=n_clusters)
        occ = sizes > 0
        rdlps[occ, t] = col[occ] / sizes[occ]
    return rdlps, sizes
