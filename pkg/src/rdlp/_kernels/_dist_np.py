"""Numpy implementations of the distance kernels (fallback backend)."""

import numpy as np

# Cap on the number of doubles materialised per pairwise-distance chunk.
_CHUNK_BUDGET = 20_000_000


def sqdist_matrix(a, b):
    aa = np.einsum("ij,ij->i", a, a)
    bb = np.einsum("ij,ij->i", b, b)
    d = aa[:, None] + bb[None, :] - 2.0 * (a @ b.T)
    # the expansion can go slightly negative through cancellation
    np.maximum(d, 0.0, out=d)
    return d


def assign_nearest(x, centres):
    n = x.shape[0]
    labels = np.empty(n, dtype=np.int64)
    best = np.empty(n, dtype=np.float64)
    step = max(1, _CHUNK_BUDGET // max(centres.shape[0], 1))
    for s in range(0, n, step):
        d = sqdist_matrix(x[s : s + step], centres)
        idx = np.argmin(d, axis=1)
        labels[s : s + step] = idx
        best[s : s + step] = d[np.arange(d.shape[0]), idx]
    return labels, best


def label_distance_sums(x, labels, n_clusters):
    n = x.shape[0]
    onehot = np.zeros((n, n_clusters), dtype=np.float64)
    onehot[np.arange(n), labels] = 1.0
    sums = np.empty((n, n_clusters), dtype=np.float64)
    step = max(1, _CHUNK_BUDGET // max(n, 1))
    for s in range(0, n, step):
        d = np.sqrt(sqdist_matrix(x[s : s + step], x))
        sums[s : s + step] = d @ onehot
    counts = np.bincount(labels, minlength=n_clusters).astype(np.int64)
    return sums, counts
