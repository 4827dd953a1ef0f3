"""Distance kernels used by the clustering and validity-index hot loops.

A compiled Cython backend is preferred when it was built; otherwise the
numpy backend is used. Set RDLP_PURE_PYTHON=1 to force the numpy backend
regardless. Both backends compute identical values (covered by tests).
"""

import os

import numpy as np

from . import _dist_np

if os.environ.get("RDLP_PURE_PYTHON"):
    _impl = _dist_np
    BACKEND = "numpy"
else:
    try:
        from . import _distc as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _dist_np
        BACKEND = "numpy"


def _as_matrix(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("expected a 2-D array")
    return a


def sqdist_matrix(a, b):
    """Squared Euclidean distances between the rows of `a` and of `b`."""
    return _impl.sqdist_matrix(_as_matrix(a), _as_matrix(b))


def assign_nearest(x, centres):
    """Nearest-centre index and squared distance to it, per row of `x`."""
    x = _as_matrix(x)
    centres = _as_matrix(centres)
    if x.shape[1] != centres.shape[1]:
        raise ValueError("dimension mismatch between points and centres")
    if centres.shape[0] == 0:
        raise ValueError("no centres given")
    return _impl.assign_nearest(x, centres)


def label_distance_sums(x, labels, n_clusters):
    """Per point, the summed Euclidean distance to every member of each cluster.

    Returns (sums, counts) where sums has shape (n, n_clusters) and counts the
    cluster sizes. sums[i, k] includes the zero self-distance when labels[i] == k.
    """
    x = _as_matrix(x)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if labels.shape != (x.shape[0],):
        raise ValueError("labels must be 1-D and aligned with x rows")
    if labels.size and (labels.min() < 0 or labels.max() >= n_clusters):
        raise ValueError("label outside 0..n_clusters-1")
    return _impl.label_distance_sums(x, labels, int(n_clusters))
