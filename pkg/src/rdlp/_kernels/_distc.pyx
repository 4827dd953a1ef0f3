# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled distance kernels. Same contracts as _dist_np."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def sqdist_matrix(double[:, ::1] a, double[:, ::1] b):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], d = a.shape[1]
    cdef Py_ssize_t i, j, t
    cdef double acc, diff
    out_arr = np.empty((na, nb), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(na):
        for j in range(nb):
            acc = 0.0
            for t in range(d):
                diff = a[i, t] - b[j, t]
                acc += diff * diff
            out[i, j] = acc
    return out_arr


def assign_nearest(double[:, ::1] x, double[:, ::1] centres):
    cdef Py_ssize_t n = x.shape[0], k = centres.shape[0], d = x.shape[1]
    cdef Py_ssize_t i, j, t
    cdef double acc, diff, best
    cdef Py_ssize_t best_j
    labels_arr = np.empty(n, dtype=np.int64)
    dist_arr = np.empty(n, dtype=np.float64)
    cdef long long[::1] labels = labels_arr
    cdef double[::1] dist = dist_arr
    for i in range(n):
        best = -1.0
        best_j = 0
        for j in range(k):
            acc = 0.0
            for t in range(d):
                diff = x[i, t] - centres[j, t]
                acc += diff * diff
            if best < 0.0 or acc < best:
                best = acc
                best_j = j
        labels[i] = best_j
        dist[i] = best
    return labels_arr, dist_arr


def label_distance_sums(double[:, ::1] x, long long[::1] labels, int n_clusters):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t i, j, t
    cdef double acc, diff, dij
    sums_arr = np.zeros((n, n_clusters), dtype=np.float64)
    counts_arr = np.zeros(n_clusters, dtype=np.int64)
    cdef double[:, ::1] sums = sums_arr
    cdef long long[::1] counts = counts_arr
    for i in range(n):
        counts[labels[i]] += 1
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for t in range(d):
                diff = x[i, t] - x[j, t]
                acc += diff * diff
            dij = sqrt(acc)
            sums[i, labels[j]] += dij
            sums[j, labels[i]] += dij
    return sums_arr, counts_arr
