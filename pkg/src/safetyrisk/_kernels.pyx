# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; see ``_kernels_py`` for the reference implementations."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

# exp(-0.5 * z**2) underflows to exactly 0.0 beyond this many bandwidths
DEF CUTOFF = 38.7


cdef Py_ssize_t _lower_bound(const double[::1] a, double v) nogil:
    cdef Py_ssize_t lo = 0, hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


def gauss_kernel_sum(const double[::1] obs_sorted, const double[::1] xs, double h):
    """Unnormalised sum of Gaussian bumps at every point of ``xs``.

    ``obs_sorted`` must be ascending; terms beyond ``CUTOFF`` bandwidths
    are exactly zero in double precision and are skipped.
    """
    cdef Py_ssize_t n = obs_sorted.shape[0], m = xs.shape[0]
    cdef Py_ssize_t i, j, start
    cdef double x, z, acc, reach = CUTOFF * h
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for j in range(m):
            x = xs[j]
            start = _lower_bound(obs_sorted, x - reach)
            acc = 0.0
            i = start
            while i < n and obs_sorted[i] <= x + reach:
                z = (obs_sorted[i] - x) / h
                acc += exp(-0.5 * z * z)
                i += 1
            res[j] = acc
    return out


cdef long long _merge_count(long long[::1] a, long long[::1] buf,
                            Py_ssize_t lo, Py_ssize_t hi) nogil:
    # sorts a[lo:hi] in place, returns number of strict inversions
    cdef Py_ssize_t mid, i, j, k
    cdef long long inv = 0
    if hi - lo < 2:
        return 0
    mid = (lo + hi) >> 1
    inv += _merge_count(a, buf, lo, mid)
    inv += _merge_count(a, buf, mid, hi)
    i = lo
    j = mid
    k = lo
    while i < mid and j < hi:
        if a[i] <= a[j]:
            buf[k] = a[i]
            i += 1
        else:
            buf[k] = a[j]
            inv += mid - i
            j += 1
        k += 1
    while i < mid:
        buf[k] = a[i]
        i += 1
        k += 1
    while j < hi:
        buf[k] = a[j]
        j += 1
        k += 1
    for k in range(lo, hi):
        a[k] = buf[k]
    return inv


def count_inversions(cnp.ndarray values):
    """Number of index pairs i < j with values[i] > values[j]."""
    a = np.ascontiguousarray(values, dtype=np.int64).copy()
    buf = np.empty_like(a)
    cdef long long[::1] av = a
    cdef long long[::1] bv = buf
    cdef long long inv
    with nogil:
        inv = _merge_count(av, bv, 0, av.shape[0])
    return int(inv)
