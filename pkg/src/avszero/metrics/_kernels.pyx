# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: pixel overlap counts and top-k score selection."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

KERNEL_BACKEND = "cython"


def overlap_counts(const cnp.uint8_t[:, ::1] pred, const cnp.uint8_t[:, ::1] gt):
    """Return (intersection, union, pred_count, gt_count) as Python ints."""
    cdef Py_ssize_t h = pred.shape[0]
    cdef Py_ssize_t w = pred.shape[1]
    cdef Py_ssize_t i, j
    cdef long inter = 0, uni = 0, pc = 0, gc = 0
    cdef int p, g
    for i in range(h):
        for j in range(w):
            p = pred[i, j]
            g = gt[i, j]
            pc += p
            gc += g
            if p and g:
                inter += 1
            if p or g:
                uni += 1
    return inter, uni, pc, gc


cdef float _kth_largest(float[::1] buf, Py_ssize_t k) noexcept:
    # Iterative quickselect for the k-th largest value (1-based k); mutates buf.
    cdef Py_ssize_t lo = 0, hi = buf.shape[0] - 1
    cdef Py_ssize_t target = k - 1  # index in descending order
    cdef Py_ssize_t i, store
    cdef float pivot, tmp
    while lo < hi:
        pivot = buf[lo + (hi - lo) // 2]
        buf[lo + (hi - lo) // 2] = buf[hi]
        buf[hi] = pivot
        store = lo
        for i in range(lo, hi):
            if buf[i] > pivot:  # descending partition
                tmp = buf[i]
                buf[i] = buf[store]
                buf[store] = tmp
                store += 1
        buf[hi] = buf[store]
        buf[store] = pivot
        if store == target:
            return buf[store]
        elif store < target:
            lo = store + 1
        else:
            hi = store - 1
    return buf[lo]


def topk_select(const cnp.float32_t[::1] flat, Py_ssize_t k):
    """Flat selection mask of the k largest scores, ties broken by ascending index."""
    cdef Py_ssize_t n = flat.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] sel = out
    cdef cnp.ndarray[cnp.float32_t, ndim=1] scratch = np.array(flat, dtype=np.float32)
    cdef float pivot = _kth_largest(scratch, k)
    cdef Py_ssize_t i
    cdef Py_ssize_t taken = 0
    for i in range(n):
        if flat[i] > pivot:
            sel[i] = 1
            taken += 1
    for i in range(n):
        if taken == k:
            break
        if flat[i] == pivot:
            sel[i] = 1
            taken += 1
    return out
