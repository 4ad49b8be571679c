# cython: language_level=3
"""Compiled hot loops: reassignment scatter-add, overlap-add, ridge DP.

Each routine accumulates in the same order as its counterpart in
``_pykernels`` so both backends return bit-identical arrays.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def squeeze(const double complex[:, :] sg, const double[:, :] omega,
            const unsigned char[:, :] mask, Py_ssize_t k_lo, Py_ssize_t k_hi,
            double f1, double dfs, Py_ssize_t n_out):
    cdef Py_ssize_t n_frames = sg.shape[0]
    out_arr = np.zeros((n_frames, n_out), dtype=np.complex128)
    cdef double complex[:, :] out = out_arr
    cdef Py_ssize_t m, k, l
    cdef double pos
    with nogil:
        for m in range(n_frames):
            for k in range(k_lo, k_hi):
                if mask[m, k]:
                    pos = floor((omega[m, k] - f1) / dfs + 0.5)
                    if pos >= 0 and pos < n_out:
                        l = <Py_ssize_t>pos
                        out[m, l] = out[m, l] + sg[m, k]
    return out_arr


def overlap_add(const double[:, :] frames, const double[:] g, Py_ssize_t hop,
                Py_ssize_t half, Py_ssize_t n_out):
    cdef Py_ssize_t n_frames = frames.shape[0]
    cdef Py_ssize_t width = frames.shape[1]
    out_arr = np.zeros(n_out, dtype=np.float64)
    diag_arr = np.zeros(n_out, dtype=np.float64)
    cdef double[:] out = out_arr
    cdef double[:] diag = diag_arr
    cdef Py_ssize_t m, n, j
    with nogil:
        for m in range(n_frames):
            for n in range(width):
                j = m * hop + n - half
                if j >= 0 and j < n_out:
                    out[j] += g[n] * frames[m, n]
                    diag[j] += g[n] * g[n]
    return out_arr, diag_arr


def ridge_dp(const double[:, :] score, double lam):
    """Maximize sum(score[m, l_m]) - lam * sum((l_{m+1} - l_m)**2)."""
    cdef Py_ssize_t n_frames = score.shape[0]
    cdef Py_ssize_t n_bins = score.shape[1]
    ptr_arr = np.zeros((n_frames, n_bins), dtype=np.int64)
    cdef long long[:, :] ptr = ptr_arr
    prev_arr = np.array(score[0], dtype=np.float64)
    cur_arr = np.empty(n_bins, dtype=np.float64)
    cdef double[:] prev = prev_arr
    cdef double[:] cur = cur_arr
    cdef long long[:] v = np.empty(n_bins, dtype=np.int64)
    cdef double[:] z = np.empty(n_bins + 1, dtype=np.float64)
    cdef Py_ssize_t m, l, q, k, best
    cdef double s, bestval, inf = float("inf")
    with nogil:
        for m in range(1, n_frames):
            if lam == 0.0:
                best = 0
                bestval = prev[0]
                for l in range(1, n_bins):
                    if prev[l] > bestval:
                        bestval = prev[l]
                        best = l
                for l in range(n_bins):
                    ptr[m, l] = best
            else:
                # lower envelope of parabolas lam*(l-q)**2 - prev[q]
                k = 0
                v[0] = 0
                z[0] = -inf
                z[1] = inf
                for q in range(1, n_bins):
                    s = ((lam * q * q - prev[q]) - (lam * v[k] * v[k] - prev[v[k]])) \
                        / (2.0 * lam * (q - v[k]))
                    while k > 0 and s <= z[k]:
                        k -= 1
                        s = ((lam * q * q - prev[q]) - (lam * v[k] * v[k] - prev[v[k]])) \
                            / (2.0 * lam * (q - v[k]))
                    k += 1
                    v[k] = q
                    z[k] = s
                    z[k + 1] = inf
                k = 0
                for l in range(n_bins):
                    while z[k + 1] < l:
                        k += 1
                    ptr[m, l] = v[k]
            for l in range(n_bins):
                q = ptr[m, l]
                cur[l] = score[m, l] + (prev[q] - lam * (l - q) * (l - q))
            for l in range(n_bins):
                prev[l] = cur[l]
    path = np.empty(n_frames, dtype=np.int64)
    path[n_frames - 1] = int(np.argmax(prev_arr))
    for m in range(n_frames - 1, 0, -1):
        path[m - 1] = ptr_arr[m, path[m]]
    return path
