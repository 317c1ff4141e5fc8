# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled corpus encoder: fused word-vector gather and DCT-II per sentence."""

from cython.parallel cimport prange
from libc.math cimport cos, sqrt, M_PI


def encode_ragged(const double[:, ::1] vectors, const long long[::1] idx,
                  const long long[::1] offsets, Py_ssize_t n_coef, bint avg,
                  bint raw_short, double[:, ::1] out, int n_threads=1):
    """Encode every sentence of a ragged corpus into ``out``.

    See ``dctsent._fallback.encode_ragged`` for the argument layout.
    """
    cdef Py_ssize_t n_sent = offsets.shape[0] - 1
    cdef Py_ssize_t d = vectors.shape[1]
    cdef Py_ssize_t s, k, n, j, start, length, kmax, row, m
    cdef double w, scale, arg
    if out.shape[0] != n_sent:
        raise ValueError("output row count does not match sentence count")
    if out.shape[1] != (d if avg else n_coef * d):
        raise ValueError("output width does not match encoder layout")
    if n_threads < 1:
        n_threads = 1
    with nogil:
        for s in prange(n_sent, num_threads=n_threads, schedule="guided"):
            start = offsets[s]
            length = offsets[s + 1] - start
            for j in range(out.shape[1]):
                out[s, j] = 0.0
            if length == 0:
                continue
            if avg:
                w = 1.0 / length
                for n in range(length):
                    row = idx[start + n]
                    if row < 0:
                        continue
                    for j in range(d):
                        out[s, j] += w * vectors[row, j]
                continue
            scale = sqrt(2.0 / length)
            kmax = n_coef
            if not raw_short and kmax > length:
                kmax = length
            for k in range(kmax):
                arg = M_PI / length * k
                for n in range(length):
                    row = idx[start + n]
                    if row < 0:
                        continue
                    # mirrored half, matching the exact symmetry of the numpy basis
                    m = n if 2 * n < length else length - 1 - n
                    if k % 2 == 1 and 2 * n + 1 == length:
                        w = 0.0
                    elif k % 2 == 1 and m != n:
                        w = -cos(arg * (m + 0.5)) * scale
                    else:
                        w = cos(arg * (m + 0.5)) * scale
                    for j in range(d):
                        out[s, k * d + j] += w * vectors[row, j]
    return out
