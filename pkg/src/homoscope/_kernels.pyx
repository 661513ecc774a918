# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops over CSR graphs and dense feature rows.

Every function here has a numpy twin in ``_pykernels`` with the same
signature; ``_backend`` picks one at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, acos, M_PI

cnp.import_array()

ctypedef cnp.int64_t idx_t


def csr_scaled_sum(const idx_t[::1] indptr, const idx_t[::1] indices,
                   const double[:, ::1] x, const double[::1] row_scale,
                   const double[::1] col_scale, double self_weight):
    """out[i] = row_scale[i] * (sum_j col_scale[j] x[j] + self_weight col_scale[i] x[i])."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t f = x.shape[1]
    out_arr = np.zeros((n, f), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, k, c
    cdef idx_t j
    cdef double w, rs
    for i in range(n):
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            w = col_scale[j]
            for c in range(f):
                out[i, c] += w * x[j, c]
        if self_weight != 0.0:
            w = self_weight * col_scale[i]
            for c in range(f):
                out[i, c] += w * x[i, c]
        rs = row_scale[i]
        for c in range(f):
            out[i, c] *= rs
    return out_arr


def same_label_counts(const idx_t[::1] indptr, const idx_t[::1] indices,
                      const idx_t[::1] labels):
    """Number of neighbours sharing the node's label, per node."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out_arr = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] out = out_arr
    cdef Py_ssize_t i, k
    cdef idx_t zi, cnt
    for i in range(n):
        zi = labels[i]
        cnt = 0
        for k in range(indptr[i], indptr[i + 1]):
            if labels[indices[k]] == zi:
                cnt += 1
        out[i] = cnt
    return out_arr


def label_pair_counts(const idx_t[::1] indptr, const idx_t[::1] indices,
                      const idx_t[::1] labels, Py_ssize_t n_classes):
    """C x C matrix counting incidences (u -> v) by (label u, label v)."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out_arr = np.zeros((n_classes, n_classes), dtype=np.int64)
    cdef idx_t[:, ::1] out = out_arr
    cdef Py_ssize_t i, k
    cdef idx_t zi
    for i in range(n):
        zi = labels[i]
        for k in range(indptr[i], indptr[i + 1]):
            out[zi, labels[indices[k]]] += 1
    return out_arr


def edge_cosine_sum(const idx_t[::1] indptr, const idx_t[::1] indices,
                    const double[:, ::1] x, const double[::1] norms):
    """Sum of cosine similarities over all stored incidences; zero rows give 0."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t f = x.shape[1]
    cdef Py_ssize_t i, k, c
    cdef idx_t j
    cdef double total = 0.0, dot, denom
    for i in range(n):
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            denom = norms[i] * norms[j]
            if denom == 0.0:
                continue
            dot = 0.0
            for c in range(f):
                dot += x[i, c] * x[j, c]
            total += dot / denom
    return total


def nngp_gram(a_in, b_in):
    """ReLU NNGP (arc-cosine, order 1) kernel between all rows of a and b.

    The inner products go through BLAS; the arc-cosine map runs here.  When
    ``a_in is b_in`` the squared norms are read off the product's diagonal
    so that K(x, x) = |x|^2 / 2 holds to rounding.
    """
    a_arr = np.ascontiguousarray(a_in, dtype=np.float64)
    b_arr = a_arr if b_in is a_in else np.ascontiguousarray(b_in, dtype=np.float64)
    cdef Py_ssize_t na = a_arr.shape[0], nb = b_arr.shape[0]
    out_arr = np.ascontiguousarray(a_arr @ b_arr.T)
    cdef double[:, ::1] out = out_arr
    if b_arr is a_arr:
        sa_arr = np.ascontiguousarray(np.diagonal(out_arr))
        sb_arr = sa_arr
    else:
        sa_arr = np.einsum("ij,ij->i", a_arr, a_arr)
        sb_arr = np.einsum("ij,ij->i", b_arr, b_arr)
    cdef const double[::1] sa = sa_arr
    cdef const double[::1] sb = sb_arr
    cdef Py_ssize_t i, j
    cdef double dot, prod, cosv, rest
    with nogil:
        for i in range(na):
            for j in range(nb):
                prod = sa[i] * sb[j]
                if prod == 0.0:
                    out[i, j] = 0.0
                    continue
                dot = out[i, j]
                cosv = dot / sqrt(prod)
                if cosv > 1.0:
                    cosv = 1.0
                elif cosv < -1.0:
                    cosv = -1.0
                rest = prod - dot * dot
                if rest < 0.0:
                    rest = 0.0
                out[i, j] = (dot * (M_PI - acos(cosv)) + sqrt(rest)) / (2.0 * M_PI)
    return out_arr
