"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np
import scipy.sparse as sp


def _csr(indptr, indices, n_cols=None):
    n = len(indptr) - 1
    data = np.ones(len(indices), dtype=np.float64)
    return sp.csr_matrix((data, indices, indptr), shape=(n, n if n_cols is None else n_cols))


def csr_scaled_sum(indptr, indices, x, row_scale, col_scale, self_weight):
    a = _csr(indptr, indices)
    scaled = x * col_scale[:, None]
    out = a @ scaled
    if self_weight != 0.0:
        out = out + self_weight * scaled
    return np.ascontiguousarray(out * row_scale[:, None])


def same_label_counts(indptr, indices, labels):
    rows = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    same = (labels[rows] == labels[indices]).astype(np.int64)
    return np.bincount(rows, weights=same, minlength=len(indptr) - 1).astype(np.int64)


def label_pair_counts(indptr, indices, labels, n_classes):
    rows = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    flat = labels[rows] * n_classes + labels[indices]
    return np.bincount(flat, minlength=n_classes * n_classes).reshape(n_classes, n_classes).astype(np.int64)


def edge_cosine_sum(indptr, indices, x, norms):
    rows = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    denom = norms[rows] * norms[indices]
    dots = np.einsum("ij,ij->i", x[rows], x[indices])
    ok = denom != 0.0
    return float(np.sum(dots[ok] / denom[ok]))


def nngp_gram(a, b):
    dot = a @ b.T
    if b is a:
        # norms from the same products keep the diagonal exact
        sa = sb = np.diagonal(dot).copy()
    else:
        sa = np.einsum("ij,ij->i", a, a)
        sb = np.einsum("ij,ij->i", b, b)
    prod = sa[:, None] * sb[None, :]
    zero = prod == 0.0
    safe = np.where(zero, 1.0, prod)
    cos = np.clip(dot / np.sqrt(safe), -1.0, 1.0)
    rest = np.maximum(prod - dot * dot, 0.0)
    out = (dot * (np.pi - np.arccos(cos)) + np.sqrt(rest)) / (2.0 * np.pi)
    out[zero] = 0.0
    return out
