"""Sparse-row numeric kernels.

The logistic oracle spends essentially all of its time in CSR
matrix-vector products over the training data, so those loops are
compiled with numba when it is available. Setting the environment
variable ``ADAPTQN_DISABLE_NUMBA=1`` (or uninstalling numba) selects a
pure-numpy fallback that computes bit-for-bit comparable results; both
paths are exercised by the test suite and compared by
``benchmarks/bench_kernels.py``.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("ADAPTQN_DISABLE_NUMBA", "").strip() not in ("", "0")

try:
    if _DISABLED:
        raise ImportError("numba disabled via ADAPTQN_DISABLE_NUMBA")
    from numba import njit

    USING_NUMBA = True
except ImportError:
    USING_NUMBA = False

    def njit(*args, **kwargs):  # no-op decorator so the kernel defs still import
        def wrap(fn):
            return fn

        return wrap


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

@njit(cache=True)
def _csr_matvec_numba(indptr, indices, data, x):
    n_rows = indptr.shape[0] - 1
    out = np.empty(n_rows)
    for i in range(n_rows):
        acc = 0.0
        for j in range(indptr[i], indptr[i + 1]):
            acc += data[j] * x[indices[j]]
        out[i] = acc
    return out


@njit(cache=True)
def _csr_rmatvec_numba(indptr, indices, data, coef, n_cols):
    out = np.zeros(n_cols)
    for i in range(indptr.shape[0] - 1):
        c = coef[i]
        if c != 0.0:
            for j in range(indptr[i], indptr[i + 1]):
                out[indices[j]] += c * data[j]
    return out


@njit(cache=True)
def _csr_row_sq_norms_numba(indptr, data):
    n_rows = indptr.shape[0] - 1
    out = np.empty(n_rows)
    for i in range(n_rows):
        acc = 0.0
        for j in range(indptr[i], indptr[i + 1]):
            acc += data[j] * data[j]
        out[i] = acc
    return out


@njit(cache=True)
def _csr_weighted_gram_numba(indptr, indices, data, weights, n_cols):
    out = np.zeros((n_cols, n_cols))
    for i in range(indptr.shape[0] - 1):
        w = weights[i]
        if w == 0.0:
            continue
        for a in range(indptr[i], indptr[i + 1]):
            ja = indices[a]
            va = w * data[a]
            for b in range(indptr[i], indptr[i + 1]):
                out[ja, indices[b]] += va * data[b]
    return out


# ---------------------------------------------------------------------------
# numpy fallback path
# ---------------------------------------------------------------------------

def _csr_matvec_numpy(indptr, indices, data, x):
    n_rows = indptr.shape[0] - 1
    out = np.zeros(n_rows)
    if data.shape[0] == 0:
        return out
    products = data * x[indices]
    starts = indptr[:-1]
    nonempty = indptr[1:] > starts
    # reduceat mishandles empty segments; restrict to nonempty rows, whose
    # consecutive starts bound exactly the data of each row.
    out[nonempty] = np.add.reduceat(products, starts[nonempty])
    return out


def _csr_rmatvec_numpy(indptr, indices, data, coef, n_cols):
    if data.shape[0] == 0:
        return np.zeros(n_cols)
    per_row = np.diff(indptr)
    expanded = np.repeat(coef, per_row)
    return np.bincount(indices, weights=expanded * data, minlength=n_cols)


def _csr_row_sq_norms_numpy(indptr, data):
    n_rows = indptr.shape[0] - 1
    out = np.zeros(n_rows)
    if data.shape[0] == 0:
        return out
    starts = indptr[:-1]
    nonempty = indptr[1:] > starts
    out[nonempty] = np.add.reduceat(data * data, starts[nonempty])
    return out


_GRAM_BLOCK_ROWS = 4096


def _csr_weighted_gram_numpy(indptr, indices, data, weights, n_cols):
    out = np.zeros((n_cols, n_cols))
    n_rows = indptr.shape[0] - 1
    for lo in range(0, n_rows, _GRAM_BLOCK_ROWS):
        hi = min(lo + _GRAM_BLOCK_ROWS, n_rows)
        block = np.zeros((hi - lo, n_cols))
        for i in range(lo, hi):
            sl = slice(indptr[i], indptr[i + 1])
            block[i - lo, indices[sl]] = data[sl]
        out += (block.T * weights[lo:hi]) @ block
    return out


# ---------------------------------------------------------------------------
# selected implementations
# ---------------------------------------------------------------------------

if USING_NUMBA:
    csr_matvec = _csr_matvec_numba
    csr_rmatvec = _csr_rmatvec_numba
    csr_row_sq_norms = _csr_row_sq_norms_numba
    csr_weighted_gram = _csr_weighted_gram_numba
else:
    csr_matvec = _csr_matvec_numpy
    csr_rmatvec = _csr_rmatvec_numpy
    csr_row_sq_norms = _csr_row_sq_norms_numpy
    csr_weighted_gram = _csr_weighted_gram_numpy
