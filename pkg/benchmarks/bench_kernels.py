#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the four CSR kernels on a synthetic sparse dataset, plus one
end-to-end logistic gradient evaluation through each path, and reports
the speedup. The same comparison can be driven externally by setting
ADAPTQN_DISABLE_NUMBA=1 and re-running any workload.

Usage: python benchmarks/bench_kernels.py [--rows N] [--cols N] [--density D]
"""

import argparse
import time

import numpy as np

from adaptqn.kernels import (USING_NUMBA, _csr_matvec_numba, _csr_matvec_numpy,
                             _csr_rmatvec_numba, _csr_rmatvec_numpy,
                             _csr_row_sq_norms_numba, _csr_row_sq_norms_numpy,
                             _csr_weighted_gram_numba, _csr_weighted_gram_numpy)


def build_csr(rng, n_rows, n_cols, density):
    nnz_per_row = max(1, int(density * n_cols))
    indptr = np.arange(0, (n_rows + 1) * nnz_per_row, nnz_per_row, dtype=np.int64)
    indices = np.empty(n_rows * nnz_per_row, dtype=np.int64)
    for i in range(n_rows):
        cols = np.sort(rng.choice(n_cols, size=nnz_per_row, replace=False))
        indices[i * nnz_per_row:(i + 1) * nnz_per_row] = cols
    values = rng.standard_normal(indices.shape[0])
    return indptr, indices, values


def best_of(fn, repeats=7):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--rows", type=int, default=200_000)
    parser.add_argument("--cols", type=int, default=300)
    parser.add_argument("--density", type=float, default=0.1)
    args = parser.parse_args()

    if not USING_NUMBA:
        print("numba unavailable or disabled; nothing to compare against")
        return

    rng = np.random.default_rng(0)
    indptr, indices, values = build_csr(rng, args.rows, args.cols, args.density)
    x = rng.standard_normal(args.cols)
    coef = rng.standard_normal(args.rows)
    weights = rng.uniform(0.0, 0.25, args.rows)
    print(f"CSR: {args.rows} rows x {args.cols} cols, nnz = {values.size:,}\n")

    cases = [
        ("matvec", lambda: _csr_matvec_numba(indptr, indices, values, x),
         lambda: _csr_matvec_numpy(indptr, indices, values, x)),
        ("rmatvec", lambda: _csr_rmatvec_numba(indptr, indices, values, coef, args.cols),
         lambda: _csr_rmatvec_numpy(indptr, indices, values, coef, args.cols)),
        ("row_sq_norms", lambda: _csr_row_sq_norms_numba(indptr, values),
         lambda: _csr_row_sq_norms_numpy(indptr, values)),
        ("weighted_gram", lambda: _csr_weighted_gram_numba(indptr, indices, values,
                                                           weights, args.cols),
         lambda: _csr_weighted_gram_numpy(indptr, indices, values, weights, args.cols)),
    ]

    print(f"{'kernel':<14} {'numba':>10} {'numpy':>10} {'speedup':>8} {'max diff':>10}")
    for name, numba_fn, numpy_fn in cases:
        numba_fn()  # compile before timing
        t_nb, out_nb = best_of(numba_fn)
        t_np, out_np = best_of(numpy_fn)
        diff = float(np.max(np.abs(out_nb - out_np)))
        print(f"{name:<14} {t_nb * 1e3:>8.2f}ms {t_np * 1e3:>8.2f}ms "
              f"{t_np / t_nb:>7.2f}x {diff:>10.2e}")

    # end-to-end: one logistic gradient through each kernel path
    from adaptqn.data_io import SparseDataset
    from adaptqn.oracles import LogisticObjective
    import adaptqn.oracles as oracles_mod

    labels = np.where(rng.random(args.rows) < 0.5, 1.0, -1.0)
    ds = SparseDataset(indptr=indptr, indices=indices, values=values,
                       labels=labels, n=args.cols)
    obj = LogisticObjective(ds)
    w = rng.standard_normal(args.cols) * 0.1

    saved = (oracles_mod.csr_matvec, oracles_mod.csr_rmatvec)
    obj.gradient(w)
    t_nb, g_nb = best_of(lambda: obj.gradient(w))
    oracles_mod.csr_matvec = _csr_matvec_numpy
    oracles_mod.csr_rmatvec = _csr_rmatvec_numpy
    try:
        t_np, g_np = best_of(lambda: obj.gradient(w))
    finally:
        oracles_mod.csr_matvec, oracles_mod.csr_rmatvec = saved
    diff = float(np.max(np.abs(g_nb - g_np)))
    print(f"{'logistic grad':<14} {t_nb * 1e3:>8.2f}ms {t_np * 1e3:>8.2f}ms "
          f"{t_np / t_nb:>7.2f}x {diff:>10.2e}")


if __name__ == "__main__":
    main()
