"""LIBSVM-format parsing, dataset statistics and synthetic data generation."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DomainError, ParseError
from .kernels import csr_row_sq_norms

__all__ = [
    "SparseDataset",
    "parse_libsvm",
    "load_libsvm",
    "serialize_libsvm",
    "max_row_norm",
    "synth_logistic",
]


@dataclass(frozen=True)
class SparseDataset:
    """Row-sparse feature matrix with +-1 labels.

    Compressed sparse rows: ``indptr`` has length N+1; row i owns
    ``indices[indptr[i]:indptr[i+1]]`` (0-based, strictly increasing)
    and the matching ``values``. All stored indices are < n.
    """

    indptr: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    labels: np.ndarray
    n: int

    @property
    def N(self) -> int:
        return self.indptr.shape[0] - 1

    def to_dense(self) -> np.ndarray:
        """Materialize the feature matrix (tests and small problems only)."""
        X = np.zeros((self.N, self.n))
        for i in range(self.N):
            sl = slice(self.indptr[i], self.indptr[i + 1])
            X[i, self.indices[sl]] = self.values[sl]
        return X

    @staticmethod
    def from_dense(X: np.ndarray, labels: np.ndarray) -> "SparseDataset":
        N, n = X.shape
        indptr = np.arange(0, (N + 1) * n, n, dtype=np.int64)
        indices = np.tile(np.arange(n, dtype=np.int64), N)
        return SparseDataset(indptr=indptr, indices=indices,
                             values=X.ravel().astype(float).copy(),
                             labels=np.asarray(labels, dtype=float).copy(), n=n)


def parse_libsvm(source: Iterable[str] | str, n_features: int | None = None) -> SparseDataset:
    """Parse LIBSVM text: one ``<label> <idx>:<val> ...`` record per line.

    Indices are 1-based and must be strictly increasing within a row;
    they are stored 0-based. ``#`` starts a comment, blank lines are
    skipped. Labels +1/-1 are kept; 0/1 files are mapped 0 -> -1,
    1 -> +1; anything else is a parse error. The feature count is the
    largest index seen unless ``n_features`` overrides it.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    indptr = [0]
    indices: list[int] = []
    values: list[float] = []
    labels: list[float] = []
    max_index = 0
    for lineno, raw in enumerate(source, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise ParseError(f"non-numeric label {tokens[0]!r}", lineno) from None
        if label not in (-1.0, 0.0, 1.0):
            raise ParseError(f"label must be -1, 0 or +1, got {tokens[0]!r}", lineno)
        labels.append(-1.0 if label <= 0.0 else 1.0)
        prev = 0
        for tok in tokens[1:]:
            idx_s, _, val_s = tok.partition(":")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise ParseError(f"malformed feature token {tok!r}", lineno) from None
            if idx < 1:
                raise ParseError(f"index must be >= 1, got {idx}", lineno)
            if idx <= prev:
                raise ParseError(f"indices must be strictly increasing, got {idx} after {prev}", lineno)
            prev = idx
            indices.append(idx - 1)
            values.append(val)
        max_index = max(max_index, prev)
        indptr.append(len(indices))
    n = max_index if n_features is None else n_features
    if n_features is not None and max_index > n_features:
        raise ParseError(f"index {max_index} exceeds declared feature count {n_features}")
    return SparseDataset(indptr=np.asarray(indptr, dtype=np.int64),
                         indices=np.asarray(indices, dtype=np.int64),
                         values=np.asarray(values, dtype=float),
                         labels=np.asarray(labels, dtype=float),
                         n=n)


def load_libsvm(path, n_features: int | None = None) -> SparseDataset:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_libsvm(fh, n_features=n_features)


def serialize_libsvm(ds: SparseDataset) -> str:
    """Emit the dataset in the same text format (round-trip precision)."""
    lines = []
    for i in range(ds.N):
        parts = ["+1" if ds.labels[i] > 0 else "-1"]
        for j in range(ds.indptr[i], ds.indptr[i + 1]):
            parts.append(f"{ds.indices[j] + 1}:{ds.values[j]:.17g}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def max_row_norm(ds: SparseDataset) -> float:
    """Largest Euclidean row norm, B = max_i ||x_i||."""
    if ds.N < 1:
        raise DomainError("empty dataset")
    return float(np.sqrt(np.max(csr_row_sq_norms(ds.indptr, ds.values))))


def synth_logistic(N: int, n: int, seed: int, separation: float = 1.5,
                   feature_decay: float = 0.6, max_norm: float = 2.0) -> SparseDataset:
    """Synthetic binary classification data for desk-scale runs.

    Features are dense Gaussians with geometrically decaying per-column
    scales (``feature_decay``), then rescaled so the largest row norm
    is ``max_norm`` -- mimicking pre-scaled benchmark datasets. Labels
    follow a noisy linear rule: sign(separation * margin + noise) with
    unit Gaussian noise, so ``separation`` is the signal-to-noise ratio
    of the labelling (0 gives pure coin flips).
    """
    if N < 1 or n < 1:
        raise DomainError("N and n must be positive")
    rng = np.random.default_rng(seed)
    scales = feature_decay ** np.arange(n)
    X = rng.standard_normal((N, n)) * scales
    w_true = rng.standard_normal(n)
    w_true /= np.linalg.norm(w_true)
    margin = X @ w_true
    sd = np.std(margin)
    if sd > 0:
        margin = margin / sd
    noise = rng.standard_normal(N)
    y = np.where(separation * margin + noise >= 0, 1.0, -1.0)
    X *= max_norm / np.max(np.linalg.norm(X, axis=1))
    return SparseDataset.from_dense(X, y)
