"""Objective oracles: regularized logistic loss, quadratics, and the
expected online least-squares objective with its closed-form minimizer."""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from .data_io import SparseDataset, max_row_norm
from .errors import DomainError, NumericalError, UnsupportedOperationError
from .kernels import csr_matvec, csr_rmatvec, csr_weighted_gram

__all__ = [
    "ObjectiveOracle",
    "LogisticObjective",
    "QuadraticObjective",
    "OnlineLsExpectedObjective",
    "logistic_sc_scale",
    "online_ls_minimizer",
]


def _sigmoid(z):
    ez = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + ez), ez / (1.0 + ez))


def _softplus(z):
    # log(1 + exp(z)) without overflow for large |z|
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


class ObjectiveOracle(ABC):
    """Deterministic objective exposing value, gradient and the Hessian
    action G(x)d; some oracles can also materialize the full Hessian.

    Oracles are immutable after construction and hold no mutable cache,
    so concurrent evaluation from multiple runs is safe.
    """

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @property
    def has_hessian(self) -> bool:
        return False

    @abstractmethod
    def value(self, x: np.ndarray) -> float: ...

    @abstractmethod
    def gradient(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def hess_vec(self, x: np.ndarray, d: np.ndarray) -> np.ndarray: ...

    def dense_hessian(self, x: np.ndarray) -> np.ndarray:
        raise UnsupportedOperationError(f"{type(self).__name__} has no dense Hessian")

    def _check(self, v: np.ndarray, name: str = "x") -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"{name} has shape {v.shape}, expected ({self.dim},)")
        return v


def logistic_sc_scale(data: SparseDataset) -> float:
    """B^2 N / 4 with B the largest feature-row norm; this multiple of
    the logistic loss is standard self-concordant."""
    B = max_row_norm(data)
    if B == 0.0:
        raise DomainError("all feature rows are zero; scale factor undefined")
    return B * B * data.N / 4.0


class LogisticObjective(ObjectiveOracle):
    """(sc_scale/N) * [sum_i log(1 + exp(-y_i x_i'w)) + ||w||^2/2].

    ``sc_scale=None`` (default) applies B^2 N/4 so the objective is
    standard self-concordant; pass ``sc_scale=1.0`` for the raw loss.
    The model has no intercept column. The Hessian weight
    sigma(z)(1-sigma(z)) is label-free since it is symmetric in sign.
    """

    def __init__(self, data: SparseDataset, sc_scale: float | None = None):
        if data.N < 1:
            raise DomainError("empty dataset")
        self.data = data
        self.sc_scale = logistic_sc_scale(data) if sc_scale is None else float(sc_scale)

    @property
    def dim(self) -> int:
        return self.data.n

    @property
    def has_hessian(self) -> bool:
        return True

    def _margins(self, w):
        return csr_matvec(self.data.indptr, self.data.indices, self.data.values, w)

    def value(self, x) -> float:
        w = self._check(x)
        z = self._margins(w)
        N = self.data.N
        loss = np.sum(_softplus(-self.data.labels * z)) / N
        return self.sc_scale * (loss + 0.5 * float(w @ w) / N)

    def gradient(self, x) -> np.ndarray:
        w = self._check(x)
        ds = self.data
        z = self._margins(w)
        coef = -ds.labels * _sigmoid(-ds.labels * z) / ds.N
        g = csr_rmatvec(ds.indptr, ds.indices, ds.values, coef, ds.n)
        return self.sc_scale * (g + w / ds.N)

    def hess_vec(self, x, d) -> np.ndarray:
        w = self._check(x)
        d = self._check(d, "d")
        ds = self.data
        s = _sigmoid(self._margins(w))
        u = csr_matvec(ds.indptr, ds.indices, ds.values, d)
        coef = s * (1.0 - s) * u / ds.N
        hv = csr_rmatvec(ds.indptr, ds.indices, ds.values, coef, ds.n)
        return self.sc_scale * (hv + d / ds.N)

    def dense_hessian(self, x) -> np.ndarray:
        w = self._check(x)
        ds = self.data
        s = _sigmoid(self._margins(w))
        weights = s * (1.0 - s) / ds.N
        G = csr_weighted_gram(ds.indptr, ds.indices, ds.values, weights, ds.n)
        G += np.eye(ds.n) / ds.N
        return self.sc_scale * G


class QuadraticObjective(ObjectiveOracle):
    """f(x) = x'Ax/2 + b'x with A symmetric positive definite."""

    def __init__(self, A: np.ndarray, b: np.ndarray):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or b.shape != (A.shape[0],):
            raise ValueError("A must be square and b conforming")
        self.A = A
        self.b = b

    @property
    def dim(self) -> int:
        return self.b.shape[0]

    @property
    def has_hessian(self) -> bool:
        return True

    def value(self, x) -> float:
        x = self._check(x)
        return 0.5 * float(x @ (self.A @ x)) + float(self.b @ x)

    def gradient(self, x) -> np.ndarray:
        x = self._check(x)
        return self.A @ x + self.b

    def hess_vec(self, x, d) -> np.ndarray:
        self._check(x)
        d = self._check(d, "d")
        return self.A @ d

    def dense_hessian(self, x) -> np.ndarray:
        self._check(x)
        return self.A.copy()

    def minimizer(self) -> tuple[np.ndarray, float]:
        """Exact optimum (solves Ax = -b) and its objective value."""
        xs = np.linalg.solve(self.A, -self.b)
        return xs, self.value(xs)


class OnlineLsExpectedObjective(ObjectiveOracle):
    """Population objective of the Gaussian linear model:

    F(w) = (beta - w)' Sigma (beta - w) + noise_var + lam ||w||^2 / 2.
    """

    def __init__(self, sigma: np.ndarray, beta: np.ndarray, lam: float,
                 noise_var: float = 1.0):
        sigma = np.asarray(sigma, dtype=float)
        beta = np.asarray(beta, dtype=float)
        if lam <= 0:
            raise DomainError("regularizer lam must be positive")
        if sigma.shape != (beta.shape[0], beta.shape[0]):
            raise ValueError("sigma must be p x p matching beta")
        self.sigma = sigma
        self.beta = beta
        self.lam = float(lam)
        self.noise_var = float(noise_var)

    @property
    def dim(self) -> int:
        return self.beta.shape[0]

    @property
    def has_hessian(self) -> bool:
        return True

    def value(self, x) -> float:
        w = self._check(x)
        r = self.beta - w
        return float(r @ (self.sigma @ r)) + self.noise_var + 0.5 * self.lam * float(w @ w)

    def gradient(self, x) -> np.ndarray:
        w = self._check(x)
        return -2.0 * (self.sigma @ (self.beta - w)) + self.lam * w

    def hess_vec(self, x, d) -> np.ndarray:
        self._check(x)
        d = self._check(d, "d")
        return 2.0 * (self.sigma @ d) + self.lam * d

    def dense_hessian(self, x) -> np.ndarray:
        self._check(x)
        return 2.0 * self.sigma + self.lam * np.eye(self.dim)


def online_ls_minimizer(obj: OnlineLsExpectedObjective) -> np.ndarray:
    """Closed-form minimizer: solves (2 Sigma + lam I) w = 2 Sigma beta."""
    A = 2.0 * obj.sigma + obj.lam * np.eye(obj.dim)
    rhs = 2.0 * (obj.sigma @ obj.beta)
    try:
        w = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"minimizer solve failed: {exc}") from exc
    return w
