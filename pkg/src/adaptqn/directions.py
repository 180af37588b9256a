"""Direction engines producing d = -Hg.

Four families: identity (gradient descent), exact inverse Hessian
(damped Newton), dense BFGS, and two-loop-recursion BFGS in unlimited-
and bounded-memory forms. State lives in :class:`InverseHessianState`,
owned by a single run.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Union

import numpy as np
import scipy.linalg

from .errors import CurvatureError, NumericalError, UnsupportedOperationError
from .oracles import ObjectiveOracle

__all__ = [
    "GradientDescent",
    "Newton",
    "BfgsDense",
    "BfgsTwoLoopUnlimited",
    "LBfgs",
    "DirectionRule",
    "InverseHessianState",
    "default_lbfgs_memory",
    "new_state",
    "compute_direction",
    "bfgs_update_dense",
    "two_loop_direction",
    "identity_scaling_factor",
    "ingest_pair",
]

# Relative floor under which a curvature pair is considered degenerate.
PAIR_REJECT_RTOL = 1e-12


@dataclass(frozen=True)
class GradientDescent:
    pass


@dataclass(frozen=True)
class Newton:
    pass


@dataclass(frozen=True)
class BfgsDense:
    identity_scaling: bool = False
    # Explicit H costs O(n^2) memory; above this the driver refuses and
    # suggests the two-loop form instead.
    max_dense_dim: int = 5000


@dataclass(frozen=True)
class BfgsTwoLoopUnlimited:
    identity_scaling: bool = False
    # "first": freeze h0 from the first accepted pair; "latest": refresh
    # from the newest pair every iteration.
    h0_refresh: str = "first"


@dataclass(frozen=True)
class LBfgs:
    memory: int
    identity_scaling: bool = False
    h0_refresh: str = "latest"

    def __post_init__(self):
        if self.memory < 1:
            raise ValueError("L-BFGS memory must be >= 1")


DirectionRule = Union[GradientDescent, Newton, BfgsDense, BfgsTwoLoopUnlimited, LBfgs]


def default_lbfgs_memory(n: int) -> int:
    """Standard choice min{floor(n/2), 20}, at least 1."""
    return max(1, min(n // 2, 20))


@dataclass
class InverseHessianState:
    """Mutable state behind a direction rule.

    Dense BFGS keeps the full matrix ``H``; the two-loop variants keep
    curvature pairs (s, y, s'y) with s'y > 0, plus the scale ``h0_scale``
    applied to the implicit initial matrix.
    """

    rule: DirectionRule
    H: np.ndarray | None = None
    pairs: Deque[tuple[np.ndarray, np.ndarray, float]] = field(default_factory=deque)
    h0_scale: float = 1.0
    first_update_done: bool = False
    skipped: int = 0


def new_state(rule: DirectionRule, n: int) -> InverseHessianState:
    state = InverseHessianState(rule=rule)
    if isinstance(rule, BfgsDense):
        state.H = np.eye(n)
    elif isinstance(rule, LBfgs):
        state.pairs = deque(maxlen=rule.memory)
    return state


def identity_scaling_factor(s: np.ndarray, y: np.ndarray) -> float:
    """Initial-matrix scale s'y / y'y; lies between the extreme
    eigenvalues of the inverse average Hessian along the step."""
    yy = float(y @ y)
    sy = float(s @ y)
    if yy <= 0.0:
        raise CurvatureError("identity scaling undefined for y = 0")
    if sy <= 0.0:
        raise CurvatureError(f"identity scaling requires s'y > 0, got {sy}")
    return sy / yy


def bfgs_update_dense(H: np.ndarray, s: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Inverse-Hessian BFGS update enforcing the secant equation H+ y = s.

    Expanded form of ss'/y's + (I - sy'/y's) H (I - ys'/y's); the result
    is re-symmetrized to keep roundoff from accumulating.
    """
    sy = float(s @ y)
    if sy <= 0.0:
        raise CurvatureError(f"BFGS update requires s'y > 0, got {sy}")
    Hy = H @ y
    coeff = (1.0 + float(y @ Hy) / sy) / sy
    Hp = H - (np.outer(s, Hy) + np.outer(Hy, s)) / sy + coeff * np.outer(s, s)
    return 0.5 * (Hp + Hp.T)


def two_loop_direction(pairs, h0_scale: float, g: np.ndarray) -> np.ndarray:
    """d = -Hg with H the BFGS matrix built from h0_scale*I and the
    stored pairs (applied oldest first), evaluated implicitly."""
    q = g.copy()
    alphas = []
    for s, y, sy in reversed(pairs):
        a = float(s @ q) / sy
        q -= a * y
        alphas.append(a)
    r = h0_scale * q
    for (s, y, sy), a in zip(pairs, reversed(alphas)):
        b = float(y @ r) / sy
        r += (a - b) * s
    return -r


def compute_direction(rule: DirectionRule, state: InverseHessianState,
                      oracle: ObjectiveOracle, x: np.ndarray,
                      g: np.ndarray) -> tuple[np.ndarray, float]:
    """Direction d = -Hg and rho = -g'd for the rule's current H."""
    if isinstance(rule, GradientDescent):
        d = -g
    elif isinstance(rule, Newton):
        if not oracle.has_hessian:
            raise UnsupportedOperationError("Newton rule needs a dense Hessian")
        G = oracle.dense_hessian(x)
        try:
            cf = scipy.linalg.cho_factor(G, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise NumericalError(f"Hessian factorization failed: {exc}") from exc
        d = scipy.linalg.cho_solve(cf, -g, check_finite=False)
    elif isinstance(rule, BfgsDense):
        d = -(state.H @ g)
    elif isinstance(rule, (BfgsTwoLoopUnlimited, LBfgs)):
        d = two_loop_direction(state.pairs, state.h0_scale, g)
    else:
        raise TypeError(f"unknown direction rule {rule!r}")
    rho = -float(g @ d)
    if rho <= 0.0:
        raise CurvatureError(f"rho = -g'd = {rho} <= 0; positive definiteness lost")
    return d, rho


def ingest_pair(state: InverseHessianState, s: np.ndarray, y: np.ndarray) -> bool:
    """Feed the step pair (s, y) into the state; returns False (and
    bumps the skip counter) when s'y fails the positivity guard."""
    rule = state.rule
    if isinstance(rule, (GradientDescent, Newton)):
        return False
    sy = float(s @ y)
    if sy <= PAIR_REJECT_RTOL * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
        state.skipped += 1
        return False
    if isinstance(rule, BfgsDense):
        if rule.identity_scaling and not state.first_update_done:
            state.H = identity_scaling_factor(s, y) * np.eye(s.shape[0])
        state.H = bfgs_update_dense(state.H, s, y)
    else:
        state.pairs.append((s.copy(), y.copy(), sy))
        if rule.identity_scaling:
            if rule.h0_refresh == "latest" or not state.first_update_done:
                state.h0_scale = identity_scaling_factor(s, y)
    state.first_update_done = True
    return True
