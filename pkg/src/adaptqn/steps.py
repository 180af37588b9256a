"""Step-size rules: curvature-adaptive, constant, Armijo-Wolfe inexact
line search, and hybrid candidate testing with adaptive fallback."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import CurvatureError, DomainError, LineSearchError
from .oracles import ObjectiveOracle
from .sc import adaptive_step

__all__ = [
    "Adaptive",
    "Constant",
    "ArmijoWolfe",
    "Hybrid",
    "StepRule",
    "StepOutcome",
    "armijo_check",
    "wolfe_check",
    "adaptive_step_size",
    "armijo_wolfe_search",
    "hybrid_select",
    "choose_step",
]

DEFAULT_HYBRID_CANDIDATES = (1.0, 0.25, 0.0625)


@dataclass(frozen=True)
class Adaptive:
    pass


@dataclass(frozen=True)
class Constant:
    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("constant step must be positive")


@dataclass(frozen=True)
class ArmijoWolfe:
    c1: float = 0.1
    c2: float = 0.75
    max_evals: int = 25

    def __post_init__(self):
        if not 0.0 < self.c1 <= 0.5:
            raise ValueError("c1 must lie in (0, 1/2]")
        if not self.c1 < self.c2 < 1.0:
            raise ValueError("c2 must lie in (c1, 1)")
        if self.max_evals < 2:
            raise ValueError("need at least two evaluations")


@dataclass(frozen=True)
class Hybrid:
    candidates: tuple[float, ...] = DEFAULT_HYBRID_CANDIDATES
    c1: float = 0.1


StepRule = Union[Adaptive, Constant, ArmijoWolfe, Hybrid]


@dataclass
class StepOutcome:
    """Chosen step plus the oracle work spent choosing it.

    ``f_new``/``g_new`` carry evaluations already made at x + t d so the
    driver never re-pays for them; they are None when the rule did not
    evaluate there.
    """

    t: float
    kind: str  # adaptive | constant | line_search | hybrid_candidate | hybrid_fallback
    evals_f: int = 0
    evals_g: int = 0
    evals_hv: int = 0
    delta: float | None = None
    eta: float | None = None
    warning: bool = False
    f_new: float | None = None
    g_new: np.ndarray | None = field(default=None, repr=False)


def armijo_check(f0: float, f1: float, t: float, gd: float, c1: float) -> bool:
    """Sufficient decrease: f1 <= f0 + c1 t g'd (inclusive boundary).

    Assumes t > 0 and gd < 0.
    """
    return f1 <= f0 + c1 * t * gd


def wolfe_check(gd1: float, gd0: float, c2: float) -> bool:
    """Curvature condition: g(x+td)'d >= c2 g(x)'d. Assumes gd0 < 0."""
    return gd1 >= c2 * gd0


def adaptive_step_size(oracle: ObjectiveOracle, x: np.ndarray, d: np.ndarray,
                       rho: float) -> tuple[float, float, float]:
    """(t, delta, eta) for the curvature-adaptive rule.

    Costs exactly one Hessian-vector product: delta^2 = d'G(x)d.
    """
    Gd = oracle.hess_vec(x, d)
    d_gd = float(d @ Gd)
    if d_gd <= 0.0:
        raise CurvatureError(f"d'Gd = {d_gd} <= 0; convexity violated numerically")
    delta = float(np.sqrt(d_gd))
    t = adaptive_step(rho, delta)
    return t, delta, rho / delta


def _quad_interp(f0: float, gd: float, t: float, ft: float) -> float:
    """Minimizer of the quadratic through (0, f0) with slope gd and (t, ft)."""
    denom = 2.0 * (ft - f0 - gd * t)
    if denom <= 0.0 or not np.isfinite(denom):
        return np.nan
    return -gd * t * t / denom


def armijo_wolfe_search(oracle: ObjectiveOracle, x: np.ndarray, d: np.ndarray,
                        f0: float, gd: float, params: ArmijoWolfe) -> StepOutcome:
    """Find t satisfying both Armijo and Wolfe conditions.

    Starts at t = 1. Armijo failures backtrack by safeguarded quadratic
    interpolation (clamped to [0.1 t, 0.9 t]); Armijo-but-not-Wolfe
    points double t until an upper bracket appears, after which the
    bracket is narrowed with the same interpolation safeguard. If the
    evaluation budget runs out, the best Armijo point found is returned
    with ``warning=True``; if there is none, raises LineSearchError.
    """
    if gd >= 0.0:
        raise DomainError(f"line search needs a descent direction, g'd = {gd}")
    c1, c2 = params.c1, params.c2
    evals_f = evals_g = 0
    t = 1.0
    lo = 0.0          # best Armijo-satisfying point so far (Wolfe failed there)
    f_lo, gd_lo = f0, gd
    hi = None         # smallest Armijo-failing step
    f_hi = None
    best = None       # (t, f, g) with the lowest Armijo-satisfying f

    def _bail() -> StepOutcome:
        if best is not None:
            tb, fb, gb = best
            return StepOutcome(t=tb, kind="line_search", evals_f=evals_f,
                               evals_g=evals_g, warning=True, f_new=fb, g_new=gb)
        raise LineSearchError(f"no Armijo step within {params.max_evals} evaluations")

    while True:
        if evals_f + evals_g >= params.max_evals:
            return _bail()
        xt = x + t * d
        ft = float(oracle.value(xt))
        evals_f += 1
        if armijo_check(f0, ft, t, gd, c1):
            if evals_f + evals_g >= params.max_evals:
                if best is None or ft < best[1]:
                    best = (t, ft, None)
                return _bail()
            gt = oracle.gradient(xt)
            evals_g += 1
            gdt = float(gt @ d)
            if wolfe_check(gdt, gd, c2):
                return StepOutcome(t=t, kind="line_search", evals_f=evals_f,
                                   evals_g=evals_g, f_new=ft, g_new=gt)
            if best is None or ft < best[1]:
                best = (t, ft, gt)
            lo, f_lo, gd_lo = t, ft, gdt
            if hi is None:
                t = 2.0 * t
            else:
                t = _bracket_step(lo, f_lo, gd_lo, hi, f_hi)
        else:
            hi, f_hi = t, ft
            if lo == 0.0:
                cand = _quad_interp(f0, gd, t, ft)
                t = float(np.clip(cand, 0.1 * t, 0.9 * t)) if np.isfinite(cand) else 0.5 * t
            else:
                t = _bracket_step(lo, f_lo, gd_lo, hi, f_hi)


def _bracket_step(lo: float, f_lo: float, gd_lo: float, hi: float, f_hi: float) -> float:
    """Next trial inside (lo, hi): quadratic minimizer from the lo-end
    data, clamped to the middle 80% of the bracket (midpoint fallback)."""
    width = hi - lo
    cand = lo + _quad_interp(f_lo, gd_lo, width, f_hi)
    if not np.isfinite(cand):
        return lo + 0.5 * width
    return float(np.clip(cand, lo + 0.1 * width, hi - 0.1 * width))


def hybrid_select(oracle: ObjectiveOracle, x: np.ndarray, d: np.ndarray,
                  f0: float, gd: float, rho: float,
                  candidates=DEFAULT_HYBRID_CANDIDATES, c1: float = 0.1) -> StepOutcome:
    """Try the fixed candidates in order against Armijo; fall back to
    the adaptive step when none passes. One f evaluation per candidate;
    the Hessian-vector product is paid only on fallback."""
    if gd >= 0.0:
        raise DomainError(f"hybrid selection needs a descent direction, g'd = {gd}")
    evals_f = 0
    for cand in candidates:
        ft = float(oracle.value(x + cand * d))
        evals_f += 1
        if armijo_check(f0, ft, cand, gd, c1):
            return StepOutcome(t=cand, kind="hybrid_candidate",
                               evals_f=evals_f, f_new=ft)
    t, delta, eta = adaptive_step_size(oracle, x, d, rho)
    return StepOutcome(t=t, kind="hybrid_fallback", evals_f=evals_f,
                       evals_hv=1, delta=delta, eta=eta)


def choose_step(rule: StepRule, oracle: ObjectiveOracle, x: np.ndarray,
                d: np.ndarray, f0: float, g: np.ndarray, rho: float) -> StepOutcome:
    """Dispatch a step rule; the uniform entry point used by the driver."""
    if isinstance(rule, Adaptive):
        t, delta, eta = adaptive_step_size(oracle, x, d, rho)
        return StepOutcome(t=t, kind="adaptive", evals_hv=1, delta=delta, eta=eta)
    if isinstance(rule, Constant):
        return StepOutcome(t=rule.alpha, kind="constant")
    if isinstance(rule, ArmijoWolfe):
        return armijo_wolfe_search(oracle, x, d, f0, float(g @ d), rule)
    if isinstance(rule, Hybrid):
        return hybrid_select(oracle, x, d, f0, float(g @ d), rho,
                             rule.candidates, rule.c1)
    raise TypeError(f"unknown step rule {rule!r}")
