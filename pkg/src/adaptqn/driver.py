"""Deterministic optimization loop over DirectionRule x StepRule, with
per-iteration tracing and post-run step-size/convergence diagnostics."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .directions import (BfgsDense, DirectionRule, Newton, compute_direction,
                         ingest_pair, new_state)
from .errors import OptimError, UnsupportedOperationError
from .oracles import ObjectiveOracle
from .steps import Constant, StepRule, choose_step

__all__ = [
    "ReferenceOptimum",
    "RunConfig",
    "IterationRecord",
    "Termination",
    "Trace",
    "run",
    "superlinear_report",
    "SuperlinearReport",
    "t_settle_index",
]

# Iterate-error ratios below this (relative) distance from the optimum
# are rounding noise and excluded from superlinear diagnostics.
_MEASURABLE_RTOL = 1e-12

# Threshold and consistency level for "the step size has settled at 1":
# |t - 1| < 0.1 must hold for at least 80% of the remaining iterations.
T_NEAR_ONE_TOL = 0.1
T_NEAR_ONE_FRACTION = 0.8


@dataclass(frozen=True)
class ReferenceOptimum:
    x: np.ndarray
    f: float


@dataclass(frozen=True)
class RunConfig:
    direction: DirectionRule
    step: StepRule
    grad_tol: float = 1e-7
    max_iters: int = 1000
    max_seconds: float = math.inf
    x0: Optional[np.ndarray] = None
    reference: Optional[ReferenceOptimum] = None

    def __post_init__(self):
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")


@dataclass(frozen=True)
class IterationRecord:
    k: int
    f: float
    gnorm: float
    t: float                 # NaN on the terminal record
    eta: float               # NaN when the rule did not compute it
    step_kind: str
    cum_evals_f: int
    cum_evals_g: int
    cum_evals_hv: int
    elapsed: float
    log_gap: Optional[float] = None
    err_ratio: Optional[float] = None


@dataclass(frozen=True)
class Termination:
    kind: str        # grad_tol | max_iters | time_budget | numerical_error
    detail: str = ""


@dataclass
class Trace:
    # config is a RunConfig, or a StochasticConfig for stochastic runs;
    # both expose .step and .reference, which is all diagnostics need.
    config: object
    records: list[IterationRecord] = field(default_factory=list)
    termination: Termination = Termination("max_iters")
    final_x: Optional[np.ndarray] = None
    skipped_pairs: int = 0

    @property
    def iterations(self) -> int:
        """Number of steps taken (terminal record excluded)."""
        return sum(1 for r in self.records if r.step_kind != "terminal")

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    def step_sizes(self) -> np.ndarray:
        return np.array([r.t for r in self.records if r.step_kind != "terminal"])


class _CountingOracle:
    """Pass-through oracle that counts value/gradient/hess_vec calls."""

    def __init__(self, inner: ObjectiveOracle):
        self.inner = inner
        self.evals_f = 0
        self.evals_g = 0
        self.evals_hv = 0

    @property
    def dim(self):
        return self.inner.dim

    @property
    def has_hessian(self):
        return self.inner.has_hessian

    def value(self, x):
        self.evals_f += 1
        return self.inner.value(x)

    def gradient(self, x):
        self.evals_g += 1
        return self.inner.gradient(x)

    def hess_vec(self, x, d):
        self.evals_hv += 1
        return self.inner.hess_vec(x, d)

    def dense_hessian(self, x):
        return self.inner.dense_hessian(x)


def _log_gap(f: float, ref: Optional[ReferenceOptimum]) -> Optional[float]:
    if ref is None:
        return None
    gap = f - ref.f
    return math.log10(gap) if gap > 0 else None


def run(config: RunConfig, oracle: ObjectiveOracle) -> Trace:
    """Iterate x <- x + t d per the configured rules until the gradient
    threshold, iteration cap, time cap, or a numerical error. Errors are
    reported through ``Trace.termination``, never raised."""
    n = oracle.dim
    x = np.zeros(n) if config.x0 is None else np.asarray(config.x0, dtype=float).copy()
    if x.shape != (n,):
        raise ValueError(f"x0 has shape {x.shape}, oracle dimension is {n}")
    if isinstance(config.direction, Newton) and not oracle.has_hessian:
        raise UnsupportedOperationError("Newton direction requires has_hessian")
    if isinstance(config.direction, BfgsDense) and n > config.direction.max_dense_dim:
        raise ValueError(
            f"dense BFGS refused for n = {n} > {config.direction.max_dense_dim}; "
            "use BfgsTwoLoopUnlimited or LBfgs")

    co = _CountingOracle(oracle)
    ref = config.reference
    state = new_state(config.direction, n)
    trace = Trace(config=config)
    started = time.perf_counter()
    monotone = not isinstance(config.step, Constant)

    f = co.value(x)
    g = co.gradient(x)

    def _terminal(k: int, fv: float, gn: float, term: Termination):
        trace.records.append(IterationRecord(
            k=k, f=fv, gnorm=gn, t=math.nan, eta=math.nan, step_kind="terminal",
            cum_evals_f=co.evals_f, cum_evals_g=co.evals_g, cum_evals_hv=co.evals_hv,
            elapsed=time.perf_counter() - started, log_gap=_log_gap(fv, ref)))
        trace.termination = term
        trace.final_x = x.copy()
        trace.skipped_pairs = state.skipped

    for k in range(config.max_iters + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm < config.grad_tol:
            # terminal point: f is re-evaluated there once, and counted
            _terminal(k, co.value(x), gnorm, Termination("grad_tol"))
            return trace
        if k >= config.max_iters:
            _terminal(k, f, gnorm, Termination("max_iters"))
            return trace
        if time.perf_counter() - started > config.max_seconds:
            _terminal(k, f, gnorm, Termination("time_budget"))
            return trace

        try:
            d, rho = compute_direction(config.direction, state, co, x, g)
            outcome = choose_step(config.step, co, x, d, f, g, rho)
        except OptimError as exc:
            _terminal(k, f, gnorm, Termination("numerical_error", str(exc)))
            return trace

        x_new = x + outcome.t * d
        if np.array_equal(x_new, x):
            # t*d fell below the resolution of x; the loop is deterministic,
            # so no future iteration can make progress either
            _terminal(k, f, gnorm, Termination(
                "numerical_error",
                f"step stalled below floating-point resolution at k={k} "
                f"(t={outcome.t:.3e})"))
            return trace
        f_new = outcome.f_new if outcome.f_new is not None else co.value(x_new)
        g_new = outcome.g_new if outcome.g_new is not None else co.gradient(x_new)

        if monotone and f_new > f + 1e-10 * (1.0 + abs(f)):
            _terminal(k, f, gnorm, Termination(
                "numerical_error", f"monotone decrease violated at k={k}: {f} -> {f_new}"))
            return trace

        err_ratio = None
        if ref is not None:
            den = float(np.linalg.norm(x - ref.x))
            if den > _MEASURABLE_RTOL * (1.0 + float(np.linalg.norm(ref.x))):
                err_ratio = float(np.linalg.norm(x_new - ref.x)) / den
        trace.records.append(IterationRecord(
            k=k, f=f, gnorm=gnorm, t=outcome.t,
            eta=outcome.eta if outcome.eta is not None else math.nan,
            step_kind=outcome.kind, cum_evals_f=co.evals_f, cum_evals_g=co.evals_g,
            cum_evals_hv=co.evals_hv, elapsed=time.perf_counter() - started,
            log_gap=_log_gap(f, ref), err_ratio=err_ratio))

        ingest_pair(state, x_new - x, g_new - g)
        x, f, g = x_new, f_new, g_new

    return trace  # unreachable


def t_settle_index(ts: Sequence[float]) -> Optional[int]:
    """Smallest index k0 from which |t - 1| < 0.1 holds for at least 80%
    of the remaining step sizes; None when no such index exists."""
    ts = np.asarray(ts, dtype=float)
    if ts.size == 0:
        return None
    near = np.abs(ts - 1.0) < T_NEAR_ONE_TOL
    for k0 in range(ts.size):
        tail = near[k0:]
        if tail.mean() >= T_NEAR_ONE_FRACTION:
            return k0
    return None


@dataclass(frozen=True)
class SuperlinearReport:
    t_stats_applicable: bool
    settle_index: Optional[int]     # None when never settled or not applicable
    iterations: int
    tail_ratios: tuple[float, ...]  # last <= 5 measurable error ratios
    tail_below_half: bool           # all of the final 5 ratios < 0.5
    final_ratio: Optional[float]


def superlinear_report(trace: Trace) -> SuperlinearReport:
    """Step-size settling and iterate-error-ratio diagnostics.

    Requires a reference optimum on the trace config. Step statistics
    are marked not-applicable for constant step rules.
    """
    if trace.config.reference is None:
        raise UnsupportedOperationError("superlinear_report needs a reference optimum")
    applicable = not isinstance(trace.config.step, Constant)
    ts = trace.step_sizes()
    settle = t_settle_index(ts) if applicable else None
    ratios = [r.err_ratio for r in trace.records if r.err_ratio is not None]
    tail = tuple(ratios[-5:])
    below = len(tail) == 5 and all(r < 0.5 for r in tail)
    return SuperlinearReport(
        t_stats_applicable=applicable,
        settle_index=settle,
        iterations=trace.iterations,
        tail_ratios=tail,
        tail_below_half=below,
        final_ratio=ratios[-1] if ratios else None,
    )
