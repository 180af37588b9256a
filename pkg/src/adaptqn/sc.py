"""Scalar kernel for self-concordant step-size analysis.

Everything here is a pure function of a handful of scalars: the
decrease function ``omega``, the curvature-adaptive step size, and the
four model bounds that a standard self-concordant function satisfies
along a ray. These are the building blocks for both the step-size rules
and the property tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "AdaptiveQuantities",
    "ScBoundInputs",
    "omega",
    "adaptive_step",
    "adaptive_quantities",
    "sc_upper_f",
    "sc_lower_f",
    "sc_lower_gd",
    "sc_upper_gd",
    "standard_scale_factor",
]

# Below this threshold the series expansion of z - log1p(z) is exact to
# double precision (next term is O(z^6), relatively O(z^4) ~ 1e-16).
_SERIES_CUTOFF = 1e-4


def omega(z):
    """z - log(1 + z), the per-step decrease guarantee.

    Accepts a scalar or ndarray, z >= 0. Evaluated by series for tiny z
    because the direct form loses all significant digits as z -> 0.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("omega requires z >= 0")
    # z^2/2 - z^3/3 + z^4/4 - z^5/5
    series = z * z * (0.5 - z * (1.0 / 3.0 - z * (0.25 - 0.2 * z)))
    direct = z - np.log1p(z)
    out = np.where(z < _SERIES_CUTOFF, series, direct)
    return float(out) if out.ndim == 0 else out


def _omega_neg(u):
    """-u - log(1 - u) = u^2/2 + u^3/3 + ..., for 0 <= u < 1."""
    u = np.asarray(u, dtype=float)
    series = u * u * (0.5 + u * (1.0 / 3.0 + u * (0.25 + 0.2 * u)))
    direct = -u - np.log1p(-u)
    out = np.where(u < _SERIES_CUTOFF, series, direct)
    return float(out) if out.ndim == 0 else out


def adaptive_step(rho, delta):
    """Curvature-adaptive step size rho / ((rho + delta) * delta).

    Always strictly below 1/delta, so steps stay inside the domain of
    the upper model bound. Nonpositive rho or delta means the direction
    was not a descent direction or curvature degenerated; that is
    raised rather than clamped so drivers can stop with a diagnostic.
    """
    if rho <= 0.0:
        raise DomainError(f"adaptive_step requires rho > 0, got {rho}")
    if delta <= 0.0:
        raise DomainError(f"adaptive_step requires delta > 0, got {delta}")
    return rho / ((rho + delta) * delta)


@dataclass(frozen=True)
class AdaptiveQuantities:
    """Per-iteration scalars of the adaptive method.

    rho = g'Hg = -g'd, delta = ||d||_x, eta = rho/delta, and the step
    t = rho/((rho+delta)*delta) = (eta/delta)/(1+eta).
    """

    rho: float
    delta: float
    eta: float
    step: float


def adaptive_quantities(rho, delta) -> AdaptiveQuantities:
    """Bundle (rho, delta) with the derived eta and step size."""
    t = adaptive_step(rho, delta)
    return AdaptiveQuantities(rho=float(rho), delta=float(delta),
                              eta=float(rho) / float(delta), step=t)


@dataclass(frozen=True)
class ScBoundInputs:
    """Inputs shared by the four ray bounds: f0 = f(x), gd = g(x)'d,
    delta = ||d||_x, and the step length t."""

    f0: float
    gd: float
    delta: float
    t: float


def sc_upper_f(b: ScBoundInputs) -> float:
    """Upper model bound f(x) + t g'd - dt - log(1 - dt), dt = delta*t < 1."""
    u = b.delta * b.t
    if u >= 1.0:
        raise DomainError(f"upper bound requires t*delta < 1, got {u}")
    if b.t < 0:
        raise DomainError("negative step length")
    return b.f0 + b.t * b.gd + _omega_neg(u)


def sc_lower_f(b: ScBoundInputs) -> float:
    """Lower model bound f(x) + t g'd + dt - log(1 + dt), any t >= 0."""
    if b.t < 0:
        raise DomainError("negative step length")
    return b.f0 + b.t * b.gd + omega(b.delta * b.t)


def sc_lower_gd(gd0, delta, t) -> float:
    """Lower bound on g(x+td)'d: gd0 + delta^2 t / (1 + delta t)."""
    if t < 0:
        raise DomainError("negative step length")
    return gd0 + delta * delta * t / (1.0 + delta * t)


def sc_upper_gd(gd0, delta, t) -> float:
    """Upper bound on g(x+td)'d: gd0 + delta^2 t / (1 - delta t), dt < 1."""
    if t < 0:
        raise DomainError("negative step length")
    u = delta * t
    if u >= 1.0:
        raise DomainError(f"upper bound requires t*delta < 1, got {u}")
    return gd0 + delta * delta * t / (1.0 - u)


def standard_scale_factor(kappa) -> float:
    """Multiplier kappa^2/4 that renders a kappa-self-concordant f standard."""
    if kappa <= 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    return kappa * kappa / 4.0
