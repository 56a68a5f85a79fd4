"""Performance metrics over SINR distributions.

Every metric has a definitional quadrature route. For the form-A i.i.d. case,
closed forms exist: ABEP through the upper incomplete gamma function and
average SINR through the Tricomi function. Any variant can also be assembled
term by term from its exponential-rational density expansion with the T-solvers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .dist import ExpTerms, FormAIID, SinrDistribution
from .specfun import t1_solve, t3_solve, tricomi_u, upper_incomplete_gamma_scaled

QUAD_EPSABS = 1e-9
QUAD_EPSREL = 1e-11
TAIL_SF = 1e-15


@dataclass(frozen=True)
class ModulationParams:
    """Exponential-form conditional bit error probability ``A * exp(-B * gamma)``."""

    A: float
    B: float

    def __post_init__(self):
        if not 0 < self.A <= 1:
            raise ValueError(f"A must lie in (0, 1], got {self.A}")
        if not self.B > 0:
            raise ValueError(f"B must be positive, got {self.B}")


@dataclass(frozen=True)
class CapacityParams:
    """Hop count ``NH`` dividing the capacity, and the quadrature absolute tolerance."""

    NH: int = 1
    tol: float = QUAD_EPSABS

    def __post_init__(self):
        if self.NH < 1 or int(self.NH) != self.NH:
            raise ValueError(f"NH must be a positive integer, got {self.NH}")


MODULATIONS = {
    "dbpsk": ModulationParams(0.5, 1.0),
    "ncfsk": ModulationParams(0.5, 0.5),
    "bpsk-chernoff": ModulationParams(0.5, 1.0),
}


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def _upper_limit(d: SinrDistribution) -> float:
    hi = 1.0
    while float(d.sf(hi)) > TAIL_SF:
        hi *= 2.0
    return hi


def _breakpoints(d: SinrDistribution) -> list[float]:
    hi = _upper_limit(d)
    pts = {0.0, hi}
    for q in (1e-6, 1e-3, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999, 1 - 1e-6, 1 - 1e-10):
        g = d.ppf(q)
        if 0 < g < hi:
            pts.add(g)
    # the tail beyond the last quantile can span decades; split it geometrically
    g = max(p for p in pts if p < hi)
    while g > 0 and g * 4.0 < hi:
        g *= 4.0
        pts.add(g)
    return sorted(pts)


def _integrate(d, h, pts, epsabs):
    total = 0.0
    err = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        val, e = integrate.quad(
            lambda g: h(g) * float(d.pdf(g)), lo, hi, epsabs=epsabs / len(pts), epsrel=QUAD_EPSREL, limit=200
        )
        total += val
        err += e
    return total, err


def expect(d: SinrDistribution, h, tol: float = QUAD_EPSABS) -> float:
    """E[h(gamma)] = integral of h * pdf over [0, gamma_max] with a negligible tail.

    ``tol`` is an absolute target; results smaller than one are refined to the
    same tolerance relative to their magnitude.
    """
    pts = _breakpoints(d)
    total, err = _integrate(d, h, pts, tol)
    if 0 < abs(total) < 1:
        tol = tol * abs(total)
        total, err = _integrate(d, h, pts, tol)
    if err > 10 * max(tol, QUAD_EPSREL * abs(total)):
        raise QuadratureError(f"quadrature error estimate {err:.3g} exceeds tolerance {tol:.3g}")
    return total


# ---------------------------------------------------------------------------
# Term-wise assembly through the T-solvers
# ---------------------------------------------------------------------------


def pdf_terms(d: SinrDistribution) -> ExpTerms:
    return d.survival_terms().derivative_negated()


def _t1_term(c, poles, B):
    if not poles:
        return 1.0 / (B + c)
    return t1_solve(poles, c, B)


def _t3_term(c, poles, D):
    if not poles:
        return math.factorial(D) / c ** (D + 1)
    return t3_solve(poles, c, D)


def _assemble(d, kernel) -> float:
    return math.fsum(v * kernel(c, poles) for (c, poles), v in pdf_terms(d).terms.items())


# ---------------------------------------------------------------------------
# Closed forms for form A, i.i.d.
# ---------------------------------------------------------------------------


def _log_k(n: int, p: float) -> float:
    """log of integral_0^inf exp(-p u) (1+u)^(-n) du = exp(p) p^(n-1) Gamma(1-n, p)."""
    return (n - 1) * math.log(p) + math.log(upper_incomplete_gamma_scaled(1 - n, p))


def abep_form_a_iid(d: FormAIID, m: ModulationParams) -> float:
    X, Y, Z = d.X, d.Y, d.Z
    if X == 0:
        return m.A / (1.0 + m.B * Y)
    p = (m.B * Y + 1.0) / Z
    k0 = math.exp(_log_k(X, p))
    k1 = math.exp(_log_k(X + 1, p))
    return m.A * (k0 + X * Z * k1) / Z


def mean_sinr_form_a_iid(d: FormAIID) -> float:
    X, Y, Z = d.X, d.Y, d.Z
    if X == 0:
        return Y
    z = 1.0 / Z
    return Y / Z**2 * (tricomi_u(2.0, 3.0 - X, z) + X * Z * tricomi_u(2.0, 2.0 - X, z))


# ---------------------------------------------------------------------------
# Public metrics
# ---------------------------------------------------------------------------


def _check_method(method, allowed):
    if method not in allowed:
        raise ValueError(f"method must be one of {allowed}, got {method!r}")


def abep(d: SinrDistribution, m: ModulationParams, method: str = "auto") -> float:
    """Average bit error probability A * E[exp(-B gamma)]."""
    _check_method(method, ("auto", "closed", "quad", "terms"))
    if method == "auto":
        method = "closed" if isinstance(d, FormAIID) else "quad"
    if method == "closed":
        if not isinstance(d, FormAIID):
            raise ValueError("closed-form ABEP is available for FormAIID only")
        return abep_form_a_iid(d, m)
    if method == "terms":
        return m.A * _assemble(d, lambda c, poles: _t1_term(c, poles, m.B))
    return m.A * expect(d, lambda g: math.exp(-m.B * g))


def moment(d: SinrDistribution, D: int, method: str = "quad") -> float:
    """E[gamma^D]; ``terms`` evaluates each density term with the T3 solver."""
    _check_method(method, ("quad", "terms"))
    if method == "terms":
        return _assemble(d, lambda c, poles: _t3_term(c, poles, D))
    return expect(d, lambda g: g**D)


def mean_sinr(d: SinrDistribution, method: str = "auto") -> float:
    """Average output SINR E[gamma]."""
    _check_method(method, ("auto", "closed", "quad", "terms"))
    if method == "auto":
        method = "closed" if isinstance(d, FormAIID) else "quad"
    if method == "closed":
        if not isinstance(d, FormAIID):
            raise ValueError("closed-form mean SINR is available for FormAIID only")
        return mean_sinr_form_a_iid(d)
    return moment(d, 1, "terms" if method == "terms" else "quad")


def ergodic_capacity(d: SinrDistribution, p: CapacityParams = CapacityParams()) -> float:
    """(1/NH) E[log2(1 + gamma)] by adaptive quadrature."""
    return expect(d, lambda g: math.log2(1.0 + g), p.tol) / p.NH


def capacity_upper_bound(d: SinrDistribution, p: CapacityParams = CapacityParams(), method: str = "auto") -> float:
    """Jensen bound (1/NH) log2(1 + E[gamma])."""
    return math.log2(1.0 + mean_sinr(d, method)) / p.NH


def outage_probability(d: SinrDistribution, gamma_th) -> float | np.ndarray:
    """P[gamma < gamma_th]."""
    g = np.asarray(gamma_th, dtype=float)
    if np.any(g < 0):
        raise ValueError("gamma_th must be non-negative")
    return d.cdf(g)
