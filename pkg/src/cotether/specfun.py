"""Special functions and partial-fraction machinery for the closed-form statistics.

Only the parameter regimes reached by the SINR formulas are covered: the upper
incomplete gamma function with a possibly non-positive first argument, the
Tricomi function U(a, b, z) with a > 0 and arbitrary real b, and residue
expansion of products of the form prod_j (x + a_j)^(-b_j).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate, special

from .errors import DivergentIntegralError, IllConditionedError

POLE_RTOL = 1e-6
# partial-fraction sums losing more than this factor are redone in mpmath
CANCELLATION_LIMIT = 1e4

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAXIT = 10_000


@dataclass(frozen=True)
class RationalProduct:
    """prod_j (x + a_j)^(-b_j) with distinct a_j > 0 and integer b_j >= 1."""

    poles: tuple[tuple[float, int], ...]

    def __post_init__(self):
        poles = tuple((float(a), int(b)) for a, b in self.poles)
        object.__setattr__(self, "poles", poles)
        for a, b in poles:
            if not a > 0 or not math.isfinite(a):
                raise ValueError(f"pole location must be positive and finite, got {a}")
            if b < 1:
                raise ValueError(f"pole order must be >= 1, got {b}")
        check_distinct([a for a, _ in poles])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.ones_like(x)
        for a, b in self.poles:
            out = out / (x + a) ** b
        return out

    @property
    def degree(self) -> int:
        return sum(b for _, b in self.poles)


@dataclass(frozen=True)
class ResidueExpansion:
    """Coefficients xi[j, h] of sum_{j,h} xi / (x + a_j)^h."""

    product: RationalProduct
    terms: tuple[tuple[int, int, float], ...]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for j, h, xi in self.terms:
            out = out + xi / (x + self.product.poles[j][0]) ** h
        return out

    def coefficient(self, j: int, h: int) -> float:
        for jj, hh, xi in self.terms:
            if jj == j and hh == h:
                return xi
        raise KeyError((j, h))


def check_distinct(values, rtol: float = POLE_RTOL) -> None:
    """Raise IllConditionedError if any two values agree to relative ``rtol``."""
    vals = sorted(float(v) for v in values)
    for lo, hi in zip(vals, vals[1:]):
        scale = max(abs(lo), abs(hi))
        if scale == 0 or (hi - lo) / scale < rtol:
            raise IllConditionedError(
                f"values {lo!r} and {hi!r} are closer than relative tolerance {rtol}"
            )


# ---------------------------------------------------------------------------
# Upper incomplete gamma
# ---------------------------------------------------------------------------

def _gamma_cf_scaled(a: float, x: float) -> float:
    """e^x Gamma(a, x) from the Legendre continued fraction (modified Lentz)."""
    b = x + 1.0 - a
    c = 1.0 / _CF_TINY
    d = 1.0 / b if b != 0 else 1.0 / _CF_TINY
    h = d
    for i in range(1, _CF_MAXIT):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = b + an / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    else:  # pragma: no cover - the fraction converges for x >= 1
        raise ArithmeticError(f"continued fraction failed for a={a}, x={x}")
    return math.exp(a * math.log(x)) * h


def _gamma_small_x(a: float, x: float) -> float:
    """Gamma(a, x) for 0 < x < 1 (unscaled)."""
    if a >= 1:
        return float(special.gammaincc(a, x) * special.gamma(a))
    if float(a).is_integer():
        n = int(1 - a)
        # Gamma(1-n, x) = x^(1-n) E_n(x)
        return float(x ** a * special.expn(n, x))
    # non-integer order below one: recurrence from the fractional part cancels
    # when a is close to an integer, and Gamma(a) overflows as a -> 0+, so
    # evaluate at extended precision
    with mpmath.workdps(30):
        return float(mpmath.gammainc(a, x))


def upper_incomplete_gamma_scaled(a: float, x: float) -> float:
    """Return e^x * Gamma(a, x); finite where Gamma(a, x) alone would underflow."""
    a = float(a)
    x = float(x)
    if not x > 0:
        raise ValueError(f"upper incomplete gamma needs x > 0, got {x}")
    if x >= 1.0 and (a < 1 or x > a + 1.0):
        val = _gamma_cf_scaled(a, x)
    elif x < 1.0:
        val = _gamma_small_x(a, x) * math.exp(x)
    else:
        val = float(special.gammaincc(a, x) * special.gamma(a)) * math.exp(x)
    if not math.isfinite(val):
        raise OverflowError(f"Gamma({a}, {x}) overflows")
    return val


def upper_incomplete_gamma(a: float, x: float) -> float:
    """Gamma(a, x) = int_x^inf t^(a-1) e^(-t) dt for any real a and x > 0.

    Non-positive integer ``a`` goes through the generalized exponential
    integral, other ``a < 1`` through mpmath (x < 1) or the continued
    fraction (x >= 1). Upward recurrence is never used.
    """
    a = float(a)
    x = float(x)
    if not x > 0:
        raise ValueError(f"upper incomplete gamma needs x > 0, got {x}")
    if x < 1.0:
        val = _gamma_small_x(a, x)
    elif a < 1 or x > a + 1.0:
        # the scaled value is O(x^(a-1)); taking exp in log space avoids inf*0
        s = _gamma_cf_scaled(a, x)
        val = math.exp(math.log(s) - x) if s > 0 else 0.0
    else:
        val = float(special.gammaincc(a, x) * special.gamma(a))
    if not math.isfinite(val):
        raise OverflowError(f"Gamma({a}, {x}) overflows")
    return val


# ---------------------------------------------------------------------------
# Tricomi confluent hypergeometric function
# ---------------------------------------------------------------------------

def _tricomi_integral(a: float, b: float, z: float) -> float:
    # U(a,b,z) = z^-a / Gamma(a) * int_0^inf e^-u u^(a-1) (1 + u/z)^(b-a-1) du
    c = b - a - 1.0

    def smooth(u):
        return math.exp(-u + c * math.log1p(u / z))

    opts = dict(epsabs=0.0, epsrel=1e-13, limit=400)
    if a < 1.0:
        head, _ = integrate.quad(smooth, 0.0, 1.0, weight="alg", wvar=(a - 1.0, 0.0), **opts)
        split = 1.0
    else:
        split = max(1.0, a - 1.0)

        def full(u):
            if u == 0.0:
                return 0.0 if a > 1.0 else smooth(u)
            return math.exp(-u + (a - 1.0) * math.log(u) + c * math.log1p(u / z))

        head, _ = integrate.quad(full, 0.0, split, **opts)

    def tail_f(u):
        return math.exp(-u + (a - 1.0) * math.log(u) + c * math.log1p(u / z))

    mid_end = split + 40.0 + 10.0 * math.sqrt(a)
    mid, _ = integrate.quad(tail_f, split, mid_end, **opts)
    tail, _ = integrate.quad(tail_f, mid_end, np.inf, **opts)
    total = head + mid + tail
    return math.exp(-a * math.log(z) - special.gammaln(a)) * total


def tricomi_u(a: float, b: float, z: float) -> float:
    """Tricomi U(a, b, z) for a > 0, real b and z > 0.

    For b < 1 the Kummer transformation U(a,b,z) = z^(1-b) U(a-b+1, 2-b, z)
    is applied first, then the Laplace-type integral is evaluated by adaptive
    quadrature.
    """
    a = float(a)
    b = float(b)
    z = float(z)
    if not a > 0:
        raise ValueError(f"tricomi_u needs a > 0, got {a}")
    if not z > 0:
        raise ValueError(f"tricomi_u needs z > 0, got {z}")
    if b < 1.0:
        val = math.exp((1.0 - b) * math.log(z)) * _tricomi_integral(a - b + 1.0, 2.0 - b, z)
    else:
        val = _tricomi_integral(a, b, z)
    if not math.isfinite(val):
        raise OverflowError(f"U({a}, {b}, {z}) overflows")
    return val


# ---------------------------------------------------------------------------
# Partial fractions and the T-integrals
# ---------------------------------------------------------------------------

def _taylor_residues(poles, one=1.0):
    """Residues xi[(j, h)] in the arithmetic of ``one`` (float or mpmath.mpf)."""
    out = {}
    for j, (aj, bj) in enumerate(poles):
        aj = one * aj
        others = [(one * ap - aj, bp) for k, (ap, bp) in enumerate(poles) if k != j]
        # l[m]: Taylor coefficient of L at -a_j
        l = [
            sum((-bp * (-1) ** m / d ** (m + 1) for d, bp in others), one * 0)
            for m in range(bj)
        ]
        t0 = one
        for d, bp in others:
            t0 = t0 / d ** bp
        t = [t0]
        for n in range(bj - 1):
            t.append(sum((t[k] * l[n - k] for k in range(n + 1)), one * 0) / (n + 1))
        for h in range(1, bj + 1):
            out[(j, h)] = t[bj - h]
    return out


def residue_expand(p: RationalProduct) -> ResidueExpansion:
    """Partial-fraction coefficients of prod_j (x + a_j)^(-b_j).

    The coefficient of (x + a_j)^(-h) is the Taylor coefficient of order
    b_j - h of g_j(x) = prod_{p != j} (x + a_p)^(-b_p) at x = -a_j. The Taylor
    coefficients follow from g' = g * L with L = sum_p -b_p / (x + a_p).
    """
    xi = _taylor_residues(p.poles)
    return ResidueExpansion(product=p, terms=tuple((j, h, float(v)) for (j, h), v in xi.items()))


def _as_product(p) -> RationalProduct:
    return p if isinstance(p, RationalProduct) else RationalProduct(tuple(p))


def _cancellation(parts) -> float:
    total = math.fsum(parts)
    mag = math.fsum(abs(v) for v in parts)
    if mag == 0.0:
        return 1.0
    return math.inf if total == 0.0 else mag / abs(total)


def _mp_sum(p, kernel, cancel):
    """Re-evaluate sum_{j,h} xi * kernel(a, h) with enough digits to absorb ``cancel``."""
    digits = 25 + (int(math.log10(cancel)) if math.isfinite(cancel) else 60)
    with mpmath.workdps(digits):
        xi = _taylor_residues(p.poles, mpmath.mpf(1))
        total = mpmath.fsum(
            v * kernel(mpmath.mpf(p.poles[j][0]), h) for (j, h), v in xi.items() if v != 0
        )
        return float(total)


def t1_solve(p, c_sum: float, B: float = 0.0) -> float:
    """int_0^inf exp(-(B + c_sum) x) prod_j (x + a_j)^(-b_j) dx in closed form.

    Each partial fraction integrates to s^(h-1) e^(a s) Gamma(1-h, a s) with
    s = B + c_sum. Sums that cancel badly in double precision are re-evaluated
    with mpmath.
    """
    p = _as_product(p)
    s = float(B) + float(c_sum)
    if not s > 0:
        # only degree 1 truly diverges at s = 0, but the closed form needs s > 0
        raise DivergentIntegralError(f"closed form needs a positive decay rate, got {s}")
    expansion = residue_expand(p)
    parts = [
        xi * s ** (h - 1) * upper_incomplete_gamma_scaled(1 - h, p.poles[j][0] * s)
        for j, h, xi in expansion.terms
        if xi != 0.0
    ]
    cancel = _cancellation(parts)
    if cancel < CANCELLATION_LIMIT:
        return math.fsum(parts)
    sm = mpmath.mpf(s)
    return _mp_sum(
        p, lambda a, h: sm ** (h - 1) * mpmath.exp(a * sm) * mpmath.gammainc(1 - h, a * sm), cancel
    )


def t3_solve(p, c_sum: float, D: int) -> float:
    """int_0^inf x^D exp(-c_sum x) prod_j (x + a_j)^(-b_j) dx in closed form.

    Each partial fraction gives Gamma(D+1) a^(D+1-h) U(D+1, D+2-h, a c).
    """
    p = _as_product(p)
    D = int(D)
    if D < 0:
        raise ValueError(f"D must be a non-negative integer, got {D}")
    c = float(c_sum)
    if not c > 0:
        raise DivergentIntegralError(f"integral needs a positive decay rate, got {c}")
    expansion = residue_expand(p)
    gd = math.factorial(D)
    parts = [
        xi * gd * p.poles[j][0] ** (D + 1 - h) * tricomi_u(D + 1, D + 2 - h, p.poles[j][0] * c)
        for j, h, xi in expansion.terms
        if xi != 0.0
    ]
    cancel = _cancellation(parts)
    if cancel < CANCELLATION_LIMIT:
        return math.fsum(parts)
    cm = mpmath.mpf(c)
    return _mp_sum(
        p, lambda a, h: gd * a ** (D + 1 - h) * mpmath.hyperu(D + 1, D + 2 - h, a * cm), cancel
    )


def t2_solve(p, c_sum: float) -> float:
    """int_0^inf x exp(-c_sum x) prod_j (x + a_j)^(-b_j) dx."""
    return t3_solve(p, c_sum, 1)
