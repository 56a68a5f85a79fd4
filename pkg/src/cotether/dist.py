"""Closed-form SINR distributions for Rayleigh-faded links with co-channel interference.

Two ratio families are covered:

* form A, ``C = A / (1 + B)`` with ``B`` a sum of exponential INRs;
* form B, ``C = A / (1 + B1 + B2)`` with two interferer groups,

each with identical (i.i.d.) or pairwise distinct (i.n.d.) interferer means,
plus decode-and-forward (minimum) and selection (maximum) compositions.

Every base variant has two evaluation routes. ``expanded`` is the
partial-fraction / finite-series closed form obtained by integrating the
exponential desired-signal CDF against the interference density (the
hypoexponential density for distinct means, the Erlang density or its
two-group convolution for identical means). ``factored`` is the same survival
function written as ``exp(-s) * prod_i (1 + s Z_i)^(-m_i)`` with ``s = gamma/Y``;
the two agree identically, but the factored route has no cancellation and is
the default.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np
from scipy import optimize, special

from .errors import IllConditionedError
from .specfun import POLE_RTOL, check_distinct

EQUAL_RTOL = 1e-12

# ---------------------------------------------------------------------------
# Interference-sum densities
# ---------------------------------------------------------------------------


def _hypoexp_weights(rates, one=1.0):
    """w_j with f(x) = sum_j w_j exp(-rate_j x) for a sum of exponentials."""
    rates = [one * r for r in rates]
    num = one
    for r in rates:
        num = num * r
    out = []
    for j, rj in enumerate(rates):
        den = one
        for l, rl in enumerate(rates):
            if l != j:
                den = den * (rl - rj)
        out.append(num / den)
    return out


def hypoexp_pdf(Z: Sequence[float], x):
    """Density of a sum of independent exponentials with distinct means ``Z``."""
    Z = [float(z) for z in Z]
    check_distinct(Z)
    rates = [1.0 / z for z in Z]
    w = _hypoexp_weights(rates)
    x = np.asarray(x, dtype=float)
    out = sum(wj * np.exp(-rj * x) for wj, rj in zip(w, rates))
    return np.where(x >= 0, out, 0.0)


def erlang_pdf(Z: float, X: int, x):
    """Density of a sum of ``X`` i.i.d. exponentials with mean ``Z``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        logf = (X - 1) * np.log(x) - x / Z - X * math.log(Z) - special.gammaln(X)
    out = np.exp(logf)
    if X == 1:
        out = np.exp(-x / Z) / Z
    return np.where(x >= 0, out, 0.0)


def _lower_gamma_int(n: int, y: float) -> float:
    """gamma(n, y) for integer n >= 1 and any real y."""
    if y >= 0:
        return float(special.gammainc(n, y) * special.gamma(n))
    # finite-series form holds for negative y as well
    return math.factorial(n - 1) * (1.0 - math.exp(-y) * sum(y**k / math.factorial(k) for k in range(n)))


def sum_two_groups_pdf(z, Z1, Z2, X1: int | None = None, X2: int | None = None):
    """Density of B1 + B2 for two independent interferer groups.

    With ``X1``/``X2`` given, ``Z1``/``Z2`` are scalar means of Erlang groups
    (binomial-expansion closed form). Otherwise ``Z1``/``Z2`` are lists of
    distinct means and the double-sum hypoexponential convolution is used.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if X1 is not None:
        Z1 = float(Z1)
        Z2 = float(Z2)
        check_distinct([Z1, Z2])
        delta = 1.0 / Z1 - 1.0 / Z2
        pref = 1.0 / (Z2**X2 * math.gamma(X2) * Z1**X1 * math.gamma(X1))
        out = np.empty_like(z)
        for i, zi in enumerate(z):
            acc = 0.0
            for j in range(X2):
                n = X1 + j
                acc += (
                    math.comb(X2 - 1, j)
                    * zi ** (X2 - 1 - j)
                    * (-1) ** j
                    / delta**n
                    * _lower_gamma_int(n, delta * zi)
                )
            out[i] = pref * math.exp(-zi / Z2) * acc
        return out
    Z1 = [float(v) for v in Z1]
    Z2 = [float(v) for v in Z2]
    check_distinct(Z1 + Z2)
    r1 = [1.0 / v for v in Z1]
    r2 = [1.0 / v for v in Z2]
    w1 = _hypoexp_weights(r1)
    w2 = _hypoexp_weights(r2)
    out = np.zeros_like(z)
    for a, ra in zip(w1, r1):
        for b, rb in zip(w2, r2):
            out += a * b / (rb - ra) * (np.exp(-ra * z) - np.exp(-rb * z))
    return out


# ---------------------------------------------------------------------------
# Distribution objects
# ---------------------------------------------------------------------------


class SinrDistribution:
    """Common interface: pdf, cdf, sf, ppf and structural sampling."""

    def pdf(self, gamma, method: str = "factored"):
        raise NotImplementedError

    def cdf(self, gamma, method: str = "factored"):
        raise NotImplementedError

    def sf(self, gamma, method: str = "factored"):
        return 1.0 - self.cdf(gamma, method)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def survival_terms(self) -> "ExpTerms":
        raise NotImplementedError

    def ppf(self, q: float) -> float:
        """Inverse CDF by bracketing and Brent's method."""
        q = float(q)
        if not 0.0 <= q < 1.0:
            raise ValueError(f"quantile must lie in [0, 1), got {q}")
        if q == 0.0:
            return 0.0
        hi = 1.0
        while self.cdf(hi) < q:
            hi *= 2.0
            if hi > 1e300:  # pragma: no cover
                raise ArithmeticError("quantile bracket diverged")
        return optimize.brentq(lambda g: float(self.cdf(g)) - q, 0.0, hi, xtol=1e-14 * hi, rtol=1e-14)


def _ratio_sample(Y, groups, n, rng):
    """A / (1 + sum B) with every exponential drawn as -mean * log(U)."""
    denom = np.ones(n)
    for Z, m in groups:
        for _ in range(m):
            denom += -Z * np.log1p(-rng.random(n))
    return -Y * np.log1p(-rng.random(n)) / denom


class _Ratio(SinrDistribution):
    """Shared machinery of the form-A / form-B ratio variants."""

    Y: float

    # (mean, multiplicity) of every exponential interferer
    def _groups(self) -> list[tuple[float, int]]:
        raise NotImplementedError

    def _expanded_terms(self, one=1.0) -> list[tuple[object, object, int]]:
        """(c_k, r_k, m_k) with sf = exp(-s) sum_k c_k (s + r_k)^(-m_k), s = gamma/Y."""
        raise NotImplementedError

    # factored route
    def _log_sf(self, s):
        out = -s
        for Z, m in self._groups():
            out = out - m * np.log1p(s * Z)
        return out

    def _hazard_sum(self, s):
        out = np.ones_like(s)
        for Z, m in self._groups():
            out = out + m * Z / (1.0 + s * Z)
        return out

    def _prep(self, gamma):
        g = np.asarray(gamma, dtype=float)
        return g, np.maximum(g, 0.0) / self.Y

    def cdf(self, gamma, method: str = "factored"):
        g, s = self._prep(gamma)
        if method == "factored":
            out = -np.expm1(self._log_sf(s))
        elif method == "expanded":
            out = 1.0 - self._expanded_sf(s)
        elif method == "expanded-mp":
            out = 1.0 - self._expanded_sf_mp(s)
        else:
            raise ValueError(f"unknown method {method!r}")
        return np.where(g > 0, out, 0.0)[()]

    def sf(self, gamma, method: str = "factored"):
        if method != "factored":
            return 1.0 - self.cdf(gamma, method)
        g, s = self._prep(gamma)
        return np.where(g > 0, np.exp(self._log_sf(s)), 1.0)[()]

    def pdf(self, gamma, method: str = "factored"):
        g, s = self._prep(gamma)
        if method == "factored":
            out = np.exp(self._log_sf(s)) * self._hazard_sum(s) / self.Y
        elif method == "expanded":
            out = self._expanded_pdf(s)
        elif method == "expanded-mp":
            out = self._expanded_pdf_mp(s)
        else:
            raise ValueError(f"unknown method {method!r}")
        return np.where(g >= 0, out, 0.0)[()]

    # expanded route, double precision
    def _expanded_sf(self, s):
        acc = np.zeros_like(s)
        for c, r, m in self._expanded_terms():
            acc = acc + c * (s + r) ** (-m)
        return np.exp(-s) * acc

    def _expanded_pdf(self, s):
        acc = np.zeros_like(s)
        for c, r, m in self._expanded_terms():
            acc = acc + c * ((s + r) ** (-m) + m * (s + r) ** (-m - 1))
        return np.exp(-s) * acc / self.Y

    # expanded route, arbitrary precision
    def _mp_digits(self, s: float) -> int:
        """Working digits so the expanded sum at ``s`` survives its own cancellation."""
        with mpmath.workdps(20):
            sm = mpmath.mpf(s)
            mag = mpmath.fsum(abs(c) * (sm + r) ** (-m) for c, r, m in self._expanded_terms(mpmath.mpf(1)))
        exact_log = float(self._log_sf(np.float64(s))) + s  # log of the bracketed sum
        lost = float(mpmath.log10(mag)) - exact_log / math.log(10) if mag > 0 else 0.0
        return 30 + max(0, int(math.ceil(lost)))

    def _expanded_mp_eval(self, s, pdf: bool):
        s = np.atleast_1d(s)
        out = np.empty(s.shape, dtype=float)
        for idx, si in np.ndenumerate(s):
            with mpmath.workdps(self._mp_digits(float(si))):
                terms = self._expanded_terms(mpmath.mpf(1))
                sm = mpmath.mpf(float(si))
                if pdf:
                    acc = mpmath.fsum(c * ((sm + r) ** (-m) + m * (sm + r) ** (-m - 1)) for c, r, m in terms)
                    out[idx] = float(mpmath.exp(-sm) * acc / self.Y)
                else:
                    acc = mpmath.fsum(c * (sm + r) ** (-m) for c, r, m in terms)
                    out[idx] = float(mpmath.exp(-sm) * acc)
        return out

    def _expanded_sf_mp(self, s):
        return self._expanded_mp_eval(s, pdf=False)

    def _expanded_pdf_mp(self, s):
        return self._expanded_mp_eval(s, pdf=True)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return _ratio_sample(self.Y, self._groups(), n, rng)

    def survival_terms(self) -> "ExpTerms":
        """The factored survival function as a single term.

        (1 + g Z / Y)^(-m) = (Y / Z)^m (g + Y / Z)^(-m), so no partial-fraction
        coefficients (which can cancel badly) enter the term algebra.
        """
        poles: dict[float, int] = {}
        coeff = 1.0
        for Z, m in self._groups():
            a = self.Y / Z
            poles[a] = poles.get(a, 0) + m
            coeff *= a**m
        return ExpTerms({(1.0 / self.Y, tuple(sorted(poles.items()))): coeff})

    def mean_interference(self) -> float:
        return sum(Z * m for Z, m in self._groups())


@dataclass(frozen=True)
class FormAIID(_Ratio):
    """A/(1+B) with ``X`` i.i.d. interferers of mean ``Z``; ``X = 0`` means no interference."""

    X: int
    Y: float
    Z: float

    def __post_init__(self):
        if self.X < 0 or int(self.X) != self.X:
            raise ValueError(f"X must be a non-negative integer, got {self.X}")
        if not (self.Y > 0 and self.Z > 0):
            raise ValueError("Y and Z must be positive")

    def _groups(self):
        return [(self.Z, self.X)] if self.X else []

    def _expanded_terms(self, one=1.0):
        Z = one * self.Z
        if self.X == 0:
            return [(one, one * 0, 0)]
        return [(Z ** (-self.X), 1 / Z, self.X)]


@dataclass(frozen=True)
class FormAIND(_Ratio):
    """A/(1+B) with distinct interferer means ``Z``."""

    Y: float
    Z: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "Z", tuple(float(z) for z in self.Z))
        if not self.Y > 0 or any(z <= 0 for z in self.Z):
            raise ValueError("Y and all Z must be positive")
        if not self.Z:
            raise ValueError("FormAIND needs at least one interferer")
        check_distinct(self.Z)

    def _groups(self):
        return [(z, 1) for z in self.Z]

    def _expanded_terms(self, one=1.0):
        rates = [1 / (one * z) for z in self.Z]
        w = _hypoexp_weights(rates, one)
        # E[exp(-sB)] = sum_j w_j / (s + r_j)
        return [(wj, rj, 1) for wj, rj in zip(w, rates)]


@dataclass(frozen=True)
class FormBIID(_Ratio):
    """A/(1+B1+B2) with Erlang groups (X1, Z1) and (X2, Z2), Z1 != Z2."""

    X1: int
    X2: int
    Y: float
    Z1: float
    Z2: float

    def __post_init__(self):
        if self.X1 < 1 or self.X2 < 1:
            raise ValueError("X1 and X2 must be positive integers")
        if not (self.Y > 0 and self.Z1 > 0 and self.Z2 > 0):
            raise ValueError("Y, Z1, Z2 must be positive")
        check_distinct([self.Z1, self.Z2])

    def _groups(self):
        return [(self.Z1, self.X1), (self.Z2, self.X2)]

    def _expanded_terms(self, one=1.0):
        X1, X2 = self.X1, self.X2
        Z1, Z2 = one * self.Z1, one * self.Z2
        r1, r2 = 1 / Z1, 1 / Z2
        delta = r1 - r2
        pref = 1 / (Z2**X2 * math.factorial(X2 - 1) * Z1**X1 * math.factorial(X1 - 1))
        acc: dict[tuple[int, int], object] = {}
        for j in range(X2):
            n = X1 + j
            outer = pref * math.comb(X2 - 1, j) * (-1) ** j * math.factorial(n - 1) / delta**n
            key = (2, X2 - j)
            acc[key] = acc.get(key, 0) + outer * math.factorial(X2 - j - 1)
            for k in range(n):
                p = X2 - j + k
                key = (1, p)
                acc[key] = acc.get(key, 0) - outer * delta**k / math.factorial(k) * math.factorial(p - 1)
        return [(c, r1 if grp == 1 else r2, p) for (grp, p), c in sorted(acc.items())]


@dataclass(frozen=True)
class FormBIND(_Ratio):
    """A/(1+B1+B2) with every interferer mean distinct within and across groups."""

    Y: float
    Z1: tuple[float, ...]
    Z2: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "Z1", tuple(float(z) for z in self.Z1))
        object.__setattr__(self, "Z2", tuple(float(z) for z in self.Z2))
        if not self.Z1 or not self.Z2:
            raise ValueError("both interferer groups must be non-empty")
        if not self.Y > 0 or any(z <= 0 for z in self.Z1 + self.Z2):
            raise ValueError("Y and all Z must be positive")
        check_distinct(self.Z1 + self.Z2)

    def _groups(self):
        return [(z, 1) for z in self.Z1 + self.Z2]

    def _expanded_terms(self, one=1.0):
        r1 = [1 / (one * z) for z in self.Z1]
        r2 = [1 / (one * z) for z in self.Z2]
        w1 = _hypoexp_weights(r1, one)
        w2 = _hypoexp_weights(r2, one)
        terms = []
        for a, ra in zip(w1, r1):
            for b, rb in zip(w2, r2):
                k = a * b / (rb - ra)
                terms.append((k, ra, 1))
                terms.append((-k, rb, 1))
        return terms


@dataclass(frozen=True)
class MinOf(SinrDistribution):
    """Decode-and-forward composition: min of two independent SINRs."""

    left: SinrDistribution
    right: SinrDistribution

    def cdf(self, gamma, method: str = "factored"):
        f1 = self.left.cdf(gamma, method)
        f2 = self.right.cdf(gamma, method)
        return f1 + f2 - f1 * f2

    def sf(self, gamma, method: str = "factored"):
        return self.left.sf(gamma, method) * self.right.sf(gamma, method)

    def pdf(self, gamma, method: str = "factored"):
        f1, f2 = self.left.pdf(gamma, method), self.right.pdf(gamma, method)
        F1, F2 = self.left.cdf(gamma, method), self.right.cdf(gamma, method)
        return f1 + f2 - f1 * F2 - f2 * F1

    def sample(self, n, rng):
        a = self.left.sample(n, rng)
        b = self.right.sample(n, rng)
        return np.minimum(a, b)

    def survival_terms(self):
        return self.left.survival_terms() * self.right.survival_terms()


@dataclass(frozen=True)
class MaxOf(SinrDistribution):
    """Selection composition: max of two independent SINRs."""

    left: SinrDistribution
    right: SinrDistribution

    def cdf(self, gamma, method: str = "factored"):
        return self.left.cdf(gamma, method) * self.right.cdf(gamma, method)

    def pdf(self, gamma, method: str = "factored"):
        f1, f2 = self.left.pdf(gamma, method), self.right.pdf(gamma, method)
        F1, F2 = self.left.cdf(gamma, method), self.right.cdf(gamma, method)
        return f1 * F2 + F1 * f2

    def sample(self, n, rng):
        a = self.left.sample(n, rng)
        b = self.right.sample(n, rng)
        return np.maximum(a, b)

    def survival_terms(self):
        s1 = self.left.survival_terms()
        s2 = self.right.survival_terms()
        return s1 + s2 - s1 * s2


# ---------------------------------------------------------------------------
# Exponential-rational term algebra
# ---------------------------------------------------------------------------


class ExpTerms:
    """Sum of coeff * exp(-c g) * prod_j (g + a_j)^(-b_j) in the SINR variable g.

    Keys are ``(c, ((a_1, b_1), ...))`` with poles sorted by location; terms
    with identical keys are merged. Closed under +, - and *, which is all the
    min/max compositions need.
    """

    def __init__(self, terms: dict | None = None):
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0}

    @staticmethod
    def one() -> "ExpTerms":
        return ExpTerms({(0.0, ()): 1.0})

    def __add__(self, other: "ExpTerms") -> "ExpTerms":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return ExpTerms(out)

    def __neg__(self) -> "ExpTerms":
        return ExpTerms({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "ExpTerms") -> "ExpTerms":
        return self + (-other)

    def __mul__(self, other: "ExpTerms") -> "ExpTerms":
        out: dict = {}
        for (c1, p1), v1 in self.terms.items():
            for (c2, p2), v2 in other.terms.items():
                poles = dict(p1)
                for a, b in p2:
                    poles[a] = poles.get(a, 0) + b
                key = (c1 + c2, tuple(sorted(poles.items())))
                out[key] = out.get(key, 0.0) + v1 * v2
        return ExpTerms(out)

    def __len__(self):
        return len(self.terms)

    def __call__(self, g):
        g = np.asarray(g, dtype=float)
        out = np.zeros_like(g)
        for (c, poles), v in self.terms.items():
            t = v * np.exp(-c * g)
            for a, b in poles:
                t = t / (g + a) ** b
            out = out + t
        return out

    def derivative_negated(self) -> "ExpTerms":
        """-d/dg of the sum, i.e. the density when the sum is a survival function."""
        out: dict = {}
        for (c, poles), v in self.terms.items():
            if c != 0:
                out[(c, poles)] = out.get((c, poles), 0.0) + v * c
            for i, (a, b) in enumerate(poles):
                bumped = list(poles)
                bumped[i] = (a, b + 1)
                key = (c, tuple(bumped))
                out[key] = out.get(key, 0.0) + v * b
        return ExpTerms(out)


# ---------------------------------------------------------------------------
# Construction from interference configurations
# ---------------------------------------------------------------------------

KINDS = ("conventional", "hybrid_direct", "ap_phase1", "ue_phase2")


def _classify(values: Sequence[float]) -> str:
    vals = [float(v) for v in values]
    if not vals:
        return "empty"
    lo, hi = min(vals), max(vals)
    if (hi - lo) <= EQUAL_RTOL * hi:
        return "iid"
    try:
        check_distinct(vals, POLE_RTOL)
    except IllConditionedError:
        raise IllConditionedError(
            f"interferer means {vals} are partially equal; perturb them or use Monte Carlo"
        ) from None
    return "ind"


def _form_a(Y: float, Z: Sequence[float]) -> SinrDistribution:
    kind = _classify(Z)
    if kind == "empty":
        return FormAIID(0, Y, 1.0)
    if kind == "iid":
        return FormAIID(len(Z), Y, float(Z[0]))
    return FormAIND(Y, tuple(Z))


def _form_b(Y: float, Z1: Sequence[float], Z2: Sequence[float]) -> SinrDistribution:
    if not Z1 or not Z2:
        return _form_a(Y, list(Z1) + list(Z2))
    if _classify(list(Z1) + list(Z2)) == "iid":
        return FormAIID(len(Z1) + len(Z2), Y, float(Z1[0]))
    return FormBIND(Y, tuple(Z1), tuple(Z2))


def _form_b_grouped(Y, Z1, Z2):
    # two internally identical groups with different means -> Erlang pair
    k1, k2 = _classify_soft(Z1), _classify_soft(Z2)
    if k1 == "iid" and k2 == "iid" and Z1 and Z2:
        z1, z2 = float(Z1[0]), float(Z2[0])
        if abs(z1 - z2) <= EQUAL_RTOL * max(z1, z2):
            return FormAIID(len(Z1) + len(Z2), Y, z1)
        return FormBIID(len(Z1), len(Z2), Y, z1, z2)
    return _form_b(Y, Z1, Z2)


def _classify_soft(values):
    vals = [float(v) for v in values]
    if not vals:
        return "empty"
    lo, hi = min(vals), max(vals)
    return "iid" if (hi - lo) <= EQUAL_RTOL * hi else "mixed"


def from_interference_config(
    kind: str,
    desired: float,
    cell_ue: Sequence[float] = (),
    cell_ap: Sequence[float] = (),
    wlan: Sequence[float] = (),
) -> SinrDistribution:
    """Distribution of one link SINR from its mean SNR and interferer mean INRs.

    ``conventional`` and ``ue_phase2`` are form A over ``cell_ue`` and ``wlan``
    respectively; ``hybrid_direct`` and ``ap_phase1`` are form B with groups
    ``cell_ue`` (eNB->UE transmissions) and ``cell_ap`` (eNB->AP transmissions).
    I.i.d. versus i.n.d. is chosen from the values; partially equal lists
    raise :class:`IllConditionedError`.
    """
    cell_ue, cell_ap, wlan = list(cell_ue), list(cell_ap), list(wlan)
    if kind == "conventional":
        if cell_ap or wlan:
            raise ValueError("conventional links only see eNB->UE interference")
        return _form_a(desired, cell_ue)
    if kind == "ue_phase2":
        if cell_ue or cell_ap:
            raise ValueError("the WLAN phase only sees AP->UE interference")
        return _form_a(desired, wlan)
    if kind in ("hybrid_direct", "ap_phase1"):
        if wlan:
            raise ValueError("cellular links do not see WLAN interference")
        return _form_b_grouped(desired, cell_ue, cell_ap)
    raise ValueError(f"unknown link kind {kind!r}; expected one of {KINDS}")


def end_to_end_distribution(
    ea: SinrDistribution, au: SinrDistribution, eu: SinrDistribution
) -> SinrDistribution:
    """max(direct, min(eNB->AP, AP->UE)): selection over the relayed path."""
    return MaxOf(eu, MinOf(ea, au))
