import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cotether.errors import DivergentIntegralError, IllConditionedError
from cotether.specfun import (
    RationalProduct,
    check_distinct,
    residue_expand,
    t1_solve,
    t2_solve,
    t3_solve,
    tricomi_u,
    upper_incomplete_gamma,
    upper_incomplete_gamma_scaled,
)


def rel(a, b):
    return abs(a - b) / abs(b)


# -- frozen oracles computed independently with mpmath ----------------------

def test_gamma_zero_order_oracle():
    assert rel(upper_incomplete_gamma(0, 1.0), 0.219383934395520274) < 1e-13


def test_gamma_negative_order_oracle():
    assert rel(upper_incomplete_gamma(-1, 1.0), 0.148495506775922048) < 1e-13


def test_tricomi_oracle():
    assert rel(tricomi_u(2, 0, 1.0), 0.105478956515208888) < 1e-12


def test_t1_oracle():
    assert rel(t1_solve([(2.0, 2)], 0.5, 0.5), 0.138671383111777415) < 1e-12


def test_t2_oracle():
    assert rel(t2_solve([(1.0, 1)], 1.0), 0.403652637676805926) < 1e-12


def test_t3_oracle():
    assert rel(t3_solve([(1.0, 2)], 2.0, 2), 0.054685532447109661) < 1e-12


def test_residue_oracle():
    ex = residue_expand(RationalProduct(((1.0, 2), (3.0, 1))))
    assert ex.coefficient(0, 1) == pytest.approx(-0.25, rel=1e-14)
    assert ex.coefficient(0, 2) == pytest.approx(0.5, rel=1e-14)
    assert ex.coefficient(1, 1) == pytest.approx(0.25, rel=1e-14)


# -- identities --------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(
    st.integers(min_value=-12, max_value=6),
    st.floats(min_value=1e-2, max_value=50.0),
)
def test_gamma_recurrence(a, x):
    # Gamma(a+1, x) = a Gamma(a, x) + x^a e^-x
    lhs = upper_incomplete_gamma(a + 1, x)
    rhs = a * upper_incomplete_gamma(a, x) + x**a * math.exp(-x)
    assert rel(lhs, rhs) < 1e-10


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-10.0, max_value=10.0), st.floats(min_value=1e-3, max_value=1e3))
def test_gamma_scaled_matches_mpmath(a, x):
    ref = float(mpmath.exp(x) * mpmath.gammainc(a, x))
    assert rel(upper_incomplete_gamma_scaled(a, x), ref) < 1e-9


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.1, max_value=20.0), st.floats(min_value=1e-3, max_value=1e3))
def test_tricomi_closed_identity(a, z):
    # U(a, a+1, z) = z^-a
    assert rel(tricomi_u(a, a + 1, z) * z**a, 1.0) < 1e-12


@settings(max_examples=150, deadline=None)
@given(
    st.integers(min_value=1, max_value=6),
    st.floats(min_value=-20.0, max_value=20.0),
    st.floats(min_value=1e-2, max_value=100.0),
)
def test_tricomi_matches_mpmath(a, b, z):
    ref = float(mpmath.hyperu(a, b, z))
    assert rel(tricomi_u(a, b, z), ref) < 1e-9


def _random_product(rng, n_max=4, order_max=3):
    n = int(rng.integers(1, n_max + 1))
    locs = np.sort(rng.uniform(0.05, 20.0, n))
    while np.any(np.diff(locs) / locs[1:] < 1e-2):
        locs = np.sort(rng.uniform(0.05, 20.0, n))
    return RationalProduct(tuple((float(a), int(rng.integers(1, order_max + 1))) for a in locs))


@pytest.mark.parametrize("seed", range(20))
def test_residue_reconstruction(seed):
    rng = np.random.default_rng(seed)
    p = _random_product(rng)
    ex = residue_expand(p)
    x = rng.uniform(0.0, 50.0, 100)
    # the expansion sums terms much larger than the product at large x, so the
    # float error is bounded relative to the summed term magnitudes
    scale = sum(abs(xi) / (x + p.poles[j][0]) ** h for j, h, xi in ex.terms)
    assert np.all(np.abs(ex(x) - p(x)) <= 1e-12 * scale + 1e-10 * p(x))


@pytest.mark.parametrize("seed", range(20))
def test_residues_match_extended_precision_solve(seed):
    # coefficients from a linear solve of the reconstruction identity at 30 digits
    rng = np.random.default_rng(seed)
    p = _random_product(rng)
    ex = residue_expand(p)
    keys = [(j, h) for j, (_, b) in enumerate(p.poles) for h in range(1, b + 1)]
    with mpmath.workdps(30):
        pts = [mpmath.mpf(i) / 3 for i in range(len(keys))]
        A = mpmath.matrix([[1 / (t + p.poles[j][0]) ** h for j, h in keys] for t in pts])
        rhs = mpmath.matrix([_mp_product(p)(t) for t in pts])
        sol = mpmath.lu_solve(A, rhs)
    scale = max(abs(float(v)) for v in sol)
    for (j, h), ref in zip(keys, sol):
        assert abs(ex.coefficient(j, h) - float(ref)) <= 1e-9 * scale


# -- T-solvers against quadrature of their defining integrals ---------------

def _mp_quad(f):
    with mpmath.workdps(30):
        return float(mpmath.quad(f, [0, 1, 10, 100, mpmath.inf]))


def _mp_product(p):
    return lambda x: mpmath.fprod((x + a) ** (-b) for a, b in p.poles)


@pytest.mark.parametrize("seed", range(12))
def test_t1_vs_quadrature(seed):
    rng = np.random.default_rng(100 + seed)
    p = _random_product(rng, 3, 2)
    c, B = rng.uniform(0.05, 5.0), rng.uniform(0.0, 3.0)
    g = _mp_product(p)
    ref = _mp_quad(lambda x: mpmath.exp(-(B + c) * x) * g(x))
    assert rel(t1_solve(p, c, B), ref) < 1e-8


@pytest.mark.parametrize("seed", range(12))
def test_t3_vs_quadrature(seed):
    rng = np.random.default_rng(200 + seed)
    p = _random_product(rng, 3, 2)
    c, D = rng.uniform(0.05, 5.0), int(rng.integers(0, 4))
    g = _mp_product(p)
    ref = _mp_quad(lambda x: x**D * mpmath.exp(-c * x) * g(x))
    assert rel(t3_solve(p, c, D), ref) < 1e-8


@pytest.mark.parametrize("seed", range(6))
def test_t2_is_first_moment(seed):
    rng = np.random.default_rng(300 + seed)
    p = _random_product(rng, 3, 2)
    c = rng.uniform(0.1, 3.0)
    g = _mp_product(p)
    ref = _mp_quad(lambda x: x * mpmath.exp(-c * x) * g(x))
    assert rel(t2_solve(p, c), ref) < 1e-8
    assert t2_solve(p, c) == t3_solve(p, c, 1)


def test_cancellation_fallback_is_accurate():
    # close poles with high orders make the float partial-fraction sum cancel badly
    p = RationalProduct(((1.0, 3), (1.001, 3), (1.002, 2)))
    g = _mp_product(p)
    ref = _mp_quad(lambda x: mpmath.exp(-0.3 * x) * g(x))
    assert rel(t1_solve(p, 0.3), ref) < 1e-9


# -- error behavior ----------------------------------------------------------

def test_coincident_poles_rejected():
    with pytest.raises(IllConditionedError):
        RationalProduct(((1.0, 1), (1.0 + 1e-9, 1)))
    with pytest.raises(IllConditionedError):
        check_distinct([2.0, 2.0])


def test_invalid_poles_rejected():
    with pytest.raises(ValueError):
        RationalProduct(((-1.0, 1),))
    with pytest.raises(ValueError):
        RationalProduct(((1.0, 0),))


def test_divergent_integrals():
    with pytest.raises(DivergentIntegralError):
        t1_solve([(1.0, 1)], 0.0, 0.0)
    with pytest.raises(DivergentIntegralError):
        t3_solve([(1.0, 1)], 0.0, 1)
    with pytest.raises(ValueError):
        t3_solve([(1.0, 1)], 1.0, -1)
