from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_rational, rationals
from friedrichs.errors import BoundaryEvaluationRequiresSide, InvalidSide, NotL2, ZeroPolynomial
from friedrichs.rational import (
    HalfPlane,
    RationalFn,
    boundary_cauchy,
    cauchy_transform,
    collinearity_residual,
    inner_product,
    integral,
    norm,
    partial_fractions,
    poly_roots,
    riesz_project,
    trace_gamma1,
    trace_gamma2,
)


def as_dict(roots):
    return sorted((round(r.real, 9), round(r.imag, 9), m) for r, m in roots)


# -- roots -------------------------------------------------------------------

def test_roots_of_x2_plus_1():
    assert as_dict(poly_roots([1, 0, 1])) == [(0.0, -1.0, 1), (0.0, 1.0, 1)]


def test_double_root_at_zero():
    assert as_dict(poly_roots([1, 0, 0])) == [(0.0, 0.0, 2)]


def test_roots_of_expanded_product():
    # (x - i)(x - 2i) = x^2 - 3i x - 2
    assert as_dict(poly_roots([1, -3j, -2])) == [(0.0, 1.0, 1), (0.0, 2.0, 1)]


def test_zero_polynomial_refused():
    with pytest.raises(ZeroPolynomial):
        poly_roots([0, 0])


@pytest.mark.parametrize("mult", [2, 3, 4, 5])
def test_multiple_root_merged(mult):
    coeffs = np.poly([0.3 - 0.7j] * mult + [2.0 + 1j])
    roots = poly_roots(coeffs)
    mults = sorted(m for _, m in roots)
    assert mults == [1, mult]
    center = [r for r, m in roots if m == mult][0]
    assert abs(center - (0.3 - 0.7j)) < 1e-8


@settings(max_examples=60, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=4, allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
def test_roots_reproduce_polynomial(rts):
    # skip near-coincident draws, which legitimately merge
    for i in range(len(rts)):
        for j in range(i):
            if abs(rts[i] - rts[j]) < 1e-2:
                return
    coeffs = np.poly(rts)
    found = [r for r, m in poly_roots(coeffs) for _ in range(m)]
    assert len(found) == len(rts)
    for r in rts:
        assert min(abs(r - f) for f in found) < 1e-7 * max(1, abs(r))


# -- partial fractions ---------------------------------------------------------

def test_two_simple_poles():
    f = partial_fractions([1], [1, 0, 1])
    assert abs(f.coefficients_at(1j)[0] - 1 / 2j) < 1e-14
    assert abs(f.coefficients_at(-1j)[0] + 1 / 2j) < 1e-14


def test_double_pole_single_term():
    f = partial_fractions([1], np.poly([1j, 1j]))
    assert f.order_at(1j) == 2
    assert np.allclose(f.coefficients_at(1j), [0, 1], atol=1e-12)


def test_cover_up_rule():
    f = partial_fractions([1, 0], np.poly([1j, 2j]))
    assert abs(f.coefficients_at(1j)[0] + 1) < 1e-13
    assert abs(f.coefficients_at(2j)[0] - 2) < 1e-13


def test_cached_forms_agree(rng):
    f = random_rational(rng, 4, max_order=2)
    x = rng.normal(size=16) * 3
    via_poly = np.polyval(f.numerator, x) / np.polyval(f.denominator, x)
    assert np.max(np.abs(via_poly - f(x)) / np.abs(f(x))) < 1e-10
    assert len(f.numerator) < len(f.denominator)


def test_partial_fraction_round_trip(rng):
    f = random_rational(rng, 3, max_order=2)
    g = partial_fractions(f.numerator, f.denominator)
    assert collinearity_residual(f, g) < 1e-9
    x = np.linspace(-4, 4, 9)
    assert np.allclose(f(x), g(x), rtol=1e-9)


def test_coincident_poles_merge():
    f = RationalFn([(1j, 1, 1.0), (1j + 1e-12, 1, 2.0)])
    assert len(f.poles) == 1
    assert abs(f.coefficients_at(1j)[0] - 3) < 1e-14


def test_unknown_json_keys_rejected():
    with pytest.raises(ValueError):
        RationalFn.from_json([{"pole": [0, 1], "coeff": [1, 0], "colour": "red"}])


@given(rationals())
def test_json_round_trip(f):
    assert RationalFn.from_json(f.to_json()) == f


# -- conjugation and arithmetic ----------------------------------------------------

def test_reflection():
    g = RationalFn.simple(1j).conj_on_real()
    assert g.poles == (-1j,)
    assert g.coefficients_at(-1j)[0] == 1


def test_coefficientwise_conjugation():
    g = RationalFn.simple(1 - 2j, 3 + 1j).conj_on_real()
    assert g.coefficients_at(1 + 2j)[0] == 3 - 1j


@given(rationals())
def test_conjugation_is_an_involution(f):
    assert f.conj_on_real().conj_on_real() == f


@given(rationals(max_terms=3), rationals(max_terms=3))
@settings(deadline=None)
def test_product_matches_pointwise(f, g):
    x = np.linspace(-5, 5, 13)
    h = f * g
    ref = f(x) * g(x)
    assert np.allclose(h(x), ref, rtol=1e-8, atol=1e-10 * np.max(np.abs(ref)))


def test_shift_multiply_splits_constant(rng):
    f = random_rational(rng, 3)
    const, rest = f.shift_multiply(0.5 + 2j)
    x = np.linspace(-3, 3, 7)
    assert np.allclose((x - (0.5 + 2j)) * f(x), const + rest(x))
    assert abs(const - f.residue_total) < 1e-14


# -- transforms ---------------------------------------------------------------------

def test_cauchy_single_enclosed_residue():
    f = RationalFn.simple(-1j)
    assert abs(cauchy_transform(f, 2j) - 2 * math.pi / 3) < 1e-14


def test_cauchy_empty_residue_sum():
    assert cauchy_transform(RationalFn.simple(-1j), -2j) == 0


def test_cauchy_two_poles():
    f = partial_fractions([1], [1, 0, 1])
    assert abs(cauchy_transform(f, 2j) - 1j * math.pi / 3) < 1e-14


def test_cauchy_refuses_real_lambda():
    with pytest.raises(BoundaryEvaluationRequiresSide):
        cauchy_transform(RationalFn.simple(-1j), 0.5)


def test_cauchy_when_lambda_is_a_pole():
    # int 1/((t - i)^2) dt = 0 closes either way
    f = RationalFn.simple(1j)
    assert abs(cauchy_transform(f, 1j, check=True)) < 1e-14


@settings(max_examples=80, deadline=None)
@given(rationals(max_terms=5), st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_closures_agree(f, lam):
    if abs(lam.imag) < 0.1 or min(abs(lam - p) for p in f.poles) < 1e-3:
        return
    cauchy_transform(f, lam, check=True)


def test_cauchy_against_quadrature(rng):
    f = random_rational(rng, 3)
    lam = 0.4 + 1.3j
    re = scipy.integrate.quad(lambda t: (f(t) / (t - lam)).real, -np.inf, np.inf, epsabs=1e-12)[0]
    im = scipy.integrate.quad(lambda t: (f(t) / (t - lam)).imag, -np.inf, np.inf, epsabs=1e-12)[0]
    assert abs(cauchy_transform(f, lam) - (re + 1j * im)) < 1e-8


def test_boundary_value_by_limit():
    # Upper boundary value at k is the limit of the transform at k + i eps
    f = RationalFn.simple(-1j)
    k = 0.0
    ups = [cauchy_transform(f, k + 1j * eps) for eps in (1e-3, 5e-4, 2.5e-4)]
    extrap = 2 * ups[-1] - ups[-2]
    assert abs(boundary_cauchy(f, k, HalfPlane.UPPER) - extrap) < 1e-6
    downs = [cauchy_transform(f, k - 1j * eps) for eps in (1e-3, 5e-4, 2.5e-4)]
    assert abs(boundary_cauchy(f, k, HalfPlane.LOWER) - (2 * downs[-1] - downs[-2])) < 1e-6


def test_plemelj_jump():
    f = partial_fractions([1], np.poly([1j, -2j]))
    jump = boundary_cauchy(f, 1.0, HalfPlane.UPPER) - boundary_cauchy(f, 1.0, HalfPlane.LOWER)
    assert abs(jump - 2j * math.pi * f(1.0)) < 1e-13


def test_boundary_lower_side_without_upper_poles():
    f = RationalFn.simple(-1j)
    assert boundary_cauchy(f, 0.3, HalfPlane.LOWER) == 0


def test_boundary_requires_a_side():
    with pytest.raises(InvalidSide):
        boundary_cauchy(RationalFn.simple(-1j), 0.0, HalfPlane.REAL)


def test_riesz_split():
    f = RationalFn.simple(1j) + RationalFn.simple(-1j)
    assert riesz_project(f, 1) == RationalFn.simple(-1j)
    assert riesz_project(RationalFn.simple(-1j), -1).is_zero()


@given(rationals(max_terms=4))
def test_riesz_completeness(f):
    assert riesz_project(f, 1) + riesz_project(f, -1) == f


def test_riesz_refuses_real_pole():
    with pytest.raises(NotL2):
        riesz_project(RationalFn.simple(0.5), 1)


def test_inner_products():
    a, b = RationalFn.simple(1j), RationalFn.simple(-1j)
    assert abs(inner_product(a, a) - math.pi) < 1e-14
    assert abs(inner_product(a, b)) < 1e-14
    assert abs(inner_product(b, RationalFn.simple(-2j)) - 2 * math.pi / 3) < 1e-14


def test_inner_product_against_quadrature(rng):
    f, g = random_rational(rng, 3), random_rational(rng, 2)
    h = lambda t: f(t) * np.conj(g(t))
    re = scipy.integrate.quad(lambda t: h(t).real, -np.inf, np.inf, epsabs=1e-12, limit=200)[0]
    im = scipy.integrate.quad(lambda t: h(t).imag, -np.inf, np.inf, epsabs=1e-12, limit=200)[0]
    assert abs(inner_product(f, g, check=True) - (re + 1j * im)) < 1e-7


@given(rationals(max_terms=4))
def test_norm_is_positive(f):
    assert norm(f) > 0
    assert abs(integral(f * f.conj_on_real(), check=True).imag) < 1e-9 * max(1, norm(f) ** 2)


def test_gamma1_examples():
    h = partial_fractions([1], [1, 0, 1])
    assert abs(trace_gamma1(h) - math.pi) < 1e-14
    odd = partial_fractions([1, 0], [1, 0, 1])
    assert abs(trace_gamma1(odd)) < 1e-14
    assert abs(trace_gamma1(RationalFn.simple(1j), check=True) - 1j * math.pi) < 1e-14


def test_gamma1_by_symmetric_quadrature():
    u = RationalFn.simple(1j)
    vals = []
    for R in (1e3, 2e3, 4e3):
        re = scipy.integrate.quad(lambda t: u(t).real, -R, R, limit=400)[0]
        im = scipy.integrate.quad(lambda t: u(t).imag, -R, R, limit=400)[0]
        vals.append(re + 1j * im)
    # the tail is O(1/R): one Richardson step
    extrap = 2 * vals[-1] - vals[-2]
    assert abs(extrap - trace_gamma1(u)) < 1e-6


def test_gamma2_examples():
    assert trace_gamma2(RationalFn.simple(1j)) == 1
    assert abs(trace_gamma2(partial_fractions([1], [1, 0, 1]))) < 1e-15
    assert abs(trace_gamma2(partial_fractions([2, 1], [1, 0, 1])) - 2) < 1e-14


def test_collinearity():
    f = RationalFn.simple(-1j, 2.0) + RationalFn.simple(-2j, 1j)
    assert collinearity_residual(f, f * (3 - 1j)) < 1e-15
    assert collinearity_residual(f, RationalFn.simple(-1j)) > 0.1
