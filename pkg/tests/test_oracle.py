from __future__ import annotations

import math
import os

import numpy as np
import pytest

from conftest import example58, hplus_model, oracle_suite, random_rational
from friedrichs.core import FriedrichsModel
from friedrichs.detect import defect_Hplus, sperp_basis
from friedrichs.errors import NearEssentialRange
from friedrichs.oracle import (
    GridProjector,
    apply_K,
    build_system,
    coupling_to_mu,
    essential_range_margin,
    grid_K,
    grid_membership_residual,
    mult_symbol,
    rank_terms,
    worker_count,
)
from friedrichs.quadrature import integrate_real_line
from friedrichs.rational import RationalFn, partial_fractions, riesz_project


def residue_gram(model, alpha):
    """``I + G`` with every entry done in exact rational arithmetic."""
    mu = coupling_to_mu(alpha)
    symbol = mult_symbol(model)
    num, den = symbol.numerator, symbol.denominator
    terms = rank_terms(model)
    n = len(terms)
    G = np.zeros((n, n), dtype=complex)
    for r, tr in enumerate(terms):
        b = tr.basis(model.phibar)
        v = partial_fractions(np.polymul(b.numerator, den), np.polymul(b.denominator, np.polysub(num, mu * den)))
        for s, ts in enumerate(terms):
            proj = riesz_project(v, -1) if ts.sign == 1 else riesz_project(v, 1)
            G[s, r] = ts.sign * ts.coefficient * complex(proj(ts.pole))
    return np.eye(n) + G


def test_symbol_vanishes_for_free_model():
    m = FriedrichsModel(phi=RationalFn.simple(-1j), psi=RationalFn())
    assert mult_symbol(m).is_zero()


def test_symbol_in_hplus_case(rng):
    m = hplus_model(rng, 3)
    expected = -riesz_project(m.psi * m.phibar, 1)
    assert (mult_symbol(m) - expected).scale < 1e-14


def test_symbol_spot_value_by_quadrature():
    # P+ h (k) is the limit of (1/2 pi i) int h(t)/(t - k - i eps) dt
    m = example58(1.0)
    h = m.psi * m.phibar
    vals = []
    for eps in (1e-2, 5e-3, 2.5e-3):
        v, _ = integrate_real_line(lambda t: h(t) / (t - 1j * eps), atol=1e-13, rtol=1e-12)
        vals.append(v / (2j * math.pi))
    extrap = 2 * vals[-1] - vals[-2]
    assert abs(complex(mult_symbol(m)(0.0)) + extrap) < 1e-4


def test_symbol_decays(rng):
    m = hplus_model(rng, 2)
    assert abs(complex(mult_symbol(m)(1e8))) < 1e-6


def test_apply_K_matches_grid():
    m = FriedrichsModel(phi=RationalFn.simple(-1j) + RationalFn.simple(1 - 2j, 0.5),
                        psi=RationalFn.simple(-1j, 2.0) + RationalFn.simple(0.5 + 1j, -1j), alpha=0.7)
    u = RationalFn.simple(-0.5j) + RationalFn.simple(1 + 1.5j, 0.3)
    exact = apply_K(m, u)
    errs = []
    for n, cutoff in ((2 ** 13, 100.0), (2 ** 14, 200.0), (2 ** 15, 400.0)):
        proj = GridProjector(n, cutoff)
        approx = grid_K(m, proj)(u(proj.x))
        ref = exact(proj.x)
        errs.append(proj.norm(approx - ref, 0.25) / proj.norm(ref, 0.25))
    assert errs[-1] < 1e-2
    assert errs[0] > 1.8 * errs[1] > 3.2 * errs[2]


def test_free_model_has_empty_system():
    system = build_system(FriedrichsModel(phi=RationalFn.simple(-1j), psi=RationalFn(), alpha=0.5))
    assert system.nullity == 0
    assert system.gram.shape == (0, 0)


def test_example58_nullity():
    system = build_system(example58(2j / math.pi))
    assert system.nullity == 1
    assert defect_Hplus(example58(2j / math.pi)).defect == 1


def test_entries_match_residue_calculus(rng):
    for _ in range(10):
        m = hplus_model(rng, int(rng.integers(1, 4)))
        try:
            system = build_system(m, workers=1)
        except NearEssentialRange:
            continue
        ref = residue_gram(m, m.alpha)
        assert np.max(np.abs(system.gram - ref)) < 1e-8 * max(1, np.max(np.abs(ref)))


def test_entries_match_with_upper_psi_poles(rng):
    m = FriedrichsModel(phi=random_rational(rng, 2), psi=random_rational(rng, 3), alpha=0.9 - 0.4j)
    system = build_system(m, workers=1)
    assert np.max(np.abs(system.gram - residue_gram(m, m.alpha))) < 1e-8


def test_oracle_agrees_with_analytic_defect(rng):
    for m, system in oracle_suite(rng, 40):
        assert system.nullity == defect_Hplus(m).defect


def test_large_mu_gives_nullity_zero(rng):
    m = hplus_model(rng, 3)
    terms = rank_terms(m)
    # crude bound on |M| + ||K|| from the data
    bound = float(np.max(np.abs(mult_symbol(m)(np.linspace(-50, 50, 2001))))) + sum(
        abs(t.coefficient) * float(np.max(np.abs(t.basis(m.phibar)(np.linspace(-50, 50, 2001))))) for t in terms
    ) * 10
    for theta in np.linspace(0, 2 * np.pi, 8, endpoint=False):
        mu = 2 * bound * np.exp(1j * theta)
        alpha = 1 / (2j * math.pi * mu)
        assert build_system(m, alpha=alpha, workers=1).nullity == 0


def test_near_essential_range_refused():
    m = example58(1.0)
    symbol = mult_symbol(m)
    mu = complex(symbol(0.7))
    with pytest.raises(NearEssentialRange):
        build_system(m, alpha=1 / (2j * math.pi * mu))
    assert essential_range_margin(symbol, mu) < 1e-6


def test_threads_env(monkeypatch):
    monkeypatch.setenv("FRIEDRICHS_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("FRIEDRICHS_THREADS", "junk")
    assert worker_count() >= 1


def test_parallel_matches_serial(rng):
    m = hplus_model(rng, 4)
    a = build_system(m, workers=1)
    b = build_system(m, workers=4)
    assert np.array_equal(a.gram, b.gram)


# -- grid membership -----------------------------------------------------------------------

def test_grid_residual_converges_for_member():
    m = example58(2j / math.pi)
    (g,) = sperp_basis(m).vectors
    res = [grid_membership_residual(m, g, grid=n, cutoff=c) for n, c in ((2 ** 12, 50.0), (2 ** 13, 100.0), (2 ** 14, 200.0))]
    assert res[0] > res[1] > res[2]
    assert res[2] < 1e-2


def test_grid_residual_bounded_below_for_non_member():
    m = example58(0.1j / math.pi)
    g = RationalFn.simple(-0.5j) + RationalFn.simple(1 + 1j, 0.3)
    for n, c in ((2 ** 12, 50.0), (2 ** 13, 100.0), (2 ** 14, 200.0)):
        assert grid_membership_residual(m, g, grid=n, cutoff=c) > 1e-2


def test_grid_residual_of_zero():
    assert grid_membership_residual(example58(1.0), RationalFn()) == 0


def test_grid_size_checked():
    with pytest.raises(ValueError):
        GridProjector(1000, 10.0)
