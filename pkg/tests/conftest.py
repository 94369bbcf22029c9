from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import strategies as st

from friedrichs.core import FriedrichsModel
from friedrichs.rational import RationalFn


def random_rational(rng, n, half=None, max_order=1, spread=2.0):
    """``n`` poles with random coefficients; ``half`` = +1/-1 pins the half-plane."""
    terms = []
    for _ in range(n):
        h = half if half is not None else rng.choice([-1, 1])
        pole = complex(rng.uniform(-spread, spread), h * rng.uniform(0.3, spread))
        order = int(rng.integers(1, max_order + 1))
        for k in range(1, order + 1):
            terms.append((pole, k, complex(*rng.normal(size=2))))
    return RationalFn(terms)


def example58(alpha, z1=-1j, w1=1j, B=0.0):
    """``psi = 1/(x - z1)``, ``conj(phi) = 1/(x - w1)`` with coupling ``alpha``."""
    return FriedrichsModel(
        phi=RationalFn.simple(np.conj(w1)),
        psi=RationalFn.simple(z1),
        B=B,
        alpha=alpha,
    )


def lambda0(alpha, z1=-1j, w1=1j):
    return z1 + 2j * math.pi * alpha / (w1 - z1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


coords = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
heights = st.floats(0.2, 3, allow_nan=False, allow_infinity=False)
coeffs = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


@st.composite
def poles(draw, half=None):
    h = half if half is not None else draw(st.sampled_from([-1, 1]))
    return complex(draw(coords), h * draw(heights))


@st.composite
def rationals(draw, min_terms=1, max_terms=4, half=None):
    n = draw(st.integers(min_terms, max_terms))
    ps = draw(st.lists(poles(half), min_size=n, max_size=n))
    # keep poles well separated so merging is not exercised by accident
    for i in range(len(ps)):
        for j in range(i):
            if abs(ps[i] - ps[j]) < 0.05:
                ps[i] += 0.1
    cs = draw(st.lists(coeffs.filter(lambda c: abs(c) > 1e-3), min_size=n, max_size=n))
    return RationalFn([(p, 1, c) for p, c in zip(ps, cs)])


def hplus_model(rng, n_psi, n_phi=None, alpha_scale=2.0):
    """Random model with every pole of ``phi`` and ``psi`` in the lower half-plane."""
    n_phi = n_phi if n_phi is not None else int(rng.integers(1, 3))
    return FriedrichsModel(
        phi=random_rational(rng, n_phi, half=-1),
        psi=random_rational(rng, n_psi, half=-1),
        alpha=complex(*rng.normal(size=2)) * alpha_scale,
    )


def oracle_suite(rng, count, margin=1e-3):
    """``count`` accepted draws of (model, system) with a clear spectral gap."""
    from friedrichs.errors import NearEssentialRange
    from friedrichs.oracle import NULLITY_RTOL, build_system

    out = []
    while len(out) < count:
        m = hplus_model(rng, int(rng.integers(1, 5)))
        try:
            system = build_system(m, workers=1)
        except NearEssentialRange:
            continue
        if system.essrange_margin < margin:
            continue
        s = system.singular_values
        scale = max(1.0, s[0])
        # reject draws whose smallest singular values sit near the threshold
        if np.any((s >= NULLITY_RTOL * scale) & (s < 10 * NULLITY_RTOL * scale)):
            continue
        out.append((m, system))
    return out
