"""Independent defect computation through a finite-rank reduction.

The complement of the detectable subspace is the kernel of ``Mult + K - mu``
with ``mu = 1 / (2 pi i alpha)``, where ``Mult`` multiplies by a rational
symbol and ``K`` has rank at most the number of ``psi`` poles. Away from the
range of the symbol its dimension equals the nullity of a small matrix
``I + G`` whose entries are line integrals; here those are evaluated by
adaptive quadrature, deliberately bypassing the residue calculus.

A second, cruder check realises the Riesz projections by FFT on a uniform
grid and measures how well a candidate satisfies the kernel equation.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.optimize

from friedrichs.core import FriedrichsModel
from friedrichs.errors import NearEssentialRange, UnsupportedPsiPole
from friedrichs.quadrature import integrate_real_line
from friedrichs.rational import HalfPlane, RationalFn, riesz_project

NULLITY_RTOL = 1e-7
MIN_MARGIN = 1e-6


def worker_count() -> int:
    env = os.environ.get("FRIEDRICHS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def coupling_to_mu(alpha: complex) -> complex:
    return 1.0 / (2j * math.pi * complex(alpha))


def mult_symbol(model: FriedrichsModel) -> RationalFn:
    """Symbol ``(P+ conj(phi)) psi - P+(psi conj(phi))`` with the uncoupled ``psi``."""
    phibar, psi = model.phibar, model.psi
    if phibar.is_zero() or psi.is_zero():
        return RationalFn()
    return riesz_project(phibar, 1) * psi - riesz_project(psi * phibar, 1)


@dataclass(frozen=True)
class RankOneTerm:
    """``K u`` contributes ``sign * c * (P u)(pole) * conj(phi)/(x - pole)``."""

    pole: complex
    coefficient: complex
    sign: int  # +1 for lower-half-plane poles (P- evaluation), -1 for upper (P+)

    def basis(self, phibar: RationalFn) -> RationalFn:
        return phibar * RationalFn.simple(self.pole)


def rank_terms(model: FriedrichsModel) -> list[RankOneTerm]:
    out = []
    for p, c in model.psi.parts:
        if c.size > 1:
            raise UnsupportedPsiPole(f"psi has a pole of order {c.size} at {p}")
        half = HalfPlane.of(p)
        out.append(RankOneTerm(p, complex(c[0]), 1 if half is HalfPlane.LOWER else -1))
    return out


def apply_K(model: FriedrichsModel, u: RationalFn) -> RationalFn:
    """Exact ``K u`` for rational ``u`` by the residue splitting of the two Hankel parts."""
    phibar = model.phibar
    out = RationalFn()
    if phibar.is_zero():
        return out
    minus, plus = riesz_project(u, -1), riesz_project(u, 1)
    for t in rank_terms(model):
        val = minus(t.pole) if t.sign == 1 else plus(t.pole)
        out = out + t.basis(phibar) * (t.sign * t.coefficient * complex(val))
    return out


def essential_range_margin(symbol: RationalFn, mu: complex, samples: int = 8192) -> float:
    """Distance from ``mu`` to the closure of ``symbol(R)``, which includes 0."""
    mu = complex(mu)
    if symbol.is_zero():
        return abs(mu)
    theta = np.linspace(-0.5 * math.pi, 0.5 * math.pi, samples + 1)[1:-1]
    vals = symbol(np.tan(theta))
    dist = np.abs(vals - mu)
    best = min(float(np.min(dist)), abs(mu))
    i = int(np.argmin(dist))
    lo = theta[max(i - 1, 0)]
    hi = theta[min(i + 1, theta.size - 1)]
    if hi > lo:
        res = scipy.optimize.minimize_scalar(
            lambda th: abs(complex(symbol(math.tan(th))) - mu),
            bounds=(lo, hi), method="bounded", options={"xatol": 1e-14},
        )
        best = min(best, float(res.fun))
    return best


@dataclass(frozen=True)
class FiniteRankSystem:
    mu: complex
    basis: tuple[RationalFn, ...]
    gram: np.ndarray
    essrange_margin: float
    singular_values: np.ndarray

    @property
    def nullity(self) -> int:
        # I + G carries the identity, so the scale never drops below one
        s = self.singular_values
        if s.size == 0:
            return 0
        return int(np.sum(s < NULLITY_RTOL * max(1.0, s[0])))

    @property
    def condition(self) -> float:
        s = self.singular_values
        if s.size == 0:
            return 1.0
        return float(s[0] / s[-1]) if s[-1] > 0 else math.inf

    def to_dict(self) -> dict:
        return {
            "mu": [self.mu.real, self.mu.imag],
            "nullity": self.nullity,
            "margin": self.essrange_margin,
            "singular_values": [float(x) for x in self.singular_values],
        }


def point_functional(v: Callable[[np.ndarray], np.ndarray], term: RankOneTerm) -> complex:
    """``(P- v)(z)`` for a lower pole, ``(P+ v)(w)`` for an upper pole, by quadrature."""
    p = term.pole
    val, _ = integrate_real_line(lambda t: v(t) / (t - p))
    # P- at lower points carries -1/(2 pi i); P+ at upper points +1/(2 pi i)
    return -term.sign * val / (2j * math.pi)


def build_system(model: FriedrichsModel, alpha: complex | None = None, workers: int | None = None) -> FiniteRankSystem:
    """Matrix ``I + G`` with ``G[s, r] = l_s[(Mult - mu)^-1 b_r]`` by quadrature.

    Raises
    ------
    NearEssentialRange
        ``mu`` is within ``1e-6`` of the closure of the symbol's range.
    QuadratureFailure
        An entry fails to converge.
    """
    alpha = model.alpha if alpha is None else complex(alpha)
    mu = coupling_to_mu(alpha)
    symbol = mult_symbol(model)
    margin = essential_range_margin(symbol, mu)
    if margin < MIN_MARGIN:
        raise NearEssentialRange(f"mu={mu} is {margin:.3g} from the essential range")
    phibar = model.phibar
    terms = rank_terms(model) if not phibar.is_zero() else []
    basis = tuple(t.basis(phibar) for t in terms)
    n = len(terms)
    if n == 0:
        return FiniteRankSystem(mu, (), np.zeros((0, 0), dtype=complex), margin, np.zeros(0))

    def resolved(b: RationalFn):
        if symbol.is_zero():
            return lambda t: b(t) / (-mu)
        return lambda t: b(t) / (symbol(t) - mu)

    jobs = [(s, r) for s in range(n) for r in range(n)]

    def entry(sr):
        s, r = sr
        return terms[s].sign * terms[s].coefficient * point_functional(resolved(basis[r]), terms[s])

    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            vals = list(ex.map(entry, jobs))
    else:
        vals = [entry(j) for j in jobs]
    G = np.asarray(vals, dtype=complex).reshape(n, n)
    gram = np.eye(n, dtype=complex) + G
    sv = np.linalg.svd(gram, compute_uv=False)
    return FiniteRankSystem(mu, basis, gram, margin, sv)


# ---------------------------------------------------------------------------
# grid realisation
# ---------------------------------------------------------------------------

def _plus_mask(n: int) -> np.ndarray:
    freq = np.fft.fftfreq(n)
    mask = (freq > 0).astype(float)
    mask[0] = 0.5
    if n % 2 == 0:
        mask[n // 2] = 0.5
    return mask


class GridProjector:
    """Riesz projections of samples on ``[-cutoff, cutoff)`` via FFT with 2x zero padding."""

    def __init__(self, n: int, cutoff: float):
        if n < 2 ** 12 or n & (n - 1):
            raise ValueError("grid size must be a power of two >= 4096")
        self.n = n
        self.cutoff = float(cutoff)
        self.h = 2 * self.cutoff / n
        self.x = -self.cutoff + self.h * np.arange(n)
        self._mask = _plus_mask(2 * n)

    def plus(self, values: np.ndarray) -> np.ndarray:
        padded = np.zeros(2 * self.n, dtype=complex)
        padded[: self.n] = values
        return np.fft.ifft(np.fft.fft(padded) * self._mask)[: self.n]

    def minus(self, values: np.ndarray) -> np.ndarray:
        return values - self.plus(values)

    def norm(self, values: np.ndarray, interior: float = 1.0) -> float:
        sel = np.abs(self.x) <= interior * self.cutoff
        return float(np.sqrt(self.h * np.sum(np.abs(values[sel]) ** 2)))


def grid_operator(model: FriedrichsModel, proj: GridProjector) -> Callable[[np.ndarray], np.ndarray]:
    """``u -> [-P+(psi phibar) + P+(phibar) psi] u + phibar [psi P- u - P-(psi u)]`` on the grid."""
    x = proj.x
    psi = model.psi(x) if not model.psi.is_zero() else np.zeros_like(x, dtype=complex)
    phibar = model.phibar(x) if not model.phi.is_zero() else np.zeros_like(x, dtype=complex)
    symbol = -proj.plus(psi * phibar) + proj.plus(phibar) * psi

    def L(u):
        return symbol * u + phibar * (psi * proj.minus(u) - proj.minus(psi * u))

    return L


def grid_K(model: FriedrichsModel, proj: GridProjector) -> Callable[[np.ndarray], np.ndarray]:
    """FFT realisation of ``K = conj(phi) [P+ psi P- - P- psi P+]``."""
    x = proj.x
    psi = model.psi(x) if not model.psi.is_zero() else np.zeros_like(x, dtype=complex)
    phibar = model.phibar(x) if not model.phi.is_zero() else np.zeros_like(x, dtype=complex)

    def K(u):
        return phibar * (proj.plus(psi * proj.minus(u)) - proj.minus(psi * proj.plus(u)))

    return K


def grid_membership_residual(
    model: FriedrichsModel,
    g: RationalFn | Callable[[np.ndarray], np.ndarray],
    grid: int = 2 ** 14,
    cutoff: float = 200.0,
    interior: float = 0.25,
) -> float:
    """Relative discrete residual ``||(L - mu) conj(g)|| / ||conj(g)||`` on the inner window."""
    proj = GridProjector(grid, cutoff)
    if isinstance(g, RationalFn):
        gbar = g.conj_on_real()(proj.x) if not g.is_zero() else np.zeros(grid, dtype=complex)
    else:
        gbar = np.conj(np.asarray(g(proj.x), dtype=complex))
    den = proj.norm(gbar, interior)
    if den == 0:
        return 0.0
    L = grid_operator(model, proj)
    mu = coupling_to_mu(model.alpha)
    return proj.norm(L(gbar) - mu * gbar, interior) / den
