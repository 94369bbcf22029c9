"""The rank-one Friedrichs model ``A f = x f + <f, phi> alpha psi`` with rational data.

Everything here is evaluated by residues: the perturbation determinant, its
meromorphic continuation from the upper half-plane, the M-function for a
scalar boundary parameter ``B``, kernel elements of the adjoint, and the
resolvent of the extension ``A_B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from friedrichs.errors import (
    BoundaryEvaluationRequiresSide,
    ContinuationUnavailable,
    DVanishes,
    MPole,
    NotInDomain,
)
from friedrichs.rational import (
    HalfPlane,
    RationalFn,
    boundary_cauchy,
    cauchy_transform,
    inner_product,
    poly_roots,
    trace_gamma1,
    trace_gamma2,
)

MPOLE_TOL = 1e-12
D_ZERO_TOL = 1e-10


def _complex_pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


@dataclass(frozen=True)
class FriedrichsModel:
    """Data ``(phi, psi, B, alpha)``; the perturbation is ``<f, phi> alpha psi``.

    ``alpha`` is kept apart from ``psi`` so that coupling sweeps do not
    rebuild partial fractions.
    """

    phi: RationalFn
    psi: RationalFn
    B: complex = 0j
    alpha: complex = 1 + 0j

    def __post_init__(self):
        self.phi.require_l2("phi")
        self.psi.require_l2("psi")
        for name in ("B", "alpha"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    @property
    def phibar(self) -> RationalFn:
        return self.phi.conj_on_real()

    @property
    def coupled_psi(self) -> RationalFn:
        """``alpha * psi``."""
        return self.psi * self.alpha

    @property
    def is_free(self) -> bool:
        return self.phi.is_zero() or self.psi.is_zero() or self.alpha == 0

    @property
    def degenerate_B(self) -> bool:
        return min(abs(self.B - 1j * math.pi), abs(self.B + 1j * math.pi)) <= 1e-12 * math.pi

    def with_(self, **changes) -> "FriedrichsModel":
        data = dict(phi=self.phi, psi=self.psi, B=self.B, alpha=self.alpha)
        data.update(changes)
        return FriedrichsModel(**data)

    def to_dict(self) -> dict[str, Any]:
        return {
            "phi": self.phi.to_json(),
            "psi": self.psi.to_json(),
            "B": _complex_pair(self.B),
            "alpha": _complex_pair(self.alpha),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FriedrichsModel":
        return cls(
            phi=RationalFn.from_json(data.get("phi", [])),
            psi=RationalFn.from_json(data.get("psi", [])),
            B=complex(*data.get("B", [0.0, 0.0])),
            alpha=complex(*data.get("alpha", [1.0, 0.0])),
        )


@dataclass(frozen=True)
class DomainElement:
    """An element ``f`` of the adjoint domain with ``x f(x) - c_f`` square integrable."""

    f: RationalFn
    c_f: complex

    def __post_init__(self):
        if not self.f.is_l2:
            raise NotInDomain("element has a real pole")
        object.__setattr__(self, "c_f", complex(self.c_f))
        c = self.f.residue_total
        if abs(c - self.c_f) > 1e-9 * max(1.0, abs(c), self.f.scale):
            raise NotInDomain(f"stated c_f={self.c_f} but x f(x) tends to {c}")

    @classmethod
    def of(cls, f: RationalFn) -> "DomainElement":
        return cls(f, f.residue_total)

    @property
    def gamma1(self) -> complex:
        return trace_gamma1(self.f)

    @property
    def gamma2(self) -> complex:
        return trace_gamma2(self.f)


@dataclass(frozen=True)
class MValue:
    """``M_B(lam)`` together with ``D(lam)`` and the bracket it inverts."""

    lam: complex
    value: complex
    d_value: complex
    half_plane: HalfPlane
    bracket: complex = field(default=0j, repr=False)
    phihat_bar: complex = field(default=0j, repr=False)
    psihat: complex = field(default=0j, repr=False)


def _side(lam: complex) -> HalfPlane:
    h = HalfPlane.of(lam)
    if h is HalfPlane.REAL:
        raise BoundaryEvaluationRequiresSide(f"lambda={lam} is on the real axis")
    return h


def d_zero_tol(model: FriedrichsModel, lam: complex) -> float:
    poles = model.psi.poles
    if not poles:
        return D_ZERO_TOL
    dist = min(abs(lam - p) for p in poles)
    return D_ZERO_TOL * (1.0 + 1.0 / max(dist, 1e-300))


def d_function(model: FriedrichsModel, lam: complex) -> complex:
    """``D(lam) = 1 + int alpha psi(x) conj(phi(x)) / (x - lam) dx`` off the real axis."""
    lam = complex(lam)
    _side(lam)
    prod = model.coupled_psi * model.phibar
    if prod.is_zero():
        return 1 + 0j
    return 1 + cauchy_transform(prod, lam)


def d_boundary(model: FriedrichsModel, k: float, side: HalfPlane) -> complex:
    """Boundary value ``D(k + i0)`` or ``D(k - i0)``."""
    prod = model.coupled_psi * model.phibar
    if prod.is_zero():
        return 1 + 0j
    return 1 + boundary_cauchy(prod, k, side)


@dataclass(frozen=True)
class Meromorphic:
    """``constant + rational`` with polynomial numerator/denominator for root finding."""

    constant: complex
    rational: RationalFn

    def __call__(self, z):
        if self.rational.is_zero():
            z = np.asarray(z, dtype=complex)
            out = np.full(z.shape, self.constant, dtype=complex)
            return out if out.ndim else complex(out)
        return self.constant + self.rational(z)

    @property
    def denominator(self) -> np.ndarray:
        return np.asarray(self.rational.denominator)

    @property
    def numerator(self) -> np.ndarray:
        den = self.denominator
        num = np.asarray(self.rational.numerator)
        return np.polyadd(self.constant * den, num)

    def zeros(self) -> list[tuple[complex, int]]:
        """Zeros with multiplicities (cancelled against poles only if exact)."""
        if self.constant == 0:
            num = np.asarray(self.rational.numerator)
            if not np.any(num):
                raise ValueError("identically zero")
            return poly_roots(num)
        return poly_roots(self.numerator)


def check_continuation_hypotheses(model: FriedrichsModel) -> None:
    for p, c in model.psi.parts:
        if HalfPlane.of(p) is not HalfPlane.LOWER:
            raise ContinuationUnavailable(f"psi has a pole at {p} outside the lower half-plane")
        if c.size > 1:
            raise ContinuationUnavailable(f"psi has a pole of order {c.size} at {p}")
    for p in model.phi.poles:
        if HalfPlane.of(p) is not HalfPlane.LOWER:
            raise ContinuationUnavailable(f"phi has a pole at {p} outside the lower half-plane")


def weights(model: FriedrichsModel) -> list[tuple[complex, complex]]:
    """Pairs ``(z_j, c_j * conj(phi)(z_j))`` over the poles of ``psi``."""
    phibar = model.phibar
    out = []
    for z, c in model.psi.parts:
        val = complex(phibar(z)) if not phibar.is_zero() else 0j
        out.append((z, complex(c[0]) * val))
    return out


def d_plus_continuation(model: FriedrichsModel) -> Meromorphic:
    """Continuation of ``D`` from the upper half-plane to all of the plane.

    ``D_+(mu) = 1 - 2 pi i alpha sum_j a_j / (z_j - mu)`` with
    ``a_j = c_j conj(phi)(z_j)``; terms with ``a_j = 0`` are dropped.
    """
    check_continuation_hypotheses(model)
    terms = [(z, 1, 2j * math.pi * model.alpha * a) for z, a in weights(model) if a != 0]
    return Meromorphic(1 + 0j, RationalFn(terms))


def _phihat_psihat(model: FriedrichsModel, lam: complex) -> tuple[complex, complex]:
    phibar = model.phibar
    cpsi = model.coupled_psi
    ph = cauchy_transform(phibar, lam) if not phibar.is_zero() else 0j
    ps = cauchy_transform(cpsi, lam) if not cpsi.is_zero() else 0j
    return ph, ps


def m_function(model: FriedrichsModel, lam: complex, B: complex | None = None) -> MValue:
    """Titchmarsh-Weyl coefficient ``M_B(lam)``.

    Raises
    ------
    DVanishes
        ``D(lam)`` is zero to within :func:`d_zero_tol`.
    MPole
        The bracket inverted by ``M_B`` vanishes: ``lam`` is an eigenvalue.
    """
    lam = complex(lam)
    half = _side(lam)
    B = model.B if B is None else complex(B)
    D = d_function(model, lam)
    if abs(D) <= d_zero_tol(model, lam):
        raise DVanishes(f"D({lam}) = {D}")
    ph, ps = _phihat_psihat(model, lam)
    term = ph * ps / D
    bracket = half.sign * math.pi * 1j - term - B
    if abs(bracket) <= MPOLE_TOL * max(math.pi, abs(B), abs(term)):
        raise MPole(lam)
    return MValue(lam, 1 / bracket, D, half, bracket, ph, ps)


def solution_element(model: FriedrichsModel, lam: complex, B: complex | None = None) -> DomainElement:
    """Kernel element of ``A~* - lam`` normalised by ``(Gamma1 - B Gamma2) f = 1``."""
    m = m_function(model, lam, B)
    lam = complex(lam)
    atom = RationalFn.simple(lam)
    f = (atom - model.coupled_psi.divide_linear(lam) * (m.phihat_bar / m.d_value)) * m.value
    return DomainElement(f, m.value)


def resolvent_apply(model: FriedrichsModel, lam: complex, g: RationalFn, B: complex | None = None) -> DomainElement:
    """Solve ``(A_B - lam) f = g``."""
    g.require_l2("g")
    m = m_function(model, lam, B)
    lam = complex(lam)
    D = m.d_value
    cpsi = model.coupled_psi
    g_phi = cauchy_transform(g * model.phibar, lam) if not (g.is_zero() or model.phi.is_zero()) else 0j
    g_hat = cauchy_transform(g, lam) if not g.is_zero() else 0j
    c_f = m.value * (-g_hat + g_phi * m.psihat / D)
    psi_part = cpsi.divide_linear(lam)
    f = (
        g.divide_linear(lam)
        - psi_part * (g_phi / D)
        + (RationalFn.simple(lam) - psi_part * (m.phihat_bar / D)) * c_f
    )
    return DomainElement(f, c_f)


def adjoint_apply(model: FriedrichsModel, u: DomainElement) -> RationalFn:
    """``A* u = x u - c_u + <u, alpha psi> phi``."""
    _, xu = u.f.shift_multiply(0.0)
    cpsi = model.coupled_psi
    pair = inner_product(u.f, cpsi) if not cpsi.is_zero() else 0j
    return xu + model.phi * pair


def adjoint_tilde_apply(model: FriedrichsModel, u: DomainElement) -> RationalFn:
    """``A~* u = x u - c_u + <u, phi> alpha psi``; ``A_B`` is its restriction to ``Gamma1 = B Gamma2``."""
    _, xu = u.f.shift_multiply(0.0)
    pair = inner_product(u.f, model.phi) if not model.phi.is_zero() else 0j
    return xu + model.coupled_psi * pair


def greens_terms(model: FriedrichsModel, u: DomainElement, v: DomainElement) -> tuple[complex, complex, complex]:
    """``(<A* u, v>, <u, A~* v>, boundary form)``."""
    lhs1 = inner_product(adjoint_apply(model, u), v.f)
    lhs2 = inner_product(u.f, adjoint_tilde_apply(model, v))
    bnd = u.gamma1 * np.conj(v.gamma2) - u.gamma2 * np.conj(v.gamma1)
    return lhs1, lhs2, complex(bnd)


def greens_check(model: FriedrichsModel, u: DomainElement, v: DomainElement) -> complex:
    """Residual of the abstract Green identity for the pair ``(u, v)``."""
    a, b, c = greens_terms(model, u, v)
    return a - b - c
