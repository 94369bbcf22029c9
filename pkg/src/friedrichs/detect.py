"""Defect numbers of the detectable subspace and explicit bases of its complement.

For ``phi, psi`` with all poles in the lower half-plane the complement is
finite dimensional: its dimension is ``N - P - M - M0``, where ``N`` counts
the (simple) poles of ``psi`` and ``P``, ``M`` count poles of
``conj(phi) / D_+`` in the open lower half-plane and on the real axis.
Elements of the complement are built from the null space of a small
linear constraint system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from friedrichs.core import (
    FriedrichsModel,
    Meromorphic,
    d_plus_continuation,
    m_function,
    resolvent_apply,
    weights,
)
from friedrichs.errors import (
    ContinuationUnavailable,
    DegenerateB,
    DVanishes,
    MPole,
    NonGenericNotImplemented,
    NotAnEigenvalue,
    NothingToBorder,
    UnsupportedPsiPole,
    WrongCase,
)
from friedrichs.rational import (
    LOOSE_CLUSTER_TOL,
    POLE_CLUSTER_TOL,
    HalfPlane,
    RationalFn,
    inner_product,
    norm,
    partial_fractions_from_roots,
    poly_roots,
    riesz_project,
)

MEMBERSHIP_TOL = 1e-8
NULLSPACE_RTOL = 1e-10
M0_TOL = 1e-9


@dataclass(frozen=True)
class RootInfo:
    """A zero of the continued determinant and what survives of it in ``conj(phi)/D_+``."""

    root: complex
    multiplicity: int
    half_plane: HalfPlane
    cancelled: bool
    pole_order: int

    def to_dict(self) -> dict:
        return {
            "root": [self.root.real, self.root.imag],
            "multiplicity": self.multiplicity,
            "half_plane": self.half_plane.value,
            "cancelled": self.cancelled,
            "pole_order": self.pole_order,
        }


@dataclass(frozen=True)
class DefectReport:
    N: int
    P: int
    M: int
    M0: int
    defect: int | float
    roots: tuple[RootInfo, ...] = ()
    case: str = "hplus"
    # poles of conj(phi)/D_+ in the open lower half-plane with their orders
    lower_poles: tuple[tuple[complex, int], ...] = field(default=(), repr=False)

    @property
    def infinite(self) -> bool:
        return math.isinf(self.defect)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "N": self.N,
            "P": self.P,
            "M": self.M,
            "M0": self.M0,
            "defect": "infinite" if self.infinite else int(self.defect),
            "roots": [r.to_dict() for r in self.roots],
        }


@dataclass(frozen=True)
class SperpBasis:
    """Orthonormal representatives ``g``; ``values_at_poles[i][j]`` is ``conj(g_i)(z_j)`` before scaling."""

    vectors: tuple[RationalFn, ...]
    values_at_poles: tuple[np.ndarray, ...]

    def __len__(self):
        return len(self.vectors)


def _match(a: complex, b: complex, mult: int) -> bool:
    tol = POLE_CLUSTER_TOL if mult == 1 else LOOSE_CLUSTER_TOL
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _check_hplus(model: FriedrichsModel) -> None:
    for p, c in model.psi.parts:
        if c.size > 1:
            raise UnsupportedPsiPole(f"psi has a pole of order {c.size} at {p}")
    try:
        from friedrichs.core import check_continuation_hypotheses

        check_continuation_hypotheses(model)
    except ContinuationUnavailable as exc:
        raise WrongCase(str(exc)) from exc
    if model.degenerate_B:
        raise DegenerateB(f"B = {model.B} is degenerate")


def _phibar_zeros(model: FriedrichsModel) -> list[tuple[complex, int]]:
    num = np.asarray(model.phibar.numerator)
    nz = np.nonzero(num)[0]
    if nz.size == 0 or num.size - nz[0] <= 1:
        return []
    return poly_roots(num[nz[0]:])


def defect_Hplus(model: FriedrichsModel) -> DefectReport:
    """Defect ``N - P - M - M0`` for ``phi, psi`` with all poles in the lower half-plane.

    Raises
    ------
    UnsupportedPsiPole
        ``psi`` has a pole of order above one.
    DegenerateB
        ``B = +-i pi``.
    WrongCase
        A pole of ``phi`` or ``psi`` lies outside the lower half-plane.
    """
    _check_hplus(model)
    if model.is_free:
        return DefectReport(0, 0, 0, 0, 0)

    N = len(model.psi.poles)
    psi_poles = list(model.psi.poles)
    dplus = d_plus_continuation(model)
    zeros = dplus.zeros() if not dplus.rational.is_zero() else []
    phibar_zeros = _phibar_zeros(model)

    roots: list[RootInfo] = []
    P = M = 0
    lower_poles = []
    for r, m in zeros:
        cancel = sum(mz for z, mz in phibar_zeros if _match(r, z, max(m, mz)))
        order = max(m - cancel, 0)
        half = HalfPlane.of(r)
        roots.append(RootInfo(r, m, half, order == 0, order))
        if order == 0 or any(_match(r, z, 1) for z in psi_poles):
            continue
        if half is HalfPlane.LOWER:
            P += order
            lower_poles.append((r, order))
        elif half is HalfPlane.REAL:
            M += order

    M0 = 0
    phibar = model.phibar
    dphibar = phibar.derivative()
    scale = max(phibar.scale, 1e-300)
    for z, c in model.psi.parts:
        if abs(phibar(z)) > M0_TOL * scale * max(1.0, 1.0 / min(abs(z - p) for p in phibar.poles)):
            continue
        dval = dplus(z)
        if abs(dval) <= 1e-12:
            M0 += 1
            continue
        limit = 2j * math.pi * model.alpha * c[0] * dphibar(z) / dval
        if abs(limit - 1) > M0_TOL:
            M0 += 1

    defect = N - P - M - M0
    if defect < 0:
        raise ArithmeticError(f"negative defect N={N} P={P} M={M} M0={M0}")
    return DefectReport(N, P, M, M0, defect, tuple(roots), "hplus", tuple(lower_poles))


def _constraint_matrix(model: FriedrichsModel, report: DefectReport) -> np.ndarray:
    parts = model.psi.parts
    rows = []
    for mu, order in report.lower_poles:
        for n in range(1, order + 1):
            rows.append([c[0] / (mu - z) ** n for z, c in parts])
    return np.asarray(rows, dtype=complex).reshape(len(rows), len(parts))


def _nullspace(A: np.ndarray, n: int) -> np.ndarray:
    if A.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(A)
    rank = int(np.sum(s > NULLSPACE_RTOL * s[0])) if s.size else 0
    return vh[rank:].conj().T


def _gbar_from_values(model: FriedrichsModel, dplus: Meromorphic, zeros, v: np.ndarray) -> RationalFn:
    """``2 pi i alpha conj(phi) / D_+ * sum_j c_j v_j / (mu - z_j)`` as a rational function."""
    parts = model.psi.parts
    den_poles = list(dplus.rational.poles)
    # S * (reduced D_+ denominator): poles of S missing from D_+ survive as simple poles
    s_fn = RationalFn([(z, 1, c[0] * vj) for (z, c), vj in zip(parts, v)])
    num = np.asarray(s_fn.numerator)
    extra = [z for z, _ in parts if not any(_match(z, q, 1) for q in den_poles)]
    # s_fn = num / prod_all(mu - z); multiply by prod_{den_poles}(mu - z) / nD
    roots = list(zeros) + [(z, 1) for z in extra]
    lead = np.asarray(dplus.numerator)[0]
    t = partial_fractions_from_roots(num, lead, roots)
    return (model.phibar * t) * (2j * math.pi * model.alpha)


def sperp_basis(model: FriedrichsModel, report: DefectReport | None = None) -> SperpBasis:
    """Orthonormal basis of the complement of the detectable subspace (generic case)."""
    if report is None:
        report = defect_Hplus(model)
    if report.M + report.M0 > 0:
        raise NonGenericNotImplemented(f"M={report.M}, M0={report.M0}")
    if report.defect == 0:
        return SperpBasis((), ())
    dplus = d_plus_continuation(model)
    zeros = dplus.zeros()
    A = _constraint_matrix(model, report)
    V = _nullspace(A, report.N)
    if V.shape[1] != report.defect:
        raise ArithmeticError(f"null space dimension {V.shape[1]} != defect {report.defect}")

    raw = []
    for k in range(V.shape[1]):
        gbar = _gbar_from_values(model, dplus, zeros, V[:, k])
        lower = riesz_project(gbar, 1)
        if lower.scale > 1e-8 * max(gbar.scale, 1e-300):
            raise ArithmeticError("constructed vector has residual poles in the lower half-plane")
        gbar = riesz_project(gbar, -1).chop(1e-14)
        raw.append(gbar.conj_on_real())

    # Gram-Schmidt in L2; the null space coordinates are rotated alongside
    vecs: list[RationalFn] = []
    coords: list[np.ndarray] = []
    for g, col in zip(raw, V.T):
        for e, ce in zip(vecs, coords):
            ip = inner_product(g, e)
            g = g - e * ip
            col = col - ce * ip
        nrm = norm(g)
        vecs.append(g / nrm)
        coords.append(col / nrm)
    return SperpBasis(tuple(vecs), tuple(coords))


def membership_points() -> np.ndarray:
    k = np.arange(64)
    cheb = 20.0 * np.cos((2 * k + 1) * np.pi / 128)
    far = np.array([50.0, 100.0, 200.0, 400.0])
    return np.concatenate([cheb, far, -far])


def membership_sides(model: FriedrichsModel, g: RationalFn) -> tuple[RationalFn, RationalFn]:
    """Both sides of the pointwise characterisation of the complement, as rational functions."""
    gbar = g.conj_on_real()
    phibar = model.phibar
    psi = model.coupled_psi
    two_pi_i = 2j * math.pi
    # D(x + i0) = 1 + 2 pi i P+(alpha psi conj(phi))
    bracket = riesz_project(psi * phibar, 1) - riesz_project(phibar, 1) * psi
    lhs = gbar + (bracket * gbar) * two_pi_i
    hankel = riesz_project(psi * riesz_project(gbar, -1), 1) - riesz_project(psi * riesz_project(gbar, 1), -1)
    rhs = (phibar * hankel) * two_pi_i
    return lhs, rhs


def membership_test(model: FriedrichsModel, g: RationalFn) -> float:
    """Relative sup-residual of the membership identity on the sample grid."""
    g.require_l2("g")
    lhs, rhs = membership_sides(model, g)
    x = membership_points()
    a, b = np.abs(lhs(x)), np.abs(rhs(x))
    diff = np.max(np.abs(lhs(x) - rhs(x)))
    denom = np.max(a) + np.max(b)
    return 0.0 if denom == 0 else float(diff / denom)


def defect_mixed(model: FriedrichsModel) -> DefectReport:
    """Defect when ``conj(phi)`` and ``psi`` both have all poles in the lower half-plane.

    Returns defect 0 unless ``B = -i pi``, where the defect is infinite.
    """
    for p in model.phibar.poles:
        if HalfPlane.of(p) is not HalfPlane.LOWER:
            raise WrongCase(f"conj(phi) has a pole at {p} outside the lower half-plane")
    for p in model.psi.poles:
        if HalfPlane.of(p) is not HalfPlane.LOWER:
            raise WrongCase(f"psi has a pole at {p} outside the lower half-plane")
    if model.is_free:
        return DefectReport(0, 0, 0, 0, 0, case="mixed")
    if abs(model.B + 1j * math.pi) <= 1e-12 * math.pi:
        return DefectReport(0, 0, 0, 0, math.inf, case="mixed")
    if abs(model.B - 1j * math.pi) <= 1e-12 * math.pi:
        raise DegenerateB("B = i pi")
    return DefectReport(0, 0, 0, 0, 0, case="mixed")


@dataclass(frozen=True)
class ProbeResult:
    radii: np.ndarray
    full_norms: np.ndarray
    bordered_norms: np.ndarray

    @property
    def growth_exponent(self) -> float:
        slope, _ = np.polyfit(np.log(1.0 / self.radii), np.log(self.full_norms), 1)
        return float(slope)

    @property
    def bordered_ratio(self) -> float:
        return float(np.max(self.bordered_norms) / np.min(self.bordered_norms))


def _compress(basis: Sequence[RationalFn], h: RationalFn) -> RationalFn:
    for e in basis:
        h = h - e * inner_product(h, e)
    return h


def bordered_resolvent_probe(
    model: FriedrichsModel,
    eigenvalue: complex,
    g: RationalFn,
    radius: float = 0.1,
    rings: int = 7,
    points: int = 8,
    basis: SperpBasis | None = None,
) -> ProbeResult:
    """Norms of the full and compressed resolvents on rings around an eigenvalue.

    For each ring ``radius * 2**-k`` the maximum over ``points`` equally
    spaced points is recorded.
    """
    if basis is None:
        report = defect_Hplus(model)
        if report.defect == 0:
            raise NothingToBorder("the detectable subspace is the whole space")
        basis = sperp_basis(model, report)
    if len(basis) == 0:
        raise NothingToBorder("the detectable subspace is the whole space")
    try:
        m_function(model, eigenvalue)
    except (MPole, DVanishes):
        pass
    else:
        raise NotAnEigenvalue(f"{eigenvalue} is not an eigenvalue of A_B")

    vecs = basis.vectors
    pg = _compress(vecs, g)
    radii = radius * 2.0 ** -np.arange(rings)
    theta = 2 * np.pi * (np.arange(points) + 0.5) / points
    full, bordered = [], []
    for r in radii:
        fmax = bmax = 0.0
        for t in theta:
            lam = eigenvalue + r * np.exp(1j * t)
            fmax = max(fmax, norm(resolvent_apply(model, lam, g).f))
            bmax = max(bmax, norm(_compress(vecs, resolvent_apply(model, lam, pg).f)))
        full.append(fmax)
        bordered.append(bmax)
    return ProbeResult(radii, np.asarray(full), np.asarray(bordered))
