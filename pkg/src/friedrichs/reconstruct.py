"""Recover ``M_B`` from black-box access to the resolvent on the detectable subspace.

The algorithm sees only a provider that applies ``(A_B - lam)^-1`` to members
of the detectable subspace and hands out such members of the form
``1/(x - mu) - eta psi(x)/(x - mu)``. From these it extracts

1. ``psi`` up to a scalar, from the part of the resolvent not explained by
   ``g/(x - lam)``;
2. ``B``, from the large-``|lam|`` behaviour of the trace ``c_f``;
3. ``conj(phi)^/D`` (in the gauge fixed by step 1), from a large-``mu`` limit.

``M_B`` is then assembled from its defining bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from friedrichs.core import DomainElement, FriedrichsModel, d_function, d_zero_tol, m_function, resolvent_apply
from friedrichs.errors import (
    AsymptoticsFailed,
    DVanishes,
    InconsistentData,
    MPole,
    TrivialModelDetected,
)
from friedrichs.rational import RationalFn, _same_point, cauchy_transform, collinearity_residual

REFUSALS = (MPole, DVanishes)
DEFAULT_MU_LADDER = tuple(10.0 * 2.0 ** k for k in range(7))
# the limit in step 3 starts closer to the data poles, so it gets a longer ladder
LIMIT_MU_LADDER = tuple(10.0 * 2.0 ** k for k in range(10))
DEFAULT_GRID = tuple(s * h * 1j + off for s in (1, -1) for h in (1.0, 2.0, 4.0) for off in (0.0, 1.0, -1.0))
ZERO_REL = 1e-11


class RestrictedResolventProvider(Protocol):
    def resolvent(self, lam: complex, g: RationalFn) -> DomainElement: ...

    def certificate(self, mu: complex) -> RationalFn: ...


class HiddenModelProvider:
    """Wraps a model; exposes resolvent evaluations and subspace members only."""

    __slots__ = ("__model",)

    def __init__(self, model: FriedrichsModel):
        self.__model = model

    def resolvent(self, lam: complex, g: RationalFn) -> DomainElement:
        return resolvent_apply(self.__model, lam, g)

    def certificate(self, mu: complex) -> RationalFn:
        """``1/(x-mu) - eta psi/(x-mu)`` with ``eta = conj(phi)^(mu)/D(mu)``.

        Defined whenever ``D(mu) != 0``, including at eigenvalues of ``A_B``.
        """
        model = self.__model
        mu = complex(mu)
        D = d_function(model, mu)
        if abs(D) <= d_zero_tol(model, mu):
            raise DVanishes(f"D({mu}) = {D}")
        phibar = model.phibar
        eta = cauchy_transform(phibar, mu) / D if not phibar.is_zero() else 0j
        return RationalFn.simple(mu) - model.coupled_psi.divide_linear(mu) * eta


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def richardson(values: Sequence[complex], ratio: float = 2.0) -> tuple[complex, float, float]:
    """Extrapolate a sequence sampled at ``h, h/ratio, h/ratio**2, ...`` to ``h -> 0``.

    The leading order is fitted from successive differences; later columns
    assume orders increasing by one.

    Returns
    -------
    estimate, error_estimate, fitted_order
    """
    v = np.asarray(values, dtype=complex)
    d = np.diff(v)
    scale = max(float(np.max(np.abs(v))), 1e-300)
    if v.size < 3 or np.all(np.abs(d) <= 1e-15 * scale):
        return complex(v[-1]), float(abs(d[-1])) if d.size else 0.0, math.inf
    good = (np.abs(d[:-1]) > 0) & (np.abs(d[1:]) > 0)
    ratios = np.abs(d[:-1][good] / d[1:][good])
    order = float(np.log(ratios[-1]) / np.log(ratio)) if ratios.size else 1.0
    # rational data expand in integer powers; a non-integer fit means pre-asymptotic samples
    order = float(max(1, round(order))) if math.isfinite(order) else 1.0
    best, best_err = complex(v[-1]), float(abs(d[-1]))
    col = v
    for j in range(v.size - 1):
        fac = ratio ** (order + j) - 1.0
        col = col[1:] + (col[1:] - col[:-1]) / fac
        if col.size < 2:
            break
        err = float(abs(col[-1] - col[-2]))
        if err < best_err:
            best, best_err = complex(col[-1]), err
    return best, best_err, order


def _normalise(f: RationalFn) -> RationalFn:
    for t in f.terms:
        return f / t.coefficient
    return f


def _drop_pole(f: RationalFn, pole: complex, rel: float) -> RationalFn:
    """Remove the principal part at ``pole`` after checking it is negligible."""
    c = f.coefficients_at(pole)
    if c.size == 0:
        return f
    if float(np.max(np.abs(c))) > rel * max(f.scale, 1e-300):
        raise InconsistentData(f"unexpected pole at {pole}")
    return RationalFn.from_parts([(p, cs) for p, cs in f.parts if not _same_point(p, pole)])


def psi_times_A(elem: DomainElement, g: RationalFn, lam: complex) -> RationalFn:
    """``(x - lam) [f - (g + c_f)/(x - lam)]``, which equals ``A(lam) psi``."""
    rest = elem.f - g.divide_linear(lam) - RationalFn.simple(lam, elem.c_f)
    if rest.scale <= ZERO_REL * max(elem.f.scale, g.scale, 1.0):
        return RationalFn()
    const, out = rest.shift_multiply(lam)
    if abs(const) > 1e-8 * max(rest.scale, 1e-300):
        raise InconsistentData("resolvent remainder does not decay like psi/(x - lam)")
    return _drop_pole(out, lam, 1e-8).chop(1e-14)


# ---------------------------------------------------------------------------
# steps
# ---------------------------------------------------------------------------

def recover_psi(
    provider: RestrictedResolventProvider,
    lam1: complex = 1j,
    lam2: complex = 2j,
    g: RationalFn | None = None,
    probe_mus: Sequence[complex] = (0.5 + 3j, -0.5 - 3j, 1.5 + 0.7j, -1.5 - 0.7j),
) -> RationalFn:
    """``psi`` up to a scalar, normalised so its first partial-fraction coefficient is 1.

    Raises
    ------
    TrivialModelDetected
        Every probe leaves nothing beyond ``g/(x - lam)``.
    InconsistentData
        The two spectral parameters give non-proportional answers.
    """
    candidates = [g] if g is not None else []
    for mu in probe_mus:
        try:
            candidates.append(provider.certificate(mu))
        except REFUSALS:
            continue
    lams = [lam1, lam2, 0.3 + 1.7j, -0.3 - 1.7j, 0.8 - 2.5j]
    for gg in candidates:
        found = []
        for lam in lams:
            try:
                elem = provider.resolvent(lam, gg)
            except REFUSALS:
                continue
            pa = psi_times_A(elem, gg, lam)
            if not pa.is_zero():
                found.append(_normalise(pa))
            if len(found) == 2:
                break
        if found:
            if len(found) == 2 and collinearity_residual(found[0], found[1]) > 1e-9:
                raise InconsistentData("psi estimates from two spectral parameters disagree")
            return found[0]
    raise TrivialModelDetected("no probe produced a psi component")


@dataclass(frozen=True)
class SideEstimate:
    sign: int
    value: complex | None
    error: float
    order: float
    sequence: tuple[complex, ...]
    degenerate: bool


def _estimate_B_side(provider, sign: int, ladder: Sequence[float]) -> SideEstimate:
    seq = []
    for h in ladder:
        lam = sign * 1j * h
        mu = -lam
        try:
            g = provider.certificate(mu)
            c_f = provider.resolvent(lam, g).c_f
        except REFUSALS:
            return SideEstimate(sign, None, math.inf, math.nan, tuple(seq), True)
        if c_f == 0:
            return SideEstimate(sign, None, math.inf, math.nan, tuple(seq), True)
        seq.append(1j * math.pi * sign + sign * math.pi * 1j / (lam * c_f))
    est, err, order = richardson(seq)
    degenerate = abs(est - 1j * math.pi * sign) <= 1e-6 * math.pi
    return SideEstimate(sign, est, err, order, tuple(seq), degenerate)


def recover_B(
    provider: RestrictedResolventProvider,
    mu_ladder: Sequence[float] = DEFAULT_MU_LADDER,
    tol: float = 1e-4,
    max_extend: int = 5,
) -> tuple[complex, list[SideEstimate]]:
    """Boundary parameter from ``(i pi s - B) c_f ~ -s pi i / lam`` along ``lam = -mu``.

    Both half-planes are tried; a side whose limit is ``i pi s`` or where the
    provider refuses is treated as degenerate. An unconverged ladder is
    extended by doubling up to ``max_extend`` times.

    Raises
    ------
    AsymptoticsFailed
        No side produces a converged, non-degenerate limit.
    """
    ladder = list(mu_ladder)
    for _ in range(max_extend + 1):
        sides = [_estimate_B_side(provider, s, ladder) for s in (1, -1)]
        usable = [s for s in sides if s.value is not None and not s.degenerate]
        if not usable or min(s.error / max(1.0, abs(s.value)) for s in usable) <= tol or len(ladder) < 3:
            break
        # still pre-asymptotic: keep doubling
        ladder.append(2.0 * ladder[-1])
    if not usable:
        # both degenerate: only consistent if the two limits agree
        vals = [s for s in sides if s.value is not None]
        if vals and all(abs(s.value - vals[0].value) <= tol for s in vals):
            return vals[0].value, sides
        raise AsymptoticsFailed("no half-plane gives a usable limit for B")
    best = min(usable, key=lambda s: s.error)
    if best.error > tol * max(1.0, abs(best.value)):
        raise AsymptoticsFailed(f"B extrapolation error {best.error:.3g}")
    return best.value, sides


@dataclass(frozen=True)
class PointRecovery:
    lam: complex
    phihat_over_D: complex | None
    M: complex | None
    limit_error: float = 0.0
    limit_order: float = math.nan
    limit_sequence: tuple[complex, ...] = ()
    refused: bool = False


def _known_quantity(provider, psi_rec: RationalFn, lam: complex, mu: complex):
    """``(lam - mu) Q`` with ``f - (g + c_f)/(x - lam) = -psi_rec Q / (x - lam)``; also ``eta`` and ``c_f``."""
    g = provider.certificate(mu)
    elem = provider.resolvent(lam, g)
    pa = psi_times_A(elem, g, lam)
    Q = 0j
    if not pa.is_zero():
        if collinearity_residual(pa, psi_rec) > 1e-8:
            raise InconsistentData("resolvent remainder is not proportional to psi")
        Q = -_coef(pa, psi_rec)
    # g = 1/(x - mu) - eta psi_rec/(x - mu)
    const, gpsi = (RationalFn.simple(mu) - g).shift_multiply(mu)
    eta = _coef(gpsi, psi_rec) if not gpsi.is_zero() else 0j
    return (lam - mu) * Q, eta, elem.c_f


def _coef(a: RationalFn, b: RationalFn) -> complex:
    """Least-squares ``c`` with ``a ~ c b`` over partial-fraction coefficients."""
    num = 0j
    den = 0.0
    for p, cb in b.parts:
        ca = a.coefficients_at(p)
        n = min(ca.size, cb.size)
        num += np.vdot(cb[:n], ca[:n])
        den += float(np.vdot(cb, cb).real)
    return complex(num / den)


def recover_phihat_over_D(
    provider: RestrictedResolventProvider,
    B_rec: complex,
    psi_rec: RationalFn,
    lam_grid: Sequence[complex] = DEFAULT_GRID,
    mu_ladder: Sequence[float] = LIMIT_MU_LADDER,
) -> list[PointRecovery]:
    """``conj(phi)^/D`` at each grid point (gauge of ``psi_rec``) and the assembled ``M_B``.

    The known quantity ``(lam - mu) Q`` tends to ``M (conj(phi)^/D)(i pi s - B)``
    as ``Im mu -> s infinity``; dividing by ``i pi s - B`` gives ``a`` and
    ``conj(phi)^/D = a (i pi s - B) / (1 + a psi_rec^)``.
    """
    out = []
    for lam in lam_grid:
        lam = complex(lam)
        s = 1 if lam.imag > 0 else -1
        bracket_free = 1j * math.pi * s - B_rec
        psihat = cauchy_transform(psi_rec, lam)
        seq = []
        last = None
        try:
            for h in mu_ladder:
                mu = s * 1j * h + lam.real
                if abs(mu - lam) < 1e-12:
                    continue
                y, eta, c_f = _known_quantity(provider, psi_rec, lam, mu)
                seq.append(y)
                last = (y, eta, c_f, mu)
        except REFUSALS:
            out.append(PointRecovery(lam, None, None, refused=True))
            continue
        limit, err, order = richardson(seq)
        if abs(bracket_free) > 1e-8:
            a = limit / bracket_free
            denom = 1 + a * psihat
            if abs(denom) <= 1e-12 * max(1.0, abs(a * psihat)):
                if abs(a) <= 1e-14:
                    # conj(phi)^ vanishes here
                    out.append(PointRecovery(lam, 0j, 1 / bracket_free, err, order, tuple(seq)))
                    continue
                raise InconsistentData(f"1 + a psi^ vanishes at {lam}")
            x = a * bracket_free / denom
        else:
            # i pi s = B: the limit carries no information; use the single-mu identity
            y, eta, c_f, mu = last
            x = (y + eta) / (1 + (lam - mu) * c_f)
        inv = bracket_free - x * psihat
        M = math.inf if inv == 0 else 1 / inv
        out.append(PointRecovery(lam, x, M, err, order, tuple(seq)))
    return out


@dataclass(frozen=True)
class ReconstructionResult:
    psi_recovered: RationalFn | None
    B_recovered: complex
    points: tuple[PointRecovery, ...]
    trivial: bool = False
    pathological_sides: tuple[int, ...] = ()
    B_sides: tuple[SideEstimate, ...] = field(default=(), repr=False)

    @property
    def lam_grid(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])

    @property
    def M_assembled(self) -> np.ndarray:
        return np.array([np.nan if p.M is None else p.M for p in self.points], dtype=complex)

    @property
    def phihat_over_D(self) -> np.ndarray:
        return np.array([np.nan if p.phihat_over_D is None else p.phihat_over_D for p in self.points], dtype=complex)


def reconstruct(
    provider: RestrictedResolventProvider,
    lam_grid: Sequence[complex] = DEFAULT_GRID,
    mu_ladder: Sequence[float] = DEFAULT_MU_LADDER,
    limit_ladder: Sequence[float] = LIMIT_MU_LADDER,
) -> ReconstructionResult:
    """Run all three recovery steps and assemble ``M_B`` on ``lam_grid``."""
    B_rec, sides = recover_B(provider, mu_ladder)
    try:
        psi_rec = recover_psi(provider)
    except TrivialModelDetected:
        pts = []
        for lam in lam_grid:
            s = 1 if complex(lam).imag > 0 else -1
            inv = 1j * math.pi * s - B_rec
            pts.append(PointRecovery(complex(lam), 0j, math.inf if inv == 0 else 1 / inv))
        return ReconstructionResult(None, B_rec, tuple(pts), True, (), tuple(sides))
    pts = recover_phihat_over_D(provider, B_rec, psi_rec, lam_grid, limit_ladder)
    pathological = []
    for s in (1, -1):
        here = [p for p in pts if (p.lam.imag > 0) == (s > 0)]
        if here and all(p.refused for p in here):
            # every point of the half-plane is an eigenvalue: M^-1 = 0 there
            pathological.append(s)
    if pathological:
        pts = [
            PointRecovery(p.lam, p.phihat_over_D, math.inf, refused=True)
            if p.refused and (1 if p.lam.imag > 0 else -1) in pathological else p
            for p in pts
        ]
    return ReconstructionResult(psi_rec, B_rec, tuple(pts), False, tuple(pathological), tuple(sides))


@dataclass(frozen=True)
class ReconstructionReport:
    B_error: float
    M_max_rel_error: float
    psi_collinearity_residual: float
    points_compared: int

    def to_dict(self) -> dict:
        return {
            "B_error": self.B_error,
            "M_max_rel_error": self.M_max_rel_error,
            "psi_collinearity_residual": self.psi_collinearity_residual,
            "points_compared": self.points_compared,
        }


def compare_with_model(model: FriedrichsModel, result: ReconstructionResult) -> ReconstructionReport:
    """Ground-truth comparison used by tests and the command line."""
    b_err = abs(result.B_recovered - model.B)
    if result.psi_recovered is None:
        psi_res = 0.0 if model.is_free else 1.0
    else:
        psi_res = collinearity_residual(result.psi_recovered, model.coupled_psi)
    worst = 0.0
    n = 0
    for p in result.points:
        if p.refused or p.M is None:
            continue
        try:
            true = m_function(model, p.lam).value
        except REFUSALS:
            continue
        n += 1
        worst = max(worst, abs(p.M - true) / abs(true))
    return ReconstructionReport(float(b_err), float(worst), float(psi_res), n)
