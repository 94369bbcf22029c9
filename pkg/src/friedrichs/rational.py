"""Complex rational functions in partial-fraction form and residue calculus.

A :class:`RationalFn` is a strictly proper rational function stored as a sum
of principal parts ``sum_k c_k / (x - p)**k`` over its distinct poles ``p``.
All integral transforms used by the rest of the package (Cauchy transform,
Riesz projections, L2 pairings, the boundary traces) reduce to coefficient
manipulations in this form.

Polynomials passed in or out of this module are coefficient sequences in
*descending* order, as accepted by :func:`numpy.polyval` and :func:`numpy.roots`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg

from friedrichs.errors import (
    BoundaryEvaluationRequiresSide,
    ClosureMismatch,
    InvalidSide,
    NotInDomain,
    NotL2,
    NotStrictlyProper,
    ZeroPolynomial,
)

POLE_REAL_TOL = 1e-9
POLE_CLUSTER_TOL = 1e-8
ROOT_RESIDUAL_TOL = 1e-8
CLOSURE_TOL = 1e-10
# multiple roots of multiplicity m scatter by roughly eps**(1/m)
LOOSE_CLUSTER_TOL = 3e-3

TWO_PI_I = 2j * math.pi

_EPS = np.finfo(float).eps


class HalfPlane(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"
    REAL = "real"

    @classmethod
    def of(cls, z: complex, tol: float = POLE_REAL_TOL) -> "HalfPlane":
        """Classify ``z``; the band ``|Im z| <= tol * max(1, |z|)`` counts as real."""
        z = complex(z)
        band = tol * max(1.0, abs(z))
        if z.imag > band:
            return cls.UPPER
        if z.imag < -band:
            return cls.LOWER
        return cls.REAL

    @property
    def sign(self) -> int:
        return {HalfPlane.UPPER: 1, HalfPlane.LOWER: -1, HalfPlane.REAL: 0}[self]


def _finite(z: complex, name: str = "value") -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{name} must be finite, got {z!r}")
    return z


def _same_point(a: complex, b: complex, tol: float = POLE_CLUSTER_TOL) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _inverse_power_series(d: complex, k: int, n: int) -> np.ndarray:
    """Taylor coefficients of ``(d + h)**(-k)`` in ``h``, orders ``0..n-1``."""
    out = np.empty(n, dtype=complex)
    term = d ** (-k)
    for j in range(n):
        out[j] = term
        # ratio of consecutive coefficients of (1 + h/d)**(-k)
        term = term * (-(k + j) / ((j + 1) * d))
    return out


@dataclass(frozen=True)
class PoleTerm:
    """One summand ``coefficient / (x - pole)**order``."""

    pole: complex
    order: int
    coefficient: complex

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")


class RationalFn:
    """Strictly proper complex rational function in partial-fraction form.

    Parameters
    ----------
    terms : iterable of PoleTerm or (pole, order, coefficient) tuples
        Summands. Poles closer than ``POLE_CLUSTER_TOL`` (relative) are merged
        and their principal parts added. Exactly-zero coefficients are dropped.

    Notes
    -----
    Instances are immutable. The polynomial (numerator, denominator) form is
    derived on first access and cached.
    """

    __slots__ = ("_poles", "_parts", "_poly")

    def __init__(self, terms: Iterable = ()):
        groups: list[list] = []
        for t in terms:
            if isinstance(t, PoleTerm):
                pole, order, coef = t.pole, t.order, t.coefficient
            else:
                pole, order, coef = t
            pole = _finite(pole, "pole")
            coef = _finite(coef, "coefficient")
            order = int(order)
            if order < 1:
                raise ValueError("order must be >= 1")
            for g in groups:
                if _same_point(g[0], pole):
                    break
            else:
                g = [pole, np.zeros(0, dtype=complex)]
                groups.append(g)
            if g[1].size < order:
                g[1] = np.concatenate([g[1], np.zeros(order - g[1].size, dtype=complex)])
            g[1][order - 1] += coef
        self._set(groups)

    def _set(self, groups):
        parts = []
        for pole, c in groups:
            c = np.asarray(c, dtype=complex)
            nz = np.nonzero(c)[0]
            if nz.size == 0:
                continue
            c = c[: nz[-1] + 1].copy()
            c.flags.writeable = False
            parts.append((complex(pole), c))
        parts.sort(key=lambda pc: (round(pc[0].real, 12), round(pc[0].imag, 12)))
        self._poles = tuple(p for p, _ in parts)
        self._parts = tuple(parts)
        self._poly = None

    @classmethod
    def from_parts(cls, parts: Mapping[complex, Sequence[complex]] | Iterable) -> "RationalFn":
        """Build from ``{pole: [c_1, c_2, ...]}`` where ``c_k`` multiplies ``(x - pole)**-k``."""
        items = parts.items() if isinstance(parts, Mapping) else parts
        return cls(
            (pole, k + 1, c) for pole, coefs in items for k, c in enumerate(coefs) if c != 0
        )

    @classmethod
    def zero(cls) -> "RationalFn":
        return cls()

    @classmethod
    def simple(cls, pole: complex, coefficient: complex = 1.0, order: int = 1) -> "RationalFn":
        return cls([(pole, order, coefficient)])

    # -- structure ---------------------------------------------------------
    @property
    def terms(self) -> list[PoleTerm]:
        return [
            PoleTerm(p, k + 1, complex(c))
            for p, cs in self._parts
            for k, c in enumerate(cs)
            if c != 0
        ]

    @property
    def poles(self) -> tuple[complex, ...]:
        return self._poles

    @property
    def parts(self) -> tuple[tuple[complex, np.ndarray], ...]:
        return self._parts

    def order_at(self, pole: complex) -> int:
        for p, c in self._parts:
            if _same_point(p, pole):
                return c.size
        return 0

    def coefficients_at(self, pole: complex) -> np.ndarray:
        for p, c in self._parts:
            if _same_point(p, pole):
                return c
        return np.zeros(0, dtype=complex)

    def is_zero(self) -> bool:
        return not self._parts

    @property
    def is_l2(self) -> bool:
        return all(HalfPlane.of(p) is not HalfPlane.REAL for p in self._poles)

    def require_l2(self, what: str = "function") -> None:
        if not self.is_l2:
            raise NotL2(f"{what} has a pole on the real axis")

    def poles_in(self, half: HalfPlane) -> list[complex]:
        return [p for p in self._poles if HalfPlane.of(p) is half]

    @property
    def scale(self) -> float:
        return max((float(np.max(np.abs(c))) for _, c in self._parts), default=0.0)

    @property
    def residue_total(self) -> complex:
        """Sum of all residues; equals ``lim x f(x)`` as ``x -> infinity``."""
        return complex(sum(c[0] for _, c in self._parts))

    # -- evaluation ----------------------------------------------------------
    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        out = np.zeros_like(x)
        for p, c in self._parts:
            inv = 1.0 / (x - p)
            acc = np.zeros_like(x)
            for ck in c[::-1]:
                acc = (acc + ck) * inv
            out = out + acc
        return out if out.ndim else complex(out)

    def principal_part_value(self, pole: complex, x):
        """Value at ``x`` of the principal part belonging to ``pole``."""
        x = np.asarray(x, dtype=complex)
        c = self.coefficients_at(pole)
        inv = 1.0 / (x - pole)
        acc = np.zeros_like(x)
        for ck in c[::-1]:
            acc = (acc + ck) * inv
        return acc if acc.ndim else complex(acc)

    def taylor(self, a: complex, n: int, skip: complex | None = None) -> np.ndarray:
        """Taylor coefficients at ``a`` (orders ``0..n-1``), omitting the part at ``skip``."""
        out = np.zeros(n, dtype=complex)
        if n <= 0:
            return out
        for p, c in self._parts:
            if skip is not None and _same_point(p, skip):
                continue
            d = a - p
            for k, ck in enumerate(c, start=1):
                if ck != 0:
                    out += ck * _inverse_power_series(d, k, n)
        return out

    # -- algebra ---------------------------------------------------------------
    def _groups(self):
        return [[p, c.copy()] for p, c in self._parts]

    def __add__(self, other):
        if not isinstance(other, RationalFn):
            return NotImplemented
        out = RationalFn.__new__(RationalFn)
        groups = self._groups()
        for q, cq in other._parts:
            for g in groups:
                if _same_point(g[0], q):
                    n = max(g[1].size, cq.size)
                    acc = np.zeros(n, dtype=complex)
                    acc[: g[1].size] += g[1]
                    acc[: cq.size] += cq
                    g[1] = acc
                    break
            else:
                groups.append([q, cq.copy()])
        out._set(groups)
        return out

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        if not isinstance(other, RationalFn):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, RationalFn):
            return _product(self, other)
        try:
            s = _finite(other, "scalar")
        except TypeError:
            return NotImplemented
        out = RationalFn.__new__(RationalFn)
        out._set([[p, c * s] for p, c in self._parts])
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1.0 / complex(other))

    def chop(self, tol: float) -> "RationalFn":
        """Drop coefficients with ``|c| <= tol * scale``."""
        s = self.scale
        out = RationalFn.__new__(RationalFn)
        groups = []
        for p, c in self._parts:
            c = c.copy()
            c[np.abs(c) <= tol * s] = 0
            groups.append([p, c])
        out._set(groups)
        return out

    def conj_on_real(self) -> "RationalFn":
        """The function whose values on the real line are ``conj(f(x))``."""
        out = RationalFn.__new__(RationalFn)
        out._set([[p.conjugate(), np.conj(c)] for p, c in self._parts])
        return out

    def shift_multiply(self, lam: complex) -> tuple[complex, "RationalFn"]:
        """Split ``(x - lam) f(x)`` into its constant limit and a strictly proper rest."""
        lam = complex(lam)
        groups = []
        const = 0j
        for p, c in self._parts:
            m = c.size
            new = np.zeros(m, dtype=complex)
            const += c[0]
            # c_k (x-p)^{-k} (x-p + p-lam) = c_k (x-p)^{-(k-1)} + (p-lam) c_k (x-p)^{-k}
            new[: m - 1] += c[1:]
            new += (p - lam) * c
            groups.append([p, new])
        out = RationalFn.__new__(RationalFn)
        out._set(groups)
        return const, out

    def derivative(self) -> "RationalFn":
        groups = []
        for p, c in self._parts:
            d = np.zeros(c.size + 1, dtype=complex)
            d[1:] = -np.arange(1, c.size + 1) * c
            groups.append([p, d])
        out = RationalFn.__new__(RationalFn)
        out._set(groups)
        return out

    def divide_linear(self, lam: complex) -> "RationalFn":
        """``f(x) / (x - lam)``."""
        return self * RationalFn.simple(lam)

    # -- polynomial form --------------------------------------------------------
    @property
    def numerator(self) -> np.ndarray:
        return self._polyform()[0]

    @property
    def denominator(self) -> np.ndarray:
        return self._polyform()[1]

    def _polyform(self):
        if self._poly is None:
            den = np.array([1.0 + 0j])
            for p, c in self._parts:
                den = np.polymul(den, np.poly([p] * c.size))
            num = np.zeros(1, dtype=complex)
            for i, (p, c) in enumerate(self._parts):
                rest = np.array([1.0 + 0j])
                for j, (q, cq) in enumerate(self._parts):
                    if j != i:
                        rest = np.polymul(rest, np.poly([q] * cq.size))
                m = c.size
                for k, ck in enumerate(c, start=1):
                    if ck != 0:
                        num = np.polyadd(num, ck * np.polymul(rest, np.poly([p] * (m - k))))
            num = np.atleast_1d(np.asarray(num, dtype=complex))
            num.flags.writeable = False
            den.flags.writeable = False
            self._poly = (num, den)
        return self._poly

    # -- misc -------------------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, RationalFn):
            return NotImplemented
        if len(self._parts) != len(other._parts):
            return False
        return all(
            p == q and c.shape == d.shape and np.array_equal(c, d)
            for (p, c), (q, d) in zip(self._parts, other._parts)
        )

    __hash__ = None

    def __repr__(self):
        body = " + ".join(f"({t.coefficient:.6g})/(x-({t.pole:.6g}))^{t.order}" for t in self.terms)
        return f"RationalFn({body or '0'})"

    def to_json(self) -> list[dict]:
        return [
            {"pole": [t.pole.real, t.pole.imag], "order": t.order,
             "coeff": [t.coefficient.real, t.coefficient.imag]}
            for t in self.terms
        ]

    @classmethod
    def from_json(cls, data: Sequence[Mapping]) -> "RationalFn":
        terms = []
        for item in data:
            extra = set(item) - {"pole", "order", "coeff"}
            if extra:
                raise ValueError(f"unknown keys in term: {sorted(extra)}")
            pole = complex(*item["pole"])
            coef = complex(*item["coeff"])
            terms.append((pole, int(item.get("order", 1)), coef))
        return cls(terms)


def _product(f: RationalFn, g: RationalFn) -> RationalFn:
    """Exact partial-fraction product via Laurent expansions at each pole."""
    poles: list[complex] = list(f.poles)
    for q in g.poles:
        if not any(_same_point(q, p) for p in poles):
            poles.append(q)
    groups = []
    for p in poles:
        lf = f.coefficients_at(p)
        lg = g.coefficients_at(p)
        mf, mg = lf.size, lg.size
        tf = f.taylor(p, mg, skip=p)
        tg = g.taylor(p, mf, skip=p)
        r = np.zeros(mf + mg, dtype=complex)
        for i in range(1, mf + 1):
            for j in range(1, mg + 1):
                r[i + j - 1] += lf[i - 1] * lg[j - 1]
            for n in range(0, i):
                r[i - n - 1] += lf[i - 1] * tg[n]
        for j in range(1, mg + 1):
            for n in range(0, j):
                r[j - n - 1] += lg[j - 1] * tf[n]
        groups.append([p, r])
    out = RationalFn.__new__(RationalFn)
    out._set(groups)
    return out


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

def _trim(coeffs) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        return np.zeros(0, dtype=complex)
    return c[nz[0]:]


def _taylor_at(c: np.ndarray, a: complex, n: int) -> np.ndarray:
    """First ``n`` Taylor coefficients of the descending polynomial ``c`` at ``a``."""
    out = np.zeros(n, dtype=complex)
    work = np.array(c, dtype=complex)
    for k in range(n):
        if work.size == 0:
            break
        # synthetic division by (x - a)
        q = np.empty(work.size, dtype=complex)
        acc = 0j
        for i, ci in enumerate(work):
            acc = acc * a + ci
            q[i] = acc
        out[k] = q[-1]
        work = q[:-1]
    return out


def _multiple_root_ok(c: np.ndarray, center: complex, m: int) -> bool:
    """Whether the first ``m`` Taylor coefficients at ``center`` vanish to rounding level."""
    b = _taylor_at(c, center, m)
    e = _taylor_at(np.abs(c), abs(center), m).real
    return bool(np.all(np.abs(b) <= 1e4 * _EPS * np.maximum(e, _EPS)))


def poly_roots(coeffs) -> list[tuple[complex, int]]:
    """Roots of a complex polynomial with multiplicities.

    Companion-matrix eigenvalues (LAPACK balances the matrix) are clustered:
    roots within ``POLE_CLUSTER_TOL`` are merged, and looser clusters are
    merged when the polynomial's Taylor coefficients at the centroid confirm
    a multiple root. Simple roots then get one Newton polish.

    Parameters
    ----------
    coeffs : sequence of complex
        Descending coefficients.

    Returns
    -------
    list of (root, multiplicity)
    """
    c = _trim(coeffs)
    if c.size == 0:
        raise ZeroPolynomial("all coefficients are zero")
    n = c.size - 1
    if n == 0:
        return []
    a = c / c[0]
    comp = np.zeros((n, n), dtype=complex)
    comp[0, :] = -a[1:]
    if n > 1:
        comp[np.arange(1, n), np.arange(0, n - 1)] = 1.0
    roots = scipy.linalg.eigvals(comp)

    # tight clusters
    clusters: list[list[complex]] = []
    for r in sorted((complex(r) for r in roots), key=lambda z: (z.real, z.imag)):
        for cl in clusters:
            if any(_same_point(r, s) for s in cl):
                cl.append(r)
                break
        else:
            clusters.append([r])

    # loose clusters (single linkage) confirmed by Taylor coefficients
    groups: list[list[list[complex]]] = []
    for cl in clusters:
        centre = np.mean(cl)
        hits = [g for g in groups if any(_same_point(centre, np.mean(o), LOOSE_CLUSTER_TOL) for o in g)]
        for g in hits:
            groups.remove(g)
        groups.append(sum(hits, []) + [cl])
    final: list[list[complex]] = []
    for g in groups:
        union = [r for cl in g for r in cl]
        if len(g) > 1 and _multiple_root_ok(c, complex(np.mean(union)), len(union)):
            final.append(union)
        else:
            final.extend(g)

    # Newton polish for simple roots only; it would scatter a cluster centroid
    dc = np.polyder(c)
    out = []
    for cl in final:
        r = complex(np.mean(cl))
        if len(cl) == 1:
            pr, dpr = np.polyval(c, r), np.polyval(dc, r)
            if dpr != 0:
                cand = r - pr / dpr
                if abs(np.polyval(c, cand)) < abs(pr):
                    r = complex(cand)
        out.append((r, len(cl)))
    return out


def _series_divide(num: np.ndarray, den: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        acc = num[k] if k < num.size else 0j
        for j in range(1, min(k, den.size - 1) + 1):
            acc -= den[j] * out[k - j]
        out[k] = acc / den[0]
    return out


def partial_fractions_from_roots(numerator, leading: complex, roots: Sequence[tuple[complex, int]]) -> RationalFn:
    """Partial fractions of ``numerator / (leading * prod (x - r)**m)``.

    The caller supplies the factorisation of the denominator; principal parts
    are obtained from Taylor series at each root.
    """
    num = _trim(numerator)
    if num.size == 0:
        return RationalFn()
    deg_den = sum(m for _, m in roots)
    if num.size - 1 >= deg_den:
        raise NotStrictlyProper("numerator degree must be below denominator degree")
    groups = []
    for i, (p, m) in enumerate(roots):
        q = np.zeros(m, dtype=complex)
        q[0] = 1.0
        for j, (r, mr) in enumerate(roots):
            if j == i:
                continue
            d = p - r
            # (d + h)^mr, truncated
            fac = np.array([math.comb(mr, k) * d ** (mr - k) for k in range(min(mr, m - 1) + 1)], dtype=complex)
            q = np.convolve(q, fac)[:m]
        tn = _taylor_at(num, p, m)
        a = _series_divide(tn, q, m) / leading
        # a_k multiplies (x-p)^{k-m}
        groups.append([p, a[::-1]])
    out = RationalFn.__new__(RationalFn)
    out._set(groups)
    return out


def partial_fractions(numerator, denominator) -> RationalFn:
    """Partial-fraction decomposition of ``numerator / denominator``.

    Raises
    ------
    NotStrictlyProper
        If ``deg numerator >= deg denominator``.
    """
    den = _trim(denominator)
    if den.size == 0:
        raise ZeroPolynomial("zero denominator")
    num = _trim(numerator)
    if num.size == 0:
        return RationalFn()
    if num.size >= den.size:
        raise NotStrictlyProper(
            f"degree {num.size - 1} numerator over degree {den.size - 1} denominator"
        )
    return partial_fractions_from_roots(num, den[0], poly_roots(den))


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def conj_on_real(f: RationalFn) -> RationalFn:
    return f.conj_on_real()


def _residue_against(f: RationalFn, pole: complex, lam: complex) -> complex:
    """Residue at ``pole`` of ``f(t) / (t - lam)`` (``lam`` distinct from ``pole``)."""
    c = f.coefficients_at(pole)
    d = pole - lam
    return complex(sum(ck * (-1) ** (k - 1) / d ** k for k, ck in enumerate(c, start=1)))


def _closures(f: RationalFn, lam: complex) -> tuple[complex, complex]:
    side = HalfPlane.of(lam)
    if any(_same_point(p, lam) for p in f.poles):
        # lam sits on a pole of f: take residues of the merged product instead
        h = f * RationalFn.simple(lam)
        up = sum((h.coefficients_at(p)[0] for p in h.poles_in(HalfPlane.UPPER)), 0j)
        down = sum((h.coefficients_at(p)[0] for p in h.poles_in(HalfPlane.LOWER)), 0j)
        return TWO_PI_I * up, -TWO_PI_I * down
    up = sum((_residue_against(f, p, lam) for p in f.poles_in(HalfPlane.UPPER)), 0j)
    down = sum((_residue_against(f, p, lam) for p in f.poles_in(HalfPlane.LOWER)), 0j)
    f_lam = complex(f(lam)) if not f.is_zero() else 0j
    if side is HalfPlane.UPPER:
        return TWO_PI_I * (up + f_lam), -TWO_PI_I * down
    return TWO_PI_I * up, -TWO_PI_I * (down + f_lam)


def cauchy_transform(f: RationalFn, lam: complex, check: bool = False) -> complex:
    """``int_R f(t) / (t - lam) dt`` for non-real ``lam`` by residues.

    With ``check=True`` the contour is closed both above and below and the two
    values must agree to ``CLOSURE_TOL`` (relative).
    """
    lam = _finite(lam, "lambda")
    f.require_l2()
    if HalfPlane.of(lam) is HalfPlane.REAL:
        raise BoundaryEvaluationRequiresSide(f"lambda={lam} is real; use boundary_cauchy")
    upper, lower = _closures(f, lam)
    if check:
        _check_agree(upper, lower, f)
    return upper


def _check_agree(a: complex, b: complex, f: RationalFn) -> None:
    scale = max(abs(a), abs(b), f.scale, 1e-300)
    if abs(a - b) > CLOSURE_TOL * scale:
        raise ClosureMismatch(f"closures disagree: {a} vs {b}")


def boundary_cauchy(f: RationalFn, k: float, side: HalfPlane) -> complex:
    """Boundary value of the Cauchy transform at ``k + i0`` (Upper) or ``k - i0`` (Lower)."""
    if side is HalfPlane.REAL or not isinstance(side, HalfPlane):
        raise InvalidSide("side must be HalfPlane.UPPER or HalfPlane.LOWER")
    f.require_l2()
    k = float(k)
    up = sum((_residue_against(f, p, k) for p in f.poles_in(HalfPlane.UPPER)), 0j)
    if side is HalfPlane.UPPER:
        return TWO_PI_I * (up + complex(f(k) if not f.is_zero() else 0j))
    return TWO_PI_I * up


def riesz_project(f: RationalFn, sign: int) -> RationalFn:
    """Riesz projection onto H2+ (``sign=+1``: poles below) or H2- (``sign=-1``)."""
    f.require_l2()
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    keep = HalfPlane.LOWER if sign == 1 else HalfPlane.UPPER
    out = RationalFn.__new__(RationalFn)
    out._set([[p, c.copy()] for p, c in f.parts if HalfPlane.of(p) is keep])
    return out


def integral(h: RationalFn, check: bool = False) -> complex:
    """``int_R h`` for ``h`` decaying at least like ``1/x**2``."""
    h.require_l2()
    up = sum((h.coefficients_at(p)[0] for p in h.poles_in(HalfPlane.UPPER)), 0j)
    down = sum((h.coefficients_at(p)[0] for p in h.poles_in(HalfPlane.LOWER)), 0j)
    if check:
        _check_agree(TWO_PI_I * up, -TWO_PI_I * down, h)
    return complex(TWO_PI_I * up)


def inner_product(f: RationalFn, g: RationalFn, check: bool = False) -> complex:
    """``<f, g> = int f(t) conj(g(t)) dt``."""
    f.require_l2("f")
    g.require_l2("g")
    if f.is_zero() or g.is_zero():
        return 0j
    return integral(f * g.conj_on_real(), check=check)


def norm(f: RationalFn) -> float:
    return math.sqrt(max(inner_product(f, f).real, 0.0))


def trace_gamma2(u: RationalFn) -> complex:
    """``lim x u(x)`` at infinity: the sum of residues of ``u``."""
    if not u.is_l2:
        raise NotInDomain("u has a real pole")
    return u.residue_total


def trace_gamma1(u: RationalFn, check: bool = False) -> complex:
    """Symmetric principal value ``lim_R int_{-R}^{R} u``.

    ``u - c_u x/(x^2+1)`` decays like ``1/x**2`` and the odd part integrates to
    zero over symmetric intervals, so only residues of the remainder enter.
    """
    if not u.is_l2:
        raise NotInDomain("u has a real pole")
    cu = u.residue_total
    up = sum((u.coefficients_at(p)[0] for p in u.poles_in(HalfPlane.UPPER)), 0j) - cu / 2
    val = TWO_PI_I * up
    if check:
        down = sum((u.coefficients_at(p)[0] for p in u.poles_in(HalfPlane.LOWER)), 0j) - cu / 2
        _check_agree(val, -TWO_PI_I * down, u)
    return complex(val)


def collinearity_residual(f: RationalFn, g: RationalFn) -> float:
    """Relative least-squares residual of ``f ~ c g`` over partial-fraction coefficients."""
    poles: list[complex] = list(f.poles)
    for q in g.poles:
        if not any(_same_point(q, p) for p in poles):
            poles.append(q)
    a, b = [], []
    for p in poles:
        cf, cg = f.coefficients_at(p), g.coefficients_at(p)
        n = max(cf.size, cg.size)
        a.extend(np.pad(cf, (0, n - cf.size)))
        b.extend(np.pad(cg, (0, n - cg.size)))
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    na = np.linalg.norm(a)
    if na == 0:
        return 0.0 if np.linalg.norm(b) == 0 else 1.0
    nb2 = np.vdot(b, b).real
    if nb2 == 0:
        return 1.0
    c = np.vdot(b, a) / nb2
    return float(np.linalg.norm(a - c * b) / na)
