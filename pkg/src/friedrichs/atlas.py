"""Coupling-plane atlas: where the continued determinant has a real zero.

``D_+(lam) = 1 - 2 pi i alpha xi(lam)`` with ``xi(lam) = sum_k a_k / (z_k - lam)``,
so ``D_+`` has a real zero exactly when ``mu = 1 / (2 pi i alpha)`` lies on the
closed curve ``xi(R u {inf})``. That curve cuts the plane into components of
constant defect. This module samples the curve, finds the components on a
raster and labels each one with an exact defect evaluation.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.ndimage

from friedrichs.core import FriedrichsModel, check_continuation_hypotheses, d_plus_continuation, weights
from friedrichs.detect import defect_Hplus
from friedrichs.errors import DegenerateLocus, RegionResolutionTooCoarse, UnsupportedPsiPole, WrongCase, ContinuationUnavailable
from friedrichs.rational import HalfPlane, RationalFn, poly_roots

TWO_PI_I = 2j * math.pi


class Plane(enum.Enum):
    ALPHA = "alpha"
    INV_ALPHA = "inv_alpha"
    MU = "mu"

    def from_mu(self, mu):
        mu = np.asarray(mu, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self is Plane.MU:
                out = mu.copy()
            elif self is Plane.INV_ALPHA:
                out = TWO_PI_I * mu
            else:
                out = 1.0 / (TWO_PI_I * mu)
        return out if out.ndim else complex(out)

    def to_mu(self, p):
        p = np.asarray(p, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self is Plane.MU:
                out = p.copy()
            elif self is Plane.INV_ALPHA:
                out = p / TWO_PI_I
            else:
                out = 1.0 / (TWO_PI_I * p)
        return out if out.ndim else complex(out)

    def to_alpha(self, p) -> complex:
        p = complex(p)
        if self is Plane.ALPHA:
            return p
        if self is Plane.INV_ALPHA:
            return 1.0 / p
        return 1.0 / (TWO_PI_I * p)


@dataclass(frozen=True)
class Region:
    point: complex
    defect: int
    nu_minus: int
    label: int
    cells: int

    def to_dict(self) -> dict:
        return {
            "point": [self.point.real, self.point.imag],
            "defect": self.defect,
            "nu_minus": self.nu_minus,
            "label": self.label,
            "cells": self.cells,
        }


@dataclass(frozen=True)
class CurveAtlas:
    """Sampled locus (as polylines) plus labelled regions in one parameter plane."""

    plane: Plane
    branches: tuple[np.ndarray, ...]
    params: tuple[np.ndarray, ...]
    xi_data: tuple[tuple[complex, complex], ...]
    bounds: tuple[float, float, float, float]
    plot_tol: float
    regions: tuple[Region, ...] = ()
    unresolved: int = 0

    @property
    def locus(self) -> np.ndarray:
        if not self.branches:
            return np.zeros(0, dtype=complex)
        return np.concatenate(self.branches)

    @property
    def locus_params(self) -> np.ndarray:
        if not self.params:
            return np.zeros(0)
        return np.concatenate(self.params)

    def xi(self, lam):
        return evaluate_xi(self.xi_data, lam)

    def with_regions(self, regions: Sequence[Region], unresolved: int = 0) -> "CurveAtlas":
        return CurveAtlas(self.plane, self.branches, self.params, self.xi_data,
                          self.bounds, self.plot_tol, tuple(regions), unresolved)

    def to_dict(self) -> dict:
        return {
            "plane": self.plane.value,
            "bounds": list(self.bounds),
            "plot_tol": self.plot_tol,
            "xi_data": [{"a": [a.real, a.imag], "z": [z.real, z.imag]} for a, z in self.xi_data],
            "locus": [[[p.real, p.imag] for p in b] for b in self.branches],
            "regions": [r.to_dict() for r in self.regions],
        }

    @classmethod
    def empty(cls, plane: Plane = Plane.MU) -> "CurveAtlas":
        return cls(plane, (), (), (), (-1.0, 1.0, -1.0, 1.0), 1e-3)


def xi_data(model: FriedrichsModel) -> tuple[tuple[complex, complex], ...]:
    """Pairs ``(a_k, z_k)`` with ``a_k = c_k conj(phi)(z_k) != 0``."""
    for p, c in model.psi.parts:
        if c.size > 1:
            raise UnsupportedPsiPole(f"psi has a pole of order {c.size} at {p}")
    try:
        check_continuation_hypotheses(model)
    except ContinuationUnavailable as exc:
        raise WrongCase(str(exc)) from exc
    return tuple((a, z) for z, a in weights(model) if a != 0)


def evaluate_xi(data, lam):
    lam = np.asarray(lam, dtype=complex)
    out = np.zeros(lam.shape, dtype=complex)
    finite = np.isfinite(lam)
    for a, z in data:
        out[finite] += a / (z - lam[finite])
    return out if out.ndim else complex(out)


def covering_multiplicity(data, mu: complex, tol: float = 1e-6) -> int:
    """Number of real ``lam`` with ``xi(lam) = mu`` (roots of a polynomial)."""
    if not data:
        return 0
    # sum_k a_k prod_{j != k}(z_j - lam) - mu prod_j (z_j - lam) = 0, in powers of lam
    poly = np.zeros(1, dtype=complex)
    full = np.array([1.0 + 0j])
    for _, z in data:
        full = np.polymul(full, np.array([-1.0, z]))
    for k, (a, _) in enumerate(data):
        part = np.array([a], dtype=complex)
        for j, (_, z) in enumerate(data):
            if j != k:
                part = np.polymul(part, np.array([-1.0, z]))
        poly = np.polyadd(poly, part)
    poly = np.polyadd(poly, -complex(mu) * full)
    nz = np.nonzero(np.abs(poly) > 1e-14 * np.max(np.abs(poly)))[0]
    if nz.size == 0:
        return 0
    roots = poly_roots(poly[nz[0]:])
    return sum(m for r, m in roots if abs(r.imag) <= tol * max(1.0, abs(r)))


def _window_mask(p: np.ndarray, bounds, pad: float) -> np.ndarray:
    x0, x1, y0, y1 = bounds
    dx, dy = (x1 - x0) * pad, (y1 - y0) * pad
    return (
        np.isfinite(p)
        & (p.real >= x0 - dx) & (p.real <= x1 + dx)
        & (p.imag >= y0 - dy) & (p.imag <= y1 + dy)
    )


def real_root_locus(
    model: FriedrichsModel,
    plane: Plane | str = Plane.MU,
    bounds: tuple[float, float, float, float] | None = None,
    plot_tol: float | None = None,
    initial: int = 513,
    max_points: int = 400_000,
) -> CurveAtlas:
    """Sample ``xi(R)`` adaptively in ``lam = tan(theta)`` until segments are below ``plot_tol``.

    Parameters
    ----------
    plane : Plane or str
        Target plane. ``alpha`` is unbounded near ``xi = 0`` and requires ``bounds``.
    bounds : (xmin, xmax, ymin, ymax), optional
        Window. Refinement is restricted to segments touching it.
    plot_tol : float, optional
        Maximum segment length; defaults to ``1e-3`` of the window diagonal.
    """
    plane = Plane(plane)
    data = xi_data(model)
    if not data:
        raise DegenerateLocus("all weights a_k vanish; the locus is the single point 0")
    if plane is Plane.ALPHA and bounds is None:
        raise ValueError("the alpha plane is unbounded; pass explicit bounds")

    theta = np.linspace(-0.5 * math.pi, 0.5 * math.pi, initial)

    def params_of(th):
        lam = np.tan(th)
        lam[th <= -0.5 * math.pi] = -np.inf
        lam[th >= 0.5 * math.pi] = np.inf
        return lam

    def points(th):
        return plane.from_mu(evaluate_xi(data, params_of(th)))

    pts = points(theta)
    if bounds is None:
        fin = pts[np.isfinite(pts)]
        x0, x1 = float(fin.real.min()), float(fin.real.max())
        y0, y1 = float(fin.imag.min()), float(fin.imag.max())
        span = max(x1 - x0, y1 - y0, 1e-12)
        bounds = (x0 - 0.2 * span, x1 + 0.2 * span, y0 - 0.2 * span, y1 + 0.2 * span)
    diag = math.hypot(bounds[1] - bounds[0], bounds[3] - bounds[2])
    tol = 1e-3 * diag if plot_tol is None else float(plot_tol)

    while True:
        inside = _window_mask(pts, bounds, 0.1)
        seg = np.abs(np.diff(pts))
        seg[~np.isfinite(seg)] = np.inf
        visible = inside[:-1] | inside[1:]
        need = visible & (seg > tol) & (np.diff(theta) > 1e-13)
        if not np.any(need):
            break
        if theta.size + int(np.sum(need)) > max_points:
            raise RegionResolutionTooCoarse("locus sampling exceeded the point budget; raise plot_tol")
        mids = 0.5 * (theta[:-1][need] + theta[1:][need])
        order = np.argsort(np.concatenate([theta, mids]), kind="stable")
        theta = np.concatenate([theta, mids])[order]
        pts = np.concatenate([pts, points(mids)])[order]

    lam = params_of(theta)
    keep = _window_mask(pts, bounds, 0.1)
    branches, params = [], []
    start = None
    for i in range(pts.size + 1):
        if i < pts.size and keep[i]:
            if start is None:
                start = i
        elif start is not None:
            if i - start >= 2:
                branches.append(pts[start:i].copy())
                params.append(lam[start:i].copy())
            start = None
    return CurveAtlas(plane, tuple(branches), tuple(params), data, tuple(float(b) for b in bounds), tol)


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Raster:
    bounds: tuple[float, float, float, float]
    nx: int
    ny: int

    @property
    def dx(self) -> float:
        return (self.bounds[1] - self.bounds[0]) / self.nx

    @property
    def dy(self) -> float:
        return (self.bounds[3] - self.bounds[2]) / self.ny

    def centre(self, i: int, j: int) -> complex:
        return complex(self.bounds[0] + (j + 0.5) * self.dx, self.bounds[2] + (i + 0.5) * self.dy)

    def cells_of(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        j = np.floor((p.real - self.bounds[0]) / self.dx).astype(int)
        i = np.floor((p.imag - self.bounds[2]) / self.dy).astype(int)
        return i, j


def rasterize(atlas: CurveAtlas, raster: Raster) -> np.ndarray:
    barrier = np.zeros((raster.ny, raster.nx), dtype=bool)
    step = 0.25 * min(raster.dx, raster.dy)
    for b in atlas.branches:
        a, c = b[:-1], b[1:]
        n = np.maximum(1, np.ceil(np.abs(c - a) / step).astype(int))
        total = int(n.sum())
        seg = np.repeat(np.arange(a.size), n)
        offs = np.arange(total) - np.repeat(np.cumsum(n) - n, n)
        t = offs / np.repeat(n, n)
        pts = np.concatenate([a[seg] + t * (c[seg] - a[seg]), b[-1:]])
        i, j = raster.cells_of(pts)
        ok = (i >= 0) & (i < raster.ny) & (j >= 0) & (j < raster.nx)
        barrier[i[ok], j[ok]] = True
    return barrier


def defect_at(model: FriedrichsModel, plane: Plane, p: complex) -> tuple[int, int]:
    """``(defect, number of zeros of D_+ in the lower half-plane)`` at a plane point."""
    m = model.with_(alpha=plane.to_alpha(p))
    rep = defect_Hplus(m)
    dplus = d_plus_continuation(m)
    nu = sum(mult for r, mult in dplus.zeros() if HalfPlane.of(r) is HalfPlane.LOWER) if not dplus.rational.is_zero() else 0
    return int(rep.defect), int(nu)


def region_defects(
    model: FriedrichsModel,
    atlas: CurveAtlas,
    resolution: int = 600,
    samples_per_region: int = 3,
    min_clearance: float = 2.0,
) -> CurveAtlas:
    """Flood-fill the complement of the rasterised locus and label each component.

    Each component is probed at up to ``samples_per_region`` cells at least
    ``min_clearance`` cells away from the locus; all probes must agree.

    Raises
    ------
    RegionResolutionTooCoarse
        Probes in one component disagree.
    """
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    raster = Raster(atlas.bounds, resolution, resolution)
    barrier = rasterize(atlas, raster)
    labels, count = scipy.ndimage.label(~barrier)
    clearance = scipy.ndimage.distance_transform_edt(~barrier)
    regions = []
    unresolved = 0
    for lab in range(1, count + 1):
        idx = np.flatnonzero((labels == lab).ravel())
        clear = clearance.ravel()[idx]
        good = idx[clear >= min_clearance]
        if good.size == 0:
            unresolved += 1
            continue
        best = int(idx[np.argmax(clear)])
        picks = [best]
        if samples_per_region > 1 and good.size > 1:
            extra = good[np.linspace(0, good.size - 1, samples_per_region - 1).astype(int)]
            picks.extend(int(e) for e in extra if int(e) != best)
        results = []
        for flat in picks:
            i, j = divmod(flat, raster.nx)
            results.append(defect_at(model, atlas.plane, raster.centre(i, j)))
        defects = {d for d, _ in results}
        if len(defects) != 1:
            raise RegionResolutionTooCoarse(f"component {lab} has defects {sorted(defects)}")
        i, j = divmod(best, raster.nx)
        regions.append(Region(raster.centre(i, j), results[0][0], results[0][1], lab, int(idx.size)))
    regions.sort(key=lambda r: (-r.cells, r.point.real, r.point.imag))
    return atlas.with_regions(regions, unresolved)


@dataclass(frozen=True)
class Crossing:
    on_locus: complex
    lam: float
    inner: complex
    outer: complex
    defect_jump: int
    multiplicity: int


def crossing_test(model: FriedrichsModel, atlas: CurveAtlas, lam: float, offset: float | None = None) -> Crossing:
    """Defects on both sides of the locus at ``xi(lam)`` along the local normal."""
    plane = atlas.plane
    h = 1e-6 * max(1.0, abs(lam))
    p0 = complex(plane.from_mu(atlas.xi(lam)))
    tangent = complex(plane.from_mu(atlas.xi(lam + h))) - complex(plane.from_mu(atlas.xi(lam - h)))
    if tangent == 0:
        raise DegenerateLocus("locus has a stationary point here")
    normal = 1j * tangent / abs(tangent)
    diag = math.hypot(atlas.bounds[1] - atlas.bounds[0], atlas.bounds[3] - atlas.bounds[2])
    delta = 1e-3 * diag if offset is None else offset
    a, b = p0 + delta * normal, p0 - delta * normal
    da, _ = defect_at(model, plane, a)
    db, _ = defect_at(model, plane, b)
    mult = covering_multiplicity(atlas.xi_data, complex(plane.to_mu(p0)))
    return Crossing(p0, float(lam), a, b, abs(da - db), mult)


# ---------------------------------------------------------------------------
# Figure-2 data
# ---------------------------------------------------------------------------

FIG2_REAL_ROOTS = (0.0, 1.0, -2.0)
FIG2_POLES = (-1j, 1 - 1j, -2 - 1j, 3 - 2j)
FIG2_LAST_WEIGHT = 1.0
FIG2_PHI_POLE = -1j  # phi = 1/(x + i), so conj(phi) = 1/(x - i)


def figure2_weights() -> tuple[np.ndarray, np.ndarray]:
    """Weights ``a_k`` making ``xi`` vanish at the three prescribed real points, and the matrix used."""
    z = np.asarray(FIG2_POLES)
    lam = np.asarray(FIG2_REAL_ROOTS)
    Z = 1.0 / (z[None, :-1] - lam[:, None])
    rhs = -FIG2_LAST_WEIGHT / (z[-1] - lam)
    if abs(np.linalg.det(Z)) < 1e-12:
        raise ArithmeticError("singular weight system")
    a = np.linalg.solve(Z, rhs)
    return np.concatenate([a, [FIG2_LAST_WEIGHT]]), Z


def figure2_model(alpha: complex = 1.0) -> FriedrichsModel:
    a, _ = figure2_weights()
    phi = RationalFn.simple(FIG2_PHI_POLE)
    phibar_pole = np.conj(FIG2_PHI_POLE)
    psi = RationalFn([(z, 1, ak * (z - phibar_pole)) for z, ak in zip(FIG2_POLES, a)])
    return FriedrichsModel(phi=phi, psi=psi, B=0, alpha=alpha)


def figure2_harness(resolution: int = 600, bounds=None, plot_tol: float | None = None) -> CurveAtlas:
    """Four-petal atlas in the ``1/alpha`` plane with every region labelled."""
    model = figure2_model()
    atlas = real_root_locus(model, Plane.INV_ALPHA, bounds=bounds, plot_tol=plot_tol)
    return region_defects(model, atlas, resolution=resolution)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def to_svg(atlas: CurveAtlas, size: int = 800, margin: int = 20) -> str:
    x0, x1, y0, y1 = atlas.bounds
    span = max(x1 - x0, y1 - y0, 1e-300)
    scale = (size - 2 * margin) / span

    def xy(p: complex) -> str:
        return f"{_fmt(margin + (p.real - x0) * scale)},{_fmt(size - margin - (p.imag - y0) * scale)}"

    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
              f'viewBox="0 0 {size} {size}">\n')
    out.write(f'<title>real-root locus ({atlas.plane.value} plane)</title>\n')
    out.write(f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>\n')
    for b in atlas.branches:
        d = "M " + " L ".join(xy(complex(p)) for p in b)
        out.write(f'<path d="{d}" fill="none" stroke="black" stroke-width="1"/>\n')
    for r in atlas.regions:
        x, y = xy(r.point).split(",")
        out.write(f'<text x="{x}" y="{y}" font-size="14" text-anchor="middle">{r.defect}</text>\n')
    out.write("</svg>\n")
    return out.getvalue()


def to_csv(atlas: CurveAtlas) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["plane_re", "plane_im", "kind", "defect"])
    for p in atlas.locus:
        w.writerow([repr(float(p.real)), repr(float(p.imag)), "locus", ""])
    for r in atlas.regions:
        w.writerow([repr(r.point.real), repr(r.point.imag), "region", r.defect])
    return buf.getvalue()


def to_json(atlas: CurveAtlas) -> str:
    return json.dumps(atlas.to_dict(), indent=1, sort_keys=True) + "\n"


def export(atlas: CurveAtlas, fmt: str, path: str | Path) -> None:
    """Write ``atlas`` as ``svg``, ``csv`` or ``json``; raises ``OSError`` on I/O failure."""
    writers = {"svg": to_svg, "csv": to_csv, "json": to_json}
    if fmt not in writers:
        raise ValueError(f"unknown format {fmt!r}")
    text = writers[fmt](atlas)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
