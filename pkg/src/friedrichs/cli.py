"""Command-line front end.

Exit codes: 0 success, 1 ran but disagreed beyond tolerance, 2 typed
mathematical refusal, 64 usage or malformed input, 74 I/O failure.
Complex numbers appear as ``[re, im]`` in every JSON document.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

from friedrichs import atlas as atlas_mod
from friedrichs.core import FriedrichsModel, d_function, m_function
from friedrichs.detect import defect_Hplus, defect_mixed, sperp_basis
from friedrichs.errors import FriedrichsError, WrongCase
from friedrichs.oracle import build_system
from friedrichs.reconstruct import HiddenModelProvider, compare_with_model, reconstruct

EXIT_OK = 0
EXIT_DISAGREE = 1
EXIT_REFUSED = 2
EXIT_USAGE = 64
EXIT_IO = 74

MODEL_KEYS = {"phi", "psi", "B", "alpha", "alpha_sweep"}
SWEEP_KEYS = {"plane", "bounds", "resolution"}
RECONSTRUCT_TOL = 1e-4


def load_schema(name: str) -> dict:
    """Shipped JSON schema for ``model``, ``mfun``, ``defect``, ``petal``, ``oracle``, ``reconstruct`` or ``atlas``."""
    text = resources.files("friedrichs").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _complex_arg(text: str) -> complex:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected re,im but got {text!r}") from None
    if len(parts) != 2 or not all(math.isfinite(p) for p in parts):
        raise argparse.ArgumentTypeError(f"expected re,im but got {text!r}")
    return complex(parts[0], parts[1])


def _bounds_arg(text: str) -> tuple[float, float, float, float]:
    try:
        vals = tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected xmin,xmax,ymin,ymax but got {text!r}") from None
    if len(vals) != 4:
        raise argparse.ArgumentTypeError(f"expected xmin,xmax,ymin,ymax but got {text!r}")
    return vals  # type: ignore[return-value]


def _check_bounds(bounds) -> tuple[float, float, float, float]:
    if len(bounds) != 4 or not all(math.isfinite(float(b)) for b in bounds):
        raise UsageError("bounds must be four finite numbers")
    x0, x1, y0, y1 = (float(b) for b in bounds)
    if not (x1 > x0 and y1 > y0):
        raise UsageError("sweep bounds are empty")
    return x0, x1, y0, y1


# ---------------------------------------------------------------------------
# model files
# ---------------------------------------------------------------------------

def parse_model_document(doc: Any) -> tuple[FriedrichsModel, dict | None]:
    """Validate a model document; returns the model and the optional sweep block."""
    if not isinstance(doc, dict):
        raise UsageError("model file must hold a JSON object")
    extra = set(doc) - MODEL_KEYS
    if extra:
        raise UsageError(f"unknown model keys: {sorted(extra)}")
    sweep = doc.get("alpha_sweep")
    if sweep is not None:
        if not isinstance(sweep, dict):
            raise UsageError("alpha_sweep must be an object")
        extra = set(sweep) - SWEEP_KEYS
        if extra:
            raise UsageError(f"unknown alpha_sweep keys: {sorted(extra)}")
        if "plane" in sweep:
            try:
                atlas_mod.Plane(sweep["plane"])
            except ValueError:
                raise UsageError(f"unknown plane {sweep['plane']!r}") from None
        if "bounds" in sweep:
            _check_bounds(sweep["bounds"])
        if "resolution" in sweep and (not isinstance(sweep["resolution"], int) or sweep["resolution"] < 16):
            raise UsageError("resolution must be an integer >= 16")
    for key in ("B", "alpha"):
        if key in doc:
            v = doc[key]
            if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v)):
                raise UsageError(f"{key} must be [re, im]")
    try:
        model = FriedrichsModel.from_dict({k: v for k, v in doc.items() if k != "alpha_sweep"})
    except FriedrichsError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed model: {exc}") from None
    return model, sweep


def model_document(model: FriedrichsModel, sweep: dict | None = None) -> dict:
    doc = model.to_dict()
    if sweep is not None:
        doc["alpha_sweep"] = sweep
    return doc


def load_model(path: str) -> tuple[FriedrichsModel, dict | None]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not valid JSON ({exc})") from None
    return parse_model_document(doc)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _human(obj: Any, prefix: str = "") -> list[str]:
    """Flatten to ``key = value`` lines; leaf values use the same JSON encoding."""
    if isinstance(obj, dict):
        lines = []
        for k, v in obj.items():
            lines.extend(_human(v, f"{prefix}{k}."))
        return lines
    if isinstance(obj, list) and obj and all(isinstance(v, dict) for v in obj):
        lines = []
        for i, v in enumerate(obj):
            lines.extend(_human(v, f"{prefix}{i}."))
        return lines
    return [f"{prefix[:-1]} = {json.dumps(obj)}"]


def emit(payload: dict, as_json: bool, stream=None) -> None:
    stream = stream or sys.stdout
    if as_json:
        stream.write(json.dumps(payload, indent=1) + "\n")
    else:
        stream.write("\n".join(_human(payload)) + "\n")


def refusal(exc: FriedrichsError) -> dict:
    return {"reason": exc.reason, "message": str(exc)}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def analytic_defect(model: FriedrichsModel):
    """Defect report from whichever pole configuration the model is in."""
    try:
        return defect_Hplus(model)
    except WrongCase:
        return defect_mixed(model)


def cmd_mfun(args) -> int:
    model, _ = load_model(args.model)
    records = []
    for lam in args.lambdas:
        if lam.imag == 0:
            raise UsageError(f"lambda={lam.real} is on the real axis")
    for lam in args.lambdas:
        try:
            m = m_function(model, lam)
        except FriedrichsError as exc:
            emit({"records": records, "error": refusal(exc) | {"lambda": _pair(lam)}}, args.json)
            return EXIT_REFUSED
        records.append({"lambda": _pair(lam), "M": _pair(m.value), "D": _pair(d_function(model, lam))})
    emit({"records": records}, args.json)
    return EXIT_OK


def cmd_defect(args) -> int:
    model, _ = load_model(args.model)
    try:
        report = analytic_defect(model)
        payload = report.to_dict()
        if args.sperp:
            basis = sperp_basis(model, report) if report.case == "hplus" and not report.infinite else None
            payload["sperp"] = [] if basis is None else [g.to_json() for g in basis.vectors]
    except FriedrichsError as exc:
        emit({"error": refusal(exc)}, args.json)
        return EXIT_REFUSED
    emit(payload, args.json)
    return EXIT_OK


def cmd_petal(args) -> int:
    if args.builtin:
        model, sweep = atlas_mod.figure2_model(), {"plane": "inv_alpha"}
    elif args.model:
        model, sweep = load_model(args.model)
        sweep = sweep or {}
    else:
        raise UsageError("give a model file or --builtin")
    plane = atlas_mod.Plane(args.plane or sweep.get("plane", "mu"))
    bounds = args.bounds if args.bounds is not None else sweep.get("bounds")
    if bounds is not None:
        bounds = _check_bounds(bounds)
    elif plane is atlas_mod.Plane.ALPHA:
        raise UsageError("the alpha plane needs explicit bounds")
    resolution = args.grid or sweep.get("resolution", 600)
    fmt = args.format or Path(args.out).suffix.lstrip(".").lower()
    if fmt not in ("svg", "csv", "json"):
        raise UsageError(f"cannot infer output format from {args.out!r}")
    try:
        curve = atlas_mod.real_root_locus(model, plane, bounds=bounds, plot_tol=args.plot_tol)
        curve = atlas_mod.region_defects(model, curve, resolution=resolution)
    except FriedrichsError as exc:
        emit({"error": refusal(exc)}, args.json)
        return EXIT_REFUSED
    atlas_mod.export(curve, fmt, args.out)
    emit({
        "out": str(args.out),
        "plane": plane.value,
        "samples": int(curve.locus.size),
        "regions": [r.to_dict() for r in curve.regions],
        "unresolved": curve.unresolved,
    }, args.json)
    return EXIT_OK


def cmd_oracle(args) -> int:
    model, _ = load_model(args.model)
    try:
        report = analytic_defect(model)
        system = build_system(model)
    except FriedrichsError as exc:
        emit({"error": refusal(exc)}, args.json)
        return EXIT_REFUSED
    analytic = "infinite" if report.infinite else int(report.defect)
    agree = (not report.infinite) and system.nullity == report.defect
    payload = {
        "analytic_defect": analytic,
        "oracle_nullity": system.nullity,
        "agree": agree,
        "entries_cond": system.condition if math.isfinite(system.condition) else None,
    } | system.to_dict()
    emit(payload, args.json)
    return EXIT_OK if agree else EXIT_DISAGREE


def cmd_reconstruct(args) -> int:
    model, _ = load_model(args.model)
    try:
        result = reconstruct(HiddenModelProvider(model))
    except FriedrichsError as exc:
        emit({"error": refusal(exc)}, args.json)
        return EXIT_REFUSED
    report = compare_with_model(model, result)
    payload = report.to_dict() | {
        "B_recovered": _pair(result.B_recovered),
        "trivial": result.trivial,
        "pathological_sides": list(result.pathological_sides),
    }
    emit(payload, args.json)
    ok = report.B_error <= RECONSTRUCT_TOL and report.M_max_rel_error <= RECONSTRUCT_TOL
    return EXIT_OK if ok else EXIT_DISAGREE


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="friedrichs", description="Detectable subspaces of rank-one Friedrichs models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("mfun", help="evaluate the M-function")
    s.add_argument("model")
    s.add_argument("--lambda", dest="lambdas", type=_complex_arg, action="append", required=True,
                   metavar="RE,IM", help="spectral parameter (repeatable)")
    s.set_defaults(func=cmd_mfun)

    s = sub.add_parser("defect", help="analytic defect number")
    s.add_argument("model")
    s.add_argument("--sperp", action="store_true", help="include a basis of the orthogonal complement")
    s.set_defaults(func=cmd_defect)

    s = sub.add_parser("petal", help="real-root locus atlas")
    s.add_argument("model", nargs="?")
    s.add_argument("--builtin", choices=["figure2"])
    s.add_argument("--plane", choices=[pl.value for pl in atlas_mod.Plane])
    s.add_argument("--bounds", type=_bounds_arg, metavar="XMIN,XMAX,YMIN,YMAX")
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=["svg", "csv", "json"])
    s.add_argument("--grid", type=int, help="raster resolution for region labelling")
    s.add_argument("--plot-tol", type=float, dest="plot_tol")
    s.set_defaults(func=cmd_petal)

    s = sub.add_parser("oracle", help="cross-check the defect by finite-rank reduction")
    s.add_argument("model")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("reconstruct", help="recover M from the hidden model's resolvent")
    s.add_argument("model")
    s.set_defaults(func=cmd_reconstruct)

    for name in ("mfun", "defect", "petal", "oracle", "reconstruct"):
        sub.choices[name].add_argument("--json", action="store_true", help="JSON output")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"friedrichs: error: {exc}\n")
        return EXIT_USAGE
    except FriedrichsError as exc:
        emit({"error": refusal(exc)}, getattr(args, "json", False))
        return EXIT_REFUSED
    except OSError as exc:
        sys.stderr.write(f"friedrichs: I/O error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
