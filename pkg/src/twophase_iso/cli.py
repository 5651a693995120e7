"""Command-line front end.

Subcommands: ``solve``, ``gamma-star``, ``sweep``, ``verify``, ``export-geometry``.
Volumes are weighted volumes ``V = rho * |Omega|``.  Floats are written in
shortest round-trip form, so every value reads back to the same double.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .candidate_solver import gamma_star
from .cap_geometry import ProblemParams, cross_section
from .classifier import classify
from .special_functions import DomainError
from .verification_oracle import compare

__all__ = ["SweepSpec", "build_parser", "dispatch", "main", "sweep_rows", "svg_cross_section"]

SWEEP_COLUMNS = ("swept_value", "gamma_star", "regime", "alpha", "beta",
                 "R_minus", "R_plus", "F_total", "F_interface")
VARIABLES = ("gamma", "rho_ratio", "volume_ratio")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


@dataclass(frozen=True)
class SweepSpec:
    varying: str
    lo: float
    hi: float
    steps: int
    fixed: ProblemParams
    output_path: str | None = None

    def __post_init__(self):
        if self.varying not in VARIABLES:
            raise ValueError(f"cannot sweep {self.varying!r}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError("steps must be an integer >= 2")
        if not self.lo < self.hi:
            raise ValueError("range needs lo < hi")
        if self.varying != "gamma" and self.lo <= 0.0:
            raise ValueError("ratio sweeps need lo > 0")

    def values(self) -> np.ndarray:
        v = np.linspace(self.lo, self.hi, int(self.steps))
        if self.varying == "gamma":
            v = np.maximum(v, 0.0)
        return v

    def params_at(self, value: float) -> ProblemParams:
        p = self.fixed
        if self.varying == "gamma":
            return p.with_gamma(value)
        if self.varying == "rho_ratio":
            return ProblemParams(p.N, value * p.rho_plus, p.rho_plus, p.V_minus, p.V_plus, p.gamma)
        return ProblemParams(p.N, p.rho_minus, p.rho_plus, value * p.V_plus, p.V_plus, p.gamma)


def sweep_rows(spec: SweepSpec) -> list[dict]:
    rows = []
    for value in spec.values():
        r = classify(spec.params_at(float(value)))
        c = r.minimizer
        rows.append({
            "swept_value": float(value),
            "gamma_star": r.threshold.gamma_star,
            "regime": r.regime.value,
            "alpha": c.alpha,
            "beta": c.beta,
            "R_minus": c.R_minus,
            "R_plus": c.R_plus,
            "F_total": r.cost.total,
            "F_interface": r.cost.interface,
        })
    return rows


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row[k]) for k in header])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# ---------------------------------------------------------------- geometry


def _geometry_rows(p: ProblemParams, resolution: int) -> tuple[list[dict], object]:
    r = classify(p)
    cs = cross_section(r.minimizer, resolution)
    rows = []
    for side, theta, pts in (("left", cs.left_theta, cs.left), ("right", cs.right_theta, cs.right)):
        for t, (x1, x2) in zip(theta, pts):
            rows.append({"side": side, "theta": float(t), "x1": float(x1), "x2": float(x2)})
    if cs.interface is not None:
        lo, hi = cs.interface
        rows.append({"side": "interface", "theta": math.nan, "x1": 0.0, "x2": lo})
        rows.append({"side": "interface", "theta": math.nan, "x1": 0.0, "x2": hi})
    return rows, cs


def svg_cross_section(cs, size: int = 480) -> str:
    """SVG of the generatrix and its mirror image in the axis; the interface is dashed."""
    curves = [cs.left, cs.right]
    pts = np.vstack(curves)
    span = max(np.ptp(pts[:, 0]), 2.0 * float(pts[:, 1].max()), 1e-300)
    scale = 0.9 * size / span
    cx = 0.5 * (pts[:, 0].max() + pts[:, 0].min())

    def path(P, flip):
        xs = (P[:, 0] - cx) * scale + 0.5 * size
        ys = 0.5 * size - (-P[:, 1] if flip else P[:, 1]) * scale
        return "M " + " L ".join(f"{x:.6f} {y:.6f}" for x, y in zip(xs, ys))

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<line x1="{(-cx) * scale + 0.5 * size:.6f}" y1="0" x2="{(-cx) * scale + 0.5 * size:.6f}" '
        f'y2="{size}" stroke="#999999" stroke-width="0.5"/>',
    ]
    for P, colour in ((cs.left, "#1f4e99"), (cs.right, "#b03a2e")):
        for flip in (False, True):
            lines.append(f'<path d="{path(P, flip)}" fill="none" stroke="{colour}" '
                         'stroke-width="1.5"/>')
    if cs.interface is not None:
        lo, hi = cs.interface
        for flip in (False, True):
            seg = np.array([[0.0, lo], [0.0, hi]])
            lines.append(f'<path d="{path(seg, flip)}" fill="none" stroke="#000000" '
                         'stroke-width="1.5" stroke-dasharray="4 3"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ verify


def _verify_draws(seed: int, count: int) -> list[ProblemParams]:
    rng = np.random.default_rng(seed)
    draws = []
    for _ in range(count):
        N = int(rng.integers(2, 6))
        rm, rp, vm, vp = np.exp(rng.uniform(math.log(0.2), math.log(5.0), 4))
        g = rng.uniform(0.0, 1.2 * min(rm, rp))
        draws.append(ProblemParams(N, float(rm), float(rp), float(vm), float(vp), float(g)))
    return draws


# -------------------------------------------------------------------- args


def _add_problem_args(sp, need_gamma=True):
    sp.add_argument("--dim", type=int, help="ambient dimension N >= 2")
    sp.add_argument("--rho", type=float, nargs=2, metavar=("RHO_MINUS", "RHO_PLUS"))
    sp.add_argument("--vol", type=float, nargs=2, metavar=("V_MINUS", "V_PLUS"),
                    help="weighted volumes rho * |Omega| of the two phases")
    if need_gamma:
        sp.add_argument("--gamma", type=float, help="interface cost (default 0)")
    sp.add_argument("--from-json", "--config", dest="from_json", metavar="PATH",
                    help="JSON with the parameter fields, or a solve output")
    sp.add_argument("--out", metavar="PATH", help="write here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twophase-iso",
                     description="Minimizers of the two-phase weighted isoperimetric problem.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("solve", help="classify and print the minimizer as JSON")
    _add_problem_args(sp)

    sp = sub.add_parser("gamma-star", help="print the threshold as JSON")
    _add_problem_args(sp, need_gamma=False)

    sp = sub.add_parser("sweep", help="phase-diagram CSV over one parameter")
    _add_problem_args(sp)
    sp.add_argument("--vary", choices=VARIABLES, required=True,
                    help="rho_ratio sets rho_minus = value * rho_plus, "
                         "volume_ratio sets V_minus = value * V_plus")
    sp.add_argument("--range", type=float, nargs=3, metavar=("LO", "HI", "STEPS"), required=True)

    sp = sub.add_parser("verify", help="compare the classifier with the brute-force oracle")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--draws", type=int, default=10)
    sp.add_argument("--coarse", type=int, default=256)
    sp.add_argument("--out", metavar="PATH")

    sp = sub.add_parser("export-geometry", help="cross-section of the minimizer")
    _add_problem_args(sp)
    sp.add_argument("--format", choices=("svg", "csv", "json"), default="svg")
    sp.add_argument("--resolution", type=int, default=128)
    parser.set_defaults(subparsers=sub.choices)
    return parser


def _load_params(args, need_gamma=True) -> ProblemParams:
    fields = {}
    if args.from_json:
        try:
            data = json.loads(Path(args.from_json).read_text())
        except (OSError, ValueError) as exc:
            raise _UsageError(f"cannot read {args.from_json}: {exc}") from exc
        if isinstance(data, dict) and isinstance(data.get("params"), dict):
            data = data["params"]
        if not isinstance(data, dict):
            raise _UsageError("the JSON file must hold an object")
        fields.update(data)
    if args.dim is not None:
        fields["N"] = args.dim
    if args.rho is not None:
        fields["rho_minus"], fields["rho_plus"] = args.rho
    if args.vol is not None:
        fields["V_minus"], fields["V_plus"] = args.vol
    if need_gamma and args.gamma is not None:
        fields["gamma"] = args.gamma
    missing = [k for k, flag in (("N", "--dim"), ("rho_minus", "--rho"), ("V_minus", "--vol"),
                                 ("rho_plus", "--rho"), ("V_plus", "--vol")) if k not in fields]
    if missing:
        raise _UsageError(f"missing problem parameters: {', '.join(sorted(set(missing)))}")
    if not need_gamma:
        fields["gamma"] = 0.0
    try:
        return ProblemParams.from_dict(fields)
    except (DomainError, TypeError, ValueError) as exc:
        raise _UsageError(str(exc)) from exc


def _emit(text: str, out: str | None, stdout) -> None:
    if out:
        Path(out).write_text(text)
    else:
        stdout.write(text)


def dispatch(argv, stdout=None, stderr=None) -> int:
    """Run one subcommand; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    args = None
    try:
        args = parser.parse_args(argv)
        if args.command == "solve":
            _emit(_json_text(classify(_load_params(args)).to_dict()), args.out, stdout)
        elif args.command == "gamma-star":
            _emit(_json_text(gamma_star(_load_params(args, need_gamma=False)).to_dict()),
                  args.out, stdout)
        elif args.command == "sweep":
            lo, hi, steps = args.range
            try:
                spec = SweepSpec(args.vary, lo, hi, int(steps) if steps == int(steps) else steps,
                                 _load_params(args), args.out)
            except ValueError as exc:
                raise _UsageError(str(exc)) from exc
            _emit(_csv_text(SWEEP_COLUMNS, sweep_rows(spec)), args.out, stdout)
        elif args.command == "verify":
            if args.draws < 1 or args.coarse < 8:
                raise _UsageError("need --draws >= 1 and --coarse >= 8")
            reports = [compare(p, coarse=args.coarse) for p in _verify_draws(args.seed, args.draws)]
            failed = sum(not r.passed for r in reports)
            body = {"seed": args.seed, "draws": len(reports), "failed": failed,
                    "reports": [r.to_dict() for r in reports]}
            _emit(_json_text(body), args.out, stdout)
            return 1 if failed else 0
        elif args.command == "export-geometry":
            if args.resolution < 8:
                raise _UsageError("--resolution must be at least 8")
            rows, cs = _geometry_rows(_load_params(args), args.resolution)
            if args.format == "svg":
                text = svg_cross_section(cs)
            elif args.format == "csv":
                text = _csv_text(("side", "theta", "x1", "x2"), rows)
            else:
                text = _json_text([{k: (None if isinstance(v, float) and math.isnan(v) else v)
                                    for k, v in row.items()} for row in rows])
            _emit(text, args.out, stdout)
    except _UsageError as exc:
        message = str(exc)
        if not message.startswith("usage:"):
            usage = (args.subparsers[args.command] if args is not None else parser).format_usage()
            message = f"{usage}{parser.prog}: error: {message}"
        stderr.write(f"{message}\n")
        return 2
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
