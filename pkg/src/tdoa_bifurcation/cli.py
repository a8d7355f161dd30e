"""Command-line front end.

Exit codes: 0 success, 1 invalid input (including collinear receivers),
2 a validation check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .bifurcation import (
    GradientVanishes,
    asymptotes,
    build_quintic,
    classify_point,
    distance_to_curve,
    ideal_points,
    sample_curve,
)
from .exact import format_rational, parse_rational
from .geometry import CollinearReceivers, load_config
from .localize import localize
from .tdoa import FACET_IDS, classify_tau, polytope_vertices, tangency_points

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VALIDATION = 2


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _pair(text: str, what: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise InputError(f"{what} must look like a,b (got {text!r})")
    out = []
    for p in parts:
        try:
            out.append(parse_rational(p))
        except ValueError:
            try:
                out.append(float(p))
            except ValueError:
                raise InputError(f"cannot parse {p!r} in {what}") from None
    return tuple(out)


def _floats(pair):
    return [float(v) for v in pair]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--receivers", required=True, metavar="PATH", help="JSON file with three receivers")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")

    p = _Parser(prog="tdoa-bif", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("classify-tau", parents=[common], help="region of a measurement pair")
    s.add_argument("--tau", required=True, help="t1,t2 (use --tau=-1,2 for a leading minus)")

    s = sub.add_parser("localize", parents=[common], help="all sources for a measurement pair")
    s.add_argument("--tau", required=True)

    s = sub.add_parser("bifurcation-poly", parents=[common], help="exact quintic as JSON records")
    s.add_argument("--normalized", action="store_true", help="divide by W^8")
    s.add_argument("--format", choices=["json", "text"], default="json")

    s = sub.add_parser("classify-point", parents=[common], help="sign of F at a source position")
    s.add_argument("--point", required=True, help="x,y")

    sub.add_parser("asymptotes", parents=[common], help="the three real asymptotic lines")

    s = sub.add_parser("curve-sample", parents=[common], help="trace the real curve")
    s.add_argument("--n", type=int, default=720)
    s.add_argument("--format", choices=["json", "csv", "svg"], default="json")

    sub.add_parser("tangency", parents=[common], help="ellipse/facet contact points")
    sub.add_parser("vertices", parents=[common], help="hexagon vertices")

    s = sub.add_parser("validate", parents=[common], help="run the cross-checks")
    s.add_argument("--deep", action="store_true", help="use the full sample sizes")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", choices=["text", "json"], default="text")
    return p


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_classify_tau(cfg, args):
    tau = _floats(_pair(args.tau, "--tau"))
    return _json(classify_tau(cfg, tau).to_json_dict())


def cmd_localize(cfg, args):
    tau = _floats(_pair(args.tau, "--tau"))
    r = localize(cfg, tau)
    return _json(r.to_json_dict())


def cmd_bifurcation_poly(cfg, args):
    curve = build_quintic(cfg)
    poly = curve.normalized if args.normalized else curve.F
    if args.format == "text":
        return poly.to_string() + "\n"
    return _json(poly.to_records())


def cmd_classify_point(cfg, args):
    pt = _pair(args.point, "--point")
    curve = build_quintic(cfg)
    region = classify_point(cfg, pt)
    if all(isinstance(v, Fraction) for v in pt):
        f_exact = curve.F.eval(*pt)
        f_val = float(f_exact)
    else:
        f_exact = None
        f_val = float(curve.value(*pt)) * float(curve.W8)
    try:
        sampson = distance_to_curve(cfg, pt).distance
    except GradientVanishes:
        sampson = None
    out = {
        "region": region.value,
        "F_value": f_val,
        "F_normalized": f_val / float(curve.W8),
        "sampson_distance": sampson,
    }
    if f_exact is not None:
        out["F_exact"] = format_rational(f_exact)
    return _json(out)


def cmd_asymptotes(cfg, args):
    lines = asymptotes(cfg)
    ideals = [p for p in ideal_points(cfg) if p.is_real]
    return _json(
        {
            "lines": [[format_rational(v) for v in ln.as_tuple()] for ln in lines],
            "normalized": [list(ln.normalized().as_tuple()) for ln in lines],
            "ideal_points": [[format_rational(p.X), format_rational(p.Y), "0/1"] for p in ideals],
        }
    )


def cmd_tangency(cfg, args):
    pts = tangency_points(cfg)
    return _json({"facets": list(FACET_IDS), "points": [list(p) for p in pts]})


def cmd_vertices(cfg, args):
    return _json({"vertices": [list(v) for v in polytope_vertices(cfg)]})


def cmd_curve_sample(cfg, args):
    if args.n < 3:
        raise InputError("--n must be at least 3")
    arcs = sample_curve(cfg, args.n)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["arc_id", "theta", "x", "y"])
        for k, arc in enumerate(arcs):
            for th, (x, y) in zip(arc.thetas, arc.points):
                w.writerow([k, repr(float(th)), repr(float(x)), repr(float(y))])
        return buf.getvalue()
    if args.format == "svg":
        return render_svg(cfg, arcs)
    return _json(
        {
            "arcs": [
                {"arc_id": k, "theta": arc.thetas.tolist(), "points": arc.points.tolist()}
                for k, arc in enumerate(arcs)
            ]
        }
    )


def _clip_line(a, b, c, box):
    xmin, xmax, ymin, ymax = box
    pts = []
    if b != 0:
        for x in (xmin, xmax):
            y = -(a * x + c) / b
            if ymin <= y <= ymax:
                pts.append((x, y))
    if a != 0:
        for y in (ymin, ymax):
            x = -(b * y + c) / a
            if xmin <= x <= xmax:
                pts.append((x, y))
    if len(pts) < 2:
        return None
    pts.sort()
    return pts[0], pts[-1]


def render_svg(cfg, arcs, size: int = 600) -> str:
    allpts = [arc.points for arc in arcs if len(arc)] or [cfg.points]
    stack = np.vstack(allpts + [cfg.points])
    lo, hi = stack.min(axis=0), stack.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo, hi = lo - 0.1 * span, hi + 0.1 * span
    box = (lo[0], hi[0], lo[1], hi[1])
    w = hi[0] - lo[0]
    h = hi[1] - lo[1]
    k = size / max(w, h)

    def tx(x, y):
        return (x - lo[0]) * k, (hi[1] - y) * k

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * k:.1f}" height="{h * k:.1f}" '
        f'viewBox="0 0 {w * k:.3f} {h * k:.3f}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for ln in asymptotes(cfg):
        seg = _clip_line(float(ln.a), float(ln.b), float(ln.c), box)
        if seg:
            (x1, y1), (x2, y2) = (tx(*seg[0]), tx(*seg[1]))
            out.append(
                f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" '
                'stroke="gray" stroke-dasharray="6,4" stroke-width="1"/>'
            )
    for arc in arcs:
        pts = " ".join("{:.3f},{:.3f}".format(*tx(x, y)) for x, y in arc.points)
        out.append(f'<polyline points="{pts}" fill="none" stroke="blue" stroke-width="1.5"/>')
    for x, y in cfg.points:
        cx, cy = tx(x, y)
        out.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="4" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_validate(cfg, args):
    from .validation import run_validation

    report = run_validation(cfg, deep=args.deep, seed=args.seed)
    text = _json(report.to_json_dict()) if args.format == "json" else report.to_text()
    return text, (EXIT_OK if report.ok else EXIT_VALIDATION)


COMMANDS = {
    "classify-tau": cmd_classify_tau,
    "localize": cmd_localize,
    "bifurcation-poly": cmd_bifurcation_poly,
    "classify-point": cmd_classify_point,
    "asymptotes": cmd_asymptotes,
    "curve-sample": cmd_curve_sample,
    "tangency": cmd_tangency,
    "vertices": cmd_vertices,
    "validate": cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.receivers)
        result = COMMANDS[args.command](cfg, args)
    except CollinearReceivers as exc:
        print(f"CollinearReceivers: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    code = EXIT_OK
    if isinstance(result, tuple):
        result, code = result
    _emit(result, args.out)
    return code


run = main


if __name__ == "__main__":
    sys.exit(main())
