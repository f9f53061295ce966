"""Command-line driver.

    greenfig jordan     --region disk:4096 --levels 4..9
    greenfig green      --region disk:4096 --field rot --levels 4..9
    greenfig gauss      --region icosphere:4 --field radial --levels 3..6
    greenfig additivity --samples 1000 --seed 0

Settings may also come from ``--config FILE`` (``key = value`` lines, optionally
under a ``[run]`` section); command-line flags win. The per-level CSV goes to
``--output`` (or standard output) and the last line printed is the summary.
Exit status: 0 pass, 1 fail or non-convergence, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import gauss3d
from .errors import GreenfigError
from .fields import FIELDS_2D, field_from_spec
from .geom2d import Rect
from .integral import SCHEMA, fmt, jordan_content
from .rectfn import (QuadratureSpec, additivity_defects, area_function, circulation_function,
                     sample_split_rects)
from .region2d import disk_curve, lshape_curve, parse_curve, square_curve
from .verify import green_verify

COMMANDS = ("jordan", "green", "gauss", "additivity")
ADDITIVITY_TOL = 1e-10
MAX_LEVEL = 14

# key -> (type, default); names match the long flags with dashes as underscores
SETTINGS = {
    "command": (str, None),
    "region": (str, None),
    "field": (str, None),
    "levels": (str, None),
    "bounds": (str, None),
    "tol": (float, 0.05),
    "tol_line": (float, 1e-4),
    "tol_figure": (float, None),
    "order": (int, 8),
    "hq": (float, None),
    "max_seg": (float, None),
    "refine_depth": (int, 2),
    "samples": (int, 1000),
    "seed": (int, 0),
    "threads": (int, 1),
    "output": (str, None),
}


class UsageError(Exception):
    pass


def _check_positive(key, value):
    if value is not None and not (value > 0 and math.isfinite(value)):
        raise UsageError(f"{key} must be positive, got {value}")
    return value


def parse_levels(text: str) -> list[int]:
    """``"4..9"`` -> ``[4, ..., 9]``; a single integer is one level."""
    a, sep, b = text.strip().partition("..")
    try:
        lo = int(a)
        hi = int(b) if sep else lo
    except ValueError:
        raise UsageError(f"levels must look like 'n_min..n_max', got {text!r}") from None
    if hi < lo:
        raise UsageError(f"empty level range {text!r}")
    if lo < 1 or hi > MAX_LEVEL:
        raise UsageError(f"levels must lie in 1..{MAX_LEVEL}, got {text!r}")
    return list(range(lo, hi + 1))


def parse_bounds(text: str, dim: int):
    """``"-2,2"`` (same span on every axis) or all ``2*dim`` coordinates."""
    try:
        vals = [float(t) for t in text.replace(" ", "").strip("[]()").split(",")]
    except ValueError:
        raise UsageError(f"bounds must be comma-separated numbers, got {text!r}") from None
    if len(vals) == 2:
        vals = vals * dim
    if len(vals) != 2 * dim:
        raise UsageError(f"{dim}D bounds need 2 or {2 * dim} numbers, got {len(vals)}")
    return Rect(*vals) if dim == 2 else gauss3d.Box3(*vals)


def _int_arg(spec, arg, what):
    try:
        return int(arg)
    except ValueError:
        raise UsageError(f"region {spec!r}: {what} must be an integer") from None


def load_region(spec: str):
    """Named generator or file path. Returns ``(region, dim)``."""
    name, _, arg = spec.partition(":")
    key = name.strip().lower()
    if key == "square":
        return square_curve(), 2
    if key == "disk":
        return disk_curve(_int_arg(spec, arg or "4096", "vertex count")), 2
    if key == "lshape":
        return lshape_curve(), 2
    if key == "icosphere":
        return gauss3d.icosphere(_int_arg(spec, arg or "4", "depth")), 3
    if key == "cube":
        return gauss3d.cube_mesh(), 3
    path = Path(spec)
    if not path.is_file():
        raise UsageError(f"region {spec!r} is neither a known generator "
                         "(square, disk:N, lshape, icosphere:D, cube) nor a readable file")
    text = path.read_text()
    first = next((ln.split("#", 1)[0].split() for ln in text.splitlines()
                  if ln.split("#", 1)[0].strip()), [""])
    if path.suffix.lower() in (".obj", ".mesh") or first[0].lower() in ("vertices", "v", "f"):
        return gauss3d.parse_mesh(text, str(path)), 3
    return parse_curve(text, str(path)), 2


def read_config(path: str) -> dict:
    """``key = value`` settings with line-numbered errors."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    lines = text.splitlines()
    has_section = any(ln.strip().startswith("[") for ln in lines)
    offset = 0 if has_section else 1
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text if has_section else "[run]\n" + text, source=path)
    except configparser.ParsingError as exc:
        lineno, _ = exc.errors[0]
        raise UsageError(f"{path}:{lineno - offset}: not a 'key = value' line") from None
    except configparser.Error as exc:
        raise UsageError(f"{path}: {exc.message}") from None

    def line_of(key):
        for n, ln in enumerate(lines, 1):
            if ln.split("=", 1)[0].strip().replace("-", "_").lower() == key:
                return n
        return "?"

    out = {}
    for section in parser.sections():
        for raw, value in parser.items(section):
            key = raw.replace("-", "_").lower()
            if key not in SETTINGS:
                raise UsageError(f"{path}:{line_of(key)}: unknown setting {raw!r}")
            kind = SETTINGS[key][0]
            try:
                out[key] = kind(value)
            except ValueError:
                raise UsageError(f"{path}:{line_of(key)}: {raw} must be {kind.__name__}, "
                                 f"got {value!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="greenfig", description=__doc__.split("\n\n")[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", help="key = value settings file; flags override it")
    p.add_argument("--region", help="square | disk:N | lshape | icosphere:D | cube | FILE")
    p.add_argument("--field", help="field spec, e.g. rot or weier:a=0.5,b=3,K=30")
    p.add_argument("--levels", help="n_min..n_max (1..14)")
    p.add_argument("--bounds", help="grid bounds, e.g. --bounds=-2,2 (every axis)")
    p.add_argument("--tol", type=float, help="jordan: gap tolerance (default 0.05)")
    p.add_argument("--tol-line", type=float, help="boundary integral tolerance (default 1e-4)")
    p.add_argument("--tol-figure", type=float, help="figure tolerance (default: finest gap)")
    p.add_argument("--order", type=int, help="Gauss-Legendre points per panel (default 8)")
    p.add_argument("--hq", type=float, help="quadrature panel side (default: finest cell side)")
    p.add_argument("--max-seg", type=float, help="green: polyline refinement length")
    p.add_argument("--refine-depth", type=int, help="gauss: triangle subdivision depth")
    p.add_argument("--samples", type=int, help="additivity: number of random rectangles")
    p.add_argument("--seed", type=int, help="additivity: random seed")
    p.add_argument("--threads", type=int, help="worker threads (output does not depend on it)")
    p.add_argument("--output", "-o", help="CSV path (default: standard output)")
    return p


def resolve(args: argparse.Namespace) -> dict:
    cfg = read_config(args.config) if args.config else {}
    out = {k: d for k, (_, d) in SETTINGS.items()}
    out.update(cfg)
    out.update({k: v for k, v in vars(args).items() if k in SETTINGS and v is not None})
    if out["command"] not in COMMANDS:
        raise UsageError(f"command must be one of {', '.join(COMMANDS)}")
    for key in ("tol", "tol_line", "tol_figure", "hq", "max_seg"):
        _check_positive(key, out[key])
    if out["order"] < 1 or out["threads"] < 1 or out["samples"] < 1 or out["refine_depth"] < 0:
        raise UsageError("order, threads and samples must be >= 1; refine_depth >= 0")
    if out["command"] != "additivity" and out["levels"] is None:
        raise UsageError(f"{out['command']} needs --levels")
    return out


# -- studies --------------------------------------------------------------

def _quadrature(cfg, levels, unit=1.0):
    return QuadratureSpec(cfg["order"], cfg["hq"] or unit / 2 ** levels[-1])


def run_jordan(cfg):
    region, dim = load_region(cfg["region"] or "disk:4096")
    levels = parse_levels(cfg["levels"])
    bounds = parse_bounds(cfg["bounds"], dim) if cfg["bounds"] else None
    if dim == 2:
        rep = jordan_content(region, levels, cfg["tol"], bounds, threads=cfg["threads"])
    else:
        rep = gauss3d.jordan_volume(region, levels, cfg["tol"], bounds, threads=cfg["threads"])
    status = "PASS" if rep.converged else "FAIL"
    line = (f"{status} jordan region={cfg['region'] or 'disk:4096'} estimate={rep.estimate:.10g} "
            f"inner={rep.last.inner:.10g} outer={rep.last.outer:.10g} gap={rep.gap:.3e} "
            f"tol={rep.tol:.3e} level={rep.last.level}")
    return rep.converged, rep.to_csv(), line


def run_green(cfg):
    region, dim = load_region(cfg["region"] or "disk:4096")
    if dim != 2:
        raise UsageError("green needs a planar curve region")
    levels = parse_levels(cfg["levels"])
    rep = green_verify(field_from_spec(cfg["field"] or "rot", 2), region, levels,
                       tol_line=cfg["tol_line"], tol_figure=cfg["tol_figure"],
                       q=_quadrature(cfg, levels), max_seg=cfg["max_seg"],
                       bounds=parse_bounds(cfg["bounds"], 2) if cfg["bounds"] else None,
                       region=cfg["region"] or "disk:4096", threads=cfg["threads"])
    return rep.passed, rep.to_csv(), rep.summary_line()


def run_gauss(cfg):
    region, dim = load_region(cfg["region"] or "icosphere:4")
    if dim != 3:
        raise UsageError("gauss needs a closed triangle mesh region")
    levels = parse_levels(cfg["levels"])
    rep = gauss3d.gauss_verify(field_from_spec(cfg["field"] or "radial", 3), region, levels,
                               tol_surface=cfg["tol_line"], tol_figure=cfg["tol_figure"],
                               q=_quadrature(cfg, levels), refine_depth=cfg["refine_depth"],
                               bounds=parse_bounds(cfg["bounds"], 3) if cfg["bounds"] else None,
                               region=cfg["region"] or "icosphere:4", threads=cfg["threads"])
    return rep.passed, rep.to_csv(), rep.summary_line()


def run_additivity(cfg):
    """Split random rectangles on the panel mesh; compare F(r) with F(r1) + F(r2)."""
    q = QuadratureSpec(cfg["order"], cfg["hq"] or 2.0 ** -6)
    rng = np.random.default_rng(cfg["seed"])
    x0, x1, y0, y1, vertical, c = sample_split_rects(rng, cfg["samples"], q.h_q)
    if cfg["field"]:
        fields = {cfg["field"]: field_from_spec(cfg["field"], 2)}
    else:
        fields = {name: make() for name, make in FIELDS_2D.items() if name != "const"}
    funcs = {"area": (area_function(), 0.0)}
    funcs.update({name: (circulation_function(v, q), ADDITIVITY_TOL) for name, v in fields.items()})

    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA}\n# report=additivity\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("function", "samples", "max_defect", "mean_defect", "tol", "pass"))
    ok_all, worst = True, 0.0
    for name, (F, tol) in funcs.items():
        d = additivity_defects(F, x0, x1, y0, y1, vertical, c)
        ok = bool(d.max() <= tol)
        ok_all &= ok
        worst = max(worst, float(d.max()))
        w.writerow((name, len(d), fmt(float(d.max())), fmt(math.fsum(d) / len(d)), fmt(tol),
                    fmt(ok)))
    status = "PASS" if ok_all else "FAIL"
    line = (f"{status} additivity functions={len(funcs)} samples={cfg['samples']} "
            f"max_defect={worst:.3e} tol={ADDITIVITY_TOL:.1e}")
    return ok_all, buf.getvalue(), line


STUDIES = {"jordan": run_jordan, "green": run_green, "gauss": run_gauss,
           "additivity": run_additivity}


def run(cfg: dict, stdout=None) -> int:
    stdout = stdout or sys.stdout
    passed, table, line = STUDIES[cfg["command"]](cfg)
    if cfg["output"]:
        Path(cfg["output"]).write_text(table)
    else:
        stdout.write(table)
    print(line, file=stdout)
    return 0 if passed else 1


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(resolve(args))
    except (UsageError, GreenfigError) as exc:
        print(f"greenfig: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
