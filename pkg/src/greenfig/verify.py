"""Green's theorem checks: boundary line integral against the circulation figure integral."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ValidationError
from .geom2d import DyadicGrid, GridFigure, Rect
from .integral import (SCHEMA, ConvergenceReport, LineIntegral, check_levels, figure_integral,
                       fmt, line_integral_check)
from .rectfn import QuadratureSpec, cell_oscillations, circulation_function, riemann_function
from .region2d import CellClassification, Curve, Label, classify_cells, curve_length, default_bounds

# rhs gaps below this are rounding noise (fields whose circulation vanishes identically)
ROUNDING_FLOOR = 1e-12

SUMMARY_COLUMNS = ("kind", "field", "region", "orientation", "lhs", "lhs_delta", "estimate",
                   "inner", "outer", "gap", "discrepancy", "tol_line", "tol_figure", "tol_total",
                   "bracket", "converged", "pass", "finest_level", "osc_max", "osc_bound")


@dataclass(frozen=True)
class GreenReport:
    """Outcome of comparing a boundary integral with a figure integral.

    ``lhs`` is the boundary integral in the curve's own orientation; the
    figure values are computed counterclockwise and multiplied by
    ``orientation`` before comparison. ``bracket`` holds when ``lhs`` lies in
    the signed finest-level [inner, outer] interval widened by ``tol_line``.
    ``osc_bound`` is the sum over finest-level boundary cells of half the
    sampled oscillation times the cell perimeter, which bounds the gap.
    """

    kind: str
    field: str
    region: str
    lhs: float
    lhs_delta: float
    rhs: ConvergenceReport
    orientation: int
    tol_line: float
    tol_figure: float
    osc_max: float = float("nan")
    osc_bound: float = float("nan")

    @property
    def tol_total(self) -> float:
        return self.tol_figure + self.tol_line

    @property
    def inner(self) -> float:
        return self.orientation * self.rhs.last.inner

    @property
    def outer(self) -> float:
        return self.orientation * self.rhs.last.outer

    @property
    def estimate(self) -> float:
        return self.orientation * self.rhs.estimate

    @property
    def discrepancy(self) -> float:
        return abs(self.lhs - self.estimate)

    @property
    def bracket(self) -> bool:
        lo, hi = min(self.inner, self.outer), max(self.inner, self.outer)
        return lo - self.tol_line <= self.lhs <= hi + self.tol_line

    @property
    def converged(self) -> bool:
        return self.rhs.gap <= self.tol_figure

    @property
    def passed(self) -> bool:
        return self.converged and self.discrepancy <= self.tol_total and self.bracket

    def summary_values(self):
        return (self.kind, self.field, self.region, self.orientation, self.lhs, self.lhs_delta,
                self.estimate, self.inner, self.outer, self.rhs.gap, self.discrepancy,
                self.tol_line, self.tol_figure, self.tol_total, self.bracket, self.converged,
                self.passed, self.rhs.last.level, self.osc_max, self.osc_bound)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema={SCHEMA}\n# summary\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        w.writerow([fmt(v) for v in self.summary_values()])
        buf.write("# levels\n")
        buf.write(self.rhs.level_csv())
        return buf.getvalue()

    def summary_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.kind} field={self.field} region={self.region} "
                f"lhs={self.lhs:.10g} estimate={self.estimate:.10g} "
                f"discrepancy={self.discrepancy:.3e} gap={self.rhs.gap:.3e} "
                f"tol_total={self.tol_total:.3e} bracket={fmt(self.bracket)} "
                f"level={self.rhs.last.level}")


def resolve_tol_figure(rhs: ConvergenceReport, tol_figure: Optional[float]) -> float:
    return max(rhs.gap, ROUNDING_FLOOR) if tol_figure is None else float(tol_figure)


def green_verify(v, c: Curve, levels: Sequence[int], *, tol_line: float = 1e-4,
                 tol_figure: Optional[float] = None, q: Optional[QuadratureSpec] = None,
                 max_seg: Optional[float] = None, bounds: Optional[Rect] = None,
                 unit: float = 1.0, region: str = "curve", threads: int = 1) -> GreenReport:
    """Compare ``oint_c P dx + Q dy`` with the figure integral of the circulation.

    Defaults: panels of the finest cell side, polyline refined to a quarter of
    it, ``tol_figure`` equal to the finest gap (floored at 1e-12).
    """
    lv = check_levels(levels)
    h_fine = unit / 2 ** lv[-1]
    q = q or QuadratureSpec(8, h_fine)
    max_seg = max_seg or h_fine / 4
    if bounds is None:
        bounds = default_bounds(c, unit / 2 ** lv[0])
    lhs: LineIntegral = line_integral_check(v, c, max_seg)
    rhs = figure_integral(circulation_function(v, q), c, lv, tol=1.0, bounds=bounds,
                          unit=unit, threads=threads)
    tf = resolve_tol_figure(rhs, tol_figure)
    rhs = ConvergenceReport(rhs.name, rhs.rows, tf)

    cl = classify_cells(c, DyadicGrid(bounds, lv[-1], unit), threads)
    x0, x1, y0, y1 = GridFigure(cl.grid, cl.boundary).as_arrays()
    osc = cell_oscillations(v, x0, x1, y0, y1, q)
    osc_bound = math.fsum(0.5 * osc * 4.0 * cl.grid.h)
    return GreenReport("green", v.name, region, lhs.value, lhs.delta, rhs, c.orientation,
                       float(tol_line), tf, float(osc.max()), osc_bound)


@dataclass(frozen=True)
class PerimeterAudit:
    total_perimeter: float
    bound: float
    ratio: float
    boundary_cells: int
    length: float
    h: float

    @property
    def ok(self) -> bool:
        return self.total_perimeter <= self.bound


def perimeter_bound_audit(c: Curve, grid: DyadicGrid | CellClassification,
                          threads: int = 1) -> PerimeterAudit:
    """Total perimeter of the Boundary cells against ``16 L + 16 h``."""
    cl = grid if isinstance(grid, CellClassification) else classify_cells(c, grid, threads)
    h = cl.grid.h
    nb = cl.count(Label.BOUNDARY)
    if nb == 0:
        raise ValidationError("classification has no boundary cells")
    L = curve_length(c)
    total = nb * (4.0 * h)
    bound = 16.0 * L + 16.0 * h
    return PerimeterAudit(total, bound, total / bound, nb, L, h)


def divergence_oracle(v, c: Curve, levels: Sequence[int], *, q: Optional[QuadratureSpec] = None,
                      bounds: Optional[Rect] = None, unit: float = 1.0,
                      threads: int = 1) -> float:
    """Classical Green right-hand side: figure integral of the declared curl."""
    return divergence_report(v, c, levels, q=q, bounds=bounds, unit=unit, threads=threads).estimate


def divergence_report(v, c: Curve, levels: Sequence[int], *, q: Optional[QuadratureSpec] = None,
                      bounds: Optional[Rect] = None, unit: float = 1.0,
                      threads: int = 1) -> ConvergenceReport:
    if v.curlz is None:
        raise ValidationError(f"field {v.name!r} declares no curl (continuous-only)")
    lv = check_levels(levels)
    q = q or QuadratureSpec(8, unit / 2 ** lv[-1])
    return figure_integral(riemann_function(v.curlz, q), c, lv, tol=1.0, bounds=bounds,
                           unit=unit, threads=threads)


def orientation_check(v, c: Curve, max_seg: float) -> float:
    """``|lhs(reversed) + lhs|``; zero up to rounding."""
    fwd = line_integral_check(v, c, max_seg).value
    back = line_integral_check(v, c.reversed(), max_seg).value
    return abs(fwd + back)


__all__ = ["GreenReport", "green_verify", "PerimeterAudit", "perimeter_bound_audit",
           "divergence_oracle", "divergence_report", "orientation_check", "ROUNDING_FLOOR"]
