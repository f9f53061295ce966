"""Inner/outer figure limits under dyadic refinement, and line integrals along curves."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import DomainError, ValidationError
from ._parallel import map_chunks
from .geom2d import DyadicGrid, GridFigure, Rect
from .rectfn import RectangleFunction, area_function, evaluate_on_figure
from .region2d import Curve, Label, classify_cells, default_bounds, refine_curve

SCHEMA = 1
LEVEL_COLUMNS = ("level", "h", "inner", "outer", "gap", "inner_area", "outer_area",
                 "boundary_cells", "boundary_perimeter")


@dataclass(frozen=True)
class LevelRow:
    """One refinement level. In 3D the area columns hold volumes and
    ``boundary_perimeter`` the total face area of the boundary voxels."""

    level: int
    h: float
    inner: float
    outer: float
    inner_area: float
    outer_area: float
    boundary_cells: int
    boundary_perimeter: float

    @property
    def gap(self) -> float:
        return abs(self.outer - self.inner)

    def as_tuple(self):
        return (self.level, self.h, self.inner, self.outer, self.gap, self.inner_area,
                self.outer_area, self.boundary_cells, self.boundary_perimeter)


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


@dataclass(frozen=True)
class ConvergenceReport:
    name: str
    rows: tuple[LevelRow, ...]
    tol: float
    estimate: float = field(init=False)
    converged: bool = field(init=False)

    def __post_init__(self):
        if not self.rows:
            raise ValidationError("a convergence report needs at least one level")
        last = self.rows[-1]
        object.__setattr__(self, "estimate", 0.5 * (last.inner + last.outer))
        object.__setattr__(self, "converged", bool(last.gap <= self.tol))

    @property
    def last(self) -> LevelRow:
        return self.rows[-1]

    @property
    def gap(self) -> float:
        return self.last.gap

    @property
    def levels(self) -> list[int]:
        return [r.level for r in self.rows]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def bracket(self) -> tuple[float, float]:
        return min(self.last.inner, self.last.outer), max(self.last.inner, self.last.outer)

    def level_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(LEVEL_COLUMNS) + "\n")
        for r in self.rows:
            buf.write(",".join(fmt(v) for v in r.as_tuple()) + "\n")
        return buf.getvalue()

    def to_csv(self) -> str:
        return f"# schema={SCHEMA}\n# report={self.name}\n" + self.level_csv()


def check_levels(levels: Sequence[int], max_level: int = 14) -> list[int]:
    lv = [int(n) for n in levels]
    if not lv:
        raise DomainError("no levels given")
    if any(b <= a for a, b in zip(lv, lv[1:])):
        raise DomainError(f"levels must be strictly increasing, got {lv}")
    if lv[0] < 1:
        raise DomainError(f"smallest level must be >= 1, got {lv[0]}")
    if lv[-1] > max_level:
        raise DomainError(f"largest level must be <= {max_level}, got {lv[-1]}")
    return lv


def run_levels(name: str, levels: Sequence[int], tol: float,
               level_fn: Callable[[int], LevelRow]) -> ConvergenceReport:
    """Dimension-agnostic refinement loop shared by the 2D and 3D studies."""
    if not tol > 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    rows = tuple(level_fn(n) for n in check_levels(levels))
    return ConvergenceReport(name, rows, tol)


def _inner_outer(F: RectangleFunction, cl, threads: int) -> tuple[float, float]:
    inner_fig, outer_fig = cl.inner_figure(), cl.outer_figure()
    if F.cell_value is not None or F.boundary_terms is not None:
        return (evaluate_on_figure(F, inner_fig, threads),
                evaluate_on_figure(F, outer_fig, threads))
    # generic path: evaluate the inner cells once and reuse their terms for the outer sum
    parts = []
    for fig in (inner_fig, GridFigure(cl.grid, cl.boundary)):
        x0, x1, y0, y1 = fig.as_arrays()
        parts.append(np.concatenate(map_chunks(
            lambda lo, hi: F.terms(x0[lo:hi], x1[lo:hi], y0[lo:hi], y1[lo:hi])[0],
            len(x0), F.chunk, threads) or [np.zeros(0)]))
    return math.fsum(parts[0]), math.fsum(np.concatenate(parts))


def figure_integral(F: RectangleFunction, c: Curve, levels: Sequence[int], tol: float,
                    bounds: Rect | None = None, unit: float = 1.0,
                    threads: int = 1) -> ConvergenceReport:
    """Values of ``F`` on the inner and outer grid figures of the curve's region.

    At each level the inner figure is the Interior cells and the outer figure
    Interior plus Boundary cells. The estimate is the midpoint at the last
    level; ``converged`` says whether the last gap is within ``tol``.
    """
    lv = check_levels(levels)
    if bounds is None:
        bounds = default_bounds(c, unit / 2 ** lv[0])

    def level_fn(n):
        grid = DyadicGrid(bounds, n, unit)
        cl = classify_cells(c, grid, threads)
        h = grid.h
        ni, nb = cl.count(Label.INTERIOR), cl.count(Label.BOUNDARY)
        inner, outer = _inner_outer(F, cl, threads)
        return LevelRow(n, h, inner, outer, ni * (h * h), (ni + nb) * (h * h),
                        nb, nb * (4.0 * h))

    return run_levels(F.name, lv, tol, level_fn)


def jordan_content(c: Curve, levels: Sequence[int], tol: float = 0.05,
                   bounds: Rect | None = None, unit: float = 1.0,
                   threads: int = 1) -> ConvergenceReport:
    """Inner and outer Jordan content of the curve's region per level."""
    return figure_integral(area_function(), c, levels, tol, bounds, unit, threads)


class LineIntegral(NamedTuple):
    value: float
    delta: float  # |I(max_seg / 2) - I(max_seg)|
    segments: int


def line_integral(v, c: Curve, max_seg: float) -> float:
    """``oint P dx + Q dy`` along the polyline in vertex order, midpoint rule."""
    fine = refine_curve(c, max_seg)
    a, b = fine.segments()
    mid = 0.5 * (a + b)
    d = b - a
    P, Q = v.P(mid[:, 0], mid[:, 1]), v.Q(mid[:, 0], mid[:, 1])
    return math.fsum(np.concatenate([P * d[:, 0], Q * d[:, 1]]))


def line_integral_check(v, c: Curve, max_seg: float) -> LineIntegral:
    """Line integral plus its change under one more halving of the segments."""
    val = line_integral(v, c, max_seg)
    finer = line_integral(v, c, max_seg / 2)
    return LineIntegral(val, abs(finer - val), len(refine_curve(c, max_seg)))
