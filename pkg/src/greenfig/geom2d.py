"""Axis-parallel rectangles, figures (finite non-overlapping unions) and dyadic grids."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ValidationError

HORIZONTAL = "horizontal"
VERTICAL = "vertical"
_AXES = (HORIZONTAL, VERTICAL)


@dataclass(frozen=True)
class Rect:
    """Closed rectangle ``[x0, x1] x [y0, y1]``; zero width or height is allowed."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        for name in ("x0", "x1", "y0", "y1"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"Rect.{name} is not finite")
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValidationError(f"inverted rectangle {self!r}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def degenerate(self) -> bool:
        return self.x0 == self.x1 or self.y0 == self.y1

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def contains_rect(self, other: "Rect") -> bool:
        return (self.x0 <= other.x0 and other.x1 <= self.x1
                and self.y0 <= other.y0 and other.y1 <= self.y1)


def rect_area(r: Rect) -> float:
    return (r.x1 - r.x0) * (r.y1 - r.y0)


def rect_perimeter(r: Rect) -> float:
    return 2.0 * (r.x1 - r.x0) + 2.0 * (r.y1 - r.y0)


def _check_axis(axis: str) -> None:
    if axis not in _AXES:
        raise DomainError(f"axis must be one of {_AXES}, got {axis!r}")


def split_rect(r: Rect, axis: str, c: float) -> tuple[Rect, Rect]:
    """Cut ``r`` by a line at coordinate ``c``.

    ``axis="vertical"`` cuts with the vertical line ``x = c`` (left, right);
    ``axis="horizontal"`` cuts with ``y = c`` (bottom, top). ``c`` must lie in
    the open span, otherwise :class:`DomainError`.
    """
    _check_axis(axis)
    if axis == VERTICAL:
        if not r.x0 < c < r.x1:
            raise DomainError(f"cut x={c} outside open span ({r.x0}, {r.x1})")
        return Rect(r.x0, c, r.y0, r.y1), Rect(c, r.x1, r.y0, r.y1)
    if not r.y0 < c < r.y1:
        raise DomainError(f"cut y={c} outside open span ({r.y0}, {r.y1})")
    return Rect(r.x0, r.x1, r.y0, c), Rect(r.x0, r.x1, c, r.y1)


@dataclass(frozen=True)
class Figure:
    """Explicit list of pairwise non-overlapping rectangles.

    Non-overlap is the caller's contract; :func:`figure_overlaps` checks it.
    """

    rects: tuple[Rect, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rects", tuple(self.rects))

    def __len__(self):
        return len(self.rects)

    def as_arrays(self):
        if not self.rects:
            z = np.zeros(0)
            return z, z, z, z
        a = np.array([(r.x0, r.x1, r.y0, r.y1) for r in self.rects], dtype=float)
        return a[:, 0], a[:, 1], a[:, 2], a[:, 3]


def figure_overlaps(fig: Figure) -> bool:
    """True when two members share interior points (quadratic scan)."""
    rs = fig.rects
    for i in range(len(rs)):
        for j in range(i + 1, len(rs)):
            a, b = rs[i], rs[j]
            if (min(a.x1, b.x1) > max(a.x0, b.x0)
                    and min(a.y1, b.y1) > max(a.y0, b.y0)):
                return True
    return False


@dataclass(frozen=True)
class DyadicGrid:
    """Uniform grid of square cells of side ``unit / 2**level`` tiling ``bounds``.

    The cell side is absolute, so two grids over the same bounds at levels n
    and n+1 are nested: each level-n cell is the union of four children.
    Cell ``(i, j)`` spans ``[x0 + i h, x0 + (i+1) h] x [y0 + j h, y0 + (j+1) h]``.
    """

    bounds: Rect
    level: int
    unit: float = 1.0
    nx: int = field(init=False)
    ny: int = field(init=False)

    def __post_init__(self):
        if self.level < 0 or int(self.level) != self.level:
            raise DomainError(f"level must be a nonnegative integer, got {self.level}")
        if not self.unit > 0:
            raise DomainError("unit must be positive")
        h = self.h
        nx = round(self.bounds.width / h)
        ny = round(self.bounds.height / h)
        if nx < 1 or ny < 1:
            raise DomainError("grid bounds are smaller than one cell")
        if abs(nx * h - self.bounds.width) > 1e-9 * h or abs(ny * h - self.bounds.height) > 1e-9 * h:
            raise DomainError(
                f"bounds {self.bounds} are not a whole number of cells of side {h}")
        object.__setattr__(self, "nx", int(nx))
        object.__setattr__(self, "ny", int(ny))

    @property
    def h(self) -> float:
        return self.unit / 2 ** self.level

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    def xs(self) -> np.ndarray:
        """Grid line x-coordinates, length ``nx + 1``."""
        return self.bounds.x0 + np.arange(self.nx + 1) * self.h

    def ys(self) -> np.ndarray:
        return self.bounds.y0 + np.arange(self.ny + 1) * self.h

    def cell_rect(self, i: int, j: int) -> Rect:
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise DomainError(f"cell ({i}, {j}) outside {self.nx}x{self.ny} grid")
        h = self.h
        x0, y0 = self.bounds.x0, self.bounds.y0
        return Rect(x0 + i * h, x0 + (i + 1) * h, y0 + j * h, y0 + (j + 1) * h)

    def refine(self) -> "DyadicGrid":
        return DyadicGrid(self.bounds, self.level + 1, self.unit)

    def at_level(self, level: int) -> "DyadicGrid":
        return DyadicGrid(self.bounds, level, self.unit)


def snap_bounds(r: Rect, step: float) -> Rect:
    """Smallest rectangle with corners on multiples of ``step`` containing ``r``."""
    return Rect(math.floor(r.x0 / step) * step, math.ceil(r.x1 / step) * step,
                math.floor(r.y0 / step) * step, math.ceil(r.y1 / step) * step)


@dataclass(frozen=True, eq=False)
class GridFigure:
    """Figure stored as a boolean cell mask of one grid (index order ``[i, j]``)."""

    grid: DyadicGrid
    mask: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != self.grid.shape:
            raise ValidationError(f"mask shape {m.shape} != grid shape {self.grid.shape}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    def __len__(self):
        return int(self.mask.sum())

    @property
    def cells(self) -> list[tuple[int, int]]:
        return [tuple(map(int, ij)) for ij in np.argwhere(self.mask)]

    def as_arrays(self):
        ii, jj = np.nonzero(self.mask)
        h = self.grid.h
        x0 = self.grid.bounds.x0 + ii * h
        y0 = self.grid.bounds.y0 + jj * h
        return x0, self.grid.bounds.x0 + (ii + 1) * h, y0, self.grid.bounds.y0 + (jj + 1) * h

    @property
    def rects(self) -> tuple[Rect, ...]:
        return tuple(Rect(*map(float, t)) for t in zip(*self.as_arrays()))

    def refined(self) -> "GridFigure":
        """Same point set on the next grid level (every cell replaced by its 4 children)."""
        fine = self.grid.refine()
        return GridFigure(fine, np.kron(self.mask, np.ones((2, 2), dtype=bool)))


def figure_from_cells(grid: DyadicGrid, cells: Iterable[tuple[int, int]]) -> GridFigure:
    mask = np.zeros(grid.shape, dtype=bool)
    for i, j in cells:
        if not (0 <= i < grid.nx and 0 <= j < grid.ny):
            raise DomainError(f"cell ({i}, {j}) outside {grid.nx}x{grid.ny} grid")
        mask[i, j] = True
    return GridFigure(grid, mask)


def figure_area(fig: Figure | GridFigure) -> float:
    if isinstance(fig, GridFigure):
        # count * h^2 equals the correctly rounded sum of the cell areas
        h = fig.grid.h
        return float(np.count_nonzero(fig.mask)) * (h * h)
    return math.fsum(rect_area(r) for r in fig.rects)


@dataclass(frozen=True)
class OrientedEdge:
    """Axis-parallel edge ``[a, b]`` on the line ``fixed``; ``sign=+1`` runs a -> b."""

    axis: str
    fixed: float
    a: float
    b: float
    sign: int

    @property
    def length(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class EdgeArrays:
    """Column form of oriented boundary edges, one array entry per unit cell side."""

    h_fixed: np.ndarray
    h_a: np.ndarray
    h_b: np.ndarray
    h_sign: np.ndarray
    v_fixed: np.ndarray
    v_a: np.ndarray
    v_b: np.ndarray
    v_sign: np.ndarray

    def __len__(self):
        return len(self.h_fixed) + len(self.v_fixed)

    def total_length(self) -> float:
        return math.fsum(self.h_b - self.h_a) + math.fsum(self.v_b - self.v_a)


def boundary_edge_arrays(fig: GridFigure) -> EdgeArrays:
    """Uncancelled cell sides of a grid figure, counterclockwise about the figure."""
    m = fig.mask.astype(np.int8)
    g = fig.grid
    h = g.h
    x0, y0 = g.bounds.x0, g.bounds.y0
    # horizontal sides: +1 where the cell above is in and the cell below is not
    dh = np.diff(np.pad(m, ((0, 0), (1, 1))), axis=1)
    hi, hj = np.nonzero(dh)
    # vertical sides: +1 where the cell right of the line is in
    dv = np.diff(np.pad(m, ((1, 1), (0, 0))), axis=0)
    vi, vj = np.nonzero(dv)
    return EdgeArrays(
        h_fixed=y0 + hj * h, h_a=x0 + hi * h, h_b=x0 + (hi + 1) * h,
        h_sign=dh[hi, hj].astype(float),
        v_fixed=x0 + vi * h, v_a=y0 + vj * h, v_b=y0 + (vj + 1) * h,
        v_sign=-dv[vi, vj].astype(float),
    )


def figure_boundary_edges(fig: GridFigure) -> list[OrientedEdge]:
    """Cell sides of the figure left after cancelling every shared side.

    A side shared by two member cells is traversed in opposite directions by
    their counterclockwise boundaries and drops out; what remains traces the
    topological boundary of the figure, counterclockwise.
    """
    e = boundary_edge_arrays(fig)
    out = [OrientedEdge(HORIZONTAL, float(f), float(a), float(b), int(s))
           for f, a, b, s in zip(e.h_fixed, e.h_a, e.h_b, e.h_sign)]
    out += [OrientedEdge(VERTICAL, float(f), float(a), float(b), int(s))
            for f, a, b, s in zip(e.v_fixed, e.v_a, e.v_b, e.v_sign)]
    return out


def cell_sides_oriented(rects: Sequence[Rect]) -> list[OrientedEdge]:
    """All four counterclockwise sides of each rectangle, no cancellation."""
    out = []
    for r in rects:
        out += [OrientedEdge(HORIZONTAL, r.y0, r.x0, r.x1, 1),
                OrientedEdge(VERTICAL, r.x1, r.y0, r.y1, 1),
                OrientedEdge(HORIZONTAL, r.y1, r.x0, r.x1, -1),
                OrientedEdge(VERTICAL, r.x0, r.y0, r.y1, -1)]
    return out
