"""Closed polyline curves and Interior/Boundary/Exterior labelling of grid cells."""
from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from ._parallel import map_chunks
from .errors import DomainError, IndeterminateError, ValidationError
from .geom2d import DyadicGrid, GridFigure, Rect, snap_bounds

_ORIENTATIONS = ("auto", "ccw", "cw")


class Label(enum.IntEnum):
    EXTERIOR = 0
    BOUNDARY = 1
    INTERIOR = 2


def _segments_simple(v: np.ndarray) -> bool:
    """Spatial-hash check that the closed polyline ``v`` has no self-intersection."""
    n = len(v)
    p0, p1 = v, np.roll(v, -1, axis=0)
    d = p1 - p0
    # adjacent segments may only share their common vertex
    dn = np.roll(d, -1, axis=0)
    cross = d[:, 0] * dn[:, 1] - d[:, 1] * dn[:, 0]
    dot = (d * dn).sum(axis=1)
    if np.any((cross == 0) & (dot < 0)):
        return False
    if n == 3:
        return True

    lo, hi = np.minimum(p0, p1), np.maximum(p0, p1)
    cs = float((hi - lo).max())
    origin = lo.min(axis=0)
    ilo = np.floor((lo - origin) / cs).astype(np.int64)
    ihi = np.floor((hi - origin) / cs).astype(np.int64)
    buckets = defaultdict(list)
    for s in range(n):
        for cx in range(ilo[s, 0], ihi[s, 0] + 1):
            for cy in range(ilo[s, 1], ihi[s, 1] + 1):
                buckets[(cx, cy)].append(s)
    keys = []
    for members in buckets.values():
        if len(members) > 1:
            m = np.array(members)
            a, b = np.triu_indices(len(m), 1)
            keys.append(np.minimum(m[a], m[b]) * n + np.maximum(m[a], m[b]))
    if not keys:
        return True
    pairs = np.unique(np.concatenate(keys))
    i, j = pairs // n, pairs % n
    keep = (j != i + 1) & ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]

    def orient(a, b, c):
        return np.sign((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                       - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    a, b, c, e = p0[i], p1[i], p0[j], p1[j]
    box = ((lo[i] <= hi[j]) & (lo[j] <= hi[i])).all(axis=1)
    hit = box & (orient(a, b, c) * orient(a, b, e) <= 0) & (orient(c, e, a) * orient(c, e, b) <= 0)
    return not bool(hit.any())


class Curve:
    """Closed simple polyline standing in for a rectifiable Jordan curve.

    ``epsilon`` bounds the distance from the polyline to the ideal curve it
    samples; classification dilates the polyline by it. ``orientation`` may
    be declared as ``"ccw"`` or ``"cw"``, in which case it must agree with
    the shoelace sign.
    """

    def __init__(self, vertices, epsilon: float = 0.0, orientation: str = "auto",
                 validate: bool = True):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValidationError(f"vertices must have shape (n, 2), got {v.shape}")
        if len(v) > 1 and np.array_equal(v[0], v[-1]):
            v = v[:-1]
        if len(v) < 3:
            raise ValidationError(f"a closed curve needs at least 3 vertices, got {len(v)}")
        if not np.isfinite(v).all():
            raise ValidationError("vertices must be finite")
        if not (epsilon >= 0 and math.isfinite(epsilon)):
            raise ValidationError(f"epsilon must be a finite nonnegative number, got {epsilon}")
        if orientation not in _ORIENTATIONS:
            raise ValidationError(f"orientation must be one of {_ORIENTATIONS}")
        seg = np.hypot(*(np.roll(v, -1, axis=0) - v).T)
        if validate:
            if np.any(seg <= 0):
                raise ValidationError("repeated consecutive vertices")
            if not _segments_simple(v):
                raise ValidationError("curve is self-intersecting")
        v.setflags(write=False)
        self.vertices = v
        self.epsilon = float(epsilon)
        self.arclength = np.concatenate([[0.0], np.cumsum(seg)])
        self.arclength.setflags(write=False)
        self._seg = seg
        area = curve_signed_area(self)
        if area == 0:
            raise ValidationError("curve encloses zero signed area")
        if orientation == "ccw" and area < 0 or orientation == "cw" and area > 0:
            raise ValidationError(f"declared orientation {orientation!r} disagrees with vertex order")
        self.signed_area = area

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"Curve(n={len(self)}, length={curve_length(self):.6g}, epsilon={self.epsilon:g})"

    @property
    def orientation(self) -> int:
        """+1 for counterclockwise vertex order, -1 for clockwise."""
        return 1 if self.signed_area > 0 else -1

    @property
    def segment_lengths(self) -> np.ndarray:
        return self._seg

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices, np.roll(self.vertices, -1, axis=0)

    def bbox(self) -> Rect:
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        return Rect(float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1]))

    def reversed(self) -> "Curve":
        return Curve(self.vertices[::-1], self.epsilon, validate=False)


def curve_length(c: Curve) -> float:
    return math.fsum(c.segment_lengths)


def curve_signed_area(c: Curve) -> float:
    """Shoelace area; positive for counterclockwise curves."""
    x, y = c.vertices[:, 0], c.vertices[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * math.fsum(np.concatenate([x * yn, -(xn * y)]))


def refine_curve(c: Curve, max_seg: float) -> Curve:
    """Bisect every segment until none is longer than ``max_seg``.

    Each segment of length L is cut into ``2**m`` equal pieces with the
    smallest such ``m``; bisecting an already bisected curve therefore
    reproduces the same points.
    """
    if not max_seg > 0:
        raise DomainError(f"max_seg must be positive, got {max_seg}")
    seg = c.segment_lengths
    if np.all(seg <= max_seg):
        return c
    m = np.zeros(len(seg), dtype=np.int64)
    long = seg > max_seg
    m[long] = np.ceil(np.log2(seg[long] / max_seg)).astype(np.int64)
    # guard log2 rounding at exact powers of two
    while np.any(seg / 2.0 ** m > max_seg):
        m[seg / 2.0 ** m > max_seg] += 1
    pieces = 2 ** m
    p0, p1 = c.segments()
    owner = np.repeat(np.arange(len(seg)), pieces)
    start = np.concatenate([[0], np.cumsum(pieces)[:-1]])
    t = (np.arange(pieces.sum()) - start[owner]) / pieces[owner]
    pts = p0[owner] + (p1[owner] - p0[owner]) * t[:, None]
    return Curve(pts, c.epsilon, validate=False)


def _point_segment_dist(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    t = np.clip(((p - a) * d).sum(axis=-1) / (d * d).sum(axis=-1), 0.0, 1.0)
    return np.hypot(*(a + d * t[..., None] - p).T)


def point_in_region(c: Curve, p) -> bool:
    """Winding-number membership test.

    Raises :class:`IndeterminateError` if ``p`` lies within ``c.epsilon`` of
    the polyline, where the ideal curve may pass on either side.
    """
    p = np.asarray(p, dtype=float)
    a, b = c.segments()
    if _point_segment_dist(p, a, b).min() <= c.epsilon:
        raise IndeterminateError(f"point {tuple(p)} lies within epsilon of the curve")
    is_left = (b[:, 0] - a[:, 0]) * (p[1] - a[:, 1]) - (p[0] - a[:, 0]) * (b[:, 1] - a[:, 1])
    up = (a[:, 1] <= p[1]) & (b[:, 1] > p[1]) & (is_left > 0)
    down = (a[:, 1] > p[1]) & (b[:, 1] <= p[1]) & (is_left < 0)
    return int(up.sum()) - int(down.sum()) != 0


@dataclass(frozen=True, eq=False)
class CellClassification:
    grid: DyadicGrid
    labels: np.ndarray  # int8, shape grid.shape, values from Label

    @property
    def interior(self) -> np.ndarray:
        return self.labels == Label.INTERIOR

    @property
    def boundary(self) -> np.ndarray:
        return self.labels == Label.BOUNDARY

    @property
    def exterior(self) -> np.ndarray:
        return self.labels == Label.EXTERIOR

    def inner_figure(self) -> GridFigure:
        return GridFigure(self.grid, self.interior)

    def outer_figure(self) -> GridFigure:
        return GridFigure(self.grid, self.labels != Label.EXTERIOR)

    def label(self, i: int, j: int) -> Label:
        return Label(int(self.labels[i, j]))

    def count(self, label: Label) -> int:
        return int(np.count_nonzero(self.labels == label))


def _slack(grid: DyadicGrid, pts: np.ndarray) -> float:
    scale = max(float(np.abs(pts).max()), abs(grid.bounds.x0), abs(grid.bounds.x1),
                abs(grid.bounds.y0), abs(grid.bounds.y1)) + grid.h
    return 64 * np.finfo(float).eps * scale


def _segment_candidates(p0, p1, grid: DyadicGrid, r: float, cap: int = 64):
    """(segment, i, j) triples covering every cell a segment's r-neighbourhood may touch.

    Long segments are bisected for candidate generation only; the predicate is
    always evaluated against the original segment.
    """
    h = grid.h
    X0, Y0 = grid.bounds.x0, grid.bounds.y0
    owner = np.arange(len(p0))
    a, b = p0, p1
    out = []
    while len(owner):
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        ix0 = np.clip(np.floor((lo[:, 0] - r - X0) / h).astype(np.int64) - 1, 0, grid.nx - 1)
        ix1 = np.clip(np.floor((hi[:, 0] + r - X0) / h).astype(np.int64), 0, grid.nx - 1)
        iy0 = np.clip(np.floor((lo[:, 1] - r - Y0) / h).astype(np.int64) - 1, 0, grid.ny - 1)
        iy1 = np.clip(np.floor((hi[:, 1] + r - Y0) / h).astype(np.int64), 0, grid.ny - 1)
        wx, wy = ix1 - ix0 + 1, iy1 - iy0 + 1
        small = wx * wy <= cap
        if small.any():
            o, wxs, wys = owner[small], wx[small], wy[small]
            cnt = wxs * wys
            rep = np.repeat(np.arange(len(o)), cnt)
            local = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
            out.append((o[rep], ix0[small][rep] + local // wys[rep], iy0[small][rep] + local % wys[rep]))
        big = ~small
        if big.any():
            a, b = a[big], b[big]
            mid = 0.5 * (a + b)
            owner = np.concatenate([owner[big], owner[big]])
            a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
        else:
            break
    if not out:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z
    return tuple(np.concatenate(parts) for parts in zip(*out))


def segment_touches_box(p0, p1, bx0, bx1, by0, by1, r: float) -> np.ndarray:
    """True where the closed box lies within distance ``r`` of the segment."""
    px0, py0, px1, py1 = p0[:, 0], p0[:, 1], p1[:, 0], p1[:, 1]
    dx, dy = px1 - px0, py1 - py0
    overlap = ((np.minimum(px0, px1) <= bx1) & (np.maximum(px0, px1) >= bx0)
               & (np.minimum(py0, py1) <= by1) & (np.maximum(py0, py1) >= by0))
    corners = [(bx0, by0), (bx1, by0), (bx1, by1), (bx0, by1)]
    crs = [dx * (cy - py0) - dy * (cx - px0) for cx, cy in corners]
    cmin = np.minimum(np.minimum(crs[0], crs[1]), np.minimum(crs[2], crs[3]))
    cmax = np.maximum(np.maximum(crs[0], crs[1]), np.maximum(crs[2], crs[3]))
    hit = overlap & (cmin <= 0) & (cmax >= 0)

    def end_d2(px, py):
        ex = np.maximum(np.maximum(bx0 - px, 0.0), px - bx1)
        ey = np.maximum(np.maximum(by0 - py, 0.0), py - by1)
        return ex * ex + ey * ey

    d2 = np.minimum(end_d2(px0, py0), end_d2(px1, py1))
    len2 = dx * dx + dy * dy
    for cx, cy in corners:
        t = np.clip(((cx - px0) * dx + (cy - py0) * dy) / len2, 0.0, 1.0)
        qx, qy = px0 + t * dx - cx, py0 + t * dy - cy
        d2 = np.minimum(d2, qx * qx + qy * qy)
    return hit | (d2 <= r * r)


def mark_boundary_cells(c: Curve, grid: DyadicGrid, threads: int = 1) -> np.ndarray:
    """Boolean mask of cells whose closed extent meets the epsilon-dilated polyline."""
    p0, p1 = c.segments()
    r = c.epsilon + _slack(grid, c.vertices)
    seg, ci, cj = _segment_candidates(p0, p1, grid, r)
    h = grid.h
    X0, Y0 = grid.bounds.x0, grid.bounds.y0
    mask = np.zeros(grid.shape, dtype=bool)

    def work(lo, hi):
        s, i, j = seg[lo:hi], ci[lo:hi], cj[lo:hi]
        hit = segment_touches_box(p0[s], p1[s], X0 + i * h, X0 + (i + 1) * h,
                                  Y0 + j * h, Y0 + (j + 1) * h, r)
        return i[hit], j[hit]

    for i, j in map_chunks(work, len(seg), 1 << 18, threads):
        mask[i, j] = True
    return mask


def flood_labels(boundary: np.ndarray, inside=None) -> np.ndarray:
    """Label the face-connected components of the non-boundary cells.

    Components meeting the rim are Exterior. A component sealed off by
    boundary cells is Interior unless ``inside(index)`` (called once per
    component with one of its cell indices) says otherwise; narrow outside
    inlets can be sealed at coarse levels. Works in any dimension.
    """
    if boundary.size == 0:
        raise DomainError("empty grid")
    rim = np.zeros_like(boundary)
    for ax in range(boundary.ndim):
        idx = [slice(None)] * boundary.ndim
        idx[ax] = 0
        rim[tuple(idx)] = True
        idx[ax] = -1
        rim[tuple(idx)] = True
    if np.any(boundary & rim):
        raise DomainError("grid bounding box too small: the curve reaches the outer rim cells")
    structure = ndimage.generate_binary_structure(boundary.ndim, 1)
    comp, _ = ndimage.label(~boundary, structure=structure)
    outside = set(np.unique(comp[rim]).tolist()) - {0}
    if inside is not None:
        ids, first = np.unique(comp.ravel(), return_index=True)
        for k, flat in zip(ids.tolist(), first.tolist()):
            if k and k not in outside and not inside(np.unravel_index(flat, comp.shape)):
                outside.add(k)
    labels = np.full(boundary.shape, Label.INTERIOR, dtype=np.int8)
    labels[boundary] = Label.BOUNDARY
    labels[np.isin(comp, sorted(outside))] = Label.EXTERIOR
    return labels


def classify_cells(c: Curve, grid: DyadicGrid, threads: int = 1) -> CellClassification:
    """Label every cell Interior, Boundary or Exterior.

    Boundary cells are those whose closed extent touches the polyline dilated
    by ``c.epsilon`` (ties go to Boundary). Exterior is the 4-connected flood
    fill of non-Boundary cells from the rim, plus any sealed-off component
    whose representative cell centre has winding number zero; everything
    else is Interior.
    """
    bb, b = c.bbox(), grid.bounds
    e = c.epsilon
    if not (b.x0 < bb.x0 - e and bb.x1 + e < b.x1 and b.y0 < bb.y0 - e and bb.y1 + e < b.y1):
        raise DomainError(f"grid bounds {b} do not strictly contain the dilated curve {bb}")
    boundary = mark_boundary_cells(c, grid, threads)
    if not boundary.any():
        raise ValidationError("classification found no boundary cells")
    h = grid.h

    def inside(ij):
        return point_in_region(c, (b.x0 + (ij[0] + 0.5) * h, b.y0 + (ij[1] + 0.5) * h))

    return CellClassification(grid, flood_labels(boundary, inside))


def default_bounds(c: Curve, step: float) -> Rect:
    """Curve bounding box inflated by 25% (at least two cells), snapped to ``step``."""
    bb = c.bbox()
    margin = max(0.25 * max(bb.width, bb.height), 2.0 * step) + c.epsilon
    return snap_bounds(Rect(bb.x0 - margin, bb.x1 + margin, bb.y0 - margin, bb.y1 + margin), step)


# -- shipped test regions -------------------------------------------------

def square_curve(side: float = 1.0) -> Curve:
    return Curve([(0.0, 0.0), (side, 0.0), (side, side), (0.0, side)])


def disk_curve(n: int = 4096, radius: float = 1.0, center=(0.0, 0.0)) -> Curve:
    """Regular ``n``-gon inscribed in a circle; epsilon is the chord sagitta."""
    if n < 3:
        raise ValidationError("disk needs at least 3 vertices")
    t = 2.0 * np.pi * np.arange(n) / n
    pts = np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])
    return Curve(pts, epsilon=radius * (1.0 - math.cos(math.pi / n)))


def lshape_curve() -> Curve:
    """L-shaped hexagon ``[0,2]x[0,1] U [0,1]x[0,2]``: area 3, length 8."""
    return Curve([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])


# -- curve files ----------------------------------------------------------

def parse_curve(text: str, source: str = "<string>") -> Curve:
    """Parse the plain-text curve format.

    ``key = value`` lines set ``closed`` (must be true), ``epsilon`` and
    ``orientation``; every other non-blank line is an ``x y`` vertex row
    (whitespace or comma separated). ``#`` starts a comment.
    """
    fields = {"closed": "true", "epsilon": "0", "orientation": "auto"}
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, val = (s.strip() for s in line.partition("="))
            if key not in fields:
                raise ValidationError(f"{source}:{lineno}: unknown field {key!r}")
            fields[key] = val
            continue
        parts = line.replace(",", " ").split()
        try:
            if len(parts) != 2:
                raise ValueError
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ValidationError(f"{source}:{lineno}: expected 'x y', got {raw.strip()!r}") from None
    if fields["closed"].lower() != "true":
        raise ValidationError(f"{source}: only closed curves are supported (closed = true)")
    try:
        eps = float(fields["epsilon"])
    except ValueError:
        raise ValidationError(f"{source}: epsilon is not a number: {fields['epsilon']!r}") from None
    return Curve(rows, epsilon=eps, orientation=fields["orientation"].lower())


def read_curve(path) -> Curve:
    path = Path(path)
    return parse_curve(path.read_text(), str(path))


def format_curve(c: Curve) -> str:
    lines = ["closed = true", f"epsilon = {c.epsilon!r}",
             f"orientation = {'ccw' if c.orientation > 0 else 'cw'}"]
    lines += [f"{x!r} {y!r}" for x, y in c.vertices.tolist()]
    return "\n".join(lines) + "\n"
