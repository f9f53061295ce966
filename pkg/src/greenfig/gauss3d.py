"""Closed triangle meshes, voxel classification and the divergence-theorem check.

This mirrors the 2D pipeline one dimension up: boxes instead of rectangles,
flux through the six faces instead of circulation around four sides, and
Interior/Boundary/Exterior voxels from a separating-axis triangle-box test
plus a 6-connected flood fill.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from ._parallel import map_chunks
from .errors import DomainError, IndeterminateError, ValidationError
from .integral import ConvergenceReport, LevelRow, check_levels, run_levels
from .rectfn import QuadratureSpec, quad2, tensor_panels
from .region2d import Label, flood_labels
from .verify import GreenReport, resolve_tol_figure

_EMPTY = (np.zeros(0), np.zeros(0, dtype=np.int64))


# -- boxes and grids ------------------------------------------------------

@dataclass(frozen=True)
class Box3:
    x0: float
    x1: float
    y0: float
    y1: float
    z0: float
    z1: float

    def __post_init__(self):
        vals = (self.x0, self.x1, self.y0, self.y1, self.z0, self.z1)
        if not all(math.isfinite(t) for t in vals):
            raise ValidationError("Box3 coordinates must be finite")
        if self.x0 > self.x1 or self.y0 > self.y1 or self.z0 > self.z1:
            raise ValidationError(f"inverted box {self!r}")

    @property
    def lo(self) -> np.ndarray:
        return np.array([self.x0, self.y0, self.z0])

    @property
    def hi(self) -> np.ndarray:
        return np.array([self.x1, self.y1, self.z1])

    @property
    def sides(self) -> np.ndarray:
        return self.hi - self.lo


def box_volume(b: Box3) -> float:
    return (b.x1 - b.x0) * (b.y1 - b.y0) * (b.z1 - b.z0)


def box_surface_area(b: Box3) -> float:
    dx, dy, dz = b.sides
    return 2.0 * (dx * dy + dy * dz + dz * dx)


@dataclass(frozen=True)
class VoxelGrid:
    """Cubic voxels of side ``unit / 2**level`` tiling ``bounds``; index order ``[i, j, k]``."""

    bounds: Box3
    level: int
    unit: float = 1.0
    shape: tuple = field(init=False)

    def __post_init__(self):
        if self.level < 0 or int(self.level) != self.level:
            raise DomainError(f"level must be a nonnegative integer, got {self.level}")
        h = self.h
        n = np.round(self.bounds.sides / h).astype(int)
        if np.any(n < 1) or np.any(np.abs(n * h - self.bounds.sides) > 1e-9 * h):
            raise DomainError(f"bounds {self.bounds} are not a whole number of voxels of side {h}")
        object.__setattr__(self, "shape", tuple(int(t) for t in n))

    @property
    def h(self) -> float:
        return self.unit / 2 ** self.level

    def voxel_box(self, i: int, j: int, k: int) -> Box3:
        h, lo = self.h, self.bounds.lo
        return Box3(lo[0] + i * h, lo[0] + (i + 1) * h, lo[1] + j * h, lo[1] + (j + 1) * h,
                    lo[2] + k * h, lo[2] + (k + 1) * h)


def snap_box(b: Box3, step: float) -> Box3:
    lo = np.floor(b.lo / step) * step
    hi = np.ceil(b.hi / step) * step
    return Box3(lo[0], hi[0], lo[1], hi[1], lo[2], hi[2])


# -- meshes ---------------------------------------------------------------

class TriMesh:
    """Triangle mesh with outward (counterclockwise seen from outside) winding.

    ``epsilon`` bounds the distance from the mesh to the ideal surface; the
    voxel test inflates boxes by it.
    """

    def __init__(self, vertices, triangles, epsilon: float = 0.0):
        v = np.array(vertices, dtype=float)
        t = np.array(triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3 or not len(v):
            raise ValidationError(f"vertices must have shape (n, 3), got {v.shape}")
        if t.ndim != 2 or t.shape[1] != 3 or not len(t):
            raise ValidationError(f"triangles must have shape (m, 3), got {t.shape}")
        if not np.isfinite(v).all():
            raise ValidationError("vertices must be finite")
        if t.min() < 0 or t.max() >= len(v):
            raise ValidationError("triangle index out of range")
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            raise ValidationError("triangle with repeated vertex index")
        if not (epsilon >= 0 and math.isfinite(epsilon)):
            raise ValidationError("epsilon must be finite and nonnegative")
        v.setflags(write=False)
        t.setflags(write=False)
        self.vertices, self.triangles, self.epsilon = v, t, float(epsilon)

    def __len__(self):
        return len(self.triangles)

    def __repr__(self):
        return f"TriMesh(vertices={len(self.vertices)}, triangles={len(self)})"

    def corners(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        v, t = self.vertices, self.triangles
        return v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]

    def bbox(self) -> Box3:
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        return Box3(lo[0], hi[0], lo[1], hi[1], lo[2], hi[2])

    def without(self, index: int) -> "TriMesh":
        return TriMesh(self.vertices, np.delete(self.triangles, index, axis=0), self.epsilon)

    def flipped(self) -> "TriMesh":
        return TriMesh(self.vertices, self.triangles[:, ::-1], self.epsilon)

    def edge_length(self) -> float:
        a, b, c = self.corners()
        return 0.5 * math.fsum(np.concatenate([np.linalg.norm(b - a, axis=1),
                                               np.linalg.norm(c - b, axis=1),
                                               np.linalg.norm(a - c, axis=1)]))


class MeshChecks(NamedTuple):
    area: float
    signed_volume: float
    closed: bool


def is_closed(m: TriMesh) -> bool:
    """Every directed edge appears once and its reverse appears once."""
    t = m.triangles
    n = len(m.vertices)
    a = np.concatenate([t[:, 0], t[:, 1], t[:, 2]])
    b = np.concatenate([t[:, 1], t[:, 2], t[:, 0]])
    fwd = a * n + b
    if len(np.unique(fwd)) != len(fwd):
        return False
    return bool(np.array_equal(np.sort(fwd), np.sort(b * n + a)))


def mesh_checks(m: TriMesh) -> MeshChecks:
    a, b, c = m.corners()
    cr = np.cross(b - a, c - a)
    area = 0.5 * math.fsum(np.linalg.norm(cr, axis=1))
    det = a[:, 0] * (b[:, 1] * c[:, 2] - b[:, 2] * c[:, 1]) \
        - a[:, 1] * (b[:, 0] * c[:, 2] - b[:, 2] * c[:, 0]) \
        + a[:, 2] * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    return MeshChecks(area, math.fsum(det) / 6.0, is_closed(m))


def cube_mesh(lo=(0.0, 0.0, 0.0), side: float = 1.0) -> TriMesh:
    x0, y0, z0 = lo
    x1, y1, z1 = x0 + side, y0 + side, z0 + side
    v = [(x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0),
         (x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1)]
    t = [(0, 2, 1), (0, 3, 2), (4, 5, 6), (4, 6, 7), (0, 1, 5), (0, 5, 4),
         (2, 3, 7), (2, 7, 6), (1, 2, 6), (1, 6, 5), (0, 4, 7), (0, 7, 3)]
    return TriMesh(v, t)


def icosphere(depth: int = 4, radius: float = 1.0) -> TriMesh:
    """Subdivided icosahedron with vertices projected to the sphere at each step.

    The resulting polyhedron is the ground truth surface (epsilon 0).
    """
    if depth < 0:
        raise DomainError("icosphere depth must be >= 0")
    p = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [(-1, p, 0), (1, p, 0), (-1, -p, 0), (1, -p, 0), (0, -1, p), (0, 1, p),
             (0, -1, -p), (0, 1, -p), (p, 0, -1), (p, 0, 1), (-p, 0, -1), (-p, 0, 1)]
    verts = [tuple(np.array(q, dtype=float) / math.sqrt(1 + p * p)) for q in verts]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    for _ in range(depth):
        cache = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                q = np.add(verts[i], verts[j])
                verts.append(tuple(q / np.linalg.norm(q)))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    m = TriMesh(np.array(verts) * radius, faces)
    return m if mesh_checks(m).signed_volume > 0 else m.flipped()


def parse_mesh(text: str, source: str = "<string>") -> TriMesh:
    """Read the triangle-soup format or the ``v``/``f`` polygon format (triangles only).

    Soup: header ``vertices N triangles M``, N rows ``x y z``, M rows ``i j k``
    (0-based). Polygon format: ``v x y z`` and ``f a b c`` rows with 1-based
    indices, ``a/b/c`` vertex tokens allowed; other record types are ignored.
    """
    lines = [(n, ln.split("#", 1)[0].strip()) for n, ln in enumerate(text.splitlines(), 1)]
    lines = [(n, ln) for n, ln in lines if ln]
    if not lines:
        raise ValidationError(f"{source}: empty mesh file")

    def nums(n, parts, kind, count):
        if len(parts) != count:
            raise ValidationError(f"{source}:{n}: expected {count} values, got {len(parts)}")
        try:
            return [kind(p) for p in parts]
        except ValueError:
            raise ValidationError(f"{source}:{n}: malformed row {' '.join(parts)!r}") from None

    first = lines[0][1].split()
    if first[0].lower() == "vertices":
        n0 = lines[0][0]
        if len(first) != 4 or first[2].lower() != "triangles":
            raise ValidationError(f"{source}:{n0}: header must be 'vertices N triangles M'")
        nv, nt = nums(n0, [first[1], first[3]], int, 2)
        body = lines[1:]
        if len(body) != nv + nt:
            raise ValidationError(f"{source}: expected {nv + nt} data rows, got {len(body)}")
        v = [nums(n, ln.split(), float, 3) for n, ln in body[:nv]]
        t = [nums(n, ln.split(), int, 3) for n, ln in body[nv:]]
        return TriMesh(v, t)

    v, t = [], []
    for n, ln in lines:
        parts = ln.split()
        if parts[0] == "v":
            v.append(nums(n, parts[1:4], float, 3) if len(parts) >= 4 else nums(n, parts[1:], float, 3))
        elif parts[0] == "f":
            if len(parts) != 4:
                raise ValidationError(f"{source}:{n}: only triangular faces are supported")
            t.append([i - 1 for i in nums(n, [p.split("/")[0] for p in parts[1:]], int, 3)])
    if not v or not t:
        raise ValidationError(f"{source}: no vertices or faces found")
    return TriMesh(v, t)


def read_mesh(path) -> TriMesh:
    path = Path(path)
    return parse_mesh(path.read_text(), str(path))


def format_mesh(m: TriMesh) -> str:
    out = [f"vertices {len(m.vertices)} triangles {len(m.triangles)}"]
    out += [" ".join(repr(float(c)) for c in row) for row in m.vertices]
    out += [" ".join(str(int(c)) for c in row) for row in m.triangles]
    return "\n".join(out) + "\n"


def mesh_winding_number(m: TriMesh, p) -> float:
    """Sum of signed solid angles over ``4 pi``: 1 inside an outward mesh, 0 outside."""
    a, b, c = m.corners()
    A, B, C = a - p, b - p, c - p
    la, lb, lc = (np.linalg.norm(X, axis=1) for X in (A, B, C))
    num = np.einsum("ij,ij->i", A, np.cross(B, C))
    den = (la * lb * lc + np.einsum("ij,ij->i", A, B) * lc + np.einsum("ij,ij->i", A, C) * lb
           + np.einsum("ij,ij->i", B, C) * la)
    return math.fsum(2.0 * np.arctan2(num, den)) / (4.0 * math.pi)


def point_in_mesh(m: TriMesh, p) -> bool:
    w = mesh_winding_number(m, np.asarray(p, dtype=float))
    if abs(w - round(w)) > 0.25:
        raise IndeterminateError(f"point {tuple(p)} is too close to the mesh (winding {w:.3f})")
    return round(w) != 0


# -- voxel classification -------------------------------------------------

def tri_box_overlap(v0, v1, v2, center, hs: float) -> np.ndarray:
    """Separating-axis test of triangles against closed cubes of half-side ``hs``.

    Touching counts as overlap. All arguments are row-aligned ``(N, 3)`` arrays.
    """
    a, b, c = v0 - center, v1 - center, v2 - center
    sep = np.zeros(len(a), dtype=bool)
    for k in range(3):
        mn = np.minimum(np.minimum(a[:, k], b[:, k]), c[:, k])
        mx = np.maximum(np.maximum(a[:, k], b[:, k]), c[:, k])
        sep |= (mn > hs) | (mx < -hs)
    e0, e1, e2 = b - a, c - b, a - c
    n = np.cross(e0, e1)
    sep |= np.abs((n * a).sum(axis=1)) > hs * np.abs(n).sum(axis=1)
    zero = np.zeros(len(a))
    for e in (e0, e1, e2):
        ex, ey, ez = e[:, 0], e[:, 1], e[:, 2]
        for ax in ((zero, ez, -ey), (-ez, zero, ex), (ey, -ex, zero)):
            pa = ax[0] * a[:, 0] + ax[1] * a[:, 1] + ax[2] * a[:, 2]
            pb = ax[0] * b[:, 0] + ax[1] * b[:, 1] + ax[2] * b[:, 2]
            pc = ax[0] * c[:, 0] + ax[1] * c[:, 1] + ax[2] * c[:, 2]
            r = hs * (np.abs(ax[0]) + np.abs(ax[1]) + np.abs(ax[2]))
            sep |= (np.minimum(np.minimum(pa, pb), pc) > r) | (np.maximum(np.maximum(pa, pb), pc) < -r)
    return ~sep


def _triangle_candidates(a, b, c, grid: VoxelGrid, r: float, cap: int = 512):
    """(triangle, i, j, k) candidates; large triangles are split for windowing only."""
    h, lo0 = grid.h, grid.bounds.lo
    shape = np.array(grid.shape)
    owner = np.arange(len(a))
    out = []
    while len(owner):
        lo = np.minimum(np.minimum(a, b), c)
        hi = np.maximum(np.maximum(a, b), c)
        i0 = np.clip(np.floor((lo - r - lo0) / h).astype(np.int64) - 1, 0, shape - 1)
        i1 = np.clip(np.floor((hi + r - lo0) / h).astype(np.int64), 0, shape - 1)
        w = i1 - i0 + 1
        cnt = w.prod(axis=1)
        small = cnt <= cap
        if small.any():
            o, ws, base, cs = owner[small], w[small], i0[small], cnt[small]
            rep = np.repeat(np.arange(len(o)), cs)
            local = np.arange(cs.sum()) - np.repeat(np.cumsum(cs) - cs, cs)
            wy, wz = ws[rep, 1], ws[rep, 2]
            out.append((o[rep], base[rep, 0] + local // (wy * wz),
                        base[rep, 1] + (local // wz) % wy, base[rep, 2] + local % wz))
        big = ~small
        if not big.any():
            break
        a, b, c, o = a[big], b[big], c[big], owner[big]
        ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
        a, b, c = (np.concatenate(t) for t in ((a, b, c, ab), (ab, bc, ca, bc), (ca, ab, bc, ca)))
        owner = np.concatenate([o, o, o, o])
    if not out:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z, z
    return tuple(np.concatenate(p) for p in zip(*out))


@dataclass(frozen=True, eq=False)
class VoxelClassification:
    grid: VoxelGrid
    labels: np.ndarray

    @property
    def interior(self) -> np.ndarray:
        return self.labels == Label.INTERIOR

    @property
    def boundary(self) -> np.ndarray:
        return self.labels == Label.BOUNDARY

    def count(self, label: Label) -> int:
        return int(np.count_nonzero(self.labels == label))

    def inner_volume(self) -> float:
        return self.count(Label.INTERIOR) * self.grid.h ** 3

    def outer_volume(self) -> float:
        return (self.count(Label.INTERIOR) + self.count(Label.BOUNDARY)) * self.grid.h ** 3


def classify_voxels(m: TriMesh, g: VoxelGrid, threads: int = 1) -> VoxelClassification:
    """Boundary voxels touch the mesh (boxes inflated by epsilon); Exterior is the
    6-connected flood fill from the rim plus sealed components whose
    representative voxel centre has winding number zero; the rest are Interior."""
    bb, b, e = m.bbox(), g.bounds, m.epsilon
    if not (np.all(b.lo < bb.lo - e) and np.all(bb.hi + e < b.hi)):
        raise DomainError(f"voxel grid bounds {b} do not strictly contain the dilated mesh")
    scale = float(max(np.abs(m.vertices).max(), np.abs(b.lo).max(), np.abs(b.hi).max())) + g.h
    r = e + 64 * np.finfo(float).eps * scale
    a0, a1, a2 = m.corners()
    tri, ci, cj, ck = _triangle_candidates(a0, a1, a2, g, r)
    h, lo = g.h, b.lo
    mask = np.zeros(g.shape, dtype=bool)

    def work(s, t):
        o = tri[s:t]
        idx = np.column_stack([ci[s:t], cj[s:t], ck[s:t]])
        center = lo + (idx + 0.5) * h
        hit = tri_box_overlap(a0[o], a1[o], a2[o], center, 0.5 * h + r)
        return idx[hit]

    for idx in map_chunks(work, len(tri), 1 << 17, threads):
        mask[idx[:, 0], idx[:, 1], idx[:, 2]] = True
    if not mask.any():
        raise ValidationError("voxel classification found no boundary voxels")

    def inside(idx):
        return point_in_mesh(m, lo + (np.array(idx) + 0.5) * h)

    return VoxelClassification(g, flood_labels(mask, inside))


def default_box(m: TriMesh, step: float) -> Box3:
    bb = m.bbox()
    margin = max(0.25 * float(bb.sides.max()), 2.0 * step) + m.epsilon
    return snap_box(Box3(bb.x0 - margin, bb.x1 + margin, bb.y0 - margin, bb.y1 + margin,
                         bb.z0 - margin, bb.z1 + margin), step)


# -- box functions --------------------------------------------------------

@dataclass(frozen=True)
class FaceArrays:
    """Axis-normal faces: ``axis`` in 0..2, ``fixed`` coordinate, spans of the
    other two axes in increasing axis order, outward ``sign``."""

    axis: np.ndarray
    fixed: np.ndarray
    u0: np.ndarray
    u1: np.ndarray
    v0: np.ndarray
    v1: np.ndarray
    sign: np.ndarray

    def __len__(self):
        return len(self.fixed)

    def total_area(self) -> float:
        return math.fsum((self.u1 - self.u0) * (self.v1 - self.v0))


def voxel_boundary_faces(grid: VoxelGrid, mask: np.ndarray) -> FaceArrays:
    """Uncancelled voxel faces of a voxel figure with outward signs."""
    h, lo = grid.h, grid.bounds.lo
    m = mask.astype(np.int8)
    parts = []
    for ax in range(3):
        pad = [(0, 0)] * 3
        pad[ax] = (1, 1)
        d = np.diff(np.pad(m, pad), axis=ax)
        idx = np.nonzero(d)
        # d = -1: voxel below the plane is in, outward normal +axis
        sign = -d[idx].astype(float)
        others = [k for k in range(3) if k != ax]
        parts.append((np.full(len(sign), ax), lo[ax] + idx[ax] * h,
                      lo[others[0]] + idx[others[0]] * h, lo[others[0]] + (idx[others[0]] + 1) * h,
                      lo[others[1]] + idx[others[1]] * h, lo[others[1]] + (idx[others[1]] + 1) * h,
                      sign))
    return FaceArrays(*(np.concatenate(p) for p in zip(*parts)))


def box_faces(x0, x1, y0, y1, z0, z1) -> FaceArrays:
    n = len(x0)
    one = np.ones(n)
    ax = np.repeat(np.arange(3), 2 * n)
    fixed = np.concatenate([x0, x1, y0, y1, z0, z1])
    u0 = np.concatenate([y0, y0, x0, x0, x0, x0])
    u1 = np.concatenate([y1, y1, x1, x1, x1, x1])
    v0 = np.concatenate([z0, z0, z0, z0, y0, y0])
    v1 = np.concatenate([z1, z1, z1, z1, y1, y1])
    sign = np.concatenate([-one, one] * 3)
    return FaceArrays(ax, fixed, u0, u1, v0, v1, sign)


def face_terms(v, f: FaceArrays, q: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    """Signed panel integrals of the normal component over each face."""
    vals, owners = [], []
    for ax in range(3):
        sel = np.nonzero(f.axis == ax)[0]
        if not len(sel):
            continue
        o, ulo, uhi, vlo, vhi = tensor_panels(f.u0[sel], f.u1[sel], f.v0[sel], f.v1[sel], q.h_q)
        fixed = f.fixed[sel][o]
        comp = v.component(ax)
        if ax == 0:
            fn = lambda u, w: comp(fixed, u, w)  # noqa: E731
        elif ax == 1:
            fn = lambda u, w: comp(u, fixed, w)  # noqa: E731
        else:
            fn = lambda u, w: comp(u, w, fixed)  # noqa: E731
        vals.append(f.sign[sel][o] * quad2(fn, ulo, uhi, vlo, vhi, q.rule))
        owners.append(sel[o])
    if not vals:
        return _EMPTY
    return np.concatenate(vals), np.concatenate(owners)


class BoxFunction:
    """Additive function of axis-parallel boxes (3D analogue of RectangleFunction)."""

    def __init__(self, name: str, terms: Callable, *, boundary_terms: Optional[Callable] = None,
                 cell_value: Optional[Callable] = None, chunk: int = 1 << 10):
        self.name = name
        self.terms = terms
        self.boundary_terms = boundary_terms
        self.cell_value = cell_value
        self.chunk = chunk

    def __repr__(self):
        return f"BoxFunction({self.name!r})"

    def __call__(self, b: Box3) -> float:
        arrs = (np.array([t]) for t in (b.x0, b.x1, b.y0, b.y1, b.z0, b.z1))
        return math.fsum(self.terms(*arrs)[0])


def volume_function() -> BoxFunction:
    def terms(x0, x1, y0, y1, z0, z1):
        return (x1 - x0) * (y1 - y0) * (z1 - z0), np.arange(len(x0))
    return BoxFunction("volume", terms, cell_value=lambda h: h ** 3)


def flux_function(v, q: QuadratureSpec = QuadratureSpec(8, 2.0 ** -6)) -> BoxFunction:
    """Outward flux of ``v`` through the six faces of a box; 0 on degenerate boxes."""

    def terms(x0, x1, y0, y1, z0, z1):
        keep = np.nonzero((x1 > x0) & (y1 > y0) & (z1 > z0))[0]
        if not len(keep):
            return _EMPTY
        n = len(keep)
        vals, o = face_terms(v, box_faces(x0[keep], x1[keep], y0[keep], y1[keep],
                                          z0[keep], z1[keep]), q)
        return vals, keep[o % n]

    return BoxFunction(f"flux({v.name})", terms,
                       boundary_terms=lambda f: face_terms(v, f, q)[0])


def additivity_defect_3d(F: BoxFunction, b: Box3, axis: int, c: float) -> float:
    lo, hi = b.lo.copy(), b.hi.copy()
    if not lo[axis] < c < hi[axis]:
        raise DomainError(f"cut {c} outside open span ({lo[axis]}, {hi[axis]})")
    hi1, lo2 = hi.copy(), lo.copy()
    hi1[axis] = lo2[axis] = c
    b1 = Box3(lo[0], hi1[0], lo[1], hi1[1], lo[2], hi1[2])
    b2 = Box3(lo2[0], hi[0], lo2[1], hi[1], lo2[2], hi[2])
    return abs(F(b) - F(b1) - F(b2))


def evaluate_on_voxels(F: BoxFunction, grid: VoxelGrid, mask: np.ndarray,
                       threads: int = 1, cellwise: bool = False) -> float:
    """Exactly rounded sum of ``F`` over the voxels in ``mask``."""
    count = int(np.count_nonzero(mask))
    if count == 0:
        return 0.0
    if not cellwise:
        if F.cell_value is not None:
            return float(count) * F.cell_value(grid.h)
        if F.boundary_terms is not None:
            return math.fsum(F.boundary_terms(voxel_boundary_faces(grid, mask)))
    idx = np.argwhere(mask)
    h, lo = grid.h, grid.bounds.lo
    lo_c = lo + idx * h
    hi_c = lo + (idx + 1) * h

    def work(s, t):
        return F.terms(lo_c[s:t, 0], hi_c[s:t, 0], lo_c[s:t, 1], hi_c[s:t, 1],
                       lo_c[s:t, 2], hi_c[s:t, 2])[0]
    return math.fsum(np.concatenate(map_chunks(work, len(idx), F.chunk, threads)))


def voxel_figure_integral(F: BoxFunction, m: TriMesh, levels: Sequence[int], tol: float,
                          bounds: Optional[Box3] = None, unit: float = 1.0,
                          threads: int = 1) -> ConvergenceReport:
    lv = check_levels(levels)
    if bounds is None:
        bounds = default_box(m, unit / 2 ** lv[0])

    def level_fn(n):
        g = VoxelGrid(bounds, n, unit)
        cl = classify_voxels(m, g, threads)
        h = g.h
        inner_mask = cl.interior
        outer_mask = cl.labels != Label.EXTERIOR
        ni, nb = cl.count(Label.INTERIOR), cl.count(Label.BOUNDARY)
        return LevelRow(n, h, evaluate_on_voxels(F, g, inner_mask, threads),
                        evaluate_on_voxels(F, g, outer_mask, threads),
                        ni * h ** 3, (ni + nb) * h ** 3, nb, nb * (6.0 * h * h))

    return run_levels(F.name, lv, tol, level_fn)


def jordan_volume(m: TriMesh, levels: Sequence[int], tol: float = 0.05,
                  bounds: Optional[Box3] = None, unit: float = 1.0,
                  threads: int = 1) -> ConvergenceReport:
    return voxel_figure_integral(volume_function(), m, levels, tol, bounds, unit, threads)


# -- surface flux and the theorem check -----------------------------------

def _centroid_barycentrics(depth: int) -> np.ndarray:
    n = 2 ** depth
    pts = []
    for i in range(n):
        for j in range(n - i):
            pts.append(((3 * i + 1) / (3 * n), (3 * j + 1) / (3 * n)))
            if i + j <= n - 2:
                pts.append(((3 * i + 2) / (3 * n), (3 * j + 2) / (3 * n)))
    return np.array(pts)


def surface_flux(v, m: TriMesh, refine_depth: int = 2) -> float:
    """``sum v(centroid) . n dA`` over the triangles after ``refine_depth`` midpoint
    subdivisions (each triangle split into ``4**refine_depth`` congruent pieces)."""
    if refine_depth < 0:
        raise DomainError("refine_depth must be >= 0")
    if not is_closed(m):
        raise ValidationError("surface flux needs a closed mesh")
    a, b, c = m.corners()
    st = _centroid_barycentrics(refine_depth)
    nvec = 0.5 * np.cross(b - a, c - a) / len(st)
    pts = a[:, None, :] + st[:, 0][None, :, None] * (b - a)[:, None, :] \
        + st[:, 1][None, :, None] * (c - a)[:, None, :]
    x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
    u, w_, t = v(x, y, z)
    terms = [u * nvec[:, None, 0], w_ * nvec[:, None, 1], t * nvec[:, None, 2]]
    return math.fsum(np.concatenate([p.ravel() for p in terms]))


class SurfaceFlux(NamedTuple):
    value: float
    delta: float  # |flux(depth) - flux(depth - 1)|


def surface_flux_check(v, m: TriMesh, refine_depth: int = 2) -> SurfaceFlux:
    val = surface_flux(v, m, refine_depth)
    prev = surface_flux(v, m, refine_depth - 1) if refine_depth > 0 else val
    return SurfaceFlux(val, abs(val - prev))


def gauss_verify(v, m: TriMesh, levels: Sequence[int], *, tol_surface: float = 1e-4,
                 tol_figure: Optional[float] = None, q: Optional[QuadratureSpec] = None,
                 refine_depth: int = 2, bounds: Optional[Box3] = None, unit: float = 1.0,
                 region: str = "mesh", threads: int = 1) -> GreenReport:
    """Compare the surface flux with the voxel figure integral of the box flux."""
    lv = check_levels(levels)
    q = q or QuadratureSpec(8, unit / 2 ** lv[-1])
    checks = mesh_checks(m)
    if not checks.closed:
        raise ValidationError("gauss_verify needs a closed mesh")
    lhs = surface_flux_check(v, m, refine_depth)
    rhs = voxel_figure_integral(flux_function(v, q), m, lv, tol=1.0, bounds=bounds,
                                unit=unit, threads=threads)
    tf = resolve_tol_figure(rhs, tol_figure)
    rhs = ConvergenceReport(rhs.name, rhs.rows, tf)
    orientation = 1 if checks.signed_volume > 0 else -1
    return GreenReport("gauss", v.name, region, lhs.value, lhs.delta, rhs, orientation,
                       float(tol_surface), tf)


class SurfaceAudit(NamedTuple):
    total_face_area: float
    bound: float
    ratio: float
    boundary_voxels: int


def surface_bound_audit(m: TriMesh, cl: VoxelClassification, C: float = 24.0) -> SurfaceAudit:
    """Boundary-voxel face area against ``C * area + C * h * (total edge length)``."""
    h = cl.grid.h
    nb = cl.count(Label.BOUNDARY)
    total = nb * 6.0 * h * h
    bound = C * mesh_checks(m).area + C * h * m.edge_length()
    return SurfaceAudit(total, bound, total / bound, nb)
