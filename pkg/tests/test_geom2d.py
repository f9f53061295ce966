import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from greenfig.errors import DomainError, ValidationError
from greenfig.geom2d import (HORIZONTAL, VERTICAL, DyadicGrid, Figure, GridFigure, Rect,
                             cell_sides_oriented, figure_area, figure_boundary_edges,
                             figure_from_cells, figure_overlaps, rect_area, rect_perimeter,
                             split_rect)

UNIT = Rect(0, 1, 0, 1)
coords = st.floats(-100, 100, allow_nan=False)


@st.composite
def rects(draw):
    x0, x1 = sorted((draw(coords), draw(coords)))
    y0, y1 = sorted((draw(coords), draw(coords)))
    return Rect(x0, x1, y0, y1)


@st.composite
def cell_masks(draw, n=6):
    bits = draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    return np.array(bits).reshape(n, n)


def test_rect_area_examples():
    assert rect_area(UNIT) == 1
    assert rect_area(Rect(0, 1, 0.5, 0.5)) == 0
    assert rect_area(Rect(0, 0.5, 0, 0.25)) == 0.125


def test_rect_perimeter_examples():
    assert rect_perimeter(UNIT) == 4
    assert rect_perimeter(Rect(0, 1, 0, 0)) == 2
    assert rect_perimeter(Rect(0, 3, 0, 1)) == 8


def test_rect_rejects_inverted_and_nonfinite():
    with pytest.raises(ValidationError):
        Rect(1, 0, 0, 1)
    with pytest.raises(ValidationError):
        Rect(0, math.inf, 0, 1)


def test_split_examples():
    a, b = split_rect(UNIT, VERTICAL, 0.5)
    assert (a, b) == (Rect(0, 0.5, 0, 1), Rect(0.5, 1, 0, 1))
    lo, hi = split_rect(UNIT, HORIZONTAL, 0.25)
    assert rect_area(lo) == 0.25 and rect_area(hi) == 0.75
    with pytest.raises(DomainError):
        split_rect(UNIT, VERTICAL, 0.0)
    with pytest.raises(DomainError):
        split_rect(UNIT, HORIZONTAL, 1.0)


@given(rects(), st.floats(0.01, 0.99), st.sampled_from([HORIZONTAL, VERTICAL]))
def test_split_area_additivity(r, t, axis):
    lo, hi = (r.x0, r.x1) if axis == VERTICAL else (r.y0, r.y1)
    c = lo + t * (hi - lo)
    if not lo < c < hi:
        return
    a, b = split_rect(r, axis, c)
    assert math.isclose(rect_area(a) + rect_area(b), rect_area(r), rel_tol=1e-12, abs_tol=1e-9)
    assert not figure_overlaps(Figure((a, b)))


def test_figure_from_cells_examples():
    g = DyadicGrid(UNIT, 1)
    assert figure_area(figure_from_cells(g, [(0, 0), (0, 1), (1, 0), (1, 1)])) == 1
    assert figure_area(figure_from_cells(g, [(0, 0), (1, 1)])) == 0.5
    empty = figure_from_cells(g, [])
    assert len(empty) == 0 and figure_area(empty) == 0
    with pytest.raises(DomainError):
        figure_from_cells(g, [(2, 0)])


def test_grid_uses_absolute_cell_side():
    g = DyadicGrid(Rect(-1, 2, -1, 2), 2)
    assert g.h == 0.25 and g.shape == (12, 12)
    assert g.cell_rect(0, 0) == Rect(-1, -0.75, -1, -0.75)
    with pytest.raises(DomainError):
        DyadicGrid(Rect(0, 0.3, 0, 1), 2)


def test_grid_nesting():
    g = DyadicGrid(UNIT, 2)
    fine = g.refine()
    kids = [fine.cell_rect(2 + a, 4 + b) for a in (0, 1) for b in (0, 1)]
    parent = g.cell_rect(1, 2)
    assert math.fsum(rect_area(k) for k in kids) == rect_area(parent)
    assert all(parent.contains_rect(k) for k in kids)


def test_boundary_edges_examples():
    g = DyadicGrid(UNIT, 1)
    one = figure_from_cells(g, [(0, 0)])
    assert len(figure_boundary_edges(one)) == 4
    pair = figure_boundary_edges(figure_from_cells(g, [(0, 0), (1, 0)]))
    assert len(pair) == 6
    assert not any(e.axis == VERTICAL and e.fixed == 0.5 for e in pair)
    block = figure_boundary_edges(figure_from_cells(g, [(0, 0), (0, 1), (1, 0), (1, 1)]))
    assert len(block) == 8
    assert math.fsum(e.length for e in block) == rect_perimeter(UNIT)
    assert all(e.fixed in (0.0, 1.0) for e in block)


def _cancel_by_hand(fig):
    net = Counter()
    for e in cell_sides_oriented(fig.rects):
        net[(e.axis, e.fixed, e.a, e.b)] += e.sign
    return {k: s for k, s in net.items() if s}


@given(cell_masks())
def test_edge_cancellation_matches_enumeration(mask):
    fig = GridFigure(DyadicGrid(Rect(0, 1.5, 0, 1.5), 2), mask)
    got = {(e.axis, e.fixed, e.a, e.b): e.sign for e in figure_boundary_edges(fig)}
    assert got == _cancel_by_hand(fig)


@given(cell_masks())
def test_refined_figure_keeps_area_and_boundary_length(mask):
    fig = GridFigure(DyadicGrid(Rect(0, 1.5, 0, 1.5), 2), mask)
    fine = fig.refined()
    assert figure_area(fine) == figure_area(fig)
    assert math.isclose(math.fsum(e.length for e in figure_boundary_edges(fine)),
                        math.fsum(e.length for e in figure_boundary_edges(fig)))


@given(cell_masks())
def test_figure_area_independent_of_decomposition(mask):
    g = DyadicGrid(Rect(-0.75, 0.75, -0.75, 0.75), 2)
    grid_fig = GridFigure(g, mask)
    explicit = Figure(tuple(reversed(grid_fig.refined().rects)))
    assert abs(figure_area(explicit) - figure_area(grid_fig)) <= 1e-12


def test_figure_overlap_detection():
    assert figure_overlaps(Figure((Rect(0, 1, 0, 1), Rect(0.5, 2, 0, 1))))
    assert not figure_overlaps(Figure((Rect(0, 1, 0, 1), Rect(1, 2, 0, 1))))


def test_degenerate_cells_contribute_nothing():
    assert figure_area(Figure((Rect(0, 1, 0, 1), Rect(1, 1, 0, 1)))) == 1
