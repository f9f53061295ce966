import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from greenfig.fields import (CONTINUOUS_ONLY, ScalarField2, VectorField2, catalog, const2, grad,
                             rot, weier2, weierstrass)
from greenfig.geom2d import (HORIZONTAL, VERTICAL, DyadicGrid, Figure, GridFigure, Rect,
                             figure_area, figure_from_cells, rect_perimeter)
from greenfig.rectfn import (QuadratureSpec, additivity_defect, additivity_defects,
                             area_function, boundary_oscillation, circulation_function,
                             evaluate_cellwise, evaluate_on_figure, panelize, riemann_function,
                             sample_split_rects)

UNIT = Rect(0, 1, 0, 1)
Q6 = QuadratureSpec(8, 2.0 ** -6)
FIELDS_2D = {k: v for k, v in catalog().items() if isinstance(v, VectorField2)}

side = st.floats(-3, 3, allow_nan=False)


@st.composite
def rects(draw, min_side=0.0):
    x0, y0 = draw(side), draw(side)
    w = draw(st.floats(min_side, 2.0))
    h = draw(st.floats(min_side, 2.0))
    return Rect(x0, x0 + w, y0, y0 + h)


@st.composite
def panel_splits(draw, h_q=Q6.h_q):
    """A rectangle on the 2^-20 lattice and a cut on the panel mesh strictly inside it."""
    g = 2.0 ** -20
    x0 = round(draw(st.floats(-2, 1)) / g) * g
    y0 = round(draw(st.floats(-2, 1)) / g) * g
    w = round(draw(st.floats(2 * h_q, 1)) / g) * g
    h = round(draw(st.floats(2 * h_q, 1)) / g) * g
    r = Rect(x0, x0 + w, y0, y0 + h)
    axis = draw(st.sampled_from([HORIZONTAL, VERTICAL]))
    lo, hi = (r.x0, r.x1) if axis == VERTICAL else (r.y0, r.y1)
    k = draw(st.integers(math.floor(lo / h_q) + 1, math.ceil(hi / h_q) - 1))
    return r, axis, k * h_q


def weier_circulation_closed_form(r, a=0.5, b=3, K=30):
    # P = W(y) is constant on horizontal sides and Q = W(x) on vertical ones
    W = lambda t: weierstrass(a, b, K, t)  # noqa: E731
    return (W(r.x1) - W(r.x0)) * (r.y1 - r.y0) - (W(r.y1) - W(r.y0)) * (r.x1 - r.x0)


def test_area_function_examples():
    F = area_function()
    assert F(UNIT) == 1 and F(Rect(0, 1, 0.5, 0.5)) == 0
    assert additivity_defect(F, UNIT, VERTICAL, 0.3) == 0
    assert F.absolutely_continuous and F.bound == 1.0


def test_riemann_examples():
    one = ScalarField2(lambda x, y: np.ones_like(x), "1")
    assert abs(riemann_function(one, Q6)(Rect(-0.3, 0.77, 0.1, 1.9)) - 1.07 * 1.8) <= 1e-12
    x = ScalarField2(lambda x, y: x, "x")
    assert abs(riemann_function(x, Q6)(UNIT) - 0.5) <= 1e-12
    assert riemann_function(rot().curlz, Q6)(Rect(0, 2, 0, 1)) == pytest.approx(2, abs=1e-12)
    assert riemann_function(one, Q6)(Rect(0, 0, 0, 1)) == 0


def test_riemann_absolute_continuity_tag():
    f = ScalarField2(lambda x, y: np.sin(7 * x * y), "sin")
    F = riemann_function(f, Q6, bound=1.0)
    assert F.absolutely_continuous is True
    assert riemann_function(f, Q6).absolutely_continuous is None
    mask = np.random.default_rng(3).random((16, 16)) < 0.4
    fig = GridFigure(DyadicGrid(Rect(-1, 1, -1, 1), 3), mask)
    assert abs(evaluate_on_figure(F, fig)) <= F.bound * figure_area(fig) + 1e-12


@given(rects())
def test_const2_circulation_vanishes(r):
    assert abs(circulation_function(const2(), Q6)(r)) <= 1e-12


@given(rects())
def test_rot_circulation_is_area(r):
    got = circulation_function(rot(), Q6)(r)
    assert got == pytest.approx((r.x1 - r.x0) * (r.y1 - r.y0), rel=1e-12, abs=1e-12)


@given(rects())
def test_grad_circulation_vanishes(r):
    assert abs(circulation_function(grad(), Q6)(r)) <= 1e-10


@given(rects())
def test_weier_circulation_matches_closed_form(r):
    got = circulation_function(weier2(), Q6)(r)
    assert got == pytest.approx(weier_circulation_closed_form(r), abs=1e-12)


def test_degenerate_circulation_is_zero():
    for v in FIELDS_2D.values():
        assert circulation_function(v, Q6)(Rect(0.2, 0.2, 0, 1)) == 0
        assert circulation_function(v, Q6)(Rect(0, 1, 0.4, 0.4)) == 0


def test_evaluate_on_figure_examples():
    g = DyadicGrid(UNIT, 1)
    two = figure_from_cells(g, [(0, 0), (1, 0)])
    assert evaluate_on_figure(area_function(), two) == 0.5
    block = figure_from_cells(g, [(0, 0), (0, 1), (1, 0), (1, 1)])
    assert evaluate_on_figure(circulation_function(rot(), Q6), block) == pytest.approx(1, abs=1e-15)
    empty = figure_from_cells(g, [])
    assert evaluate_on_figure(area_function(), empty) == 0
    assert evaluate_on_figure(circulation_function(rot(), Q6), empty) == 0
    assert evaluate_on_figure(area_function(), Figure(())) == 0


@pytest.mark.parametrize("name", sorted(FIELDS_2D))
@given(st.data())
def test_additivity_on_panel_cuts(name, data):
    r, axis, c = data.draw(panel_splits())
    assert additivity_defect(circulation_function(FIELDS_2D[name], Q6), r, axis, c) <= 1e-10
    assert additivity_defect(area_function(), r, axis, c) == 0


def test_batch_additivity_matches_single():
    rng = np.random.default_rng(11)
    x0, x1, y0, y1, vertical, c = sample_split_rects(rng, 40, Q6.h_q)
    F = circulation_function(rot(), Q6)
    batch = additivity_defects(F, x0, x1, y0, y1, vertical, c)
    single = [additivity_defect(F, Rect(*map(float, t[:4])), VERTICAL if t[4] else HORIZONTAL,
                                float(t[5])) for t in zip(x0, x1, y0, y1, vertical, c)]
    np.testing.assert_array_equal(batch, single)
    assert np.all((c / Q6.h_q) == np.round(c / Q6.h_q))


@pytest.mark.parametrize("name", sorted(FIELDS_2D))
@given(mask=st.lists(st.booleans(), min_size=64, max_size=64))
def test_boundary_fast_path_equals_cellwise_sum(name, mask):
    fig = GridFigure(DyadicGrid(Rect(-1, 1, -1, 1), 2), np.array(mask).reshape(8, 8))
    F = circulation_function(FIELDS_2D[name], QuadratureSpec(8, 0.25))
    fast, slow = evaluate_on_figure(F, fig), evaluate_cellwise(F, fig)
    assert abs(fast - slow) <= 1e-12 * max(1.0, abs(slow))


@given(rects(min_side=0.01))
def test_oscillation_bounds_circulation(r):
    for v in FIELDS_2D.values():
        osc = boundary_oscillation(v, r, Q6)
        assert abs(circulation_function(v, Q6)(r)) <= 0.5 * osc * rect_perimeter(r) + 1e-12


def _rough_field():
    W = lambda t: weierstrass(0.5, 3, 30, t)  # noqa: E731
    return VectorField2(ScalarField2(lambda x, y: W(x + y), "W(x+y)", CONTINUOUS_ONLY),
                        ScalarField2(lambda x, y: W(x - y), "W(x-y)", CONTINUOUS_ONLY), "mix")


@pytest.mark.parametrize("v", list(FIELDS_2D.values()) + [_rough_field()], ids=lambda v: v.name)
def test_circulation_is_cauchy_in_panel_width(v):
    r = Rect(-0.3, 0.55, 0.1, 0.9)
    vals = [circulation_function(v, QuadratureSpec(8, 2.0 ** -k))(r) for k in range(6, 13)]
    diffs = np.abs(np.diff(vals))
    assert diffs[-3:].max() <= 1e-4


def test_panels_are_globally_aligned():
    owner, lo, hi = panelize(np.array([0.1, 0.3]), np.array([0.3, 0.6]), 0.125)
    assert owner.tolist() == [0, 0, 0, 1, 1, 1]
    np.testing.assert_array_equal(lo, [0.1, 0.125, 0.25, 0.3, 0.375, 0.5])
    np.testing.assert_array_equal(hi, [0.125, 0.25, 0.3, 0.375, 0.5, 0.6])


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(0, 0.1)
    with pytest.raises(ValueError):
        QuadratureSpec(8, 0.0)
