import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kuranishi import fixtures as fx
from kuranishi.atlas import ChartMorphism, Transition, single_chart_atlas
from kuranishi.charts import KuranishiChart, point_chart
from kuranishi.polycore import BoxUnion, PolyMap
from kuranishi.vfc import (
    CompactnessError,
    CountError,
    SignedCount,
    UnsupportedRegime,
    count_regime,
    deformation_sweep,
    fiber_product,
    intersection_number,
    perturb_and_count,
    uniform_grid,
    virtual_count,
)

COUNT_CASES = [
    (fx.count_chart("x"), 1),
    (fx.count_chart("x**2"), 0),
    (fx.count_chart("x**3 - x"), 1),
    (fx.count_chart(["x**2 - y", "y - 1"], ("x", "y"), radius=3.0), 0),
]


@pytest.mark.parametrize("chart,expected", COUNT_CASES, ids=["x", "x2", "cubic", "plane"])
def test_reference_counts(chart, expected):
    c = perturb_and_count(chart)
    assert c.value == expected
    assert c.certified


def test_cubic_has_three_zeros_with_alternating_signs():
    c = perturb_and_count(fx.count_chart("x**3 - x"))
    assert (c.plus, c.minus) == (2, 1)
    assert len(c.zeros) == 3


def test_plane_system_cancels_in_pairs():
    c = perturb_and_count(COUNT_CASES[3][0], eps=1e-4, seed=3)
    assert (c.plus, c.minus) == (1, 1)


def test_point_chart_counts_its_orientation():
    assert perturb_and_count(point_chart()).value == 1
    assert perturb_and_count(point_chart(orientation=-1)).value == -1


def test_positive_virtual_dimension_is_refused():
    chart = KuranishiChart("V", BoxUnion.cube(2, 1.0), 1, PolyMap.variable(0, 2), 1)
    with pytest.raises(CountError, match="virtual dimension"):
        perturb_and_count(chart)


def test_zero_near_boundary_is_a_compactness_failure():
    chart = fx.count_chart("x - 1.95")
    with pytest.raises(CompactnessError):
        perturb_and_count(chart)


def test_signed_counts_add():
    a = SignedCount(2, 1, perturbation=(0.1,))
    b = SignedCount(0, 1, perturbation=(0.2,))
    s = a + b
    assert (s.plus, s.minus, s.value) == (2, 2, 0)
    assert s.perturbation == (0.1, 0.2)


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("eps", [1e-3, 1e-4])
def test_counts_independent_of_perturbation(seed, eps):
    got = [perturb_and_count(c, eps=eps, seed=seed).value for c, _ in COUNT_CASES]
    assert got == [e for _, e in COUNT_CASES]


@given(st.integers(0, 10_000), st.sampled_from([1e-2, 1e-3, 1e-4]), st.sampled_from(range(len(COUNT_CASES))))
def test_count_does_not_depend_on_the_random_constant(seed, eps, k):
    chart, expected = COUNT_CASES[k]
    assert perturb_and_count(chart, eps=eps, seed=seed).value == expected


@given(st.sampled_from(range(len(COUNT_CASES))), st.integers(0, 100))
def test_orientation_reversal_negates(k, seed):
    chart = COUNT_CASES[k][0]
    flipped = KuranishiChart(chart.id, chart.domain, chart.m, chart.section, -chart.orientation, chart.footprint)
    assert perturb_and_count(flipped, seed=seed).value == -perturb_and_count(chart, seed=seed).value


def test_virtual_count_regimes():
    assert count_regime(fx.two_chart_atlas()) == ("dominated", "A")
    assert count_regime(fx.disjoint_atlas())[0] == "disjoint"
    assert count_regime(fx.overlapping_atlas())[0] == "unsupported"
    assert count_regime(single_chart_atlas(fx.count_chart("x"))) == ("single", "X")


def test_virtual_count_values():
    assert virtual_count(fx.two_chart_atlas()).value == 1
    assert virtual_count(single_chart_atlas(fx.count_chart("x"))).value == 1
    assert virtual_count(fx.disjoint_atlas()).value == 0


def test_overlapping_atlas_is_refused():
    with pytest.raises(UnsupportedRegime, match="unsupported regime"):
        virtual_count(fx.overlapping_atlas())


def test_dominated_count_needs_a_consistent_atlas():
    atlas = fx.two_chart_atlas()
    t = atlas.transitions[("A", "B")]
    wrong = ChartMorphism("A", "B", t.morphism.f, PolyMap.constant([2.0], 1))
    bad = atlas.with_transition(("A", "B"), Transition(wrong, t.dom_i, t.dom_j))
    with pytest.raises(UnsupportedRegime, match="consistent"):
        virtual_count(bad)


def test_fold_family_is_invariant():
    sweep = deformation_sweep(fx.family("x**2 - (2*t - 1)"), uniform_grid(11))
    assert sweep.verdict == "invariant"
    assert [c.value for c in sweep.counts] == [0] * 11


def test_shift_family_counts_one():
    sweep = deformation_sweep(fx.family("x - t"), uniform_grid(5))
    assert sweep.verdict == "invariant"
    assert {c.value for c in sweep.counts} == {1}


def test_escaping_zero_is_reported():
    sweep = deformation_sweep(fx.family("x - 3*t", id="escape"), uniform_grid(11))
    assert sweep.verdict == "failed"
    assert min(sweep.errors) == pytest.approx(0.7)
    assert 0.0 not in sweep.errors


def test_uniform_grid():
    assert uniform_grid(3) == [0.0, 0.5, 1.0]
    assert uniform_grid(1) == [0.0]


def test_fiber_product_of_points_over_a_point():
    P = point_chart(label="a")
    Q = point_chart(label="b")
    F = fiber_product(P, PolyMap(0, 0), Q, PolyMap(0, 0))
    assert (F.n, F.m) == (0, 0)
    assert F.labels == ["a|b"]
    assert perturb_and_count(F).value == 1


def test_fiber_product_of_lines_in_the_plane():
    X, gX = fx.curve(["t", "0*t"], "Xaxis")
    D, gD = fx.curve(["t", "t"], "Diag")
    F = fiber_product(X, gX, D, gD)
    assert (F.n, F.m, F.vdim) == (2, 2, 0)
    z = perturb_and_count(F).zeros
    assert len(z) == 1
    assert z[0].det == pytest.approx(-1.0)


@pytest.mark.parametrize(
    "other,expected",
    [(["t", "t"], -1), (["t", "t**2 - 1"], 0), (["t", "1 + 0*t"], 0)],
    ids=["diagonal", "parabola", "parallel"],
)
def test_intersection_numbers_with_the_axis(other, expected):
    X, gX = fx.curve(["t", "0*t"], "Xaxis")
    Y, gY = fx.curve(other, "Y")
    assert intersection_number(X, gX, Y, gY) == expected


def test_swapping_lines_flips_the_sign():
    X, gX = fx.curve(["t", "0*t"], "Xaxis")
    D, gD = fx.curve(["t", "t"], "Diag")
    assert intersection_number(D, gD, X, gX) == -intersection_number(X, gX, D, gD)


def test_orientation_reversal_flips_intersection():
    X, gX = fx.curve(["t", "0*t"], "Xaxis")
    D, gD = fx.curve(["t", "t"], "Diag")
    Xr = KuranishiChart(X.id, X.domain, X.m, X.section, -1, X.footprint)
    assert intersection_number(Xr, gX, D, gD) == -intersection_number(X, gX, D, gD)


def test_intersection_needs_complementary_dimensions():
    X, gX = fx.curve(["t", "0*t"], "Xaxis")
    P = point_chart()
    with pytest.raises(CountError, match="complementary"):
        intersection_number(X, gX, P, PolyMap.constant([0.0, 0.0], 0))


@given(st.integers(0, 3), st.integers(0, 2), st.integers(0, 3), st.integers(0, 2), st.integers(0, 3))
def test_fiber_product_virtual_dimension(nx, mx, ny, my, k):
    X = KuranishiChart("X", BoxUnion.cube(nx, 1.0), mx, PolyMap(nx, mx), 1)
    Y = KuranishiChart("Y", BoxUnion.cube(ny, 1.0), my, PolyMap(ny, my), 1)
    gx, gy = PolyMap(nx, k), PolyMap(ny, k)
    F = fiber_product(X, gx, Y, gy)
    assert F.vdim == X.vdim + Y.vdim - k
    assert F.orientation == X.orientation * Y.orientation


def test_zero_dimensional_base_keeps_point_charts():
    F = fiber_product(point_chart(), PolyMap(0, 0), point_chart(orientation=-1), PolyMap(0, 0))
    assert (F.n, F.m, F.orientation) == (0, 0, -1)
    assert np.isclose(perturb_and_count(F).value, -1)
