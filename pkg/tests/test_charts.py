import math
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kuranishi import polycore as pc
from kuranishi.charts import (
    ChartError,
    KuranishiChart,
    LinfChart,
    find_zeros,
    from_linf,
    manifold_chart,
    new_chart,
    potential,
    random_cyclic_linf,
    taylor_tensor,
    vdim,
)
from kuranishi.fixtures import count_chart, interval, poly
from kuranishi.polycore import BoxUnion, PolyMap


def test_new_chart_line():
    c = new_chart(interval(-2, 2), 1, poly("x", ["x"]), 1, [("P0", (0.0,))])
    assert vdim(c) == 0 and list(c.labels) == ["P0"]


def test_manifold_chart_dimension_three():
    c = manifold_chart(BoxUnion.cube(3, 2.0))
    assert c.vdim == 3 and c.m == 0


def test_footprint_residual_rejected():
    with pytest.raises(ChartError) as exc:
        new_chart(interval(-2, 2), 1, poly("x - 0.1", ["x"]), 1, [("P0", (0.0,))])
    assert exc.value.label == "P0"


def test_footprint_outside_domain_rejected():
    with pytest.raises(ChartError):
        new_chart(interval(-2, 2), 1, poly("x - 3", ["x"]), 1, [("P0", (3.0,))])


def test_section_shape_checked():
    with pytest.raises(ChartError):
        new_chart(interval(-2, 2), 2, poly("x", ["x"]))


@pytest.mark.parametrize("n,m,expected", [(3, 1, 2), (2, 2, 0), (6, 0, 6)])
def test_vdim(n, m, expected):
    c = KuranishiChart("c", BoxUnion.cube(n, 1.0), m, PolyMap.zero(n, m))
    assert vdim(c) == expected


def test_chart_json_round_trip():
    c = new_chart(BoxUnion.cube(2, 1.0), 1, poly("x*y", ["x", "y"]), -1, [("a", (0.0, 0.5))], id="q")
    back = KuranishiChart.from_dict(c.to_dict())
    assert back.to_dict() == c.to_dict()


# L-infinity charts


def linf_1d(*coeffs, pairing=1.0):
    return LinfChart(1, 1, {k + 2: np.full((1,) * (k + 3), c) for k, c in enumerate(coeffs)}, [[pairing]], 0.5)


def test_from_linf_quadratic():
    c = from_linf(linf_1d(2.0))
    assert pc.equal(c.section, poly("x**2", ["x"]))
    assert list(c.labels) == ["origin"]


def test_from_linf_zero_brackets():
    L = LinfChart(2, 0, {}, None, 1.0)
    c = from_linf(L)
    assert c.m == 0 and c.vdim == 2 and c.section.n_terms == 0


def test_from_linf_quadratic_plus_cubic():
    # l2/2! + l3/3! = x^2 + x^3
    c = from_linf(linf_1d(2.0, 6.0))
    assert pc.equal(c.section, poly("x**2 + x**3", ["x"]))


def test_from_linf_truncation_recorded():
    c = from_linf(linf_1d(2.0, 6.0, 24.0), k_max=3)
    assert c.meta["dropped_orders"] == [4]
    assert pc.equal(c.section, poly("x**2 + x**3", ["x"]))


def test_potential_cubic():
    pot = potential(linf_1d(2.0))
    assert pot.verified
    assert pc.equal(pot.f, poly("x**3/3", ["x"]))


def test_potential_zero():
    pot = potential(LinfChart(2, 2, {}, np.eye(2), 1.0))
    assert pot.verified and pot.f.n_terms == 0


def test_asymmetric_bracket_rejected():
    T = np.zeros((1, 2, 2))
    T[0, 0, 1] = 1.0
    with pytest.raises(ValueError):
        LinfChart(2, 1, {2: T}, None, 1.0)


def test_singular_pairing_rejected():
    with pytest.raises(np.linalg.LinAlgError):
        potential(LinfChart(2, 2, {}, np.ones((2, 2)), 1.0))


def symmetric_tensor(rng, h1, h2, k):
    T = rng.normal(size=(h2,) + (h1,) * k)
    return sum(np.transpose(T, (0,) + p) for p in permutations(range(1, k + 1))) / math.factorial(k)


@given(st.integers(1, 3), st.integers(1, 2), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_taylor_coefficients_round_trip(h1, h2, k, seed):
    T = symmetric_tensor(np.random.default_rng(seed), h1, h2, k)
    c = from_linf(LinfChart(h1, h2, {k: T}, None, 1.0))
    assert np.allclose(taylor_tensor(c.section, k) * math.factorial(k), T, atol=1e-12)


@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_potential_gradient_is_section(h, seed):
    pot = potential(random_cyclic_linf(np.random.default_rng(seed), h))
    assert pot.verified and pot.residual <= 1e-9


# zeros


def test_zeros_of_square_minus_one():
    zs = sorted(find_zeros(count_chart("x**2 - 1")), key=lambda z: z.x)
    assert [round(z.x[0], 9) for z in zs] == [-1.0, 1.0]
    assert [z.sign for z in zs] == [-1, 1]


def test_no_real_zeros():
    assert find_zeros(count_chart("x**2 + 1")) == []


def test_double_root_is_degenerate():
    (z,) = find_zeros(count_chart("x**2"))
    assert z.degenerate and abs(z.x[0]) < 1e-5


def test_zeros_two_dimensional():
    zs = find_zeros(count_chart(["x**2 - y", "y - 1"], ("x", "y"), radius=3.0))
    assert sorted((round(z.x[0], 9), z.sign) for z in zs) == [(-1.0, -1), (1.0, 1)]


def test_find_zeros_deterministic():
    c = count_chart(["x**3 - x - y", "y + x*y"], ("x", "y"))
    assert find_zeros(c, 6, 3) == find_zeros(c, 6, 3)


@given(st.lists(st.floats(-1.8, 1.8), min_size=1, max_size=4, unique=True), st.integers(2, 8))
def test_zeros_grow_with_density(roots, d):
    roots = sorted(roots)
    if min(np.diff(roots), default=1.0) < 0.05:
        roots = roots[:1]
    s = PolyMap.constant([1.0], 1)
    for r in roots:
        s = pc.mul(s, poly(f"x - ({r!r})", ["x"]))
    c = KuranishiChart("c", interval(-2, 2), 1, s)
    coarse, fine = find_zeros(c, d, 0), find_zeros(c, 2 * d, 0)
    for z in coarse:
        assert any(abs(z.x[0] - w.x[0]) <= 1e-6 for w in fine)
