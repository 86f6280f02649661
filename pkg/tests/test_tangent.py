import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ortho_group

from kuranishi import fixtures as fx
from kuranishi.atlas import (
    ChartMorphism,
    KHomRep,
    check_atlas,
    check_strict_morphism,
    identity_strict_morphism,
    single_chart_atlas,
)
from kuranishi.charts import manifold_chart
from kuranishi.polycore import BoxUnion, PolyMap, scale
from kuranishi.tangent import (
    ComplexError,
    ThreeTermComplex,
    TransitionError,
    canonical_inclusion,
    check_embedding,
    check_weak_cocycle,
    cohomology_ranks,
    complex_ranks,
    cone,
    cone_transition,
    induced_maps,
    ranks_of,
)


def _x_chart(id="X"):
    return fx.line_chart("x", -1.0, 1.0, id=id, footprint=[("P0", (0.0,))])


def test_inclusion_cone_of_a_line_point():
    A, B, h = canonical_inclusion(_x_chart())
    K = cone(h.maps["X"], A.chart("X"), B.charts[0])
    np.testing.assert_allclose(K.d0_at((0.0,)), [[1.0], [1.0]])
    assert K.dims == (1, 2, 0)
    assert cohomology_ranks(K, "P0").as_tuple() == (0, 1, 0)


def test_identity_on_manifold_chart_is_acyclic():
    M = manifold_chart(BoxUnion.cube(2, 1.0), id="M", footprint_points=[("P", (0.0, 0.0))])
    m = ChartMorphism("M", "M", PolyMap.identity(2), PolyMap(2, 0))
    K = cone(m, M, M)
    np.testing.assert_allclose(K.d0_at((0.3, -0.2)), np.eye(2))
    assert cohomology_ranks(K, "P").as_tuple() == (0, 0, 0)


def test_wrong_obstruction_map_breaks_the_complex():
    X = _x_chart()
    m = ChartMorphism("X", "X", PolyMap.identity(1), PolyMap.constant([2.0], 1))
    with pytest.raises(ComplexError, match="P0"):
        cone(m, X, X)


def test_zero_differentials_give_full_ranks():
    C = ThreeTermComplex.from_matrices(np.zeros((2, 1)), np.zeros((1, 2)))
    assert complex_ranks(C) == (1, 2, 1)


def test_from_matrices_rejects_non_complex():
    with pytest.raises(ComplexError):
        ThreeTermComplex.from_matrices([[1.0]], [[1.0]])


def test_identity_transition_has_identity_layers():
    A = single_chart_atlas(_x_chart())
    h = identity_strict_morphism(A)
    T = cone_transition(A, A, h, "X", "X")
    L0, L1, L2 = T.layers["P0"]
    np.testing.assert_allclose(L0, np.eye(1))
    np.testing.assert_allclose(L1, np.eye(2))
    np.testing.assert_allclose(L2, np.eye(1))
    assert T.commutes


def test_two_chart_projection_transitions_commute():
    A = fx.two_chart_atlas()
    h, R = fx.projection_to_line(A)
    for i, j in [("A", "B"), ("B", "A"), ("A", "A")]:
        assert cone_transition(A, R, h, i, j).commutes


def test_corrupted_homotopy_breaks_the_bottom_square():
    A = fx.two_chart_atlas()
    h = identity_strict_morphism(A).with_delta(("A", "B"), KHomRep(PolyMap.constant([0.5], 1)))
    with pytest.raises(TransitionError):
        cone_transition(A, A, h, "A", "B")
    T = cone_transition(A, A, h, "A", "B", strict=False)
    top, bottom = T.residuals["P0"]
    assert bottom == pytest.approx(0.5)
    assert not T.commutes


def test_homotopy_only_reaches_the_top_square_for_manifold_targets():
    A = fx.two_chart_atlas()
    h, R = fx.projection_to_line(A)
    bad = h.with_delta(("A", "B"), KHomRep(PolyMap.constant([0.5], 1)))
    with pytest.raises(TransitionError, match="top"):
        cone_transition(A, R, bad, "A", "B")


def test_weak_cocycle_identity_atlas():
    A = single_chart_atlas(_x_chart())
    h = identity_strict_morphism(A)
    assert check_weak_cocycle(A, A, h, "X", "X", "X").passed


def test_weak_cocycle_three_chart_atlas():
    A = fx.three_chart_atlas()
    assert check_atlas(A).passed
    h, R = fx.projection_to_line(A)
    assert check_strict_morphism(h, A, R).passed
    for t in A.triples():
        assert check_weak_cocycle(A, R, h, *t).passed, t


def test_weak_cocycle_detects_sign_flipped_homotopy():
    A = fx.three_chart_atlas()
    h, R = fx.projection_to_line(A)
    d = h.deltas[("A", "B")]
    bad = h.with_delta(("A", "B"), KHomRep(scale(d.lam, -1.0)))
    rep = check_weak_cocycle(A, R, bad, "A", "B", "C")
    assert not rep.passed
    assert "chain maps" in rep.failed_conditions()


def test_induced_maps_of_identity_are_identities():
    A, B, h = canonical_inclusion(fx.line_chart("x**2 - 1", footprint=[("P-", (-1.0,)), ("P+", (1.0,))], id="C"))
    K = cone(h.maps["C"], A.chart("C"), B.charts[0])
    eye = [np.eye(1), np.eye(2), np.eye(0)]
    maps = induced_maps(K, (1.0,), K, (1.0,), eye)
    assert [m.shape for m in maps] == [(0, 0), (1, 1), (0, 0)]
    np.testing.assert_allclose(np.abs(maps[1]), [[1.0]])


def test_canonical_inclusion_embeds():
    chart = fx.line_chart("x**2 - 1", footprint=[("P-", (-1.0,)), ("P+", (1.0,))], id="C")
    A, B, h = canonical_inclusion(chart)
    assert check_embedding(h, A, B).passed


def test_folded_map_fails_injectivity():
    h, A, T = fx.folded_embedding()
    rep = check_embedding(h, A, T)
    assert rep.failed_conditions() == ["(c)"]


def test_rank_jump_fails_tangent_conditions():
    h, A, T = fx.rank_jump_embedding()
    rep = check_embedding(h, A, T)
    assert "(b)" in rep.failed_conditions()
    assert "(c)" not in rep.failed_conditions()


def test_embedding_needs_a_manifold_target():
    A = fx.two_chart_atlas()
    h = identity_strict_morphism(A)
    assert check_embedding(h, A, A).failed_conditions() == ["target"]


def _random_complex(rng, a, b, c, r0):
    """Random d0 of rank r0 and d1 vanishing on its image."""
    D0 = rng.normal(size=(b, r0)) @ rng.normal(size=(r0, a)) if r0 else np.zeros((b, a))
    if r0:
        u, s, _ = np.linalg.svd(D0)
        coker = u[:, r0:]
    else:
        coker = np.eye(b)
    k = coker.shape[1]
    r1 = int(rng.integers(0, min(k, c) + 1))
    D1 = rng.normal(size=(c, r1)) @ rng.normal(size=(r1, k)) @ coker.T if r1 else np.zeros((c, b))
    return D0, D1


complexes = st.tuples(
    st.integers(0, 2**31 - 1), st.integers(0, 4), st.integers(0, 5), st.integers(0, 4)
).map(lambda t: (np.random.default_rng(t[0]), t[1], t[2], t[3]))


@given(complexes, st.integers(0, 4))
def test_euler_identity(params, r0):
    rng, a, b, c = params
    r0 = min(r0, a, b)
    D0, D1 = _random_complex(rng, a, b, c, r0)
    t0, t1, t2 = ranks_of(D0, D1)
    assert t0 - t1 + t2 == a - b + c


@given(complexes)
def test_no_top_cohomology_without_target_obstructions(params):
    rng, a, b, _ = params
    D0 = rng.normal(size=(b, a))
    assert ranks_of(D0, np.zeros((0, b))).t2 == 0


@settings(max_examples=30)
@given(complexes, st.integers(0, 4))
def test_ranks_invariant_under_orthogonal_change_of_basis(params, r0):
    rng, a, b, c = params
    r0 = min(r0, a, b)
    D0, D1 = _random_complex(rng, a, b, c, r0)

    def orth(n):
        return ortho_group.rvs(n, random_state=rng) if n > 1 else np.eye(n)

    Qa, Qb, Qc = orth(a), orth(b), orth(c)
    before = ranks_of(D0, D1).as_tuple()
    after = ranks_of(Qb @ D0 @ Qa.T, Qc @ D1 @ Qb.T).as_tuple()
    assert before == after
