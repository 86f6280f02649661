from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from kuranishi import fixtures as fx
from kuranishi.polycore import PolyMap, evaluate
from kuranishi.su2rep import (
    GroupPresentation,
    PresentationError,
    RepPoint,
    casson_count,
    exponent_matrix,
    fingerprint,
    fox_complex,
    homology_sphere_check,
    local_chart,
    presentation_ranks,
    relator_system,
    solve_reps,
    twisted_cohomology,
    word_eval,
)
from kuranishi.su2rep import quaternion as qt
from kuranishi.su2rep.local import UnstableCount, local_bases
from kuranishi.su2rep.oracle import binary_icosahedral, finite_group_orbits, triangle_orbit_traces
from kuranishi.su2rep.solve import imaginary_rank, is_irreducible

I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])
ONE = np.array([1.0, 0.0, 0.0, 0.0])

# traces (tr s, tr t, tr st) of the two irreducible classes of each group
P235_TRACES = [(1.0, -0.618034, 0.0), (1.0, 1.618034, 0.0)]
P237_TRACES = [(1.0, -1.24698, 0.0), (1.0, 0.445042, 0.0)]


@pytest.fixture(scope="module")
def p235_orbits():
    return solve_reps(fx.p235(), starts=4000, seed=0)


def unit_quaternions(n):
    return st.integers(0, 2**31 - 1).map(lambda s: Rotation.random(n, random_state=s).as_quat()[:, [3, 0, 1, 2]])


# --- words and presentations


def test_word_eval_examples():
    assert np.allclose(word_eval(((0, 1), (0, -1)), [I]), ONE)
    assert np.allclose(word_eval(((0, 1), (1, 1)), [I, J]), K)
    assert np.allclose(word_eval(((0, 2),), [I]), -ONE)


def test_word_eval_rejects_bad_index():
    with pytest.raises(IndexError):
        word_eval(((2, 1),), [I, J])


def test_presentation_validation():
    with pytest.raises(PresentationError, match="out of range"):
        GroupPresentation(1, (((1, 1),),))
    with pytest.raises(PresentationError, match="zero exponent"):
        GroupPresentation(1, (((0, 0),),))


def test_presentation_round_trip():
    P = fx.p235()
    assert GroupPresentation.from_dict(P.to_dict()) == P
    assert str(P).startswith("<s, t |")


def test_homology_sphere_examples():
    c = homology_sphere_check(fx.p235())
    assert c.matrix.tolist() == [[-1, 2], [2, -3]]
    assert c.det == -1 and c.is_homology_sphere and c.trivial_isolated
    t = homology_sphere_check(fx.trivial_group())
    assert t.matrix.tolist() == [[1]] and t.is_homology_sphere
    assert homology_sphere_check(fx.p237()).is_homology_sphere


def test_homology_sphere_check_needs_balance():
    with pytest.raises(PresentationError, match="not balanced"):
        homology_sphere_check(fx.commutator_group())
    with pytest.raises(PresentationError):
        homology_sphere_check(fx.free_group(2))


def test_torsion_is_reported():
    c = homology_sphere_check(GroupPresentation(1, (((0, 2),),)))
    assert not c.is_homology_sphere
    assert c.trivial_isolated
    assert c.h1_invariants == (2,)


def test_exponent_matrix_of_commutator_vanishes():
    assert exponent_matrix(fx.commutator_group()).tolist() == [[0, 0]]


def test_relator_system_of_a_square():
    P = GroupPresentation(1, (((0, 2),),))
    F = relator_system(P)
    assert (F.n_in, F.n_out) == (4, 4)
    rng = np.random.default_rng(0)
    for a, b, c, d in rng.normal(size=(5, 4)):
        np.testing.assert_allclose(F((a, b, c, d)), [2 * a * b, 2 * a * c, 2 * a * d, a * a + b * b + c * c + d * d - 1], atol=1e-12)


def test_relator_system_of_a_free_group_is_norms_only():
    F = relator_system(fx.free_group(2))
    assert F.n_out == 2
    np.testing.assert_allclose(F(np.r_[I, J]), [0.0, 0.0])


def test_relator_system_vanishes_on_solutions(p235_orbits):
    F = relator_system(fx.p235())
    for orb in p235_orbits:
        assert np.max(np.abs(F(orb.representative.q.ravel()))) <= 1e-9


# --- solver


def test_p235_has_two_irreducible_classes(p235_orbits):
    assert len(p235_orbits) == 2
    traces = sorted(
        tuple(round(float(v), 6) + 0.0 for v in (qt.trace(q[0]), qt.trace(q[1]), qt.trace(qt.qmul(q[0], q[1]))))
        for q in (o.representative.q for o in p235_orbits)
    )
    assert traces == P235_TRACES


def test_p235_count_matches_finite_group_enumeration():
    orbits = finite_group_orbits(fx.p235().relators, binary_icosahedral())
    assert len(orbits) == 2


def test_closed_form_triangle_traces():
    assert triangle_orbit_traces(3, 5) == P235_TRACES
    assert triangle_orbit_traces(3, 7) == P237_TRACES


def test_p237_matches_closed_form():
    orbits = solve_reps(fx.p237(), starts=4000)
    assert len(orbits) == 2
    got = sorted(
        tuple(round(float(v), 6) + 0.0 for v in (qt.trace(q[0]), qt.trace(q[1]), qt.trace(qt.qmul(q[0], q[1]))))
        for q in (o.representative.q for o in orbits)
    )
    assert got == P237_TRACES


def test_orbits_are_gauge_fixed_and_nondegenerate(p235_orbits):
    for orb in p235_orbits:
        q = orb.representative.q
        np.testing.assert_allclose(q[0, 1:3], 0.0, atol=1e-9)
        assert q[0, 3] > 0
        assert abs(q[1, 2]) < 1e-9 and q[1, 1] >= 0
        assert orb.irreducible
        assert orb.h == (0, 0, 0)
        assert orb.representative.residual(fx.p235()) <= 1e-9


def test_free_group_is_refused_without_override():
    with pytest.raises(PresentationError, match="non-balanced"):
        solve_reps(fx.free_group(2), starts=10)


def test_trivial_group_has_no_irreducibles():
    assert solve_reps(fx.trivial_group_2(), starts=500) == []
    assert solve_reps(fx.trivial_group(), starts=500) == []


def test_reducible_points_kept_on_request():
    orbits = solve_reps(fx.trivial_group(), starts=200, allow_reducible=True)
    assert len(orbits) == 1
    assert not orbits[0].irreducible
    assert orbits[0].h == (3, 0, 0)


def test_solver_is_deterministic():
    a = solve_reps(fx.p235(), starts=1500, seed=7)
    b = solve_reps(fx.p235(), starts=1500, seed=7)
    assert [o.to_dict() for o in a] == [o.to_dict() for o in b]


def test_conjugated_starts_give_the_same_orbits(p235_orbits):
    u = Rotation.random(random_state=3).as_quat()[[3, 0, 1, 2]]
    again = solve_reps(fx.p235(), starts=4000, seed=0, conjugator=u)
    assert [o.fingerprint for o in again] == [o.fingerprint for o in p235_orbits]


def test_tietze_move_keeps_the_orbits(p235_orbits):
    moved = solve_reps(fx.p235().tietze_multiply(1, 0), starts=4000)
    assert len(moved) == len(p235_orbits)
    for a, b in zip(moved, p235_orbits):
        np.testing.assert_allclose(a.fingerprint, b.fingerprint, atol=1e-6)


# --- twisted cohomology


def test_fox_complex_at_trivial_rep():
    P = fx.p235()
    C = fox_complex(P, np.array([ONE, ONE]))
    np.testing.assert_allclose(C.d0_at(), 0.0)
    np.testing.assert_allclose(C.d1_at(), np.kron(exponent_matrix(P), np.eye(3)), atol=1e-12)
    assert twisted_cohomology(P, np.array([ONE, ONE])) == (3, 0, 0)


def test_fox_complex_rejects_non_representations():
    with pytest.raises(PresentationError, match="residual"):
        fox_complex(fx.p235(), np.array([I, J]))


def test_p235_orbits_are_acyclic(p235_orbits):
    for orb in p235_orbits:
        assert twisted_cohomology(fx.p235(), orb.representative) == (0, 0, 0)
        assert presentation_ranks(fx.p235(), orb.representative) == (0, 0, 3)


def test_free_group_cohomology():
    assert twisted_cohomology(fx.free_group(2), np.array([I, J])) == (0, 3, 0)


@given(unit_quaternions(2))
def test_free_group_irreducible_iff_no_invariants(q):
    assert is_irreducible(q) == (presentation_ranks(fx.free_group(2), q)[0] == 0)


@pytest.mark.filterwarnings("ignore::kuranishi.tangent.BorderlineRankWarning")
@given(unit_quaternions(1), st.floats(-3, 3), st.floats(-3, 3))
def test_commuting_pairs_are_reducible(axis, a, b):
    v = axis[0, 1:] / np.linalg.norm(axis[0, 1:])
    q = np.array([np.r_[np.cos(a), np.sin(a) * v], np.r_[np.cos(b), np.sin(b) * v]])
    assert imaginary_rank(q) <= 1
    assert presentation_ranks(fx.free_group(2), q)[0] >= 1


def test_euler_identity_on_balanced_presentations(p235_orbits):
    for P, reps in [
        (fx.p235(), [o.representative for o in p235_orbits] + [np.array([ONE, ONE])]),
        (fx.trivial_group(), [np.array([ONE])]),
    ]:
        for rho in reps:
            h0, h1, h2 = presentation_ranks(P, rho)
            assert h0 - h1 + h2 == 3


@settings(max_examples=25)
@given(unit_quaternions(1))
def test_fingerprints_are_conjugation_invariant(u):
    for orb in solve_reps(fx.p235(), starts=300, seed=1, with_cohomology=False):
        rp = orb.representative
        assert fingerprint(rp.conjugate(u[0]).q) == fingerprint(rp.q)


def test_irreducible_iff_h0_zero_on_found_orbits(p235_orbits):
    for orb in p235_orbits:
        assert (imaginary_rank(orb.representative.q) >= 2) == (orb.h[0] == 0)


def test_rep_point_requires_unit_quaternions():
    with pytest.raises(ValueError):
        RepPoint(np.array([[2.0, 0, 0, 0]]))


# --- local charts and the count


def test_nondegenerate_orbit_gives_a_point_chart(p235_orbits):
    chart = local_chart(fx.p235(), p235_orbits[0])
    assert (chart.n, chart.m) == (0, 0)


def test_free_group_chart_is_a_three_ball():
    chart = local_chart(fx.free_group(2), np.array([I, J]))
    assert (chart.n, chart.m) == (3, 0)
    assert chart.domain.dim == 3


def test_balanced_obstructed_chart_is_refused():
    # the trivial rep of a presentation of Z has h1 = 3 and is balanced
    P = GroupPresentation(2, (((1, 1),), ((1, 1),)))
    from kuranishi.su2rep.local import LocalChartError

    with pytest.raises(LocalChartError, match="balanced"):
        local_chart(P, np.array([ONE, ONE]))


def test_commutator_quadratic_term_matches_the_bracket():
    """At the trivial rep of <s,t | [s,t]> the fitted section starts with the
    cross product: exp(a) exp(b) exp(-a) exp(-b) = 1 + 2 a x b + O(3)."""
    P = fx.commutator_group()
    chart = local_chart(P, np.array([ONE, ONE]), radius=0.01, order=4)
    assert (chart.n, chart.m) == (6, 3)
    H1 = np.array(chart.meta["h1_basis"])
    H2 = np.array(chart.meta["h2_basis"])
    quad = PolyMap(6, 3, tuple({e: c for e, c in coord.items() if sum(e) == 2} for coord in chart.section.coords))
    rng = np.random.default_rng(5)
    for x in rng.normal(size=(4, 6)):
        u = H1 @ x
        bracket = H2.T @ (2 * np.cross(u[:3], u[3:]))
        np.testing.assert_allclose(evaluate(quad, x), bracket, atol=1e-6)


def test_local_bases_are_orthonormal():
    B = local_bases(fx.commutator_group(), np.array([ONE, ONE]))
    np.testing.assert_allclose(B.h1.T @ B.h1, np.eye(6), atol=1e-12)
    np.testing.assert_allclose(B.h2.T @ B.h2, np.eye(3), atol=1e-12)


@pytest.fixture(scope="module")
def p235_casson():
    return casson_count(fx.p235(), starts=4000)


def test_casson_p235(p235_casson):
    assert p235_casson.N == 2
    assert p235_casson.lam == 1
    assert p235_casson.counts == (1, 1)
    assert len(set(p235_casson.seed_counts)) == 1


def test_flipping_one_bit_cancels():
    res = casson_count(fx.p235(), orientation_bits=(1, -1), starts=4000)
    assert res.lam == 0


def test_global_sign_negates():
    res = casson_count(fx.p235(), sigma=-1, starts=4000)
    assert res.lam == -1 and res.lambda_abs == 1


def test_trivial_group_casson_is_zero():
    res = casson_count(fx.trivial_group(), starts=500)
    assert (res.N, res.lam) == (0, Fraction(0))


def test_casson_needs_a_homology_sphere():
    with pytest.raises(PresentationError, match="homology sphere"):
        casson_count(GroupPresentation(1, (((0, 2),),)), starts=100)


def test_casson_rejects_wrong_bit_count():
    with pytest.raises(ValueError, match="orientation bit"):
        casson_count(fx.p235(), orientation_bits=(1,), starts=4000)


def test_casson_report_is_serializable(p235_casson):
    d = p235_casson.to_dict()
    assert d["lambda"] == 1 and d["N"] == 2
    assert len(d["orbits"]) == 2


def test_unstable_count_is_an_error():
    assert issubclass(UnstableCount, RuntimeError)
