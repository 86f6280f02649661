"""Small hand-checkable charts, atlases and morphisms used by tests, scripts and the CLI data files."""
from __future__ import annotations

from . import polycore as pc
from .atlas import ChartMorphism, KHomRep, KuranishiAtlas, StrictMorphism, Transition, compose, identity_morphism, solve_homotopy
from .charts import manifold_chart, new_chart
from .polycore import BoxUnion, PolyMap, from_expressions


def interval(lo, hi):
    return BoxUnion(1, (((lo,), (hi,)),))


def poly(exprs, variables):
    if isinstance(exprs, str):
        exprs = [exprs]
    return from_expressions(exprs, variables)


def line_chart(section="x", lo=-2.0, hi=2.0, id="X", orientation=1, footprint=None):
    """A chart on an interval with a rank-one obstruction space."""
    s = poly(section, ["x"])
    if footprint is None:
        footprint = [("P0", (0.0,))]
    return new_chart(interval(lo, hi), 1, s, orientation, footprint, id=id)


def two_chart_atlas():
    """Two charts describing the same single point.

    A: s = x on (-0.4, 0.4);  B: s = y on (-1, 1).  A -> B is x -> 2x + x^2 with
    fhat = 2 + x, B -> A is the identity on (-0.4, 0.4) with fhat = 1.  The
    round trips are homotopic to the identities through Lambda_ABA = 1 + x and
    Lambda_BAB = 1 + y, obtained by exact division by the section.
    """
    A = new_chart(interval(-0.4, 0.4), 1, poly("x", ["x"]), 1, [("P0", (0.0,))], id="A")
    B = new_chart(interval(-1.0, 1.0), 1, poly("x", ["x"]), 1, [("P0", (0.0,))], id="B")
    f_ab = ChartMorphism("A", "B", poly("2*x + x**2", ["x"]), poly("2 + x", ["x"]))
    f_ba = ChartMorphism("B", "A", poly("x", ["x"]), poly("1", ["x"]))
    trans = {
        ("A", "B"): Transition(f_ab, A.domain, B.domain),
        ("B", "A"): Transition(f_ba, interval(-0.4, 0.4), A.domain),
    }
    lams = {
        ("A", "B", "A"): solve_homotopy(identity_morphism(A), compose(f_ab, f_ba, (1, 1, 1)), A, A),
        ("B", "A", "B"): solve_homotopy(identity_morphism(B), compose(f_ba, f_ab, (1, 1, 1)), B, B),
    }
    return KuranishiAtlas((A, B), ("P0",), trans, lams, 0)


def line_target(id="R", radius=10.0, labels=(("P0", (0.0,)),)):
    return manifold_chart(BoxUnion.cube(1, radius), id=id, footprint_points=labels)


def projection_to_line(atlas=None):
    """Strict morphism from a one-dimensional atlas into the manifold chart R^1
    taking each chart coordinate to itself.

    For the two-chart atlas Delta_AB = -1 - x records that x and 2x + x^2
    differ by a multiple of s = x.
    """
    atlas = atlas or two_chart_atlas()
    R = line_target()
    target = KuranishiAtlas((R,), ("P0",), {}, {}, 1)
    maps = {c.id: ChartMorphism(c.id, "R", PolyMap.identity(1), PolyMap(1, 0)) for c in atlas.charts}
    h = StrictMorphism({c.id: "R" for c in atlas.charts}, maps, {})
    for i, j in sorted(atlas.transitions):
        if i == j:
            continue
        left = compose(atlas.transition(i, j), maps[j], (1, 1, 0))
        right = compose(maps[i], target.transition("R", "R"), (1, 0, 0))
        delta = solve_homotopy(left, right, atlas.chart(i), R)
        if not delta.lam.is_zero():
            h = h.with_delta((i, j), delta)
    return h, target


def three_chart_atlas():
    """The two-chart atlas with a copy C of chart A; every homotopy is obtained by division."""
    two = two_chart_atlas()
    A, B = two.chart("A"), two.chart("B")
    C = new_chart(A.domain, 1, A.section, 1, A.footprint, id="C")
    charts = {"A": A, "B": B, "C": C}
    f_ab, f_ba = two.transition("A", "B"), two.transition("B", "A")
    maps = {
        ("A", "B"): f_ab.f,
        ("B", "A"): f_ba.f,
        ("A", "C"): PolyMap.identity(1),
        ("C", "A"): PolyMap.identity(1),
        ("C", "B"): f_ab.f,
        ("B", "C"): f_ba.f,
    }
    fhats = {k: (f_ab.fhat if k[1] == "B" else f_ba.fhat if k[0] == "B" else PolyMap.constant([1.0], 1)) for k in maps}
    trans = {}
    for (i, j), f in maps.items():
        dom_i = two.transitions[("B", "A")].dom_i if i == "B" else charts[i].domain
        trans[(i, j)] = Transition(ChartMorphism(i, j, f, fhats[(i, j)]), dom_i, charts[j].domain)
    atlas = KuranishiAtlas((A, B, C), ("P0",), trans, {}, 0)
    lams = {}
    for i, j, k in atlas.triples():
        m1 = compose(atlas.transition(i, j), atlas.transition(j, k), (1, 1, 1))
        lam = solve_homotopy(atlas.transition(i, k), m1, charts[i], charts[k])
        if not lam.lam.is_zero():
            lams[(i, j, k)] = lam
    return KuranishiAtlas((A, B, C), ("P0",), trans, lams, 0)


def _with_transition(atlas, i, j, f=None, fhat=None):
    t = atlas.transitions[(i, j)]
    m = t.morphism
    new = ChartMorphism(i, j, f or m.f, fhat or m.fhat)
    return atlas.with_transition((i, j), Transition(new, t.dom_i, t.dom_j))


def atlas_corruptions():
    """Single-datum corruptions of the two-chart atlas as (name, atlas, condition that must fail)."""
    a = two_chart_atlas()
    x = ("x",)
    lam = a.lam("A", "B", "A").lam
    return [
        ("virtual dimension", KuranishiAtlas(a.charts, a.footprint, a.transitions, a.lambdas, 1), "(1.)"),
        ("uncovered point", KuranishiAtlas(a.charts, a.footprint + ("Q",), a.transitions, a.lambdas, 0), "(1.)"),
        ("bundle map of a transition", _with_transition(a, "A", "B", fhat=poly("2", x)), "(2.)"),
        ("transition map shifted", _with_transition(a, "B", "A", f=poly("x + 0.01", x)), "(2.)"),
        ("degenerate-index homotopy", a.with_lambda(("A", "A", "B"), KHomRep(PolyMap.constant([1.0], 1))), "(3.)"),
        ("homotopy shifted by a constant", a.with_lambda(("A", "B", "A"), KHomRep(pc.add(lam, PolyMap.constant([0.5], 1)))), "(4.)"),
    ]


def refinement_2morphism(atlas=None):
    """h = identity of the two-chart atlas, g sends every chart into B.

    g_A = f_AB, g_B = id.  Returns (h, g, upsilon) with upsilon = 0, which is
    consistent because g_i equals f_{i,B} o h_i on the nose.
    """
    from .atlas import identity_strict_morphism

    atlas = atlas or two_chart_atlas()
    h = identity_strict_morphism(atlas)
    B = atlas.chart("B")
    g_maps = {"A": atlas.transition("A", "B"), "B": identity_morphism(B)}
    g = StrictMorphism({"A": "B", "B": "B"}, g_maps, {})
    # g_A o f_BA compared with f_BB o g_B; also g_B o f_AB vs f_BB o g_A (equal)
    for i, j in (("A", "B"), ("B", "A")):
        Ci = atlas.chart(i)
        left = compose(atlas.transition(i, j), g_maps[j], (1, 1, 1))
        right = compose(g_maps[i], identity_morphism(B), (1, 1, 1))
        g = g.with_delta((i, j), solve_homotopy(left, right, Ci, B))
    return h, g, {}


def rank_jump_chart():
    """s(x, y) = xy on (-2, 2)^2 with footprint points on both axes' crossing and on the x-axis."""
    s = poly("x*y", ["x", "y"])
    return new_chart(BoxUnion.cube(2, 2.0), 1, s, 1, [("P0", (0.0, 0.0)), ("P1", (1.0, 0.0))], id="J")


def rank_jump_embedding():
    """The chart above mapped to R^1 by (x, y) -> x."""
    X = rank_jump_chart()
    A = KuranishiAtlas((X,), tuple(X.labels), {}, {}, X.vdim)
    R = manifold_chart(BoxUnion.cube(1, 10.0), id="R", footprint_points=[("P0", (0.0,)), ("P1", (1.0,))])
    T = KuranishiAtlas((R,), tuple(R.labels), {}, {}, 1)
    h = StrictMorphism({"J": "R"}, {"J": ChartMorphism("J", "R", poly("x", ["x", "y"]), PolyMap(2, 0))}, {})
    return h, A, T


def folded_embedding():
    """s = x^2 - 1 with footprint +-1, mapped to R^1 by x -> x^2: both points land on 1."""
    X = new_chart(interval(-2.0, 2.0), 1, poly("x**2 - 1", ["x"]), 1, [("P-", (-1.0,)), ("P+", (1.0,))], id="F")
    A = KuranishiAtlas((X,), tuple(X.labels), {}, {}, 0)
    R = manifold_chart(BoxUnion.cube(1, 10.0), id="R", footprint_points=[("P-", (1.0,)), ("P+", (1.0,))])
    T = KuranishiAtlas((R,), tuple(R.labels), {}, {}, 1)
    h = StrictMorphism({"F": "R"}, {"F": ChartMorphism("F", "R", poly("x**2", ["x"]), PolyMap(1, 0))}, {})
    return h, A, T


def count_chart(section, variables=("x",), radius=2.0, id="X"):
    """Chart on a cube with n = m and no footprint (counting fixtures)."""
    s = poly(section, list(variables))
    return new_chart(BoxUnion.cube(len(variables), radius), s.n_out, s, 1, [], id=id)



def disjoint_atlas():
    """Charts s = x and s = -x describing two different points."""
    P = new_chart(interval(-2.0, 2.0), 1, poly("x", ["x"]), 1, [("P", (0.0,))], id="X+")
    Q = new_chart(interval(-2.0, 2.0), 1, poly("-x", ["x"]), 1, [("Q", (0.0,))], id="X-")
    return KuranishiAtlas((P, Q), ("P", "Q"), {}, {}, 0)


def overlapping_atlas():
    """Two charts sharing one footprint point, neither covering the other's second point."""
    P = new_chart(interval(-2.0, 2.0), 1, poly("x**2 - 1", ["x"]), 1, [("P", (-1.0,)), ("R", (1.0,))], id="U")
    Q = new_chart(interval(-2.0, 2.0), 1, poly("x**2 - 1", ["x"]), 1, [("Q", (-1.0,)), ("R", (1.0,))], id="W")
    return KuranishiAtlas((P, Q), ("P", "Q", "R"), {}, {}, 0)


def curve(exprs, id, radius=2.0, variables=("t",)):
    """Manifold chart on a cube together with a polynomial map to Euclidean space."""
    g = poly(list(exprs), list(variables))
    return manifold_chart(BoxUnion.cube(len(variables), radius), id=id), g


def family(section, variables=("x", "t"), radius=2.0, id="family"):
    from .vfc import ChartFamily

    s = poly(section, list(variables))
    return ChartFamily(id, BoxUnion.cube(len(variables) - 1, radius), s.n_out, s)


# ---------------------------------------------------------------------------
# group presentations


def p235():
    """Binary icosahedral group: (st)^2 s^-3 and (st)^2 t^-5."""
    from .su2rep.presentation import GroupPresentation

    return GroupPresentation(2, (((0, 1), (1, 1), (0, 1), (1, 1), (0, -3)), ((0, 1), (1, 1), (0, 1), (1, 1), (1, -5))), ("s", "t"))


def p237():
    """(st)^2 s^-3 and (st)^2 t^-7, a perfect group with exponent matrix of det 1."""
    from .su2rep.presentation import GroupPresentation

    return GroupPresentation(2, (((0, 1), (1, 1), (0, 1), (1, 1), (0, -3)), ((0, 1), (1, 1), (0, 1), (1, 1), (1, -7))), ("s", "t"))


def trivial_group():
    from .su2rep.presentation import GroupPresentation

    return GroupPresentation(1, (((0, 1),),), ("s",))


def trivial_group_2():
    from .su2rep.presentation import GroupPresentation

    return GroupPresentation(2, (((0, 1),), ((1, 1),)), ("s", "t"))


def free_group(g=2):
    from .su2rep.presentation import GroupPresentation

    return GroupPresentation(g, (), tuple("stuvwxyz"[:g]))


def commutator_group():
    from .su2rep.presentation import GroupPresentation

    return GroupPresentation(2, (((0, 1), (1, 1), (0, -1), (1, -1)),), ("s", "t"))
