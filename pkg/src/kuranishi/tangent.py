"""Mapping cones of chart morphisms, their pointwise cohomology, transition maps
between cones and the embedding test for maps into a manifold chart."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import polycore as pc
from .atlas import (
    POINT_TOL,
    ChartMorphism,
    KuranishiAtlas,
    Report,
    StrictMorphism,
    _mat,
    _maxabs,
    single_chart_atlas,
)
from .charts import KuranishiChart, manifold_chart
from .polycore import PolyMap

RANK_TOL = 1e-8
COHOMOLOGY_TOL = 1e-6


class ComplexError(ValueError):
    pass


class BorderlineRankWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class ThreeTermComplex:
    """R^a --d0--> R^b --d1--> R^c with matrix-valued maps over a chart.

    ``points`` maps footprint labels to chart coordinates; d1 d0 = 0 is
    enforced there on construction.
    """

    dims: tuple
    d0: PolyMap
    d1: PolyMap
    chart_id: str = ""
    points: dict = field(default_factory=dict)

    def __post_init__(self):
        a, b, c = (int(v) for v in self.dims)
        object.__setattr__(self, "dims", (a, b, c))
        if self.d0.n_out != a * b or self.d1.n_out != b * c:
            raise ComplexError(f"differentials do not match dims {self.dims}")
        for lab, x in self.points.items():
            r = _maxabs(self.d1_at(x) @ self.d0_at(x))
            if r > POINT_TOL:
                raise ComplexError(f"d1 d0 = {r:.3g} at footprint point {lab}")

    @classmethod
    def from_matrices(cls, D0, D1, chart_id="", check_tol=POINT_TOL):
        D0 = np.asarray(D0, dtype=float)
        D1 = np.asarray(D1, dtype=float)
        a, b, c = D0.shape[1], D0.shape[0], D1.shape[0]
        if D1.shape[1] != b:
            raise ComplexError("d1 columns must match d0 rows")
        r = _maxabs(D1 @ D0)
        if r > check_tol:
            raise ComplexError(f"d1 d0 = {r:.3g}")
        return cls((a, b, c), PolyMap.from_matrix(D0, 0), PolyMap.from_matrix(D1, 0), chart_id)

    def d0_at(self, x=()):
        a, b, _ = self.dims
        return _mat(self.d0, x, (b, a))

    def d1_at(self, x=()):
        _, b, c = self.dims
        return _mat(self.d1, x, (c, b))

    def at(self, label):
        return self.points[label]


@dataclass(frozen=True)
class CohomologyRanks:
    t0: int
    t1: int
    t2: int
    borderline: bool = False

    def __iter__(self):
        return iter((self.t0, self.t1, self.t2))

    def as_tuple(self):
        return (self.t0, self.t1, self.t2)


def _rank(M, tol):
    if M.size == 0:
        return 0, False
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(sv > tol)), bool(np.any((sv >= tol / 10) & (sv <= tol * 10)))


def ranks_of(D0, D1, tol=RANK_TOL):
    """(t0, t1, t2) of R^a -> R^b -> R^c given the two matrices."""
    b, a = D0.shape
    c = D1.shape[0]
    r0, w0 = _rank(D0, tol)
    r1, w1 = _rank(D1, tol)
    return CohomologyRanks(a - r0, b - r1 - r0, c - r1, w0 or w1)


def cohomology_ranks(C: ThreeTermComplex, x=(), tol=RANK_TOL):
    """Ranks by singular-value thresholding; singular values within a factor of
    ten of ``tol`` set ``borderline`` and emit a warning."""
    if isinstance(x, str):
        x = C.points[x]
    out = ranks_of(C.d0_at(x), C.d1_at(x), tol)
    if out.borderline:
        warnings.warn(f"singular value within a decade of the rank threshold {tol:g}", BorderlineRankWarning, stacklevel=2)
    return out


def complex_ranks(C: ThreeTermComplex, tol=RANK_TOL):
    """Ranks of a complex with constant differentials."""
    return cohomology_ranks(C, tuple([0.0] * C.d0.n_in), tol).as_tuple()


def harmonic_basis(D_in, D_out, tol=RANK_TOL):
    """Orthonormal basis (columns) of ker D_out intersected with (im D_in)^perp."""
    return _null(np.vstack([D_out, D_in.T]), D_out.shape[1], tol)


def _null(M, n, tol):
    if n == 0:
        return np.zeros((0, 0))
    if M.size == 0:
        return np.eye(n)
    _, sv, vt = np.linalg.svd(M)
    rank = int(np.sum(sv > tol))
    return vt[rank:].T.copy()


def cone(m: ChartMorphism, A: KuranishiChart, B: KuranishiChart) -> ThreeTermComplex:
    """R^{n_A} -> R^{m_A} + R^{n_B} -> R^{m_B} with d0 = [ds_A; df] and d1 = [fhat, -ds_B o f]."""
    nA, mA, nB, mB = A.n, A.m, B.n, B.m
    df = pc.jacobian(m.f)
    dsA = A.ds
    dsB_f = pc.compose(B.ds, m.f)
    # d0 rows: first m_A rows from ds_A, then n_B rows from df
    d0 = PolyMap(nA, (mA + nB) * nA, dsA.coords + df.coords)
    rows = []
    for r in range(mB):
        rows.extend(m.fhat.coords[r * mA : (r + 1) * mA])
        rows.extend(pc.scale(dsB_f, -1.0).coords[r * nB : (r + 1) * nB])
    d1 = PolyMap(nA, mB * (mA + nB), tuple(rows))
    pts = {lab: x for lab, x in A.footprint if lab in B.labels}
    return ThreeTermComplex((nA, mA + nB, mB), d0, d1, A.id, pts)


def cones(h: StrictMorphism, A: KuranishiAtlas, B: KuranishiAtlas):
    return {i: cone(h.maps[i], A.chart(i), B.chart(h.tau[i])) for i in A.ids}


@dataclass(frozen=True, eq=False)
class ConeTransition:
    """Three-layer map between the cones at charts i and j, evaluated per footprint label."""

    i: str
    j: str
    layers: dict  # label -> (L0, L1, L2)
    residuals: dict  # label -> (top square, bottom square)

    @property
    def commutes(self):
        return all(max(r) <= POINT_TOL for r in self.residuals.values())


class TransitionError(ValueError):
    pass


def cone_transition(A: KuranishiAtlas, B: KuranishiAtlas, h: StrictMorphism, i, j, strict=True) -> ConeTransition:
    """(df_ij, [[fhat_ij, 0], [-Delta_ij, df_tau]], fhat_tau) at each point of U_ij."""
    Ci, Cj = A.chart(i), A.chart(j)
    ti, tj = h.tau[i], h.tau[j]
    Pi, Pj = B.chart(ti), B.chart(tj)
    fij, ftt = A.transition(i, j), B.transition(ti, tj)
    dfij, dftt = fij.df(), ftt.df()
    Ki, Kj = cone(h.maps[i], Ci, Pi), cone(h.maps[j], Cj, Pj)
    delta = h.delta(i, j, A, B)
    layers, res = {}, {}
    for lab in A.overlap(i, j):
        if lab not in Pi.labels or lab not in Pj.labels:
            continue
        xi, xj, yi = Ci.point(lab), Cj.point(lab), Pi.point(lab)
        L0 = _mat(dfij, xi, (Cj.n, Ci.n))
        L1 = np.block(
            [
                [_mat(fij.fhat, xi, (Cj.m, Ci.m)), np.zeros((Cj.m, Pi.n))],
                [-_mat(delta.lam, xi, (Pj.n, Ci.m)), _mat(dftt, yi, (Pj.n, Pi.n))],
            ]
        )
        L2 = _mat(ftt.fhat, yi, (Pj.m, Pi.m))
        top = _maxabs(Kj.d0_at(xj) @ L0 - L1 @ Ki.d0_at(xi))
        bottom = _maxabs(Kj.d1_at(xj) @ L1 - L2 @ Ki.d1_at(xi))
        layers[lab] = (L0, L1, L2)
        res[lab] = (top, bottom)
        if strict and max(top, bottom) > POINT_TOL:
            square = "top (d0)" if top > POINT_TOL else "bottom (d1)"
            raise TransitionError(f"cone transition {i}->{j} fails the {square} square at {lab}: residual {max(top, bottom):.3g}")
    return ConeTransition(i, j, layers, res)


def induced_maps(Ksrc: ThreeTermComplex, xs, Ktgt: ThreeTermComplex, xt, layers, tol=RANK_TOL):
    """Matrices of the maps on H^0, H^1, H^2 in harmonic bases."""
    a, b, c = Ksrc.dims
    zero_in = [np.zeros((a, 0)), Ksrc.d0_at(xs), Ksrc.d1_at(xs)]
    zero_out = [Ksrc.d0_at(xs), Ksrc.d1_at(xs), np.zeros((0, c))]
    a2, b2, c2 = Ktgt.dims
    t_in = [np.zeros((a2, 0)), Ktgt.d0_at(xt), Ktgt.d1_at(xt)]
    t_out = [Ktgt.d0_at(xt), Ktgt.d1_at(xt), np.zeros((0, c2))]
    out = []
    for k in range(3):
        Qs = harmonic_basis(zero_in[k], zero_out[k], tol)
        Qt = harmonic_basis(t_in[k], t_out[k], tol)
        out.append(Qt.T @ layers[k] @ Qs)
    return out


def check_weak_cocycle(A: KuranishiAtlas, B: KuranishiAtlas, h: StrictMorphism, i, j, k, tol=COHOMOLOGY_TOL) -> Report:
    """The transition i -> k and the composite through j agree on cohomology at U_ijk."""
    rep = Report(f"weak cocycle {i}{j}{k}")
    T_ij = cone_transition(A, B, h, i, j, strict=False)
    T_jk = cone_transition(A, B, h, j, k, strict=False)
    T_ik = cone_transition(A, B, h, i, k, strict=False)
    K = {c: cone(h.maps[c], A.chart(c), B.chart(h.tau[c])) for c in (i, j, k)}
    square = max((max(r) for T in (T_ij, T_jk, T_ik) for r in T.residuals.values()), default=0.0)
    rep.add("chain maps", "all three transitions commute with the differentials", square <= POINT_TOL, square)
    worst = 0.0
    for lab in A.triple_overlap(i, j, k):
        if lab not in T_ij.layers or lab not in T_jk.layers or lab not in T_ik.layers:
            continue
        xi, xk = A.chart(i).point(lab), A.chart(k).point(lab)
        direct = T_ik.layers[lab]
        via = [T_jk.layers[lab][n] @ T_ij.layers[lab][n] for n in range(3)]
        m1 = induced_maps(K[i], xi, K[k], xk, direct)
        m2 = induced_maps(K[i], xi, K[k], xk, via)
        worst = max(worst, max((_maxabs(p - q) for p, q in zip(m1, m2)), default=0.0))
    rep.add("weak cocycle", f"H(T_{i}{k}) = H(T_{j}{k}) H(T_{i}{j})", worst <= tol, worst)
    return rep


def tangent_table(A: KuranishiAtlas, B: KuranishiAtlas, h: StrictMorphism, tol=RANK_TOL):
    """label -> chart id -> (t0, t1, t2) for every chart containing the label."""
    table = {}
    for i in A.ids:
        K = cone(h.maps[i], A.chart(i), B.chart(h.tau[i]))
        for lab, x in K.points.items():
            table.setdefault(lab, {})[i] = cohomology_ranks(K, x, tol)
    return table


def check_embedding(h: StrictMorphism, A: KuranishiAtlas, B: KuranishiAtlas, tol=RANK_TOL) -> Report:
    """Conditions for h to embed the atlas into the manifold chart of B:
    (a) t0 = t2 = 0, (b) t1 = N - vdim everywhere, (c) injective on the footprint."""
    rep = Report("embedding")
    if len(B.charts) != 1 or B.charts[0].m != 0:
        rep.add("target", "target is a single manifold chart", False, 1.0, "need exactly one chart with m = 0")
        return rep
    N = B.charts[0].n
    table = tangent_table(A, B, h, tol)
    bad_a, bad_b = [], []
    for lab, per in table.items():
        for i, r in per.items():
            if r.t0 or r.t2:
                bad_a.append(f"{lab}@{i}")
            if r.t1 != N - A.vdim:
                bad_b.append(f"{lab}@{i}")
    rep.add("(a)", "T0 and T2 vanish", not bad_a, len(bad_a), f"at {bad_a}" if bad_a else "")
    rep.add("(b)", f"T1 has rank N - vdim = {N - A.vdim}", not bad_b, len(bad_b), f"at {bad_b}" if bad_b else "")
    images = {}
    for c in A.charts:
        for lab, x in c.footprint:
            images.setdefault(lab, np.asarray(h.maps[c.id].f(x)))
    labs = sorted(images)
    clash, dmin = [], np.inf
    for p in range(len(labs)):
        for q in range(p + 1, len(labs)):
            d = float(np.linalg.norm(images[labs[p]] - images[labs[q]]))
            dmin = min(dmin, d)
            if d <= 1e-9:
                clash.append((labs[p], labs[q]))
    rep.add("(c)", "injective on the footprint", not clash, 0.0 if dmin == np.inf else dmin, f"collisions {clash}" if clash else "")
    return rep


def canonical_inclusion(chart: KuranishiChart):
    """(source atlas, target atlas, h) for the inclusion of a chart into R^n."""
    A = single_chart_atlas(chart)
    R = manifold_chart(chart.domain, id=f"{chart.id}_ambient", footprint_points=chart.footprint)
    B = KuranishiAtlas((R,), tuple(R.labels), {}, {}, R.n)
    m = ChartMorphism(chart.id, R.id, PolyMap.identity(chart.n), PolyMap(chart.n, 0))
    return A, B, StrictMorphism({chart.id: R.id}, {chart.id: m}, {})
