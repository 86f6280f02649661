"""Chart morphisms, homotopies between them, atlases with cocycle data, strict
morphisms of atlases and homotopies between strict morphisms.

Matrix-valued maps are PolyMaps with row-major outputs; every function that
consumes one takes its shape from the charts involved.  Identities that hold on
the whole chart domain are compared coefficient-wise, identities that only hold
on the footprint are checked pointwise at the footprint table.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import polycore as pc
from .charts import KuranishiChart
from .polycore import BoxUnion, PolyMap

POINT_TOL = 1e-7
KHOM_DENSITY = 5


# ---------------------------------------------------------------------------
# reports


@dataclass
class Check:
    condition: str
    name: str
    passed: bool
    residual: float = 0.0
    detail: str = ""

    def to_dict(self):
        return {"condition": self.condition, "name": self.name, "passed": self.passed, "residual": self.residual, "detail": self.detail}


@dataclass
class Report:
    title: str
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, condition, name, passed, residual=0.0, detail=""):
        self.checks.append(Check(condition, name, bool(passed), float(residual), detail))

    def extend(self, other, prefix=""):
        for c in other.checks:
            self.checks.append(Check(c.condition, prefix + c.name, c.passed, c.residual, c.detail))

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def failed_conditions(self):
        return sorted({c.condition for c in self.failures()})

    def conditions(self):
        """Verdict per condition, in first-seen order."""
        out = {}
        for c in self.checks:
            out[c.condition] = out.get(c.condition, True) and c.passed
        return out

    def to_dict(self):
        return {"title": self.title, "passed": self.passed, "conditions": self.conditions(), "checks": [c.to_dict() for c in self.checks]}

    def lines(self):
        rows = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            tail = f"  {c.detail}" if c.detail and not c.passed else ""
            rows.append(f"  {c.condition:<6} {'ok  ' if c.passed else 'FAIL'} {c.name} (residual {c.residual:.3g}){tail}")
        return rows


def _mat(p: PolyMap, x, shape):
    return pc.evaluate(p, x).reshape(shape)


def _maxabs(a):
    a = np.asarray(a, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


# ---------------------------------------------------------------------------
# morphisms and homotopies


@dataclass(frozen=True, eq=False)
class ChartMorphism:
    """A pair (f, fhat) between charts: f on the domains, fhat an m_target x m_source matrix map."""

    source: str
    target: str
    f: PolyMap
    fhat: PolyMap

    def df(self):
        return pc.jacobian(self.f)

    def to_dict(self):
        return {"source": self.source, "target": self.target, "f": self.f.to_dict(), "fhat": self.fhat.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(str(d["source"]), str(d["target"]), PolyMap.from_dict(d["f"]), PolyMap.from_dict(d["fhat"]))


def identity_morphism(chart: KuranishiChart):
    n, m = chart.n, chart.m
    return ChartMorphism(chart.id, chart.id, PolyMap.identity(n), PolyMap.constant(np.eye(m).ravel(), n))


@dataclass(frozen=True, eq=False)
class KHomRep:
    """Representative of a homotopy class: an n_target x m_source matrix map on the source domain."""

    lam: PolyMap

    @classmethod
    def zero(cls, n_in, n_target, m_source):
        return cls(PolyMap.zero(n_in, n_target * m_source))

    def to_dict(self):
        return self.lam.to_dict()

    @classmethod
    def from_dict(cls, d):
        return cls(PolyMap.from_dict(d))


def _shape_errors(A, B, m):
    errs = []
    if m.f.n_in != A.n or m.f.n_out != B.n:
        errs.append(f"f should map R^{A.n} -> R^{B.n}, got R^{m.f.n_in} -> R^{m.f.n_out}")
    if m.fhat.n_in != A.n or m.fhat.n_out != B.m * A.m:
        errs.append(f"fhat should be a {B.m}x{A.m} matrix map on R^{A.n}")
    return errs


def shared_labels(*charts, domain=None):
    """Footprint labels present in every chart, in the order of the first chart;
    optionally only those whose first-chart coordinates lie in ``domain``."""
    first = charts[0]
    out = []
    for lab, x in first.footprint:
        if all(lab in dict(c.footprint) for c in charts[1:]) and (domain is None or domain.contains(x)):
            out.append(lab)
    return out


def section_identity_residual(A, B, m):
    """fhat * s_A - s_B o f, as a PolyMap (zero for a morphism)."""
    lhs = pc.matmul(m.fhat, A.section, (B.m, A.m), (A.m, 1))
    return pc.sub(lhs, pc.compose(B.section, m.f))


def check_morphism(A: KuranishiChart, B: KuranishiChart, m: ChartMorphism, domain=None, target_domain=None, labels=None):
    """Section compatibility as a polynomial identity and footprint compatibility
    at every shared footprint label."""
    rep = Report(f"morphism {m.source}->{m.target}")
    errs = _shape_errors(A, B, m)
    if errs:
        rep.add("shape", "dimensions", False, np.inf, "; ".join(errs))
        return rep
    res = section_identity_residual(A, B, m)
    rep.add("section", "fhat*s_source = s_target o f", res.max_abs_coeff() <= pc.IDENTITY_TOL, res.max_abs_coeff(), f"residual {res!r}" if not res.is_zero() else "")
    dom = domain if domain is not None else A.domain
    tdom = target_domain if target_domain is not None else B.domain
    labs = labels if labels is not None else shared_labels(A, B, domain=dom)
    worst, bad = 0.0, []
    for lab in labs:
        x, y = A.point(lab), B.point(lab)
        err = _maxabs(m.f(x) - np.asarray(y))
        worst = max(worst, err)
        if err > POINT_TOL or not tdom.contains(m.f(x)):
            bad.append(lab)
    rep.add("footprint", "f maps footprint points to footprint points", not bad, worst, f"labels {bad}" if bad else "")
    if dom.dim and not dom.is_empty:
        pts = np.array(pc.sample(dom, KHOM_DENSITY, 0))
        img = pc.evaluate_many(m.f, pts)
        outside = sum(not tdom.contains(y) for y in img)
        rep.add("image", "f maps the domain into the target domain", outside == 0, float(outside), f"{outside} sampled points leave the target" if outside else "")
    return rep


def compose(m1: ChartMorphism, m2: ChartMorphism, shapes=None) -> ChartMorphism:
    """m2 after m1: (f2 o f1, (f1^* fhat2) . fhat1).

    ``shapes`` is (m_A, m_B, m_C); when omitted it is inferred from the fhat sizes
    where possible.
    """
    if m1.target != m2.source:
        raise ValueError(f"cannot compose {m1.source}->{m1.target} with {m2.source}->{m2.target}")
    mA, mB, mC = shapes if shapes is not None else _infer_ranks(m1, m2)
    f = pc.compose(m2.f, m1.f)
    fhat = pc.matmul(pc.compose(m2.fhat, m1.f), m1.fhat, (mC, mB), (mB, mA))
    return ChartMorphism(m1.source, m2.target, f, fhat)


def _infer_ranks(m1, m2):
    # assumes fhat1 square; pass shapes explicitly otherwise
    a, b = m1.fhat.n_out, m2.fhat.n_out
    k = int(round(np.sqrt(a)))
    if k * k == a and (k or b == 0) and (k == 0 or b % k == 0):
        return k, k, (b // k if k else 0)
    raise ValueError("cannot infer obstruction ranks; pass shapes explicitly")


def compose_charts(A, B, C, m1, m2):
    return compose(m1, m2, (A.m, B.m, C.m))


def _sample_points(chart, domain, density=KHOM_DENSITY):
    dom = domain if domain is not None else chart.domain
    if dom.is_empty:
        return np.zeros((0, chart.n))
    return np.array(pc.sample(dom, density, 0)).reshape(-1, chart.n)


def khom_difference(l1: KHomRep, l2: KHomRep, A: KuranishiChart, n_target, domain=None, labels=None):
    """Largest deviation of l1 - l2 on the two observable projections:
    action on the section at sampled points and matrix values on the footprint."""
    if l1.lam.n_out != l2.lam.n_out or l1.lam.n_in != l2.lam.n_in:
        raise pc.DimensionError("homotopy representatives have different shapes")
    diff = pc.sub(l1.lam, l2.lam)
    shape = (n_target, A.m)
    act = pc.matmul(diff, A.section, shape, (A.m, 1))
    pts = _sample_points(A, domain)
    on_s = _maxabs(pc.evaluate_many(act, pts)) if len(pts) and act.n_out else 0.0
    labs = labels if labels is not None else A.labels
    on_u = max((_maxabs(_mat(diff, A.point(lab), shape)) for lab in labs), default=0.0)
    return on_s, on_u


def khom_equal(l1: KHomRep, l2: KHomRep, A: KuranishiChart, n_target=None, domain=None, labels=None, tol=POINT_TOL):
    """Equality in the quotient: same action on the section over the domain and
    same matrices at the footprint points."""
    if n_target is None:
        n_target = l1.lam.n_out // A.m if A.m else 0
    on_s, on_u = khom_difference(l1, l2, A, n_target, domain, labels)
    return on_s <= tol and on_u <= tol


def check_homotopy(m0: ChartMorphism, m1: ChartMorphism, lam: KHomRep, A: KuranishiChart, B: KuranishiChart, labels=None, condition_names=("(1)", "(2)")):
    """Lambda witnesses m0 ~ m1: f1 - f0 = Lambda*s_A as polynomials, and at the
    footprint Lambda*ds_A = df1 - df0 and ds_B*Lambda = fhat1 - fhat0."""
    c1, c2 = condition_names
    rep = Report(f"homotopy {m0.source}->{m0.target}")
    if (m0.source, m0.target) != (m1.source, m1.target):
        rep.add(c1, "endpoints", False, np.inf, "morphisms have different source or target")
        return rep
    if lam.lam.n_in != A.n or lam.lam.n_out != B.n * A.m:
        rep.add(c1, "shape", False, np.inf, f"Lambda should be a {B.n}x{A.m} matrix map on R^{A.n}")
        return rep
    diff = pc.sub(pc.sub(m1.f, m0.f), pc.matmul(lam.lam, A.section, (B.n, A.m), (A.m, 1)))
    rep.add(c1, "f1 - f0 = Lambda*s", diff.max_abs_coeff() <= pc.IDENTITY_TOL, diff.max_abs_coeff())
    df0, df1 = m0.df(), m1.df()
    labs = labels if labels is not None else shared_labels(A, B)
    w1 = w2 = 0.0
    for lab in labs:
        x, y = A.point(lab), B.point(lab)
        L = _mat(lam.lam, x, (B.n, A.m))
        lhs = L @ A.ds_at(x) - (_mat(df1, x, (B.n, A.n)) - _mat(df0, x, (B.n, A.n)))
        rhs = B.ds_at(y) @ L - (_mat(m1.fhat, x, (B.m, A.m)) - _mat(m0.fhat, x, (B.m, A.m)))
        w1, w2 = max(w1, _maxabs(lhs)), max(w2, _maxabs(rhs))
    rep.add(c2, "Lambda*ds_source = df1 - df0 on the footprint", w1 <= POINT_TOL, w1)
    rep.add(c2, "ds_target*Lambda = fhat1 - fhat0 on the footprint", w2 <= POINT_TOL, w2)
    return rep


def solve_homotopy(m0: ChartMorphism, m1: ChartMorphism, A: KuranishiChart, B: KuranishiChart) -> KHomRep:
    """Lambda with f1 - f0 = Lambda*s_A, by exact polynomial division.

    Only rank-one obstruction spaces are supported (the quotient is then unique
    up to the footprint-invisible part).
    """
    if A.m != 1:
        raise ValueError("division-based homotopy needs a rank-one obstruction space")
    q, r = pc.divide(pc.sub(m1.f, m0.f), A.section)
    if not r.is_zero():
        raise ValueError(f"f1 - f0 is not divisible by the section (remainder {r!r})")
    return KHomRep(q)


# ---------------------------------------------------------------------------
# one-parameter families


@dataclass(frozen=True, eq=False)
class FamilyHomotopy:
    """A family of morphisms in (x, t), t the last input, with its infinitesimal data.

    ``Xi`` is an m_target x C(m_source, 2) matrix map describing a map from the
    second exterior power of the source obstruction space.
    """

    F: PolyMap
    Fhat: PolyMap
    Lam: PolyMap
    Xi: PolyMap

    def at(self, t, source="", target=""):
        n = self.F.n_in - 1
        return ChartMorphism(source, target, pc.substitute(self.F, n, t), pc.substitute(self.Fhat, n, t))


def _wedge_contract(Xi_val, s, m_target, m_source):
    """Matrix of v -> Xi(s ^ v) with Xi stored on pairs a < b."""
    out = np.zeros((m_target, m_source))
    pairs = [(a, b) for a in range(m_source) for b in range(a + 1, m_source)]
    for p, (a, b) in enumerate(pairs):
        col = Xi_val[:, p]
        out[:, b] += s[a] * col
        out[:, a] -= s[b] * col
    return out


def check_family_homotopy(fh: FamilyHomotopy, A: KuranishiChart, B: KuranishiChart, m0: ChartMorphism = None, m1: ChartMorphism = None, density=4):
    rep = Report("family homotopy")
    n, t_idx = A.n, A.n
    if m0 is not None:
        for t, m, tag in ((0.0, m0, "t=0"), (1.0, m1, "t=1")):
            if m is None:
                continue
            end = fh.at(t)
            e = max(pc.sub(end.f, m.f).max_abs_coeff(), pc.sub(end.fhat, m.fhat).max_abs_coeff())
            rep.add("(a)", f"endpoint {tag}", e <= pc.IDENTITY_TOL, e)
    s_xt = pc.append_inputs(A.section, 1)
    lhs = pc.compose(B.section, fh.F)
    rhs = pc.matmul(fh.Fhat, s_xt, (B.m, A.m), (A.m, 1))
    e = pc.sub(lhs, rhs).max_abs_coeff()
    rep.add("(b)", "F(t)^* s_target = Fhat(t) s_source", e <= pc.IDENTITY_TOL, e)
    dF = pc.partial(fh.F, t_idx)
    e = pc.sub(dF, pc.matmul(fh.Lam, s_xt, (B.n, A.m), (A.m, 1))).max_abs_coeff()
    rep.add("(c)", "dF/dt = Lambda(t) s_source", e <= pc.IDENTITY_TOL, e)
    dFhat = pc.partial(fh.Fhat, t_idx)
    dsB_F = pc.compose(B.ds, fh.F)
    dom = A.domain.product(BoxUnion.cube(1, 0.5, [0.5]))
    worst = 0.0
    for xt in pc.sample(dom, density, 0):
        xt = np.asarray(xt)
        s = A.section(xt[:n])
        pred = _mat(dsB_F, xt, (B.m, B.n)) @ _mat(fh.Lam, xt, (B.n, A.m)) + _wedge_contract(_mat(fh.Xi, xt, (B.m, max(A.m * (A.m - 1) // 2, 0))), s, B.m, A.m)
        worst = max(worst, _maxabs(_mat(dFhat, xt, (B.m, A.m)) - pred))
    rep.add("(c)", "dFhat/dt = ds_target Lambda(t) + Xi(t)(s ^ -)", worst <= POINT_TOL, worst)
    return rep


def extract_homotopy(fh: FamilyHomotopy) -> KHomRep:
    """Heuristic Lambda := integral of Lambda(t) over [0, 1]; satisfies the
    section condition exactly, the footprint conditions are not guaranteed."""
    return KHomRep(pc.integrate_unit(fh.Lam, fh.Lam.n_in - 1))


# ---------------------------------------------------------------------------
# atlases


@dataclass(frozen=True, eq=False)
class Transition:
    """A transition morphism i -> j restricted to dom_i (in chart i) with image in dom_j."""

    morphism: ChartMorphism
    dom_i: BoxUnion
    dom_j: BoxUnion

    @property
    def i(self):
        return self.morphism.source

    @property
    def j(self):
        return self.morphism.target


@dataclass(frozen=True, eq=False)
class KuranishiAtlas:
    charts: tuple
    footprint: tuple
    transitions: dict
    lambdas: dict
    vdim: int

    def __post_init__(self):
        object.__setattr__(self, "charts", tuple(self.charts))
        object.__setattr__(self, "footprint", tuple(str(x) for x in self.footprint))
        ids = [c.id for c in self.charts]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate chart ids")
        trans = dict(self.transitions)
        for c in self.charts:
            trans.setdefault((c.id, c.id), Transition(identity_morphism(c), c.domain, c.domain))
        object.__setattr__(self, "transitions", trans)
        object.__setattr__(self, "lambdas", dict(self.lambdas))

    @property
    def ids(self):
        return [c.id for c in self.charts]

    def chart(self, i) -> KuranishiChart:
        for c in self.charts:
            if c.id == i:
                return c
        raise KeyError(i)

    def transition(self, i, j) -> ChartMorphism:
        return self.transitions[(i, j)].morphism

    def has(self, *pairs):
        return all(p in self.transitions for p in pairs)

    def overlap(self, i, j):
        """Labels of U_ij: present in both charts with chart-i coordinates in dom_i."""
        if (i, j) not in self.transitions:
            return []
        return shared_labels(self.chart(i), self.chart(j), domain=self.transitions[(i, j)].dom_i)

    def triple_overlap(self, i, j, k):
        a, b, c = set(self.overlap(i, j)), set(self.overlap(j, k)), set(self.overlap(i, k))
        return [lab for lab in self.chart(i).labels if lab in a and lab in b and lab in c]

    def triple_domain(self, i, j, k):
        return self.transitions[(i, j)].dom_i.intersect(self.transitions[(i, k)].dom_i)

    def lam(self, i, j, k) -> KHomRep:
        if (i, j, k) in self.lambdas:
            return self.lambdas[(i, j, k)]
        A, C = self.chart(i), self.chart(k)
        return KHomRep.zero(A.n, C.n, A.m)

    def triples(self):
        return [(i, j, k) for i, j, k in product(self.ids, repeat=3) if self.has((i, j), (j, k), (i, k)) and self.triple_overlap(i, j, k)]

    def quadruples(self):
        out = []
        for i, j, k, l in product(self.ids, repeat=4):
            if not self.has((i, j), (j, k), (k, l), (i, k), (i, l), (j, l)):
                continue
            labs = set(self.triple_overlap(i, j, k)) & set(self.triple_overlap(i, k, l)) & set(self.triple_overlap(j, k, l))
            labs = [lab for lab in self.chart(i).labels if lab in labs and lab in self.overlap(i, l)]
            if labs:
                out.append(((i, j, k, l), labs))
        return out

    def with_lambda(self, key, lam):
        lams = dict(self.lambdas)
        lams[key] = lam
        return KuranishiAtlas(self.charts, self.footprint, self.transitions, lams, self.vdim)

    def with_transition(self, key, tr):
        trans = dict(self.transitions)
        trans[key] = tr
        return KuranishiAtlas(self.charts, self.footprint, trans, self.lambdas, self.vdim)

    def with_chart(self, chart):
        charts = tuple(chart if c.id == chart.id else c for c in self.charts)
        return KuranishiAtlas(charts, self.footprint, self.transitions, self.lambdas, self.vdim)

    def relabel(self, mapping):
        """Rename chart ids via ``mapping``; the atlas structure is unchanged."""
        from .charts import KuranishiChart as KC

        def cid(i):
            return mapping.get(i, i)

        charts = tuple(KC(cid(c.id), c.domain, c.m, c.section, c.orientation, c.footprint, dict(c.meta)) for c in self.charts)
        trans = {}
        for (i, j), t in self.transitions.items():
            m = t.morphism
            trans[(cid(i), cid(j))] = Transition(ChartMorphism(cid(m.source), cid(m.target), m.f, m.fhat), t.dom_i, t.dom_j)
        lams = {(cid(i), cid(j), cid(k)): v for (i, j, k), v in self.lambdas.items()}
        return KuranishiAtlas(charts, self.footprint, trans, lams, self.vdim)

    def to_dict(self):
        return {
            "vdim": self.vdim,
            "charts": [c.to_dict() for c in self.charts],
            "footprint": [{"label": lab} for lab in self.footprint],
            "transitions": [
                {"i": i, "j": j, "dom_i": t.dom_i.to_dict(), "dom_j": t.dom_j.to_dict(), "f": t.morphism.f.to_dict(), "fhat": t.morphism.fhat.to_dict()}
                for (i, j), t in sorted(self.transitions.items())
                if not (i == j and _is_identity(t.morphism, self.chart(i)) and t.dom_i == self.chart(i).domain)
            ],
            "lambdas": [{"i": i, "j": j, "k": k, "lam": v.to_dict()} for (i, j, k), v in sorted(self.lambdas.items())],
        }

    @classmethod
    def from_dict(cls, d):
        charts = tuple(KuranishiChart.from_dict(c) for c in d["charts"])
        trans = {}
        for t in d.get("transitions", []):
            i, j = str(t["i"]), str(t["j"])
            m = ChartMorphism(i, j, PolyMap.from_dict(t["f"]), PolyMap.from_dict(t["fhat"]))
            trans[(i, j)] = Transition(m, BoxUnion.from_dict(t["dom_i"]), BoxUnion.from_dict(t["dom_j"]))
        lams = {(str(x["i"]), str(x["j"]), str(x["k"])): KHomRep.from_dict(x["lam"]) for x in d.get("lambdas", [])}
        fp = [p["label"] if isinstance(p, dict) else p for p in d.get("footprint", [])]
        return cls(charts, tuple(fp), trans, lams, int(d["vdim"]))


def _is_identity(m, chart):
    idm = identity_morphism(chart)
    return pc.equal(m.f, idm.f) and pc.equal(m.fhat, idm.fhat)


def single_chart_atlas(chart: KuranishiChart):
    return KuranishiAtlas((chart,), tuple(chart.labels), {}, {}, chart.vdim)


def check_atlas(A: KuranishiAtlas) -> Report:
    """Conditions (1.)-(4.) of an atlas: dimensions and covering, transitions,
    homotopy data on triples, cocycle identity on quadruples."""
    rep = Report("atlas")
    # (1.) charts, dimensions, covering
    for c in A.charts:
        rep.add("(1.)", f"vdim of chart {c.id}", c.vdim == A.vdim, abs(c.vdim - A.vdim), f"n - m = {c.vdim}, atlas vdim {A.vdim}" if c.vdim != A.vdim else "")
        stray = [lab for lab in c.labels if lab not in A.footprint]
        rep.add("(1.)", f"footprint of chart {c.id} inside the space", not stray, len(stray), f"unknown labels {stray}" if stray else "")
    covered = {lab for c in A.charts for lab in c.labels}
    missing = [lab for lab in A.footprint if lab not in covered]
    rep.add("(1.)", "charts cover the space", not missing, len(missing), f"uncovered labels {missing}" if missing else "")
    # (2.) transitions
    for (i, j), t in sorted(A.transitions.items()):
        Ci, Cj = A.chart(i), A.chart(j)
        sub = check_morphism(Ci, Cj, t.morphism, domain=t.dom_i, target_domain=t.dom_j)
        for c in sub.checks:
            rep.add("(2.)", f"transition {i}->{j}: {c.name}", c.passed, c.residual, c.detail)
        if i == j:
            ok = _is_identity(t.morphism, Ci)
            rep.add("(2.)", f"transition {i}->{i} is the identity", ok, 0.0 if ok else 1.0)
        outside = sum(not Ci.domain.contains(x) for x in _sample_points(Ci, t.dom_i))
        rep.add("(2.)", f"transition {i}->{j}: declared domain inside chart {i}", outside == 0, float(outside))
    # (3.) homotopy data on triples
    for i, j, k in A.triples():
        Ci, Ck = A.chart(i), A.chart(k)
        labs = A.triple_overlap(i, j, k)
        m0 = A.transition(i, k)
        m1 = compose(A.transition(i, j), A.transition(j, k), (Ci.m, A.chart(j).m, Ck.m))
        sub = check_homotopy(m0, m1, A.lam(i, j, k), Ci, Ck, labels=labs)
        for c in sub.checks:
            rep.add("(3.)", f"Lambda_{i}{j}{k}: {c.name}", c.passed, c.residual, c.detail)
        if i == j or j == k:
            zero = KHomRep.zero(Ci.n, Ck.n, Ci.m)
            on_s, on_u = khom_difference(A.lam(i, j, k), zero, Ci, Ck.n, domain=A.triple_domain(i, j, k), labels=labs)
            rep.add("(3.)", f"Lambda_{i}{j}{k} vanishes", max(on_s, on_u) <= POINT_TOL, max(on_s, on_u))
    # (4.) cocycle on quadruples
    for (i, j, k, l), labs in A.quadruples():
        Ci, Cj, Ck, Cl = (A.chart(c) for c in (i, j, k, l))
        f_ij, f_kl = A.transition(i, j), A.transition(k, l)
        df_kl = f_kl.df()
        worst = 0.0
        for lab in labs:
            xi, xj, xk = Ci.point(lab), Cj.point(lab), Ck.point(lab)
            E = (
                _mat(A.lam(i, k, l).lam, xi, (Cl.n, Ci.m))
                - _mat(A.lam(j, k, l).lam, xj, (Cl.n, Cj.m)) @ _mat(f_ij.fhat, xi, (Cj.m, Ci.m))
                - _mat(A.lam(i, j, l).lam, xi, (Cl.n, Ci.m))
                + _mat(df_kl, xk, (Cl.n, Ck.n)) @ _mat(A.lam(i, j, k).lam, xi, (Ck.n, Ci.m))
            )
            worst = max(worst, _maxabs(E))
        rep.add("(4.)", f"cocycle on {i}{j}{k}{l}", worst <= POINT_TOL, worst)
    return rep


# ---------------------------------------------------------------------------
# strict morphisms between atlases


@dataclass(frozen=True, eq=False)
class StrictMorphism:
    """Chart-level morphisms h_i: chart i -> chart tau(i) plus homotopies Delta_ij
    witnessing h_j o f_ij ~ f_tau(i)tau(j) o h_i."""

    tau: dict
    maps: dict
    deltas: dict = field(default_factory=dict)

    def delta(self, i, j, A, B):
        if (i, j) in self.deltas:
            return self.deltas[(i, j)]
        return KHomRep.zero(A.chart(i).n, B.chart(self.tau[j]).n, A.chart(i).m)

    def with_delta(self, key, lam):
        d = dict(self.deltas)
        d[key] = lam
        return StrictMorphism(self.tau, self.maps, d)

    def to_dict(self):
        return {
            "tau": dict(sorted(self.tau.items())),
            "maps": [{"i": i, "f": m.f.to_dict(), "fhat": m.fhat.to_dict()} for i, m in sorted(self.maps.items())],
            "deltas": [{"i": i, "j": j, "lam": v.to_dict()} for (i, j), v in sorted(self.deltas.items())],
        }

    @classmethod
    def from_dict(cls, d):
        tau = {str(k): str(v) for k, v in d["tau"].items()}
        maps = {str(m["i"]): ChartMorphism(str(m["i"]), tau[str(m["i"])], PolyMap.from_dict(m["f"]), PolyMap.from_dict(m["fhat"])) for m in d["maps"]}
        deltas = {(str(x["i"]), str(x["j"])): KHomRep.from_dict(x["lam"]) for x in d.get("deltas", [])}
        return cls(tau, maps, deltas)


def _strict_pair_morphisms(h, A, B, i, j):
    """(h_j o f_ij, f_tau(i)tau(j) o h_i)."""
    Ci, Cj = A.chart(i), A.chart(j)
    Pi, Pj = B.chart(h.tau[i]), B.chart(h.tau[j])
    left = compose(A.transition(i, j), h.maps[j], (Ci.m, Cj.m, Pj.m))
    right = compose(h.maps[i], B.transition(h.tau[i], h.tau[j]), (Ci.m, Pi.m, Pj.m))
    return left, right


def check_strict_morphism(h: StrictMorphism, A: KuranishiAtlas, B: KuranishiAtlas) -> Report:
    rep = Report("strict morphism")
    missing = [i for i in A.ids if i not in h.tau or i not in h.maps]
    rep.add("(1.)", "index map defined on every chart", not missing, len(missing), f"missing {missing}" if missing else "")
    if missing:
        return rep
    for i in A.ids:
        sub = check_morphism(A.chart(i), B.chart(h.tau[i]), h.maps[i])
        for c in sub.checks:
            rep.add("(2.)", f"h_{i}: {c.name}", c.passed, c.residual, c.detail)
    pairs = [(i, j) for (i, j) in sorted(A.transitions) if (h.tau[i], h.tau[j]) in B.transitions]
    for i, j in pairs:
        if not A.overlap(i, j):
            continue
        left, right = _strict_pair_morphisms(h, A, B, i, j)
        sub = check_homotopy(left, right, h.delta(i, j, A, B), A.chart(i), B.chart(h.tau[j]), labels=A.overlap(i, j))
        for c in sub.checks:
            rep.add("(3.)", f"Delta_{i}{j}: {c.name}", c.passed, c.residual, c.detail)
    for i, j, k in A.triples():
        ti, tj, tk = h.tau[i], h.tau[j], h.tau[k]
        if not B.has((ti, tj), (tj, tk), (ti, tk)):
            continue
        Ci, Cj, Ck = A.chart(i), A.chart(j), A.chart(k)
        Pi, Pj, Pk = B.chart(ti), B.chart(tj), B.chart(tk)
        dh_k = h.maps[k].df()
        df_t = B.transition(tj, tk).df()
        worst = 0.0
        for lab in A.triple_overlap(i, j, k):
            xi, xj, xk = Ci.point(lab), Cj.point(lab), Ck.point(lab)
            yi, yj = Pi.point(lab), Pj.point(lab)
            E = (
                _mat(h.delta(i, k, A, B).lam, xi, (Pk.n, Ci.m))
                - _mat(dh_k, xk, (Pk.n, Ck.n)) @ _mat(A.lam(i, j, k).lam, xi, (Ck.n, Ci.m))
                + _mat(B.lam(ti, tj, tk).lam, yi, (Pk.n, Pi.m)) @ _mat(h.maps[i].fhat, xi, (Pi.m, Ci.m))
                - _mat(df_t, yj, (Pk.n, Pj.n)) @ _mat(h.delta(i, j, A, B).lam, xi, (Pj.n, Ci.m))
                - _mat(h.delta(j, k, A, B).lam, xj, (Pk.n, Cj.m)) @ _mat(A.transition(i, j).fhat, xi, (Cj.m, Ci.m))
            )
            worst = max(worst, _maxabs(E))
        rep.add("(4.)", f"five-term identity on {i}{j}{k}", worst <= POINT_TOL, worst)
    return rep


def check_2morphism(h: StrictMorphism, g: StrictMorphism, upsilon: dict, A: KuranishiAtlas, B: KuranishiAtlas) -> Report:
    """Homotopy between strict morphisms h and g.

    ``upsilon[i]`` is an n_{tau_g(i)} x m_i matrix map with
    g_i - f_{tau_h(i) tau_g(i)} o h_i = upsilon_i * s_i.
    """
    rep = Report("2-morphism")
    for i in A.ids:
        Ci = A.chart(i)
        Ph, Pg = B.chart(h.tau[i]), B.chart(g.tau[i])
        worst, bad = 0.0, []
        for lab, x in Ci.footprint:
            if lab not in Ph.labels or lab not in Pg.labels:
                bad.append(lab)
                continue
            e = max(_maxabs(h.maps[i].f(x) - np.asarray(Ph.point(lab))), _maxabs(g.maps[i].f(x) - np.asarray(Pg.point(lab))))
            worst = max(worst, e)
            if e > POINT_TOL:
                bad.append(lab)
        rep.add("(a)", f"footprint images agree on chart {i}", not bad, worst, f"labels {bad}" if bad else "")
    for i in A.ids:
        Ci, Ph, Pg = A.chart(i), B.chart(h.tau[i]), B.chart(g.tau[i])
        if (h.tau[i], g.tau[i]) not in B.transitions:
            rep.add("(b)", f"Upsilon_{i}", False, np.inf, f"no transition {h.tau[i]}->{g.tau[i]} in the target")
            continue
        m0 = compose(h.maps[i], B.transition(h.tau[i], g.tau[i]), (Ci.m, Ph.m, Pg.m))
        ups = upsilon.get(i, KHomRep.zero(Ci.n, Pg.n, Ci.m))
        sub = check_homotopy(m0, g.maps[i], ups, Ci, Pg)
        for c in sub.checks:
            rep.add("(b)", f"Upsilon_{i}: {c.name}", c.passed, c.residual, c.detail)
    for (i, j) in sorted(A.transitions):
        hi, hj, gi, gj = h.tau[i], h.tau[j], g.tau[i], g.tau[j]
        if not B.has((gi, gj), (hj, gj), (hi, hj), (hi, gi), (hi, gj)):
            continue
        Ci, Cj = A.chart(i), A.chart(j)
        Hi, Hj, Gi, Gj = B.chart(hi), B.chart(hj), B.chart(gi), B.chart(gj)
        df_g = B.transition(gi, gj).df()
        df_hg = B.transition(hj, gj).df()
        ups_i = upsilon.get(i, KHomRep.zero(Ci.n, Gi.n, Ci.m))
        ups_j = upsilon.get(j, KHomRep.zero(Cj.n, Gj.n, Cj.m))
        worst = 0.0
        for lab in A.overlap(i, j):
            if not all(lab in P.labels for P in (Hi, Hj, Gi, Gj)):
                continue
            xi, xj = Ci.point(lab), Cj.point(lab)
            lam_b = _mat(B.lam(hi, hj, gj).lam, Hi.point(lab), (Gj.n, Hi.m)) - _mat(B.lam(hi, gi, gj).lam, Hi.point(lab), (Gj.n, Hi.m))
            E = (
                _mat(g.delta(i, j, A, B).lam, xi, (Gj.n, Ci.m))
                - _mat(df_g, Gi.point(lab), (Gj.n, Gi.n)) @ _mat(ups_i.lam, xi, (Gi.n, Ci.m))
                + _mat(ups_j.lam, xj, (Gj.n, Cj.m)) @ _mat(A.transition(i, j).fhat, xi, (Cj.m, Ci.m))
                - _mat(df_hg, Hj.point(lab), (Gj.n, Hj.n)) @ _mat(h.delta(i, j, A, B).lam, xi, (Hj.n, Ci.m))
                + lam_b @ _mat(h.maps[i].fhat, xi, (Hi.m, Ci.m))
            )
            worst = max(worst, _maxabs(E))
        rep.add("(c)", f"five-term identity on {i}{j}", worst <= POINT_TOL, worst)
    return rep


def identity_strict_morphism(A: KuranishiAtlas) -> StrictMorphism:
    return StrictMorphism({i: i for i in A.ids}, {c.id: identity_morphism(c) for c in A.charts}, {})
