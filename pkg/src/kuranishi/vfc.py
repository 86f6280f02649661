"""Signed zero counts of perturbed sections in virtual dimension zero, deformation
sweeps, fiber products over a Euclidean base and intersection numbers."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import polycore as pc
from .atlas import KuranishiAtlas, check_atlas
from .charts import KuranishiChart, default_density, newton_zeros
from .polycore import BoxUnion, PolyMap

DET_TOL = 1e-8
MAX_RETRIES = 10
DEFAULT_EPS = 1e-3
DEFAULT_MARGIN = 0.1
MATCH_TOL = 1e-7


class CountError(RuntimeError):
    pass


class CompactnessError(CountError):
    pass


class UnsupportedRegime(CountError):
    pass


def workers():
    """Thread cap from KURANISHI_THREADS (0 or unset: one per CPU)."""
    try:
        n = int(os.environ.get("KURANISHI_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass
class SignedCount:
    plus: int
    minus: int
    degenerate_zeros: int = 0
    perturbation: tuple = ()
    zeros: list = field(default_factory=list)
    attempts: int = 1

    @property
    def value(self):
        return self.plus - self.minus

    @property
    def certified(self):
        return self.degenerate_zeros == 0

    def __add__(self, other):
        return SignedCount(
            self.plus + other.plus,
            self.minus + other.minus,
            self.degenerate_zeros + other.degenerate_zeros,
            tuple(self.perturbation) + tuple(other.perturbation),
            self.zeros + other.zeros,
            max(self.attempts, other.attempts),
        )

    def to_dict(self):
        return {
            "plus": self.plus,
            "minus": self.minus,
            "value": self.value,
            "certified": self.certified,
            "degenerate_zeros": self.degenerate_zeros,
            "perturbation": [float(v) for v in self.perturbation],
        }


def _direction(rng, m):
    v = rng.normal(size=m)
    while np.linalg.norm(v) < 1e-3:
        v = rng.normal(size=m)
    return v / np.linalg.norm(v)


def perturb_and_count(chart: KuranishiChart, eps=DEFAULT_EPS, seed=0, margin=DEFAULT_MARGIN, density=None, shell=None) -> SignedCount:
    """Signed count of zeros of s - c for a constant c of norm ``eps``.

    Every zero contributes orientation * sign det ds.  Zeros are searched in
    the domain grown by ``shell`` (default ``margin``); any zero inside that
    region but closer than ``margin`` to the domain, or outside it, raises
    CompactnessError.  A degenerate zero triggers a retry with the next c from
    the same stream.
    """
    if chart.n != chart.m:
        raise CountError(f"chart {chart.id} has virtual dimension {chart.vdim}, need 0")
    if not 0 < eps:
        raise ValueError("eps must be positive")
    if chart.n == 0:
        return SignedCount(1 if chart.orientation > 0 else 0, 1 if chart.orientation < 0 else 0)
    rng = np.random.default_rng(seed)
    density = default_density(chart.n) if density is None else density
    seeds_dom = chart.domain.expand(max(margin, shell or 0.0))
    last = None
    for attempt in range(1, MAX_RETRIES + 1):
        c = eps * _direction(rng, chart.m)
        s_pert = pc.sub(chart.section, PolyMap.constant(c, chart.n))
        zeros = newton_zeros(s_pert, seeds_dom, density, seed, search=seeds_dom, det_tol=DET_TOL)
        near = [z for z in zeros if chart.domain.boundary_distance(z.x) < margin]
        if near:
            where = "outside" if not chart.domain.contains(near[0].x) else f"within {margin} of the boundary of"
            raise CompactnessError(f"zero at {near[0].x} lies {where} chart {chart.id}")
        deg = sum(z.degenerate for z in zeros)
        plus = sum(1 for z in zeros if not z.degenerate and z.sign * chart.orientation > 0)
        minus = sum(1 for z in zeros if not z.degenerate and z.sign * chart.orientation < 0)
        last = SignedCount(plus, minus, deg, tuple(c), zeros, attempt)
        if deg == 0:
            return last
    raise CountError(f"chart {chart.id}: degenerate zeros after {MAX_RETRIES} perturbations")


def count_regime(atlas: KuranishiAtlas):
    """'single', 'dominated' (with the dominating chart id), 'disjoint', or 'unsupported'."""
    if len(atlas.charts) == 1:
        return "single", atlas.charts[0].id
    everything = set(atlas.footprint)
    for c in atlas.charts:
        if set(c.labels) == everything:
            return "dominated", c.id
    seen = set()
    for c in atlas.charts:
        if seen & set(c.labels):
            return "unsupported", None
        seen |= set(c.labels)
    return "disjoint", None


def virtual_count(atlas: KuranishiAtlas, eps=DEFAULT_EPS, seed=0, margin=DEFAULT_MARGIN) -> SignedCount:
    """Count of a virtual-dimension-zero atlas in the single-chart, dominated or
    disjoint-footprint regimes; overlapping atlases without a dominating chart
    are rejected."""
    if atlas.vdim != 0:
        raise CountError(f"virtual dimension is {atlas.vdim}, need 0")
    regime, cid = count_regime(atlas)
    if regime == "unsupported":
        raise UnsupportedRegime("unsupported regime: charts overlap and none covers the whole space")
    if regime == "dominated":
        rep = check_atlas(atlas)
        if not rep.passed:
            raise UnsupportedRegime(f"dominated regime needs a consistent atlas; failing conditions {rep.failed_conditions()}")
    if regime in ("single", "dominated"):
        return perturb_and_count(atlas.chart(cid), eps, seed, margin)
    total = SignedCount(0, 0)
    for k, c in enumerate(atlas.charts):
        total = total + perturb_and_count(c, eps, seed + k, margin)
    return total


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True, eq=False)
class ChartFamily:
    """Charts sharing domain and obstruction rank whose section depends on a last variable t."""

    id: str
    domain: BoxUnion
    m: int
    section: PolyMap
    orientation: int = 1

    def __post_init__(self):
        if self.section.n_in != self.domain.dim + 1:
            raise ValueError("family section needs the chart variables followed by t")
        if self.section.n_out != self.m:
            raise ValueError("family section has the wrong number of outputs")

    def at(self, t) -> KuranishiChart:
        s = pc.substitute(self.section, self.domain.dim, float(t))
        return KuranishiChart(f"{self.id}@t={t:g}", self.domain, self.m, s, self.orientation)

    def to_dict(self):
        return {"id": self.id, "domain": self.domain.to_dict(), "m": self.m, "section": self.section.to_dict(), "orientation": self.orientation}

    @classmethod
    def from_dict(cls, d):
        return cls(str(d.get("id", "family")), BoxUnion.from_dict(d["domain"]), int(d["m"]), PolyMap.from_dict(d["section"]), int(d.get("orientation", 1)))


@dataclass
class SweepResult:
    t_grid: list
    counts: list
    errors: dict

    @property
    def verdict(self):
        if self.errors:
            return "failed"
        vals = {c.value for c in self.counts if c is not None and c.certified}
        if len(vals) == 1 and all(c is not None and c.certified for c in self.counts):
            return "invariant"
        return "not invariant"

    def to_dict(self):
        return {
            "t": [float(t) for t in self.t_grid],
            "counts": [c.to_dict() if c is not None else None for c in self.counts],
            "errors": {f"{t:g}": msg for t, msg in self.errors.items()},
            "verdict": self.verdict,
        }


def deformation_sweep(family: ChartFamily, t_grid, eps=DEFAULT_EPS, seed=0, margin=DEFAULT_MARGIN) -> SweepResult:
    """Counts of every slice; zeros that leave the domain are searched for in a
    shell of half the domain width so escapes between grid points are caught."""
    t_grid = [float(t) for t in t_grid]
    widths = [h - l for b in family.domain.boxes for l, h in zip(b.lo, b.hi)]
    shell = max(margin, 0.5 * max(widths, default=0.0))

    def one(t):
        try:
            return perturb_and_count(family.at(t), eps, seed, margin, shell=shell), None
        except CountError as e:
            return None, str(e)

    with ThreadPoolExecutor(max_workers=min(workers(), max(len(t_grid), 1))) as ex:
        results = list(ex.map(one, t_grid))
    errors = {t: err for t, (_, err) in zip(t_grid, results) if err is not None}
    return SweepResult(t_grid, [c for c, _ in results], errors)


def uniform_grid(points):
    if points < 2:
        return [0.0]
    return [k / (points - 1) for k in range(points)]


# ---------------------------------------------------------------------------
# fiber products


def fiber_product(X: KuranishiChart, gX: PolyMap, Y: KuranishiChart, gY: PolyMap, id=None) -> KuranishiChart:
    """Chart on V_X x V_Y with section (s_X, s_Y, gX - gY).

    Orientation convention: product orientation of the domains with the
    obstruction blocks ordered as (s_X, s_Y, gX - gY); the chart sign is the
    product of the two chart signs.
    """
    if gX.n_in != X.n or gY.n_in != Y.n:
        raise pc.DimensionError("base maps must be defined on the chart domains")
    if gX.n_out != gY.n_out:
        raise pc.DimensionError("base maps must land in the same Euclidean space")
    n = X.n + Y.n
    sx = pc.embed_inputs(X.section, n, range(X.n))
    sy = pc.embed_inputs(Y.section, n, range(X.n, n))
    diff = pc.sub(pc.embed_inputs(gX, n, range(X.n)), pc.embed_inputs(gY, n, range(X.n, n)))
    section = pc.stack(sx, sy, diff)
    fp = []
    for lx, x in X.footprint:
        for ly, y in Y.footprint:
            if float(np.max(np.abs(gX(x) - gY(y)), initial=0.0)) <= MATCH_TOL:
                fp.append((f"{lx}|{ly}", tuple(x) + tuple(y)))
    return KuranishiChart(id or f"{X.id}x{Y.id}", X.domain.product(Y.domain), X.m + Y.m + gX.n_out, section, X.orientation * Y.orientation, tuple(fp))


def intersection_number(X: KuranishiChart, gX: PolyMap, Y: KuranishiChart, gY: PolyMap, eps=DEFAULT_EPS, seed=0, margin=DEFAULT_MARGIN) -> int:
    """Signed intersection count of two manifold charts mapped into R^k with complementary dimensions."""
    if X.m or Y.m:
        raise CountError("intersection numbers need manifold charts (m = 0)")
    if X.n + Y.n != gX.n_out:
        raise CountError(f"dimensions {X.n} + {Y.n} are not complementary in R^{gX.n_out}")
    return perturb_and_count(fiber_product(X, gX, Y, gY), eps, seed, margin).value
