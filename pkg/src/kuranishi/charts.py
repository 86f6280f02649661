"""Kuranishi charts, constant-coefficient curved L-infinity charts, zero finding."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations_with_replacement, permutations

import numpy as np

from . import polycore as pc
from .polycore import BoxUnion, PolyMap

TAU_ZERO = 1e-9
DEFAULT_K_MAX = 4


class ChartError(ValueError):
    """Invalid chart data; ``label`` names the offending footprint point if any."""

    def __init__(self, msg, label=None):
        super().__init__(msg)
        self.label = label


@dataclass(frozen=True, eq=False)
class KuranishiChart:
    """A chart (V, R^m, s, psi) with V a box union in R^n.

    The footprint map psi is stored extensionally: ``footprint`` is a tuple of
    ``(label, coordinates)`` pairs, one per point of the underlying space the
    chart covers.
    """

    id: str
    domain: BoxUnion
    m: int
    section: PolyMap
    orientation: int = 1
    footprint: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.section.n_in != self.domain.dim:
            raise ChartError(f"chart {self.id}: section has {self.section.n_in} inputs, domain has dimension {self.domain.dim}")
        if self.section.n_out != self.m:
            raise ChartError(f"chart {self.id}: section has {self.section.n_out} outputs, obstruction rank is {self.m}")
        if self.orientation not in (1, -1):
            raise ChartError(f"chart {self.id}: orientation must be +1 or -1")
        fp = []
        seen = set()
        for label, x in self.footprint:
            x = tuple(float(v) for v in x)
            label = str(label)
            if label in seen:
                raise ChartError(f"chart {self.id}: duplicate footprint label {label}", label)
            seen.add(label)
            if len(x) != self.n:
                raise ChartError(f"chart {self.id}: footprint point {label} has wrong dimension", label)
            if not self.domain.contains(x):
                raise ChartError(f"chart {self.id}: footprint point {label} lies outside the domain", label)
            res = float(np.max(np.abs(self.section(x)), initial=0.0))
            if res > TAU_ZERO:
                raise ChartError(f"chart {self.id}: footprint point {label} has section residual {res:.3g}", label)
            fp.append((label, x))
        object.__setattr__(self, "footprint", tuple(fp))

    @property
    def n(self):
        return self.domain.dim

    @property
    def vdim(self):
        return self.n - self.m

    @property
    def labels(self):
        return [lab for lab, _ in self.footprint]

    def point(self, label):
        return dict(self.footprint)[label]

    @cached_property
    def ds(self):
        """Jacobian of the section as an (m, n) matrix-valued map."""
        return pc.jacobian(self.section)

    def ds_at(self, x):
        return pc.evaluate(self.ds, x).reshape(self.m, self.n)

    def with_orientation(self, sign):
        return KuranishiChart(self.id, self.domain, self.m, self.section, sign, self.footprint, dict(self.meta))

    def to_dict(self):
        return {
            "id": self.id,
            "domain": self.domain.to_dict(),
            "m": self.m,
            "section": self.section.to_dict(),
            "orientation": self.orientation,
            "footprint": [{"label": lab, "x": list(x)} for lab, x in self.footprint],
        }

    @classmethod
    def from_dict(cls, d):
        return new_chart(
            BoxUnion.from_dict(d["domain"]),
            int(d["m"]),
            PolyMap.from_dict(d["section"]),
            int(d.get("orientation", 1)),
            [(p["label"], p["x"]) for p in d.get("footprint", [])],
            id=str(d.get("id", "chart")),
        )


def new_chart(domain, m, section, orientation=1, footprint_points=(), id="chart"):
    return KuranishiChart(id, domain, m, section, orientation, tuple(footprint_points))


def vdim(chart):
    return chart.vdim


def point_chart(id="pt", label=None, orientation=1):
    fp = ((label, ()),) if label is not None else ()
    return KuranishiChart(id, BoxUnion.point(), 0, PolyMap(0, 0), orientation, fp)


def manifold_chart(domain, id="M", footprint_points=()):
    return KuranishiChart(id, domain, 0, PolyMap(domain.dim, 0), 1, tuple(footprint_points))


# ---------------------------------------------------------------------------
# L-infinity charts


def _is_symmetric(T, tol=1e-12):
    k = T.ndim - 1
    scale = max(1.0, float(np.max(np.abs(T), initial=0.0)))
    for perm in permutations(range(1, k + 1)):
        if not np.allclose(T, np.transpose(T, (0,) + perm), rtol=0, atol=tol * scale):
            return False
    return True


@dataclass(frozen=True, eq=False)
class LinfChart:
    """Brackets l_k : Sym^k R^h1 -> R^h2, a pairing H2 x H1 -> R and a box radius.

    ``brackets[k]`` is a dense array of shape ``(h2,) + (h1,) * k``
    symmetric in its last k axes; asymmetric input is rejected.
    """

    h1: int
    h2: int
    brackets: dict
    pairing: np.ndarray | None = None
    radius: float = 1.0

    def __post_init__(self):
        br = {}
        for k, T in self.brackets.items():
            k = int(k)
            if k < 2:
                raise ValueError("brackets start at k = 2")
            T = np.array(T, dtype=float)
            if T.shape != (self.h2,) + (self.h1,) * k:
                raise ValueError(f"bracket l_{k} has shape {T.shape}, expected {(self.h2,) + (self.h1,) * k}")
            if not _is_symmetric(T):
                raise ValueError(f"bracket l_{k} is not symmetric in its arguments")
            T.setflags(write=False)
            br[k] = T
        object.__setattr__(self, "brackets", dict(sorted(br.items())))
        if self.pairing is not None:
            P = np.array(self.pairing, dtype=float).reshape(self.h2, self.h1)
            P.setflags(write=False)
            object.__setattr__(self, "pairing", P)
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def k_max(self):
        return max(self.brackets, default=1)

    def to_dict(self):
        d = {"h1": self.h1, "h2": self.h2, "radius": self.radius, "brackets": {str(k): T.tolist() for k, T in self.brackets.items()}}
        if self.pairing is not None:
            d["pairing"] = self.pairing.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["h1"]), int(d["h2"]), {int(k): np.array(v) for k, v in d.get("brackets", {}).items()}, d.get("pairing"), float(d.get("radius", 1.0)))


def bracket_polymap(T):
    """x -> l_k(x, ..., x) as a PolyMap (no 1/k! factor)."""
    h2, h1, k = T.shape[0], T.shape[1] if T.ndim > 1 else 0, T.ndim - 1
    coords = [dict() for _ in range(h2)]
    for idx in combinations_with_replacement(range(h1), k):
        exp = [0] * h1
        for i in idx:
            exp[i] += 1
        mult = math.factorial(k) // math.prod(math.factorial(e) for e in exp)
        for a in range(h2):
            c = T[(a,) + idx]
            if c:
                coords[a][tuple(exp)] = mult * c
    return PolyMap(h1, h2, tuple(coords))


def linf_section(L: LinfChart, k_max=DEFAULT_K_MAX):
    s = PolyMap.zero(L.h1, L.h2)
    for k, T in L.brackets.items():
        if k <= k_max:
            s = pc.add(s, pc.scale(bracket_polymap(T), 1.0 / math.factorial(k)))
    return s


def from_linf(L: LinfChart, k_max=DEFAULT_K_MAX, id="linf", label="origin"):
    """Kuranishi chart of the truncated series sum_k l_k(x,...,x)/k!."""
    if k_max < 2:
        raise ValueError("truncation order must be at least 2")
    s = linf_section(L, k_max)
    chart = KuranishiChart(id, BoxUnion.cube(L.h1, L.radius), L.h2, s, 1, ((label, (0.0,) * L.h1),))
    chart.meta.update(k_max=k_max, dropped_orders=[k for k in L.brackets if k > k_max])
    return chart


def taylor_tensor(section: PolyMap, k):
    """Read the degree-k part of a section back as a symmetric tensor l_k / k!."""
    h1, h2 = section.n_in, section.n_out
    T = np.zeros((h2,) + (h1,) * k)
    for a, coord in enumerate(section.coords):
        for exp, c in coord.items():
            if sum(exp) != k:
                continue
            idx = tuple(i for i, e in enumerate(exp) for _ in range(e))
            mult = math.factorial(k) // math.prod(math.factorial(e) for e in exp)
            for perm in set(permutations(idx)):
                T[(a,) + perm] = c / mult
    return T


@dataclass(frozen=True, eq=False)
class Potential:
    f: PolyMap
    verified: bool
    residual: float


def potential(L: LinfChart, k_max=DEFAULT_K_MAX, tol=pc.IDENTITY_TOL) -> Potential:
    """f(x) = sum_k <l_k(x,...,x), x> / (k+1)!, checked against the section.

    The pairing matrix P has entries P[a, b] = <e_a, e_b> for e_a in H2 and
    e_b in H1, so grad f = P^T s when the brackets are cyclic.  The flag
    records whether (P^T)^{-1} grad f reproduces the section to ``tol``.
    """
    if L.pairing is None or L.h1 != L.h2:
        raise ValueError("potential needs a square pairing")
    P = L.pairing
    sv = np.linalg.svd(P, compute_uv=False)
    if sv.size and sv[-1] <= 1e-12 * max(1.0, sv[0]):
        raise np.linalg.LinAlgError("pairing is singular")
    f = PolyMap.zero(L.h1, 1)
    xs = [PolyMap.variable(b, L.h1) for b in range(L.h1)]
    for k, T in L.brackets.items():
        if k > k_max:
            continue
        lk = bracket_polymap(T)
        paired = PolyMap.zero(L.h1, 1)
        for a in range(L.h2):
            for b in range(L.h1):
                if P[a, b]:
                    paired = pc.add(paired, pc.scale(pc.mul(lk[a], xs[b]), P[a, b]))
        f = pc.add(f, pc.scale(paired, 1.0 / math.factorial(k + 1)))
    grad = pc.jacobian(f)  # 1 x h1, i.e. the gradient as h1 outputs
    recovered = pc.compose(PolyMap.linear(np.linalg.inv(P.T)), grad)
    residual = pc.sub(recovered, linf_section(L, k_max)).max_abs_coeff()
    return Potential(f, residual <= tol, residual)


def is_cyclic(L: LinfChart, tol=1e-10):
    """True when <l_k(x_1..x_k), x_{k+1}> is symmetric in all k+1 slots."""
    if L.pairing is None:
        return False
    for T in L.brackets.values():
        S = np.tensordot(L.pairing, T, axes=([0], [0]))  # index order: (b, j1..jk)
        if not _is_symmetric(S[None, ...], tol):
            return False
    return True


def random_cyclic_linf(rng, h, k_max=4, radius=0.5):
    """Random cyclic L-infinity chart with invertible pairing."""
    while True:
        P = rng.normal(size=(h, h))
        if np.linalg.cond(P) < 1e3:
            break
    brackets = {}
    for k in range(2, k_max + 1):
        S = rng.normal(size=(h,) * (k + 1))
        S = sum(np.transpose(S, perm) for perm in permutations(range(k + 1))) / math.factorial(k + 1)
        # S[b, j1..jk] = sum_a P[a, b] T[a, j1..jk]
        T = np.tensordot(np.linalg.inv(P.T), S, axes=([1], [0]))
        T = sum(np.transpose(T, (0,) + perm) for perm in permutations(range(1, k + 1))) / math.factorial(k)
        brackets[k] = T
    return LinfChart(h, h, brackets, P, radius)


# ---------------------------------------------------------------------------
# zeros


@dataclass(frozen=True)
class Zero:
    x: tuple
    residual: float
    det: float
    degenerate: bool
    inside: bool = True

    @property
    def sign(self):
        return 0 if self.degenerate else (1 if self.det > 0 else -1)


def default_density(n):
    return {0: 1, 1: 16, 2: 8, 3: 5}.get(n, 3)


def newton_zeros(section: PolyMap, domain: BoxUnion, density=None, seed=0, search=None, det_tol=1e-8, max_iter=100):
    """Multistart damped Newton for a square polynomial system.

    Seeds are sampled from ``domain``; converged zeros are kept if they lie in
    ``search`` (defaults to ``domain``), deduplicated at distance 1e-6, and
    returned sorted.  ``Zero.inside`` records membership in ``domain``.
    """
    n = section.n_in
    if section.n_out != n:
        raise ValueError("zero finding needs a square system (n = m)")
    search = domain if search is None else search
    if n == 0:
        return [Zero((), 0.0, 1.0, False, True)]
    density = default_density(n) if density is None else density
    jac = pc.jacobian(section)
    X = np.array(pc.sample(domain, density, seed), dtype=float).reshape(-1, n)
    active = np.ones(len(X), dtype=bool)

    def resid(Y):
        return np.max(np.abs(pc.evaluate_many(section, Y)), axis=1)

    with np.errstate(all="ignore"):
        F = pc.evaluate_many(section, X)
        r = np.max(np.abs(F), axis=1)
        for _ in range(max_iter):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            J = pc.evaluate_many(jac, X[idx]).reshape(-1, n, n)
            Fi = F[idx]
            step = np.empty_like(Fi)
            for t in range(len(idx)):
                try:
                    step[t] = np.linalg.solve(J[t], Fi[t])
                except np.linalg.LinAlgError:
                    step[t] = np.linalg.lstsq(J[t], Fi[t], rcond=None)[0]
            alpha = np.ones(len(idx))
            trial = X[idx] - step
            rt = resid(trial)
            for _h in range(30):
                bad = ~(rt < r[idx]) & (r[idx] > 0)
                if not bad.any():
                    break
                alpha[bad] *= 0.5
                trial[bad] = X[idx][bad] - alpha[bad, None] * step[bad]
                rt[bad] = resid(trial[bad])
            moved = rt < r[idx]
            snorm = np.linalg.norm(alpha[:, None] * step, axis=1)
            X[idx[moved]] = trial[moved]
            r[idx[moved]] = rt[moved]
            F[idx[moved]] = pc.evaluate_many(section, trial[moved])
            xnorm = np.linalg.norm(X[idx], axis=1)
            done = (r[idx] < 1e-12) & (snorm <= 1e-14 * (1 + xnorm))
            done |= ~moved  # converged to roundoff, or stalled
            done |= ~np.isfinite(r[idx]) | (xnorm > 1e8)
            active[idx[done]] = False

    keep = np.isfinite(r) & (r < TAU_ZERO)
    cands = X[keep]
    cands = cands[[search.contains(x) for x in cands]] if len(cands) else cands
    if len(cands) == 0:
        return []
    order = np.lexsort(cands.T[::-1])
    reps = []
    for x in cands[order]:
        if all(np.linalg.norm(x - y) > 1e-6 for y in reps):
            reps.append(x)
    out = []
    for x in reps:
        J = pc.evaluate(jac, x).reshape(n, n)
        d = float(np.linalg.det(J))
        res = float(np.max(np.abs(pc.evaluate(section, x))))
        out.append(Zero(tuple(float(v) for v in x), res, d, abs(d) <= det_tol, domain.contains(x)))
    return out


def find_zeros(chart: KuranishiChart, seeds_density=None, seed=0):
    """Nondegenerate and degenerate zeros of the section inside the chart domain."""
    if chart.n != chart.m:
        raise ValueError(f"chart {chart.id} is not square (n={chart.n}, m={chart.m})")
    return newton_zeros(chart.section, chart.domain, seeds_density, seed)
