"""Sparse polynomial maps R^n -> R^m and box-union domains.

A ``PolyMap`` stores one ``{exponent tuple: coefficient}`` dict per output
coordinate.  Matrix-valued maps are ordinary PolyMaps whose outputs are the
entries in row-major order; the helpers that need a shape take it explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from itertools import product as _iproduct
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import qmc

DROP_TOL = 1e-15
IDENTITY_TOL = 1e-9

Exponent = tuple


class DimensionError(ValueError):
    pass


def _normalize(terms, n_in):
    out = {}
    for exp, c in terms:
        exp = tuple(int(e) for e in exp)
        if len(exp) != n_in:
            raise DimensionError(f"exponent {exp} does not have {n_in} entries")
        if any(e < 0 for e in exp):
            raise ValueError(f"negative exponent {exp}")
        out[exp] = out.get(exp, 0.0) + float(c)
    return {e: c for e, c in sorted(out.items()) if abs(c) >= DROP_TOL}


@dataclass(frozen=True, eq=False)
class PolyMap:
    """Polynomial map with ``n_in`` variables and ``n_out`` coordinates.

    ``coords[i]`` maps exponent tuples to coefficients.  Construction
    normalizes: duplicate exponents are merged and coefficients below 1e-15
    are dropped.  Treat instances as immutable.
    """

    n_in: int
    n_out: int
    coords: tuple = field(default=())

    def __post_init__(self):
        if self.n_in < 0 or self.n_out < 0:
            raise DimensionError("dimensions must be non-negative")
        coords = tuple(self.coords)
        if len(coords) == 0 and self.n_out > 0:
            coords = tuple({} for _ in range(self.n_out))
        if len(coords) != self.n_out:
            raise DimensionError(f"expected {self.n_out} coordinates, got {len(coords)}")
        norm = []
        for c in coords:
            items = c.items() if isinstance(c, dict) else c
            norm.append(_normalize(items, self.n_in))
        object.__setattr__(self, "coords", tuple(norm))

    # -- construction -----------------------------------------------------
    @classmethod
    def zero(cls, n_in, n_out):
        return cls(n_in, n_out)

    @classmethod
    def constant(cls, values, n_in):
        values = np.atleast_1d(np.asarray(values, dtype=float)).ravel()
        z = (0,) * n_in
        return cls(n_in, len(values), tuple({z: float(v)} for v in values))

    @classmethod
    def identity(cls, n):
        return cls.linear(np.eye(n))

    @classmethod
    def variable(cls, i, n_in):
        e = [0] * n_in
        e[i] = 1
        return cls(n_in, 1, ({tuple(e): 1.0},))

    @classmethod
    def linear(cls, A, b=None):
        """The affine map x -> A x + b."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        m, n = A.shape
        coords = []
        for i in range(m):
            d = {}
            for j in range(n):
                e = [0] * n
                e[j] = 1
                d[tuple(e)] = A[i, j]
            if b is not None:
                d[(0,) * n] = float(b[i])
            coords.append(d)
        return cls(n, m, tuple(coords))

    @classmethod
    def from_matrix(cls, M, n_in):
        """Constant matrix-valued map (row-major) on R^n_in."""
        return cls.constant(np.asarray(M, dtype=float).ravel(), n_in)

    # -- basic queries ----------------------------------------------------
    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self):
        return f"PolyMap(n_in={self.n_in}, n_out={self.n_out}, terms={self.n_terms})"

    def __eq__(self, other):
        if not isinstance(other, PolyMap):
            return NotImplemented
        return (self.n_in, self.n_out, self.coords) == (other.n_in, other.n_out, other.coords)

    def __hash__(self):
        return hash((self.n_in, self.n_out, tuple(tuple(c.items()) for c in self.coords)))

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    def __getitem__(self, idx):
        if isinstance(idx, int):
            idx = [idx]
        return select(self, idx)

    @property
    def n_terms(self):
        return sum(len(c) for c in self.coords)

    @property
    def degree(self):
        degs = [sum(e) for c in self.coords for e in c]
        return max(degs) if degs else 0

    def max_abs_coeff(self):
        vals = [abs(v) for c in self.coords for v in c.values()]
        return max(vals) if vals else 0.0

    def is_zero(self, tol=IDENTITY_TOL):
        return self.max_abs_coeff() <= tol

    # -- serialization ----------------------------------------------------
    def to_dict(self):
        return {
            "n_in": self.n_in,
            "n_out": self.n_out,
            "coords": [[{"exp": list(e), "c": c} for e, c in coord.items()] for coord in self.coords],
        }

    @classmethod
    def from_dict(cls, d):
        coords = tuple([(t["exp"], t["c"]) for t in coord] for coord in d["coords"])
        return cls(int(d["n_in"]), int(d["n_out"]), coords)


# ---------------------------------------------------------------------------
# evaluation


def _check_point(p, x):
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != p.n_in:
        raise DimensionError(f"point has {x.shape[0]} entries, map expects {p.n_in}")
    return x


def evaluate(p: PolyMap, x) -> np.ndarray:
    """Evaluate at a single point; each coordinate is summed with ``math.fsum``."""
    x = _check_point(p, x)
    out = np.empty(p.n_out)
    for i, coord in enumerate(p.coords):
        out[i] = math.fsum(c * math.prod(x[k] ** e for k, e in enumerate(exp) if e) for exp, c in coord.items())
    return out


def evaluate_many(p: PolyMap, X) -> np.ndarray:
    """Vectorized evaluation at the rows of ``X``; returns shape (N, n_out)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, p.n_in) if p.n_in else X.reshape(-1, 0)
    if X.shape[1] != p.n_in:
        raise DimensionError(f"points have {X.shape[1]} entries, map expects {p.n_in}")
    N = X.shape[0]
    out = np.zeros((N, p.n_out))
    for i, coord in enumerate(p.coords):
        if not coord:
            continue
        exps = list(coord)
        E =np.array(exps, dtype=int).reshape(len(exps), p.n_in)
        C = np.array([coord[e] for e in exps])
        mono = np.ones((N, len(exps)))
        for k in range(p.n_in):
            col = E[:, k]
            if col.any():
                mono *= X[:, k : k + 1] ** col[None, :]
        out[:, i] = mono @ C
    return out


# ---------------------------------------------------------------------------
# arithmetic


def _same_shape(p, q):
    if p.n_in != q.n_in or p.n_out != q.n_out:
        raise DimensionError(f"shape mismatch: ({p.n_in}->{p.n_out}) vs ({q.n_in}->{q.n_out})")


def _add_dicts(a, b, s=1.0):
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0.0) + s * c
    return out


def _mul_dicts(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0.0) + ca * cb
    return out


def add(p, q):
    _same_shape(p, q)
    return PolyMap(p.n_in, p.n_out, tuple(_add_dicts(a, b) for a, b in zip(p.coords, q.coords)))


def sub(p, q):
    _same_shape(p, q)
    return PolyMap(p.n_in, p.n_out, tuple(_add_dicts(a, b, -1.0) for a, b in zip(p.coords, q.coords)))


def scale(p, s):
    return PolyMap(p.n_in, p.n_out, tuple({e: s * c for e, c in coord.items()} for coord in p.coords))


def mul(p, q):
    """Coordinatewise product; a 1-output factor broadcasts."""
    if p.n_in != q.n_in:
        raise DimensionError("input dimensions differ")
    if p.n_out == 1 and q.n_out != 1:
        return PolyMap(p.n_in, q.n_out, tuple(_mul_dicts(p.coords[0], b) for b in q.coords))
    if q.n_out == 1 and p.n_out != 1:
        return mul(q, p)
    _same_shape(p, q)
    return PolyMap(p.n_in, p.n_out, tuple(_mul_dicts(a, b) for a, b in zip(p.coords, q.coords)))


def matmul(a, b, shape_a, shape_b):
    """Pointwise matrix product of matrix-valued maps stored row-major."""
    r, k = shape_a
    k2, c = shape_b
    if k != k2:
        raise DimensionError(f"inner dimensions differ: {shape_a} @ {shape_b}")
    if a.n_in != b.n_in:
        raise DimensionError("input dimensions differ")
    if a.n_out != r * k or b.n_out != k2 * c:
        raise DimensionError("declared shapes do not match n_out")
    coords = []
    for i in range(r):
        for j in range(c):
            d = {}
            for t in range(k):
                ai, bj = a.coords[i * k + t], b.coords[t * c + j]
                if ai and bj:
                    d = _add_dicts(d, _mul_dicts(ai, bj))
            coords.append(d)
    return PolyMap(a.n_in, r * c, tuple(coords))


def transpose(p, shape):
    r, c = shape
    if p.n_out != r * c:
        raise DimensionError("declared shape does not match n_out")
    return PolyMap(p.n_in, r * c, tuple(p.coords[i * c + j] for j in range(c) for i in range(r)))


def truncate(p, degree):
    """Drop all monomials of total degree above ``degree``."""
    return PolyMap(p.n_in, p.n_out, tuple({e: c for e, c in coord.items() if sum(e) <= degree} for coord in p.coords))


def select(p, rows: Iterable[int]):
    rows = list(rows)
    return PolyMap(p.n_in, len(rows), tuple(p.coords[i] for i in rows))


def stack(*maps):
    """Concatenate outputs of maps sharing the same inputs."""
    if not maps:
        raise ValueError("nothing to stack")
    n_in = maps[0].n_in
    if any(m.n_in != n_in for m in maps):
        raise DimensionError("input dimensions differ")
    return PolyMap(n_in, sum(m.n_out for m in maps), tuple(c for m in maps for c in m.coords))


def embed_inputs(p, n_total, positions: Sequence[int]):
    """Regard ``p`` as a map on R^n_total whose i-th variable sits at ``positions[i]``."""
    if len(positions) != p.n_in:
        raise DimensionError("need one position per input")
    coords = []
    for coord in p.coords:
        d = {}
        for e, c in coord.items():
            new = [0] * n_total
            for k, ek in zip(positions, e):
                new[k] += ek
            d[tuple(new)] = c
        coords.append(d)
    return PolyMap(n_total, p.n_out, tuple(coords))


def append_inputs(p, extra):
    return embed_inputs(p, p.n_in + extra, range(p.n_in))


def substitute(p, index, value):
    """Fix variable ``index`` to ``value``; the result has one input fewer."""
    coords = []
    for coord in p.coords:
        d = {}
        for e, c in coord.items():
            new = e[:index] + e[index + 1 :]
            d[new] = d.get(new, 0.0) + c * value ** e[index]
        coords.append(d)
    return PolyMap(p.n_in - 1, p.n_out, tuple(coords))


def partial(p, j):
    coords = []
    for coord in p.coords:
        d = {}
        for e, c in coord.items():
            if e[j]:
                new = list(e)
                new[j] -= 1
                d[tuple(new)] = d.get(tuple(new), 0.0) + c * e[j]
        coords.append(d)
    return PolyMap(p.n_in, p.n_out, tuple(coords))


def integrate_unit(p, j):
    """Integrate variable ``j`` over [0, 1]; the result has one input fewer."""
    coords = []
    for coord in p.coords:
        d = {}
        for e, c in coord.items():
            new = e[:j] + e[j + 1 :]
            d[new] = d.get(new, 0.0) + c / (e[j] + 1)
        coords.append(d)
    return PolyMap(p.n_in - 1, p.n_out, tuple(coords))


def jacobian(p: PolyMap) -> PolyMap:
    """Matrix-valued map of shape (n_out, n_in), entry (i, j) = d p_i / d x_j."""
    parts = [partial(p, j) for j in range(p.n_in)]
    coords = tuple(parts[j].coords[i] for i in range(p.n_out) for j in range(p.n_in))
    return PolyMap(p.n_in, p.n_out * p.n_in, coords)


def compose(outer: PolyMap, inner: PolyMap) -> PolyMap:
    """x -> outer(inner(x))."""
    if inner.n_out != outer.n_in:
        raise DimensionError(f"cannot compose: inner has {inner.n_out} outputs, outer expects {outer.n_in}")
    one = {(0,) * inner.n_in: 1.0}
    powers = [[one] for _ in range(inner.n_out)]

    def power(k, e):
        pk = powers[k]
        while len(pk) <= e:
            pk.append(_mul_dicts(pk[-1], inner.coords[k]))
        return pk[e]

    coords = []
    for coord in outer.coords:
        d = {}
        for exp, c in coord.items():
            term = reduce(_mul_dicts, (power(k, e) for k, e in enumerate(exp) if e), one)
            d = _add_dicts(d, term, c)
        coords.append(d)
    return PolyMap(inner.n_in, outer.n_out, tuple(coords))


def divide(num: PolyMap, den: PolyMap, tol=IDENTITY_TOL):
    """Exact division of each coordinate of ``num`` by the scalar polynomial ``den``.

    Multivariate long division in graded-lex order.  Returns ``(quotient,
    remainder)``; the division is exact when the remainder vanishes.
    """
    if den.n_out != 1 or den.n_in != num.n_in:
        raise DimensionError("divisor must be a scalar map on the same inputs")
    dd = den.coords[0]
    if not dd:
        raise ZeroDivisionError("division by the zero polynomial")

    def key(e):
        return (sum(e), e)

    lead = max(dd, key=key)
    lc = dd[lead]
    quots, rems = [], []
    for coord in num.coords:
        rest = dict(coord)
        q, r = {}, {}
        while rest:
            e = max(rest, key=key)
            c = rest.pop(e)
            if abs(c) < DROP_TOL:
                continue
            if all(a >= b for a, b in zip(e, lead)):
                qe = tuple(a - b for a, b in zip(e, lead))
                qc = c / lc
                q[qe] = q.get(qe, 0.0) + qc
                for de, dc in dd.items():
                    if de == lead:
                        continue
                    ne = tuple(a + b for a, b in zip(qe, de))
                    rest[ne] = rest.get(ne, 0.0) - qc * dc
            else:
                r[e] = r.get(e, 0.0) + c
        quots.append(q)
        rems.append(r)
    return PolyMap(num.n_in, num.n_out, tuple(quots)), PolyMap(num.n_in, num.n_out, tuple(rems))


def equal(p, q, tol=IDENTITY_TOL):
    """Coefficient-wise identity test after normalization."""
    _same_shape(p, q)
    return sub(p, q).max_abs_coeff() <= tol


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi):
            raise DimensionError("lo and hi differ in length")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError(f"empty box: lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    def contains(self, x, margin=0.0):
        return all(a + margin < v < b - margin for a, b, v in zip(self.lo, self.hi, x))

    def boundary_distance(self, x):
        """Signed distance to the boundary (positive inside)."""
        if not self.dim:
            return math.inf
        return min(min(v - a, b - v) for a, b, v in zip(self.lo, self.hi, x))


@dataclass(frozen=True)
class BoxUnion:
    """Finite union of open axis-aligned boxes."""

    dim: int
    boxes: tuple

    def __post_init__(self):
        boxes = tuple(b if isinstance(b, Box) else Box(*b) for b in self.boxes)
        if any(b.dim != self.dim for b in boxes):
            raise DimensionError("all boxes must have the domain's dimension")
        object.__setattr__(self, "boxes", boxes)

    @classmethod
    def cube(cls, dim, radius=1.0, center=None):
        c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
        return cls(dim, (Box(tuple(c - radius), tuple(c + radius)),))

    @classmethod
    def point(cls):
        return cls(0, (Box((), ()),))

    @property
    def is_empty(self):
        return not self.boxes

    def contains(self, x, margin=0.0):
        x = tuple(np.asarray(x, dtype=float).ravel())
        return any(b.contains(x, margin) for b in self.boxes)

    def boundary_distance(self, x):
        x = tuple(np.asarray(x, dtype=float).ravel())
        return max(b.boundary_distance(x) for b in self.boxes)

    def intersect(self, other):
        if other.dim != self.dim:
            raise DimensionError("dimension mismatch")
        out = []
        for a, b in _iproduct(self.boxes, other.boxes):
            lo = tuple(max(x, y) for x, y in zip(a.lo, b.lo))
            hi = tuple(min(x, y) for x, y in zip(a.hi, b.hi))
            if all(l < h for l, h in zip(lo, hi)):
                out.append(Box(lo, hi))
        return BoxUnion(self.dim, tuple(out))

    def product(self, other):
        boxes = tuple(Box(a.lo + b.lo, a.hi + b.hi) for a, b in _iproduct(self.boxes, other.boxes))
        return BoxUnion(self.dim + other.dim, boxes)

    def expand(self, margin):
        return BoxUnion(self.dim, tuple(Box(tuple(v - margin for v in b.lo), tuple(v + margin for v in b.hi)) for b in self.boxes))

    def to_dict(self):
        return {"dim": self.dim, "boxes": [{"lo": list(b.lo), "hi": list(b.hi)} for b in self.boxes]}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["dim"]), tuple(Box(tuple(b["lo"]), tuple(b["hi"])) for b in d["boxes"]))


def sample(dom: BoxUnion, density: int, seed: int = 0) -> list:
    """Deterministic scrambled-Halton points, ``density**dim`` inside each box."""
    if density < 1:
        raise ValueError("density must be at least 1")
    if dom.is_empty:
        raise ValueError("cannot sample an empty BoxUnion")
    pts = []
    for k, box in enumerate(dom.boxes):
        if box.dim == 0:
            pts.append(())
            continue
        n = density**box.dim
        rng = np.random.default_rng([seed, k])
        u = qmc.Halton(d=box.dim, scramble=True, seed=rng).random(n)
        u = np.clip(u, 1e-9, 1 - 1e-9)
        lo, hi = np.array(box.lo), np.array(box.hi)
        pts.extend(tuple(row) for row in lo + (hi - lo) * u)
    return pts


def from_expressions(exprs, variables):
    """PolyMap from polynomial expressions (strings or sympy) in the named variables.

    ``from_expressions(["2*x + x**2"], ["x"])`` is the map x -> 2x + x^2.
    """
    import sympy

    syms = sympy.symbols(list(variables)) if variables else []
    syms = list(syms) if isinstance(syms, (list, tuple)) else [syms]
    coords = []
    for e in exprs:
        expr = sympy.sympify(e, locals={str(s): s for s in syms})
        if not syms:
            coords.append({(): float(expr)})
            continue
        poly = sympy.Poly(expr, *syms)
        coords.append({tuple(int(k) for k in mon): float(c) for mon, c in poly.terms()})
    return PolyMap(len(syms), len(coords), tuple(coords))
