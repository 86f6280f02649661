"""Multistart Gauss-Newton for SU(2) representations, gauge fixing and orbit clustering."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import quaternion as qt
from .presentation import GroupPresentation, PresentationError, homology_sphere_check

TAU_ZERO = 1e-9
IRREDUCIBLE_TOL = 1e-7
FINGERPRINT_TOL = 1e-6
COLLISION_TOL = 1e-4
DEFAULT_STARTS = 2000


@dataclass(frozen=True, eq=False)
class RepPoint:
    """Generator images as unit quaternions, shape (g, 4)."""

    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1, 4)
        if q.size and np.max(np.abs(np.linalg.norm(q, axis=1) - 1)) > 1e-10:
            raise ValueError("generator images must be unit quaternions")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def g(self):
        return self.q.shape[0]

    def residual(self, P: GroupPresentation):
        """Largest imaginary part over the relators, or inf if some relator has Re <= 0."""
        return float(batch_residual(self.q[None], P)[0])

    def conjugate(self, u):
        u = np.asarray(u, dtype=float)
        return RepPoint(qt.qmul(qt.qmul(u, self.q), qt.qconj(u)))

    def to_list(self):
        return self.q.tolist()


def _word(Q, P, w):
    out = np.broadcast_to(qt.ONE, Q.shape[:-2] + (4,)).copy()
    for i, e in w:
        out = qt.qmul(out, qt.qpow(Q[..., i, :], e))
    return out


def imaginary_rank(q, tol=IRREDUCIBLE_TOL):
    """Rank of the 3 x g matrix of generator imaginary parts."""
    q = np.asarray(q, dtype=float)
    if q.shape[0] == 0:
        return 0
    sv = np.linalg.svd(q[:, 1:].T, compute_uv=False)
    return int(np.sum(sv > tol))


def imaginary_rank_many(Q, tol=IRREDUCIBLE_TOL):
    Q = np.asarray(Q, dtype=float)
    if Q.shape[0] == 0 or Q.shape[1] == 0:
        return np.zeros(Q.shape[0], dtype=int)
    sv = np.linalg.svd(np.transpose(Q[:, :, 1:], (0, 2, 1)), compute_uv=False)
    return np.sum(sv > tol, axis=1)


def batch_residual(Q, P):
    """Per-point :meth:`RepPoint.residual` for an (N, g, 4) batch."""
    Q = np.asarray(Q, dtype=float)
    worst = np.zeros(Q.shape[0])
    for w in P.relators:
        r = _word(Q, P, w)
        worst = np.maximum(worst, np.max(np.abs(r[:, 1:]), axis=1))
        worst[r[:, 0] <= 0] = np.inf
    return worst


def is_irreducible(q, tol=IRREDUCIBLE_TOL):
    return imaginary_rank(q, tol) >= 2


def fingerprint_words(g):
    return [((i, 1),) for i in range(g)] + [((i, 1), (j, 1)) for i in range(g) for j in range(i + 1, g)]


def fingerprint_values(Q):
    """Traces of the generators and of all pairwise products q_i q_j (i < j)."""
    Q = np.asarray(Q, dtype=float)
    g = Q.shape[-2]
    cols = [qt.trace(Q[..., i, :]) for i in range(g)]
    cols += [qt.trace(qt.qmul(Q[..., i, :], Q[..., j, :])) for i in range(g) for j in range(i + 1, g)]
    return np.stack(cols, axis=-1) if cols else np.zeros(Q.shape[:-2] + (0,))


def fingerprint(q):
    return tuple(float(v) + 0.0 for v in np.round(fingerprint_values(q), 6))


def gauge_fix(q):
    """Conjugate so the first non-central generator points along +z and the
    next non-parallel one lies in the x-z half plane with x >= 0."""
    q = np.asarray(q, dtype=float)
    return gauge_fix_many(q[None])[0]


def _first_above(norms, tol):
    """Index of the first column above ``tol`` per row, or -1."""
    hit = norms > tol
    return np.where(hit.any(axis=1), np.argmax(hit, axis=1), -1)


def gauge_fix_many(Q):
    """Batched :func:`gauge_fix` over an (N, g, 4) array."""
    from scipy.spatial.transform import Rotation

    Q = np.asarray(Q, dtype=float)
    N, g, _ = Q.shape
    if N == 0 or g == 0:
        return Q.copy()
    ims = Q[:, :, 1:]
    k = _first_above(np.linalg.norm(ims, axis=2), IRREDUCIBLE_TOL)
    central = k < 0
    axis = ims[np.arange(N), np.maximum(k, 0)]
    axis[central] = [0.0, 0.0, 1.0]
    e3 = axis / np.linalg.norm(axis, axis=1, keepdims=True)
    perp = ims - np.einsum("ngc,nc->ng", ims, e3)[:, :, None] * e3[:, None, :]
    k1 = _first_above(np.linalg.norm(perp, axis=2), IRREDUCIBLE_TOL)
    e1 = perp[np.arange(N), np.maximum(k1, 0)]
    abelian = k1 < 0
    if abelian.any():
        # any frame with e3 along the axis
        trial = np.eye(3)[np.argmin(np.abs(e3[abelian]), axis=1)]
        e1[abelian] = trial - np.sum(trial * e3[abelian], axis=1, keepdims=True) * e3[abelian]
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(e3, e1)
    R = np.stack([e1, e2, e3], axis=1)
    x, y, z, w = Rotation.from_matrix(R).as_quat().T
    u = np.stack([w, x, y, z], axis=1)
    u[u[:, 0] < 0] *= -1
    out = qt.qmul(qt.qmul(u[:, None], Q), qt.qconj(u)[:, None])
    out = out / np.linalg.norm(out, axis=2, keepdims=True)
    out[central] = Q[central]
    return out


# ---------------------------------------------------------------------------
# batched Gauss-Newton on R^{4g}


def _residual_and_jacobian(Q, P, want_jac=True):
    """Residual (N, 3r + g) and Jacobian (N, 3r + g, 4g) of the relator system."""
    N, g, _ = Q.shape
    r = P.r
    F = np.zeros((N, 3 * r + g))
    J = np.zeros((N, 3 * r + g, 4 * g)) if want_jac else None
    conj = np.array([1.0, -1.0, -1.0, -1.0])
    Qc = Q * conj
    for j in range(r):
        letters = P.letters(j)
        L = len(letters)
        mats = [Q[:, i] if s > 0 else Qc[:, i] for i, s in letters]
        pre = [np.broadcast_to(qt.ONE, (N, 4))]
        for a in mats:
            pre.append(qt.qmul(pre[-1], a))
        F[:, 3 * j : 3 * j + 3] = pre[-1][:, 1:]
        if not want_jac:
            continue
        suf = [None] * (L + 1)
        suf[L] = np.broadcast_to(qt.ONE, (N, 4))
        for p in range(L - 1, -1, -1):
            suf[p] = qt.qmul(mats[p], suf[p + 1])
        for p, (i, s) in enumerate(letters):
            block = qt.left_matrix(pre[p]) @ qt.right_matrix(suf[p + 1])
            if s < 0:
                block = block * conj
            J[:, 3 * j : 3 * j + 3, 4 * i : 4 * i + 4] += block[:, 1:, :]
    norms = np.sum(Q * Q, axis=2)
    F[:, 3 * r :] = norms - 1
    if want_jac:
        for i in range(g):
            J[:, 3 * r + i, 4 * i : 4 * i + 4] = 2 * Q[:, i]
    return F, J


def gauss_newton(Q, P, max_iter=60, tol=1e-13):
    """Levenberg-damped Gauss-Newton on the relator system for a batch of starts.

    Returns the final points and their sup-norm residuals.
    """
    Q = np.array(Q, dtype=float)
    N, g, _ = Q.shape
    n = 4 * g
    mu = np.full(N, 1e-3)
    F, J = _residual_and_jacobian(Q, P)
    cost = np.sum(F * F, axis=1)
    active = np.max(np.abs(F), axis=1) > tol
    eye = np.eye(n)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Ji, Fi = J[idx], F[idx]
        JT = np.transpose(Ji, (0, 2, 1))
        A = JT @ Ji + mu[idx, None, None] * eye
        b = -(JT @ Fi[:, :, None])[:, :, 0]
        step = np.linalg.solve(A, b[:, :, None])[:, :, 0]
        trial = Q[idx] + step.reshape(-1, g, 4)
        Ft, Jt = _residual_and_jacobian(trial, P)
        ct = np.sum(Ft * Ft, axis=1)
        better = ct < cost[idx]
        acc = idx[better]
        Q[acc], F[acc], J[acc], cost[acc] = trial[better], Ft[better], Jt[better], ct[better]
        mu[acc] = np.maximum(mu[acc] / 3, 1e-12)
        mu[idx[~better]] *= 4
        res = np.max(np.abs(F[idx]), axis=1)
        stalled = (~better) & (mu[idx] > 1e8)
        active[idx[(res <= tol) | stalled]] = False
    return Q, np.max(np.abs(F), axis=1)


def start_points(g, starts, seed):
    """Scrambled-Halton starts mapped to the product of unit 3-spheres."""
    if g == 0:
        return np.zeros((starts, 0, 4))
    u = qmc.Halton(d=3 * g, scramble=True, seed=np.random.default_rng(seed)).random(starts)
    return qt.uniform_from_cube(u.reshape(starts, g, 3))


@dataclass(eq=False)
class RepOrbit:
    representative: RepPoint
    fingerprint: tuple
    h: tuple = None
    irreducible: bool = True
    orientation_bit: int = 1
    multiplicity: int = 1
    collision: bool = False
    complex_ranks: tuple = field(default=None, repr=False)

    def to_dict(self):
        return {
            "fingerprint": list(self.fingerprint),
            "representative": self.representative.to_list(),
            "h": list(self.h) if self.h is not None else None,
            "irreducible": self.irreducible,
            "orientation_bit": self.orientation_bit,
            "hits": self.multiplicity,
            "collision": self.collision,
        }


def solve_reps(
    P: GroupPresentation,
    starts=DEFAULT_STARTS,
    seed=0,
    allow_positive_dim=False,
    allow_reducible=False,
    conjugator=None,
    with_cohomology=True,
):
    """Conjugacy classes of SU(2) representations found by multistart Gauss-Newton.

    Only irreducible classes are returned unless ``allow_reducible``.  Non-balanced
    presentations are refused unless ``allow_positive_dim``.  ``conjugator``
    (a unit quaternion) conjugates every start point, which must not change
    the result.
    """
    if not P.balanced and not allow_positive_dim:
        raise PresentationError("non-balanced presentation: the representation variety may be positive dimensional")
    if P.balanced and not homology_sphere_check(P).is_homology_sphere:
        warnings.warn("presentation does not define an integral homology sphere", stacklevel=2)
    Q0 = start_points(P.g, starts, seed)
    if conjugator is not None:
        u = np.asarray(conjugator, dtype=float)
        Q0 = qt.qmul(qt.qmul(u, Q0), qt.qconj(u))
    Q, res = gauss_newton(Q0, P)
    ok = res < 1e-10
    Q = Q[ok]
    Q = Q / np.linalg.norm(Q, axis=2, keepdims=True)
    if P.r:
        re = np.stack([_word(Q, P, w)[:, 0] for w in P.relators], axis=1)
        Q = Q[np.all(re > 0.5, axis=1)]
    if len(Q):
        Q, res = gauss_newton(Q, P, max_iter=5, tol=0.0)
        Q = Q / np.linalg.norm(Q, axis=2, keepdims=True)
    keep = batch_residual(Q, P) <= TAU_ZERO
    Q = Q[keep]
    irr = imaginary_rank_many(Q) >= 2
    if not allow_reducible:
        Q, irr = Q[irr], irr[irr]
    orbits = _cluster(gauge_fix_many(Q), irr)
    if with_cohomology:
        from .fox import twisted_cohomology, fox_complex
        from ..tangent import complex_ranks

        for orb in orbits:
            orb.h = twisted_cohomology(P, orb.representative)
            orb.complex_ranks = complex_ranks(fox_complex(P, orb.representative))
    return orbits


def _cluster(Qs, irr):
    if len(Qs) == 0:
        return []
    fps = np.round(fingerprint_values(Qs), 6) + 0.0
    order = np.lexsort(fps.T[::-1])
    clusters = []  # (fingerprint, members)
    for k in order:
        for c in clusters:
            if np.max(np.abs(c[0] - fps[k])) <= FINGERPRINT_TOL * 1.5:
                c[1].append(k)
                break
        else:
            clusters.append((fps[k], [k]))
    orbits = []
    for fp, members in clusters:
        rep = Qs[members[0]]
        spread = max(float(np.max(np.abs(Qs[m] - rep))) for m in members)
        orbits.append(
            RepOrbit(
                RepPoint(rep),
                tuple(float(v) + 0.0 for v in fp),
                irreducible=bool(irr[members[0]]),
                multiplicity=len(members),
                collision=spread > COLLISION_TOL,
            )
        )
    orbits.sort(key=lambda o: o.fingerprint)
    return orbits
