"""Local Kuranishi charts at representations and the Casson count."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np

from ..charts import KuranishiChart, point_chart
from ..polycore import BoxUnion, PolyMap
from ..tangent import RANK_TOL, _null
from ..vfc import perturb_and_count
from . import quaternion as qt
from .fox import fox_matrices
from .presentation import GroupPresentation, PresentationError, homology_sphere_check
from .solve import RepOrbit, RepPoint, solve_reps

NEWTON_TOL = 1e-12


class LocalChartError(RuntimeError):
    pass


class UnstableCount(RuntimeError):
    pass


def _rep(orbit):
    if isinstance(orbit, RepOrbit):
        return orbit.representative.q
    if isinstance(orbit, RepPoint):
        return orbit.q
    return np.asarray(orbit, dtype=float).reshape(-1, 4)


def relator_defects(P: GroupPresentation, q, U):
    """Imaginary parts of all relators at exp(u_i) q_i for a batch U of shape (N, 3g)."""
    U = np.asarray(U, dtype=float)
    N = U.shape[0]
    Q = qt.qmul(qt.qexp(U.reshape(N, P.g, 3)), q[None])
    out = np.zeros((N, 3 * P.r))
    for j, w in enumerate(P.relators):
        r = np.broadcast_to(qt.ONE, (N, 4)).copy()
        for i, e in w:
            r = qt.qmul(r, qt.qpow(Q[:, i], e))
        out[:, 3 * j : 3 * j + 3] = r[:, 1:]
    return out


@dataclass
class LocalBases:
    h1: np.ndarray  # 3g x n, tangent directions
    h2: np.ndarray  # 3r x m, obstruction directions
    slice_: np.ndarray  # 3g x k, complement solved away
    image: np.ndarray  # 3r x k, image of d1


def local_bases(P, q, tol=RANK_TOL):
    d0, d1 = fox_matrices(P, q)
    g3, r3 = 3 * P.g, 3 * P.r
    H1 = _null(np.vstack([d1, d0.T]), g3, tol) if g3 else np.zeros((0, 0))
    H2 = _null(d1.T, r3, tol) if r3 else np.zeros((0, 0))
    W = _null(np.vstack([H1.T, d0.T]), g3, tol) if g3 else np.zeros((0, 0))
    Im = _null(H2.T, r3, tol) if r3 and H2.shape[1] else np.eye(r3)
    return LocalBases(H1, H2, W, Im)


def _reduce(P, q, B, X):
    """Solve for w with the image-of-d1 components of the defect equal to zero."""
    N = X.shape[0]
    k = B.slice_.shape[1]
    if k == 0:
        return relator_defects(P, q, X @ B.h1.T), np.zeros(N)
    _, d1 = fox_matrices(P, q)
    J = B.image.T @ d1 @ B.slice_
    Jinv = np.linalg.inv(J)
    w = np.zeros((N, k))
    for _ in range(50):
        U = X @ B.h1.T + w @ B.slice_.T
        R = relator_defects(P, q, U)
        F = R @ B.image
        err = np.max(np.abs(F), axis=1)
        if np.all(err < NEWTON_TOL):
            return R, err
        # chord steps with the derivative at the base point
        w = w - F @ Jinv.T
    U = X @ B.h1.T + w @ B.slice_.T
    R = relator_defects(P, q, U)
    err = np.max(np.abs(R @ B.image), axis=1)
    return R, err


def _monomials(n, order):
    return [e for d in range(1, order + 1) for e in _exps(n, d)]


def _exps(n, d):
    out = []
    for combo in combinations_with_replacement(range(n), d):
        e = [0] * n
        for c in combo:
            e[c] += 1
        out.append(tuple(e))
    return out


def local_chart(P: GroupPresentation, orbit, radius=0.05, order=3, id="rho", label="rho", orientation=None, allow_balanced_obstructed=False) -> KuranishiChart:
    """Chart around a representation from the implicit-function reduction of the relator equations.

    Coordinates are the harmonic part of the twisted 1-cocycles, the
    obstruction space is the cokernel of the Fox differential.  The section is
    fitted by least squares with monomials of degree 1..``order`` on a tensor
    grid.  A balanced presentation with h1 > 0 is refused: its closed-manifold
    obstruction space is not visible from the presentation complex.
    """
    q = _rep(orbit)
    if orientation is None:
        orientation = orbit.orientation_bit if isinstance(orbit, RepOrbit) else 1
    B = local_bases(P, q)
    n, m = B.h1.shape[1], B.h2.shape[1]
    if n == 0:
        return point_chart(id=id, label=label, orientation=orientation)
    if P.balanced and not allow_balanced_obstructed:
        raise LocalChartError("balanced presentation with h1 > 0: the obstruction space needs 3-cell data not present in a presentation")
    grid1 = radius * np.cos(np.pi * (np.arange(order + 2) + 0.5) / (order + 2))
    X = np.array(np.meshgrid(*([grid1] * n), indexing="ij")).reshape(n, -1).T
    R, err = _reduce(P, q, B, X)
    if np.max(err, initial=0.0) > 1e-9:
        raise LocalChartError(f"implicit-function solve failed inside radius {radius}; shrink the radius")
    domain = BoxUnion.cube(n, radius)
    if m == 0:
        return KuranishiChart(id, domain, 0, PolyMap(n, 0), orientation, ((label, (0.0,) * n),), {"fit_residual": 0.0, "h1": n, "h2": 0})
    S = R @ B.h2
    mons = _monomials(n, order)
    V = np.stack([np.prod(X ** np.array(e), axis=1) for e in mons], axis=1)
    coef, *_ = np.linalg.lstsq(V, S, rcond=None)
    fit_res = float(np.max(np.abs(V @ coef - S)))
    coords = tuple({e: float(coef[t, c]) for t, e in enumerate(mons)} for c in range(m))
    section = PolyMap(n, m, coords)
    meta = {"fit_residual": fit_res, "h1": n, "h2": m, "h1_basis": B.h1.tolist(), "h2_basis": B.h2.tolist()}
    return KuranishiChart(id, domain, m, section, orientation, ((label, (0.0,) * n),), meta)


@dataclass
class CassonResult:
    N: int
    lam: Fraction
    sigma: int
    bits: tuple
    counts: tuple
    orbits: list = field(default_factory=list)
    seed_counts: tuple = ()

    @property
    def lambda_abs(self):
        return abs(self.lam)

    def to_dict(self):
        def num(v):
            return int(v) if v.denominator == 1 else float(v)

        return {
            "N": self.N,
            "lambda": num(self.lam),
            "lambda_abs": num(self.lambda_abs),
            "sigma": self.sigma,
            "bits": list(self.bits),
            "local_counts": list(self.counts),
            "orbit_counts_by_seed": list(self.seed_counts),
            "orbits": [o.to_dict() for o in self.orbits],
        }


def casson_count(P: GroupPresentation, orientation_bits=None, sigma=1, starts=100000, seed=0, radius=0.05, order=3) -> CassonResult:
    """sigma * 1/2 * sum over irreducible orbits of bit * local count.

    The orbit list must be identical in size for seeds seed, seed+1, seed+2.
    """
    check = homology_sphere_check(P)
    if not check.is_homology_sphere:
        raise PresentationError(f"not an integral homology sphere (det {check.det})")
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    runs = [solve_reps(P, starts=starts, seed=s) for s in (seed, seed + 1, seed + 2)]
    sizes = tuple(len(r) for r in runs)
    if len(set(sizes)) != 1:
        raise UnstableCount(f"orbit counts differ across seeds: {sizes}")
    orbits = runs[0]
    bits = tuple(orientation_bits) if orientation_bits is not None else (1,) * len(orbits)
    if len(bits) != len(orbits) or any(b not in (1, -1) for b in bits):
        raise ValueError(f"need one orientation bit (+1 or -1) per orbit; found {len(orbits)} orbits")
    counts = []
    for k, (orb, b) in enumerate(zip(orbits, bits)):
        orb.orientation_bit = b
        chart = local_chart(P, orb, radius, order, id=f"orbit{k}", label=f"orbit{k}", orientation=1)
        counts.append(perturb_and_count(chart).value)
    total = sum(b * c for b, c in zip(bits, counts))
    return CassonResult(len(orbits), Fraction(sigma * total, 2), sigma, bits, tuple(counts), orbits, sizes)
