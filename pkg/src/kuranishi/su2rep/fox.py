"""Twisted cochain complex of a presentation at an SU(2) representation (adjoint coefficients)."""
from __future__ import annotations

import numpy as np

from ..tangent import RANK_TOL, ThreeTermComplex, complex_ranks
from . import quaternion as qt
from .presentation import GroupPresentation, PresentationError
from .solve import RepPoint

COMPLEX_TOL = 1e-8


def _q(rho):
    return rho.q if isinstance(rho, RepPoint) else np.asarray(rho, dtype=float).reshape(-1, 4)


def fox_matrices(P: GroupPresentation, rho):
    """(d0, d1): d0 is 3g x 3 with blocks I - Ad(q_i); d1 is 3r x 3g with
    block (j, i) the adjoint image of the Fox derivative of relator j in x_i."""
    q = _q(rho)
    g, r = P.g, P.r
    d0 = np.zeros((3 * g, 3))
    for i in range(g):
        d0[3 * i : 3 * i + 3] = np.eye(3) - qt.rotation(q[i])
    d1 = np.zeros((3 * r, 3 * g))
    for j in range(r):
        prefix = qt.ONE.copy()
        for i, s in P.letters(j):
            letter = q[i] if s > 0 else qt.qconj(q[i])
            if s > 0:
                d1[3 * j : 3 * j + 3, 3 * i : 3 * i + 3] += qt.rotation(prefix)
                prefix = qt.qmul(prefix, letter)
            else:
                prefix = qt.qmul(prefix, letter)
                d1[3 * j : 3 * j + 3, 3 * i : 3 * i + 3] -= qt.rotation(prefix)
    return d0, d1


def fox_complex(P: GroupPresentation, rho) -> ThreeTermComplex:
    """su(2) -> su(2)^g -> su(2)^r at a representation."""
    q = _q(rho)
    if q.shape[0] != P.g:
        raise PresentationError(f"need {P.g} generator images, got {q.shape[0]}")
    rp = rho if isinstance(rho, RepPoint) else RepPoint(q)
    res = rp.residual(P)
    if res > 1e-7:
        raise PresentationError(f"relator residual {res:.3g} is too large for a representation")
    d0, d1 = fox_matrices(P, q)
    return ThreeTermComplex.from_matrices(d0, d1, "fox", check_tol=COMPLEX_TOL)


def twisted_cohomology(P: GroupPresentation, rho, tol=RANK_TOL):
    """(h0, h1, h2) of the closed 3-manifold group at rho.

    For a balanced presentation the 2-complex carries one extra copy of the
    coefficients in degree 2 compared with the closed manifold (a missing
    3-cell), so h2 is corrected to h2(complex) - 3 + h0; this makes h2 = h1.
    Other presentations return the ranks of the presentation complex.
    """
    h0, h1, h2 = complex_ranks(fox_complex(P, rho), tol)
    if P.balanced:
        h2 = h2 - 3 + h0
    return (h0, h1, h2)


def presentation_ranks(P: GroupPresentation, rho, tol=RANK_TOL):
    """Ranks of the presentation 2-complex itself (h0 - h1 + h2 = 3 - 3g + 3r)."""
    return complex_ranks(fox_complex(P, rho), tol)
