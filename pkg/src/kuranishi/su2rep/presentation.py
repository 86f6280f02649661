"""Finitely presented groups, exponent-sum matrices and relator systems."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy
from sympy.matrices.normalforms import smith_normal_form

from ..polycore import PolyMap
from .. import polycore as pc
from . import quaternion as qt


class PresentationError(ValueError):
    pass


@dataclass(frozen=True)
class GroupPresentation:
    """``g`` generators and relators given as ``((generator, exponent), ...)`` words."""

    g: int
    relators: tuple
    names: tuple = ()

    def __post_init__(self):
        rels = []
        for j, w in enumerate(self.relators):
            word = []
            for i, e in w:
                i, e = int(i), int(e)
                if not 0 <= i < self.g:
                    raise PresentationError(f"relator {j}: generator index {i} out of range")
                if e == 0:
                    raise PresentationError(f"relator {j}: zero exponent")
                word.append((i, e))
            rels.append(tuple(word))
        object.__setattr__(self, "relators", tuple(rels))
        names = tuple(self.names) or tuple(f"x{i}" for i in range(self.g))
        if len(names) != self.g:
            raise PresentationError("need one name per generator")
        object.__setattr__(self, "names", names)

    @property
    def r(self):
        return len(self.relators)

    @property
    def balanced(self):
        return self.r == self.g

    def letters(self, j):
        """Relator j expanded into single letters (generator, +-1)."""
        return [(i, 1 if e > 0 else -1) for i, e in self.relators[j] for _ in range(abs(e))]

    def to_dict(self):
        return {"generators": list(self.names), "relators": [[[i, e] for i, e in w] for w in self.relators]}

    @classmethod
    def from_dict(cls, d):
        names = tuple(d["generators"])
        return cls(len(names), tuple(tuple((p[0], p[1]) for p in w) for w in d["relators"]), names)

    def tietze_multiply(self, j, k):
        """Replace relator j by the product r_j r_k (same group)."""
        rels = list(self.relators)
        rels[j] = rels[j] + rels[k]
        return GroupPresentation(self.g, tuple(rels), self.names)

    def __str__(self):
        def word(w):
            return " ".join(f"{self.names[i]}^{e}" if e != 1 else self.names[i] for i, e in w) or "1"

        return f"<{', '.join(self.names)} | {'; '.join(word(w) for w in self.relators)}>"


def word_eval(word, q):
    """Evaluate ``word`` on generator quaternions ``q`` (shape (g, 4) or (N, g, 4))."""
    q = np.asarray(q, dtype=float)
    out = np.broadcast_to(qt.ONE, q.shape[:-2] + (4,)).copy()
    for i, e in word:
        if not 0 <= i < q.shape[-2]:
            raise IndexError(f"generator index {i} out of range")
        out = qt.qmul(out, qt.qpow(q[..., i, :], e))
    return out


def exponent_matrix(P: GroupPresentation):
    E = np.zeros((P.r, P.g), dtype=int)
    for j, w in enumerate(P.relators):
        for i, e in w:
            E[j, i] += e
    return E


@dataclass(frozen=True)
class HomologyCheck:
    matrix: np.ndarray
    det: int
    is_homology_sphere: bool
    trivial_isolated: bool
    h1_invariants: tuple  # invariant factors of H_1 (0 entries are free summands)

    def to_dict(self):
        return {
            "matrix": self.matrix.tolist(),
            "det": self.det,
            "homology_sphere": self.is_homology_sphere,
            "trivial_rep_isolated": self.trivial_isolated,
            "h1_invariants": list(self.h1_invariants),
        }


def homology_sphere_check(P: GroupPresentation) -> HomologyCheck:
    """H_1 = 0 test for a balanced presentation via the exponent-sum matrix.

    The Fox Jacobian at the trivial representation is ``E (x) I_3``, so a
    nonzero determinant also certifies that the trivial representation is
    an isolated point of the representation variety.
    """
    if not P.balanced:
        raise PresentationError(f"presentation is not balanced ({P.g} generators, {P.r} relators)")
    E = exponent_matrix(P)
    M = sympy.Matrix(E.tolist())
    det = int(M.det()) if P.g else 1
    if P.g:
        snf = smith_normal_form(M, domain=sympy.ZZ)
        inv = tuple(sorted(abs(int(snf[i, i])) for i in range(P.g)))
        inv = tuple(v for v in inv if v != 1)
    else:
        inv = ()
    return HomologyCheck(E, det, abs(det) == 1, det != 0, inv)


def _qpoly_mul(p, q):
    """Product of quaternion-valued PolyMaps (4 outputs each)."""
    a1, b1, c1, d1 = (p[i] for i in range(4))
    a2, b2, c2, d2 = (q[i] for i in range(4))
    m = pc.mul
    return pc.stack(
        m(a1, a2) - m(b1, b2) - m(c1, c2) - m(d1, d2),
        m(a1, b2) + m(b1, a2) + m(c1, d2) - m(d1, c2),
        m(a1, c2) - m(b1, d2) + m(c1, a2) + m(d1, b2),
        m(a1, d2) + m(b1, c2) - m(c1, b2) + m(d1, a2),
    )


def relator_system(P: GroupPresentation) -> PolyMap:
    """R^{4g} -> R^{3r + g}: imaginary parts of each relator, then |q_i|^2 - 1.

    Variables are ordered (a_0, b_0, c_0, d_0, a_1, ...).  Inverse letters use
    the quaternion conjugate, which agrees with the inverse on the unit sphere.
    """
    n = 4 * P.g
    gens = [pc.stack(*(PolyMap.variable(4 * i + c, n) for c in range(4))) for i in range(P.g)]
    conj = [pc.stack(gens[i][0], -gens[i][1], -gens[i][2], -gens[i][3]) for i in range(P.g)]
    one = PolyMap.constant(qt.ONE, n)
    parts = []
    for j in range(P.r):
        w = one
        for i, s in P.letters(j):
            w = _qpoly_mul(w, gens[i] if s > 0 else conj[i])
        parts.append(w[[1, 2, 3]])
    for i in range(P.g):
        sq = sum((pc.mul(gens[i][c], gens[i][c]) for c in range(1, 4)), pc.mul(gens[i][0], gens[i][0]))
        parts.append(pc.sub(sq, PolyMap.constant([1.0], n)))
    if not parts:
        return PolyMap.zero(n, 0)
    return pc.stack(*parts)
