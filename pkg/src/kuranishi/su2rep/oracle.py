"""Solver-free counts of irreducible SU(2) representation classes for two test families.

Both routines avoid the Newton machinery entirely: one enumerates a finite
group exhaustively, the other lists angle triples in closed form.  They are
used to cross-check :func:`solve_reps`.
"""
from __future__ import annotations

from itertools import permutations, product

import numpy as np

GOLDEN = (1 + 5**0.5) / 2


def _mul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def _inv(q):
    return (q[0], -q[1], -q[2], -q[3])


def _even_permutations(v):
    out = []
    for p in permutations(range(4)):
        inversions = sum(p[i] > p[j] for i in range(4) for j in range(i + 1, 4))
        if inversions % 2 == 0:
            out.append(tuple(v[p[i]] for i in range(4)))
    return out


def binary_icosahedral():
    """The 120 unit quaternions of the binary icosahedral group."""
    els = set()
    for k in range(4):
        for s in (1, -1):
            e = [0.0] * 4
            e[k] = float(s)
            els.add(tuple(e))
    for signs in product((0.5, -0.5), repeat=4):
        els.add(signs)
    for sa, sb, sc in product((1, -1), repeat=3):
        for q in _even_permutations((0.0, sa * 0.5, sb * 0.5 / GOLDEN, sc * 0.5 * GOLDEN)):
            els.add(q)
    out = sorted({tuple(round(x, 12) + 0.0 for x in q) for q in els})
    if len(out) != 120:
        raise AssertionError(f"expected 120 elements, built {len(out)}")
    return [np.array(q) for q in out]


def _key(q):
    return tuple(np.round(q, 9) + 0.0)


def _word(word, images):
    r = (1.0, 0.0, 0.0, 0.0)
    for i, e in word:
        x = images[i] if e > 0 else _inv(images[i])
        for _ in range(abs(e)):
            r = _mul(r, x)
    return np.array(r)


def finite_group_orbits(relators, elements, tol=1e-9):
    """Conjugacy classes of non-commuting pairs (s, t) in ``elements`` satisfying
    every relator, up to conjugation by the group itself.

    When the image of every irreducible representation is the whole finite
    group (as for the binary icosahedral group, whose normalizer in SU(2) is
    itself) this is the number of irreducible SU(2) classes.
    """
    elements = [tuple(q) for q in elements]
    one = np.array([1.0, 0.0, 0.0, 0.0])
    sols = []
    for s in elements:
        for t in elements:
            if all(np.max(np.abs(_word(w, (s, t)) - one)) < tol for w in relators):
                if np.linalg.norm(np.cross(s[1:], t[1:])) > 1e-9:
                    sols.append((s, t))
    seen, orbits = set(), []
    for s, t in sols:
        k = (_key(s), _key(t))
        if k in seen:
            continue
        orbit = {(_key(_mul(_mul(u, s), _inv(u))), _key(_mul(_mul(u, t), _inv(u)))) for u in elements}
        seen |= orbit
        orbits.append((np.array(s), np.array(t)))
    return orbits


def triangle_orbit_traces(p, q, r=2):
    """Trace triples (tr s, tr t, tr st) of irreducible classes of
    <s, t | (st)^r s^-p, (st)^r t^-q>.

    In an irreducible representation h = s^p = t^q = (st)^r is central, so it
    is +1 or -1, which pins the rotation angles of s, t and st to finitely
    many values.  A pair with angles (a, b, c) in (0, pi) exists and is unique
    up to conjugation exactly when |a - b| < c < min(a + b, 2 pi - a - b).
    """
    out = []
    for eps in (1, -1):
        def angles(n):
            # 0 < theta < pi with n * theta = 0 (eps = 1) or pi (eps = -1) mod 2 pi
            base = 0.0 if eps == 1 else np.pi
            return [th for th in ((base + 2 * np.pi * k) / n for k in range(n + 1)) if 1e-12 < th < np.pi - 1e-12]

        for a in angles(p):
            for b in angles(q):
                for c in angles(r):
                    if abs(a - b) < c - 1e-12 and c < min(a + b, 2 * np.pi - a - b) - 1e-12:
                        out.append((2 * np.cos(a), 2 * np.cos(b), 2 * np.cos(c)))
    return sorted(tuple(float(np.round(v, 6)) + 0.0 for v in trip) for trip in out)
