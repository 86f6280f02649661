"""Vectorized unit-quaternion arithmetic; arrays carry components in the last axis (a, b, c, d)."""
import numpy as np

ONE = np.array([1.0, 0.0, 0.0, 0.0])


def qmul(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    a1, b1, c1, d1 = np.moveaxis(p, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ],
        axis=-1,
    )


def qconj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qpow(q, e):
    """q**e for integer e, using the conjugate for negative powers (unit q)."""
    base = qconj(q) if e < 0 else np.asarray(q, dtype=float)
    out = np.broadcast_to(ONE, base.shape).copy()
    for _ in range(abs(e)):
        out = qmul(out, base)
    return out


def qexp(v):
    """exp of the imaginary quaternion with vector part ``v`` (shape (..., 3))."""
    v = np.asarray(v, dtype=float)
    th = np.linalg.norm(v, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        sinc = np.where(th > 1e-12, np.sin(th) / np.where(th > 0, th, 1.0), 1.0 - th**2 / 6)
    return np.concatenate([np.cos(th), sinc * v], axis=-1)


def rotation(q):
    """Matrix of Ad(q): v -> q v q^-1 on imaginary quaternions (shape (..., 3, 3))."""
    q = np.asarray(q, dtype=float)
    a, b, c, d = np.moveaxis(q, -1, 0)
    R = np.stack(
        [
            np.stack([a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)], -1),
            np.stack([2 * (b * c + a * d), a * a - b * b + c * c - d * d, 2 * (c * d - a * b)], -1),
            np.stack([2 * (b * d - a * c), 2 * (c * d + a * b), a * a - b * b - c * c + d * d], -1),
        ],
        -2,
    )
    return R


def from_rotation(R):
    """A unit quaternion u with rotation(u) = R (sign chosen with u_0 >= 0)."""
    from scipy.spatial.transform import Rotation

    x, y, z, w = Rotation.from_matrix(np.asarray(R, dtype=float)).as_quat()
    u = np.array([w, x, y, z])
    return u if u[0] >= 0 else -u


def left_matrix(p):
    """4x4 matrix of q -> p q."""
    a, b, c, d = np.moveaxis(np.asarray(p, dtype=float), -1, 0)
    return np.stack(
        [
            np.stack([a, -b, -c, -d], -1),
            np.stack([b, a, -d, c], -1),
            np.stack([c, d, a, -b], -1),
            np.stack([d, -c, b, a], -1),
        ],
        -2,
    )


def right_matrix(q):
    """4x4 matrix of p -> p q."""
    a, b, c, d = np.moveaxis(np.asarray(q, dtype=float), -1, 0)
    return np.stack(
        [
            np.stack([a, -b, -c, -d], -1),
            np.stack([b, a, d, -c], -1),
            np.stack([c, -d, a, b], -1),
            np.stack([d, c, -b, a], -1),
        ],
        -2,
    )


def trace(q):
    """Trace of the SU(2) matrix of q."""
    return 2.0 * np.asarray(q, dtype=float)[..., 0]


def uniform_from_cube(u):
    """Map points of [0,1]^3 (last axis) to uniformly distributed unit quaternions."""
    u1, u2, u3 = np.moveaxis(np.asarray(u, dtype=float), -1, 0)
    r1, r2 = np.sqrt(1 - u1), np.sqrt(u1)
    return np.stack(
        [r2 * np.cos(2 * np.pi * u3), r1 * np.sin(2 * np.pi * u2), r1 * np.cos(2 * np.pi * u2), r2 * np.sin(2 * np.pi * u3)],
        -1,
    )
