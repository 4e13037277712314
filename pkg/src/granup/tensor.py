"""Symmetric tensor algebra in an orthonormal (Mandel) basis.

A symmetric second-order tensor is stored as the 6-vector

    [a11, a22, a33, sqrt(2) a12, sqrt(2) a13, sqrt(2) a23]

so that the double contraction ``A . B = tr(A B^T)`` is the plain Euclidean
dot product and fourth-order operators with minor symmetries are 6x6
matrices acting by matrix-vector product.
"""
from typing import NamedTuple

import numpy as np

from granup._jit import jit

SQRT2 = np.sqrt(2.0)
Q_TOL = 1e-9
ACOS_CLAMP_TOL = 1e-12

IDENTITY = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
IDENTITY.setflags(write=False)
# I [x] I and the symmetrizer I [box] I in the Mandel basis
I_DYAD_I = np.outer(IDENTITY, IDENTITY)
I_DYAD_I.setflags(write=False)
SYM_IDENTITY = np.eye(6)
SYM_IDENTITY.setflags(write=False)


class StressInvariants(NamedTuple):
    p: float
    q: float
    theta: float
    degenerate: bool


@jit
def from_matrix(a):
    """Mandel 6-vector of the symmetric part of a 3x3 matrix."""
    v = np.empty(6)
    v[0] = a[0, 0]
    v[1] = a[1, 1]
    v[2] = a[2, 2]
    v[3] = SQRT2 * 0.5 * (a[0, 1] + a[1, 0])
    v[4] = SQRT2 * 0.5 * (a[0, 2] + a[2, 0])
    v[5] = SQRT2 * 0.5 * (a[1, 2] + a[2, 1])
    return v


@jit
def to_matrix(v):
    a = np.empty((3, 3))
    a[0, 0] = v[0]
    a[1, 1] = v[1]
    a[2, 2] = v[2]
    a[0, 1] = a[1, 0] = v[3] / SQRT2
    a[0, 2] = a[2, 0] = v[4] / SQRT2
    a[1, 2] = a[2, 1] = v[5] / SQRT2
    return a


@jit
def trace(v):
    return v[0] + v[1] + v[2]


@jit
def deviator(v):
    d = v.copy()
    t = (v[0] + v[1] + v[2]) / 3.0
    d[0] -= t
    d[1] -= t
    d[2] -= t
    return d


@jit
def contract(a, b):
    return np.dot(a, b)


@jit
def square(v):
    """Mandel vector of the matrix square A A."""
    a11, a22, a33 = v[0], v[1], v[2]
    a12, a13, a23 = v[3] / SQRT2, v[4] / SQRT2, v[5] / SQRT2
    out = np.empty(6)
    out[0] = a11 * a11 + a12 * a12 + a13 * a13
    out[1] = a12 * a12 + a22 * a22 + a23 * a23
    out[2] = a13 * a13 + a23 * a23 + a33 * a33
    out[3] = SQRT2 * (a11 * a12 + a12 * a22 + a13 * a23)
    out[4] = SQRT2 * (a11 * a13 + a12 * a23 + a13 * a33)
    out[5] = SQRT2 * (a12 * a13 + a22 * a23 + a23 * a33)
    return out


@jit
def determinant(v):
    a11, a22, a33 = v[0], v[1], v[2]
    a12, a13, a23 = v[3] / SQRT2, v[4] / SQRT2, v[5] / SQRT2
    return (
        a11 * (a22 * a33 - a23 * a23)
        - a12 * (a12 * a33 - a23 * a13)
        + a13 * (a12 * a23 - a22 * a13)
    )


@jit
def invariant_kernel(sig):
    """Return (p, q, cos 3theta, degenerate) for a Mandel stress vector."""
    s = deviator(sig)
    p = -(sig[0] + sig[1] + sig[2]) / 3.0
    j2 = 0.5 * np.dot(s, s)
    q = np.sqrt(3.0 * j2)
    if q < Q_TOL:
        return p, q, 1.0, True
    j3 = determinant(s)
    x = 1.5 * np.sqrt(3.0) * j3 / j2**1.5
    if x > 1.0:
        x = 1.0
    elif x < -1.0:
        x = -1.0
    return p, q, x, False


def invariants(sigma) -> StressInvariants:
    """Mean pressure (compression positive), Mises stress and Lode angle.

    Below ``Q_TOL`` the deviatoric direction is undefined and the Lode angle
    is reported as 0 with ``degenerate`` set.
    """
    p, q, cos3t, degenerate = invariant_kernel(np.asarray(sigma, dtype=float))
    theta = 0.0 if degenerate else float(np.arccos(cos3t) / 3.0)
    return StressInvariants(float(p), float(q), theta, bool(degenerate))


def dyad(a, b):
    """(A [x] B)[C] = (B . C) A as a 6x6 operator."""
    return np.outer(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def apply(op, a):
    return np.asarray(op) @ np.asarray(a)


@jit
def macaulay(x):
    return 0.5 * (x + abs(x))


@jit
def heaviside(x):
    return 1.0 if x >= 0.0 else 0.0


def from_principal(s1, s2, s3):
    return np.array([s1, s2, s3, 0.0, 0.0, 0.0])
