"""Batched dense helpers used on raw arrays of shape ``(..., n, n)``.

Nothing here validates its input; the typed public API does that once at
the boundary.
"""

import numpy as np


def dag(a):
    return np.conj(np.swapaxes(a, -1, -2))


def herm(a):
    return 0.5 * (a + dag(a))


def trace(a):
    return np.trace(a, axis1=-2, axis2=-1)


def eye_like(a):
    n = a.shape[-1]
    return np.broadcast_to(np.eye(n, dtype=a.dtype), a.shape)


def eigh(a):
    return np.linalg.eigh(a)


def from_eig(w, u):
    return (u * w[..., None, :]) @ dag(u)


def func(a, f):
    """Spectral calculus ``U f(w) U^dagger`` for Hermitian ``a``."""
    w, u = eigh(a)
    return from_eig(f(w), u)


def sandwich(u, kern, a):
    """``U (kern o (U^dagger a U)) U^dagger`` with ``o`` the Hadamard product."""
    return u @ (kern * (dag(u) @ a @ u)) @ dag(u)


def to_basis(u, a):
    return dag(u) @ a @ u


def sqrtm(a):
    return func(a, np.sqrt)


def logm(a):
    return func(a, np.log)


def expm(a):
    return func(a, np.exp)


def psd_power(a, lam):
    """``a**lam`` for positive semidefinite ``a`` with the convention ``0**lam = 0``.

    Eigenvalues within roundoff of zero (including tiny negatives) are
    treated as exact zeros.
    """
    w, u = eigh(a)
    scale = np.max(np.abs(w), axis=-1, keepdims=True)
    w = np.where(w <= 1e-14 * scale, 0.0, w)
    if lam == 0:
        pw = (w > 0).astype(float)
    else:
        pw = np.power(w, lam)
    return from_eig(pw, u)


def frob(a):
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))


def comm(a, b):
    return a @ b - b @ a
