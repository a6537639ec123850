"""Entrywise divided-difference kernels on eigenvalue vectors.

Every matrix function derivative and every metric in this package reduces,
in the eigenbasis of the base point, to a Hadamard product with one of the
``n x n`` kernel matrices built here. Inputs are eigenvalue arrays of shape
``(..., n)``; outputs have shape ``(..., n, n)``.

Each kernel has two implementations: a numba-compiled loop (``*_nb``) and a
broadcasting numpy version (``*_np``). The public names dispatch to one of
them according to :data:`qigeom._accel.BACKEND`.
"""

import math

import numpy as np

from ._accel import BACKEND, njit

DEGENERACY_RTOL = 1e-12


# ---------------------------------------------------------------- numba path


@njit
def _sum_kernel_nb(p):
    b, n = p.shape
    out = np.empty((b, n, n))
    for k in range(b):
        for i in range(n):
            for j in range(n):
                out[k, i, j] = 0.5 * (p[k, i] + p[k, j])
    return out


@njit
def _wy_kernel_nb(p):
    b, n = p.shape
    out = np.empty((b, n, n))
    for k in range(b):
        for i in range(n):
            si = math.sqrt(p[k, i])
            for j in range(n):
                s = si + math.sqrt(p[k, j])
                out[k, i, j] = 0.5 * s * s
    return out


@njit
def _logmean_kernel_nb(p):
    b, n = p.shape
    out = np.empty((b, n, n))
    for k in range(b):
        for i in range(n):
            x = p[k, i]
            for j in range(n):
                y = p[k, j]
                if x <= 0.0 or y <= 0.0:
                    # limit of (x - y)/(ln x - ln y) as either argument -> 0
                    out[k, i, j] = 0.0
                elif abs(x - y) <= DEGENERACY_RTOL * (1.0 + x + y):
                    out[k, i, j] = x
                else:
                    lo = min(x, y)
                    d = abs(x - y)
                    out[k, i, j] = d / math.log1p(d / lo)
    return out


@njit
def _expdd_kernel_nb(x):
    b, n = x.shape
    out = np.empty((b, n, n))
    for k in range(b):
        for i in range(n):
            xi = x[k, i]
            for j in range(n):
                xj = x[k, j]
                if abs(xi - xj) <= DEGENERACY_RTOL * (1.0 + abs(xi) + abs(xj)):
                    out[k, i, j] = math.exp(xi)
                else:
                    lo = min(xi, xj)
                    d = abs(xi - xj)
                    out[k, i, j] = math.exp(lo) * math.expm1(d) / d
    return out


@njit
def _weighted_inner_nb(xt, yt, kern):
    b, n, _ = xt.shape
    out = np.empty(b)
    for k in range(b):
        acc = 0.0
        for i in range(n):
            for j in range(n):
                x = xt[k, i, j]
                y = yt[k, i, j]
                acc += (x.real * y.real + x.imag * y.imag) / kern[k, i, j]
        out[k] = acc
    return out


# ---------------------------------------------------------------- numpy path


def _pairs(p):
    return p[..., :, None], p[..., None, :]


def _sum_kernel_np(p):
    x, y = _pairs(p)
    return 0.5 * (x + y)


def _wy_kernel_np(p):
    s = np.sqrt(p)
    x, y = _pairs(s)
    return 0.5 * (x + y) ** 2


def _logmean_kernel_np(p):
    x, y = _pairs(p)
    x, y = np.broadcast_arrays(x, y)
    lo = np.minimum(x, y)
    d = np.abs(x - y)
    zero = (x <= 0.0) | (y <= 0.0)
    degenerate = ~zero & (d <= DEGENERACY_RTOL * (1.0 + x + y))
    generic = ~zero & ~degenerate
    out = np.zeros(x.shape)
    out[degenerate] = x[degenerate]
    out[generic] = d[generic] / np.log1p(d[generic] / lo[generic])
    return out


def _expdd_kernel_np(x):
    xi, xj = _pairs(x)
    xi, xj = np.broadcast_arrays(xi, xj)
    lo = np.minimum(xi, xj)
    d = np.abs(xi - xj)
    degenerate = d <= DEGENERACY_RTOL * (1.0 + np.abs(xi) + np.abs(xj))
    out = np.empty(xi.shape)
    out[degenerate] = np.exp(xi[degenerate])
    g = ~degenerate
    out[g] = np.exp(lo[g]) * np.expm1(d[g]) / d[g]
    return out


def _weighted_inner_np(xt, yt, kern):
    return np.sum((xt.real * yt.real + xt.imag * yt.imag) / kern, axis=(-2, -1))


# ---------------------------------------------------------------- dispatch

_IMPLS = {
    "numba": {
        "sum": _sum_kernel_nb,
        "wy": _wy_kernel_nb,
        "logmean": _logmean_kernel_nb,
        "expdd": _expdd_kernel_nb,
        "inner": _weighted_inner_nb,
    },
    "numpy": {
        "sum": _sum_kernel_np,
        "wy": _wy_kernel_np,
        "logmean": _logmean_kernel_np,
        "expdd": _expdd_kernel_np,
        "inner": _weighted_inner_np,
    },
}


def _vector_kernel(name, p, backend=None):
    impl = _IMPLS[backend or BACKEND][name]
    p = np.asarray(p, dtype=np.float64)
    lead, n = p.shape[:-1], p.shape[-1]
    flat = np.ascontiguousarray(p.reshape(-1, n))
    return impl(flat).reshape(lead + (n, n))


def mean_kernel(p, backend=None):
    """Arithmetic mean ``(p_i + p_j)/2``."""
    return _vector_kernel("sum", p, backend)


def wy_kernel(p, backend=None):
    """``(sqrt(p_i) + sqrt(p_j))**2 / 2``."""
    return _vector_kernel("wy", p, backend)


def logmean_kernel(p, backend=None):
    """Logarithmic mean ``(p_i - p_j)/(ln p_i - ln p_j)``.

    Degenerate pairs take the limit ``p_i``; pairs with a zero entry give 0,
    which is the value of ``int_0^1 p_i**s p_j**(1-s) ds`` under ``0**s = 0``.
    """
    return _vector_kernel("logmean", p, backend)


def expdd_kernel(x, backend=None):
    """First divided difference of ``exp``: ``(e^x_i - e^x_j)/(x_i - x_j)``."""
    return _vector_kernel("expdd", x, backend)


def weighted_inner(xt, yt, kern, backend=None):
    """``Re sum_ij conj(xt_ij) yt_ij / kern_ij`` over the trailing two axes."""
    impl = _IMPLS[backend or BACKEND]["inner"]
    xt = np.asarray(xt, dtype=np.complex128)
    yt = np.asarray(yt, dtype=np.complex128)
    kern = np.asarray(kern, dtype=np.float64)
    xt, yt, kern = np.broadcast_arrays(xt, yt, kern)
    lead, n = xt.shape[:-2], xt.shape[-1]
    flat = [np.ascontiguousarray(v.reshape((-1, n, n))) for v in (xt, yt, kern)]
    out = impl(*flat)
    return out.reshape(lead) if lead else float(out[0])
