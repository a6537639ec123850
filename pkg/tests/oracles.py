"""Independent reference implementations and frozen reference values.

Nothing here imports qigeom. Values marked frozen were computed once with
mpmath at 30 digits from the scalar formulas next to them.
"""

import math

import numpy as np
import scipy.integrate
import scipy.linalg

# ---- frozen values (mpmath, 30 digits)

# commuting pair p = (.5, .5), q = (.9, .1)
BURES_PAIR = 0.42229123600033648574  # 4 (1 - sum sqrt(p q))
WY_PAIR = 0.21114561800016824287  # 2 (1 - sum sqrt(p q))
VNU_PAIR = 0.51082562376599068321  # sum p (ln p - ln q)

INV_LN2 = 1.4426950408889634074  # (1 - 2) / (0 - ln 2)
E_MINUS_1 = 1.7182818284590452354

# G(X, X) at diag(.7, .3), X = sigma_x / 2: 2 * (1/4) / k(.7, .3)
OFFDIAG_G = {"bh": 1.0, "wy": 0.52178038130519999176, "bkm": 1.0591223254840045171}

# commuting BKM orbit diag(.7,.3) under a = diag(.5,-.5) at t = 1, first entry
BKM_ORBIT_T1 = 0.86380952857781180951

# ---- scalar kernels, written out directly


def kernel(name, x, y):
    if name == "bh":
        return 0.5 * (x + y)
    if name == "wy":
        return 0.5 * (math.sqrt(x) + math.sqrt(y)) ** 2
    if x == y:
        return x
    return (x - y) / (math.log(x) - math.log(y))


def metric_loops(name, rho, X, Y):
    """``sum conj(X~_ij) Y~_ij / k(p_i, p_j)`` with explicit loops."""
    p, u = np.linalg.eigh(rho)
    xt = u.conj().T @ X @ u
    yt = u.conj().T @ Y @ u
    n = len(p)
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += (np.conj(xt[i, j]) * yt[i, j]).real / kernel(name, p[i], p[j])
    return total


# ---- integral forms evaluated with adaptive quadrature


def dexp_adaptive(A, a):
    """``int_0^1 e^{sA} a e^{(1-s)A} ds`` with adaptive vector quadrature."""
    val, _ = scipy.integrate.quad_vec(
        lambda s: scipy.linalg.expm(s * A) @ a @ scipy.linalg.expm((1 - s) * A), 0.0, 1.0, epsabs=1e-14, epsrel=1e-13
    )
    return val


def z_adaptive(a, rho):
    """Normalized ``Z_a(rho)`` from its integral definition."""
    def integrand(s):
        return scipy.linalg.fractional_matrix_power(rho, s) @ a @ scipy.linalg.fractional_matrix_power(rho, 1 - s)

    val, _ = scipy.integrate.quad_vec(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return val - np.trace(rho @ a).real * rho


# ---- simple matrices

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def rand_state(rng, n, floor=1e-2):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    m = g @ g.conj().T + floor * n * np.eye(n)
    return m / np.trace(m).real


def rand_herm(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (g + g.conj().T) / 2


def rand_traceless(rng, n):
    h = rand_herm(rng, n)
    return h - np.trace(h).real / n * np.eye(n)
