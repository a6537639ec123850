"""Divergences, monotone metrics and metric gradients.

Every metric here has the form ``G(X, Y) = sum_ij conj(X_ij) Y_ij / k(p_i, p_j)``
in the eigenbasis of ``rho`` with eigenvalues ``p``. The kernel ``k`` is the
one realised by the gradient field of ``f_a`` for that metric:

==== ============================== ==================
BH   ``(x + y) / 2``                Y field, Bures
WY   ``(sqrt(x) + sqrt(y))**2 / 2`` W field, WY skew
BKM  ``(x - y) / (ln x - ln y)``    Z field, relative entropy
==== ============================== ==================

Constants follow the convention in which ``G(X, V_a) = Tr(a X)`` holds with
no extra factor; in particular the WY metric is half the usual one.
"""

from __future__ import annotations

import enum

import numpy as np

from . import _linalg as la
from .errors import ContractError, DomainError, ShapeError, StepTooLargeError, ValidationError
from .kernels import logmean_kernel, mean_kernel, weighted_inner, wy_kernel
from .operators import (
    FAITHFUL_RTOL,
    HERMITIAN_RTOL,
    FaithfulState,
    HermitianOperator,
    TangentVector,
    hermitian_entries,
)
from .actions import FieldKind


class MetricName(enum.Enum):
    BH = "bh"
    WY = "wy"
    BKM = "bkm"


class DivergenceName(enum.Enum):
    Bures = "bures"
    WYSkew = "wy"
    VNU = "vnu"


DIVERGENCE_OF = {
    MetricName.BH: DivergenceName.Bures,
    MetricName.WY: DivergenceName.WYSkew,
    MetricName.BKM: DivergenceName.VNU,
}
FIELD_OF = {
    MetricName.BH: FieldKind.Y_bh,
    MetricName.WY: FieldKind.W_wy,
    MetricName.BKM: FieldKind.Z_bkm,
}


def metric_name(name) -> MetricName:
    if isinstance(name, MetricName):
        return name
    key = str(name).lower()
    for m in MetricName:
        if key in (m.value, m.name.lower()):
            return m
    raise ValidationError(f"unknown metric {name!r}; expected bh, wy or bkm")


def divergence_name(name) -> DivergenceName:
    if isinstance(name, DivergenceName):
        return name
    key = str(name).lower()
    for d in DivergenceName:
        if key in (d.value, d.name.lower()):
            return d
    raise ValidationError(f"unknown divergence {name!r}; expected bures, wy or vnu")


# ----------------------------------------------------------- raw, batched


def kernel_matrix(name: MetricName, p):
    if name is MetricName.BH:
        return mean_kernel(p)
    if name is MetricName.WY:
        return wy_kernel(p)
    return logmean_kernel(p)


def metric_eval_raw(name: MetricName, rho, x, y):
    p, u = la.eigh(rho)
    return weighted_inner(la.to_basis(u, x), la.to_basis(u, y), kernel_matrix(name, p))


def metric_gradient_raw(name: MetricName, a, rho, normalized=True):
    p, u = la.eigh(rho)
    kern = kernel_matrix(name, p)
    at = la.to_basis(u, a)
    vt = kern * at
    if normalized:
        kd = np.diagonal(kern, axis1=-2, axis2=-1)
        c = -np.sum(kd * np.diagonal(at, axis1=-2, axis2=-1).real, axis=-1) / np.sum(kd, axis=-1)
        vt = vt + c[..., None, None] * (kd[..., :, None] * np.eye(p.shape[-1]))
    return la.herm(u @ vt @ la.dag(u))


def metric_inverse_raw(name: MetricName, rho, y):
    """Apply the inverse of the field superoperator: ``y_ij / k(p_i, p_j)`` in the eigenbasis."""
    p, u = la.eigh(rho)
    return la.herm(la.sandwich(u, 1.0 / kernel_matrix(name, p), y))


def _fidelity_root(rho, sigma):
    sr = la.func(rho, lambda w: np.sqrt(np.maximum(w, 0.0)))
    m = la.herm(sr @ sigma @ sr)
    w = np.linalg.eigvalsh(m)
    return np.sum(np.sqrt(np.maximum(w, 0.0)), axis=-1)


def divergence_raw(name: DivergenceName, rho, sigma, normalized=True):
    if name is DivergenceName.Bures:
        f = _fidelity_root(rho, sigma)
        if normalized:
            return 4.0 * (1.0 - f)
        return 2.0 * (la.trace(rho).real + la.trace(sigma).real - 2.0 * f)
    if name is DivergenceName.WYSkew:
        overlap = la.trace(la.sqrtm(rho) @ la.sqrtm(sigma)).real
        if normalized:
            return 2.0 * (1.0 - overlap)
        return la.trace(rho).real + la.trace(sigma).real - 2.0 * overlap
    p = np.linalg.eigvalsh(rho)
    return np.sum(p * np.log(p), axis=-1) - la.trace(rho @ la.logm(sigma)).real


# ----------------------------------------------------------- typed API


def metric_kernel(name, x: float, y: float) -> float:
    """Scalar kernel ``k(x, y)`` of the named metric."""
    name = metric_name(name)
    if not (x > 0 and y > 0):
        raise DomainError(f"metric kernel needs positive arguments, got ({x!r}, {y!r})")
    return float(kernel_matrix(name, np.array([x, y], dtype=float))[0, 1])


def _tangent_entries(v, rho: FaithfulState, what: str) -> np.ndarray:
    a = hermitian_entries(v)
    if a.shape != rho.entries.shape:
        raise ShapeError(f"{what} has shape {a.shape}, state is {rho.dim}x{rho.dim}")
    if rho.normalized and not (isinstance(v, TangentVector) and v.traceless):
        tol = HERMITIAN_RTOL * rho.dim * float(np.max(np.abs(a), initial=0.0))
        tr = abs(np.trace(a))
        if tr > tol:
            raise ContractError(
                f"{what} is not tangent to the normalized states: |Tr| = {tr:.3e} > {tol:.3e}"
            )
    return a


def _require_state(rho):
    if not isinstance(rho, FaithfulState):
        raise ValidationError("expected a FaithfulState")
    return rho


def metric_eval(name, rho: FaithfulState, X, Y) -> float:
    """``G(X, Y)`` at ``rho`` in closed form.

    On normalized states both arguments must be traceless.
    """
    name = metric_name(name)
    rho = _require_state(rho)
    x = _tangent_entries(X, rho, "X")
    y = _tangent_entries(Y, rho, "Y")
    p, u = rho.eigenvalues, rho.eigenvectors
    return float(weighted_inner(la.to_basis(u, x), la.to_basis(u, y), kernel_matrix(name, p)))


def metric_gradient(name, a, rho: FaithfulState) -> TangentVector:
    """Gradient of ``f_a(rho) = Tr(rho a)`` with respect to the named metric.

    Built by applying the kernel superoperator to ``a``; on normalized states
    a multiple of the kernel applied to the identity is added to make the
    result traceless.
    """
    name = metric_name(name)
    rho = _require_state(rho)
    a_ = hermitian_entries(a)
    if a_.shape != rho.entries.shape:
        raise ShapeError(f"a has shape {a_.shape}, state is {rho.dim}x{rho.dim}")
    v = metric_gradient_raw(name, a_, rho.entries, rho.normalized)
    return TangentVector(HermitianOperator(v), traceless=rho.normalized)


def divergence(name, rho: FaithfulState, sigma: FaithfulState) -> float:
    """Bures, Wigner-Yanase skew or von Neumann-Umegaki divergence of ``(rho, sigma)``.

    The normalized formulas are used when both states are normalized.
    """
    name = divergence_name(name)
    rho = _require_state(rho)
    sigma = _require_state(sigma)
    if rho.dim != sigma.dim:
        raise ShapeError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    if rho.normalized != sigma.normalized:
        raise ContractError("both states must share the same normalization flag")
    r, s = rho.entries, sigma.entries
    tol = HERMITIAN_RTOL * rho.dim * float(np.max(np.abs(r)))
    if np.max(np.abs(r - s)) <= tol:
        return 0.0
    return float(divergence_raw(name, r, s, rho.normalized))


def _check_faithful(m, what):
    w = np.linalg.eigvalsh(m)
    if w[-1] <= 0 or w[0] <= FAITHFUL_RTOL * w[-1]:
        raise StepTooLargeError(f"{what} leaves the faithful cone (smallest eigenvalue {w[0]:.6g})")


def metric_fd(name, rho: FaithfulState, X, Y, h: float = 1e-3) -> float:
    """``G(X, Y)`` from the mixed second difference of the paired divergence.

    Uses straight-line curves ``rho + t X`` and ``rho + s Y`` and the central
    stencil ``-[D(+,+) - D(+,-) - D(-,+) + D(-,-)] / (4 h**2)``.
    """
    name = metric_name(name)
    rho = _require_state(rho)
    x = _tangent_entries(X, rho, "X")
    y = _tangent_entries(Y, rho, "Y")
    if not h > 0:
        raise ValidationError(f"step must be positive, got {h!r}")
    r = rho.entries
    pts = {}
    for sx in (1, -1):
        pts[("x", sx)] = r + sx * h * x
        pts[("y", sx)] = r + sx * h * y
    for key, m in pts.items():
        _check_faithful(m, f"rho {'+' if key[1] > 0 else '-'} h*{key[0].upper()}")
    return float(metric_fd_raw(name, r, x, y, h, rho.normalized))


def metric_fd_raw(name: MetricName, rho, x, y, h, normalized=True):
    d = DIVERGENCE_OF[name]

    def D(sx, sy):
        return divergence_raw(d, rho + sx * h * x, rho + sy * h * y, normalized)

    return -(D(1, 1) - D(1, -1) - D(-1, 1) + D(-1, -1)) / (4.0 * h * h)
