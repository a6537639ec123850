"""Randomised numerical certification of the identities behind the metrics and actions.

Every check draws its inputs from a per-trial stream seeded by
``(suite seed, check id, trial index)``, evaluates a residual for each
trial (batched over trials where possible) and reports the worst one. One
:class:`CheckReport` is produced per (check, label, dimension).
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg

from . import _linalg as la
from .actions import (
    FieldKind,
    cotangent_act_raw,
    expectation_raw,
    field_kind,
    field_raw,
    gl_act_raw,
    wy_act_raw,
    x_field_raw,
    z_field_raw,
)
from .errors import QIGError, StepTooLargeError, ValidationError
from .metrics import (
    FIELD_OF,
    MetricName,
    metric_eval_raw,
    metric_fd_raw,
    metric_gradient_raw,
    metric_inverse_raw,
    metric_name,
)
from .operators import (
    FaithfulState,
    RandomSpec,
    _anticomm_solve_raw,
    _dexp_raw,
    hermitian_entries,
    spectral_decompose,
)
from .sampling import (
    draw_gl_matrix,
    draw_observable_matrix,
    draw_state_matrix,
    draw_tangent_matrix,
    draw_unitary,
)

SUITES = ("gradient", "actions", "brackets", "degeneracy", "flows")
DEFAULT_DIMS = (2, 3, 4, 6)

BRACKET_STEP = 1e-3
RICHARDSON_STEPS = (1e-2, 5e-3)
FLOW_STEPS = (16, 32, 64, 128)
FD_HESSIAN_STEP = 1e-3
ACTION_FD_STEP = 1e-4
GAUSS_NODES = 32

_METRICS = tuple(MetricName)
_COMMUTANT_ORDERS = {+1: "(i/2)[b,a]", -1: "(i/2)[a,b]"}


@dataclass(frozen=True)
class CheckReport:
    check_name: str
    params: dict
    max_abs_err: float
    tol: float
    passed: bool
    trials: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("a report needs at least one trial")

    def to_dict(self) -> dict:
        err = self.max_abs_err if math.isfinite(self.max_abs_err) else None
        return {
            "check": self.check_name,
            "params": self.params,
            "max_abs_err": err,
            "tol": self.tol,
            "pass": self.passed,
            "trials": self.trials,
        }


def make_report(name, params, errs, tol, trials) -> CheckReport:
    errs = np.atleast_1d(np.asarray(errs, dtype=float))
    err = float(np.max(errs)) if np.all(np.isfinite(errs)) else math.inf
    return CheckReport(name, dict(params), err, float(tol), bool(err <= tol), int(trials))


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    dims: Sequence[int] = DEFAULT_DIMS
    trials_per_check: int = 100
    tolerances: Mapping[str, float] = field(default_factory=dict)
    tol_scale: float = 1.0
    suites: Sequence[str] = SUITES
    workers: int = 1

    def __post_init__(self):
        if any(int(d) < 2 for d in self.dims) or not self.dims:
            raise ValidationError(f"dims must all be >= 2, got {list(self.dims)}")
        if self.trials_per_check < 1:
            raise ValidationError("trials_per_check must be >= 1")
        if not self.tol_scale > 0:
            raise ValidationError("tol_scale must be positive")
        unknown = set(self.suites) - set(SUITES)
        if unknown:
            raise ValidationError(f"unknown suites {sorted(unknown)}")


def trial_rngs(seed: int, check_id: str, trials: int) -> list:
    cid = zlib.crc32(check_id.encode())
    return [np.random.default_rng(np.random.SeedSequence([int(seed), cid, t])) for t in range(trials)]


# ------------------------------------------------------------------ batching


def _stack(rngs, draw, *args):
    return np.stack([draw(r, *args) for r in rngs])


def _states(rngs, n, floor=1e-3):
    return _stack(rngs, draw_state_matrix, n, floor)


def _obs(rngs, n):
    return _stack(rngs, draw_observable_matrix, n)


def _tangents(rngs, n):
    return _stack(rngs, draw_tangent_matrix, n)


def _unitaries(rngs, n):
    return _stack(rngs, draw_unitary, n)


def _gls(rngs, n):
    return _stack(rngs, draw_gl_matrix, n)


def _uniform(rngs, lo, hi):
    return np.array([r.uniform(lo, hi) for r in rngs])


def _pure(rngs, n):
    def draw(r):
        v = r.standard_normal(n) + 1j * r.standard_normal(n)
        v /= np.linalg.norm(v)
        return np.outer(v, v.conj())

    return np.stack([draw(r) for r in rngs])


def _scal(c):
    return np.asarray(c)[..., None, None]


def _require_faithful(m, what="step"):
    w = np.linalg.eigvalsh(m)
    if not np.all(np.isfinite(w)) or np.any(w[..., 0] <= 1e-12 * w[..., -1]):
        raise StepTooLargeError(f"{what} leaves the faithful cone")


def _commutator_param(a, b, order):
    # order +1: (i/2)[b,a]; order -1: (i/2)[a,b]
    return la.herm(0.5j * la.comm(b, a)) if order > 0 else la.herm(0.5j * la.comm(a, b))


# ------------------------------------------------------------------ oracles


def gauss_legendre_integral(integrand, nodes=GAUSS_NODES):
    """``int_0^1 integrand(s) ds`` by Gauss-Legendre quadrature."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * (x + 1.0)
    total = 0.0
    for sk, wk in zip(s, w):
        total = total + 0.5 * wk * integrand(sk)
    return total


def dexp_quadrature(A, a, nodes=GAUSS_NODES):
    """``int_0^1 e^{sA} a e^{(1-s)A} ds`` with Pade exponentials at each node."""
    return gauss_legendre_integral(
        lambda s: scipy.linalg.expm(s * A) @ a @ scipy.linalg.expm((1.0 - s) * A), nodes
    )


def z_field_quadrature(a, rho, normalized=True, nodes=GAUSS_NODES):
    """``int_0^1 rho^s a rho^(1-s) ds`` (minus ``Tr(rho a) rho``) with ``0^s = 0``.

    Valid on positive semidefinite ``rho``, including pure states.
    """
    v = gauss_legendre_integral(lambda s: la.psd_power(rho, s) @ a @ la.psd_power(rho, 1.0 - s), nodes)
    if normalized:
        v = v - _scal(expectation_raw(a, rho)) * rho
    return la.herm(v)


# ------------------------------------------------------------------ brackets


def directional_derivative_raw(fn: Callable, rho, direction, h):
    """Central difference of ``fn`` at ``rho`` along ``direction`` with one Richardson step."""
    for s in (h, -h):
        _require_faithful(rho + s * direction, "bracket step")

    def central(k):
        return (fn(rho + k * direction) - fn(rho - k * direction)) / (2.0 * k)

    return (4.0 * central(0.5 * h) - central(h)) / 3.0


def bracket_raw(f1: Callable, f2: Callable, rho, h=BRACKET_STEP):
    """``[V, W](rho) = DW(rho)[V(rho)] - DV(rho)[W(rho)]``."""
    return la.herm(
        directional_derivative_raw(f2, rho, f1(rho), h) - directional_derivative_raw(f1, rho, f2(rho), h)
    )


def _field_fn(kind, param, normalized):
    kind = field_kind(kind)
    return lambda r: field_raw(kind, param, r, normalized)


def bracket_fd(field1, field2, rho: FaithfulState, h: float = BRACKET_STEP):
    """Lie bracket of two fields at ``rho`` by finite differences.

    Each field is given as ``(kind, parameter)``, e.g. ``("X", b)``.
    """
    from .operators import HermitianOperator

    if not isinstance(rho, FaithfulState):
        raise ValidationError("expected a FaithfulState")
    (k1, p1), (k2, p2) = field1, field2
    f1 = _field_fn(k1, hermitian_entries(p1), rho.normalized)
    f2 = _field_fn(k2, hermitian_entries(p2), rho.normalized)
    return HermitianOperator(bracket_raw(f1, f2, rho.entries, h))


_calibrated_order = None


def calibrate_commutator_order(seed: int = 20240611) -> tuple:
    """Fix the ordering of the commutant in ``[X_b, V_a] = V_{s (i/2)[b,a]}``.

    Compares both orderings on one qubit instance of the Bures-Helstrom
    field and returns ``(order, residual_chosen, residual_other)`` where
    ``order`` is +1 for ``(i/2)[b,a]`` and -1 for ``(i/2)[a,b]``.
    """
    (rng,) = trial_rngs(seed, "commutation_calibration", 1)
    rho = draw_state_matrix(rng, 2)
    b = draw_observable_matrix(rng, 2)
    a = draw_observable_matrix(rng, 2)
    br = bracket_raw(lambda r: x_field_raw(b, r), lambda r: field_raw(FieldKind.Y_bh, a, r), rho)
    res = {s: float(la.frob(br - field_raw(FieldKind.Y_bh, _commutator_param(a, b, s), rho))) for s in (1, -1)}
    order = min(res, key=res.get)
    return order, res[order], res[-order]


def commutator_order() -> int:
    global _calibrated_order
    if _calibrated_order is None:
        _calibrated_order = calibrate_commutator_order()[0]
    return _calibrated_order


# ------------------------------------------------------------------ single-instance checks


def _tol(default, tol):
    return default if tol is None else tol


def check_commutation(name, b, a, rho: FaithfulState, tol=None) -> CheckReport:
    """``[X_b, V_a]`` against ``V`` at the calibrated commutant of ``a`` and ``b``."""
    name = metric_name(name)
    order = commutator_order()
    kind = FIELD_OF[name]
    b_, a_ = hermitian_entries(b), hermitian_entries(a)
    r = rho.entries
    br = bracket_raw(lambda x: x_field_raw(b_, x), _field_fn(kind, a_, rho.normalized), r)
    ref = field_raw(kind, _commutator_param(a_, b_, order), r, rho.normalized)
    params = {"metric": name.name, "dim": rho.dim, "commutant": _COMMUTANT_ORDERS[order]}
    return make_report("commutation", params, la.frob(br - ref), _tol(1e-6, tol), 1)


def check_gradient_identity(name, rho: FaithfulState, a, X, tol=None) -> CheckReport:
    """``|G(X, V_a) - Tr(a X)| / (1 + |a| |X|)`` for the metric's gradient field ``V_a``."""
    name = metric_name(name)
    a_, x_ = hermitian_entries(a), hermitian_entries(X)
    err = _gradient_identity_errs(name, rho.entries, a_, x_, rho.normalized)
    return make_report("gradient_identity", {"metric": name.name, "dim": rho.dim}, err, _tol(1e-9, tol), 1)


def check_isometry(name, rho: FaithfulState, X, Y, U, tol=None) -> CheckReport:
    """Invariance of ``G`` under simultaneous unitary conjugation."""
    name = metric_name(name)
    u = np.asarray(getattr(U, "entries", U), dtype=complex)
    err = _isometry_errs(name, rho.entries, hermitian_entries(X), hermitian_entries(Y), u)
    return make_report("metric_isometry", {"metric": name.name, "dim": rho.dim}, err, _tol(1e-10, tol), 1)


def check_degeneracies(spec: RandomSpec, tol=None) -> CheckReport:
    """Pure-state degeneracies of the BKM field and of the gl/WY actions.

    The residual is the largest of ``|Z_a(pure)|``, ``|alpha(g, pure) -
    Theta(g, pure)|`` and any growth of ``|Z_a(rho_eps)|`` as ``eps`` goes
    from 1e-2 to 1e-4.
    """
    rngs = trial_rngs(spec.seed, "check_degeneracies", 1)
    n = spec.dim
    errs = [
        _z_pure_errs(rngs, n),
        _pure_action_errs(rngs, n, unitary=False),
        _near_pure_errs(rngs, n)[0],
    ]
    return make_report("degeneracies", {"dim": n, "seed": spec.seed}, np.max(errs), _tol(1e-10, tol), 1)


def check_orbit_flow(
    name, a, rho0: FaithfulState, t_max: float = 1.0, steps: Sequence[int] = FLOW_STEPS, tol=None
) -> CheckReport:
    """RK4 gradient flow of ``f_a`` against the closed-form orbit of the matching action.

    The residual is the largest Frobenius deviation over the grid at the
    finest step count; the empirical convergence order over ``steps`` is in
    ``params["order"]`` (``None`` when every deviation is at roundoff).
    """
    name = metric_name(name)
    a_ = hermitian_entries(a)
    if t_max * np.linalg.norm(a_, 2) > 2.0 + 1e-12:
        raise ValidationError("t_max * |a| must not exceed 2")
    devs, _, _ = _flow_deviations(name, a_[None], rho0.entries[None], t_max, tuple(steps), rho0.normalized)
    order = _convergence_order(devs[:, 0], steps)
    params = {
        "metric": name.name,
        "dim": rho0.dim,
        "t_max": t_max,
        "steps": list(steps),
        "deviations": [float(d) for d in devs[:, 0]],
        "order": None if order is None else float(order),
    }
    return make_report("flow_orbit_deviation", params, devs[-1, 0], _tol(1e-6, tol), 1)


# ------------------------------------------------------------------ residual kernels


def _gradient_identity_errs(name, rho, a, x, normalized=True):
    v = field_raw(FIELD_OF[name], a, rho, normalized)
    g = metric_eval_raw(name, rho, x, v)
    rhs = np.real(la.trace(a @ x))
    return np.abs(g - rhs) / (1.0 + la.frob(a) * la.frob(x))


def _isometry_errs(name, rho, x, y, u):
    def conj(m):
        return la.herm(u @ m @ la.dag(u))

    return np.abs(metric_eval_raw(name, conj(rho), conj(x), conj(y)) - metric_eval_raw(name, rho, x, y))


def _z_pure_errs(rngs, n):
    p = _pure(rngs, n)
    a = _obs(rngs, n)
    return la.frob(z_field_quadrature(a, p))


def _pure_action_errs(rngs, n, unitary):
    p = _pure(rngs, n)
    g = _unitaries(rngs, n) if unitary else _gls(rngs, n)
    ga = gl_act_raw(g, p)
    err = la.frob(ga - wy_act_raw(g, p))
    if unitary:
        err = np.maximum(err, la.frob(ga - la.herm(g @ p @ la.dag(g))))
    return err


def _near_pure_errs(rngs, n, eps=(1e-2, 1e-4)):
    p = _pure(rngs, n)
    a = _obs(rngs, n)
    norms = []
    for e in eps:
        rho = (1.0 - e) * p + (e / n) * np.eye(n)
        norms.append(la.frob(z_field_raw(a, rho)))
    return np.maximum(0.0, norms[1] - norms[0]), norms


def _orbit(name, a, rho0, ts, normalized):
    """Closed-form orbit through ``rho0`` at times ``ts``: shape ``(B, T, n, n)``."""
    rho0 = rho0[:, None]
    tt = np.asarray(ts)[None, :, None, None]
    if name is MetricName.BKM:
        h = la.logm(rho0) + tt * a[:, None]
        m = la.herm(la.expm(h))
    else:
        w, v = la.eigh(a)
        g = la.from_eig(np.exp(0.5 * np.asarray(ts)[None, :, None] * w[:, None, :]), v[:, None])
        if name is MetricName.BH:
            m = la.herm(g @ rho0 @ la.dag(g))
        else:
            s = la.herm(g @ la.sqrtm(rho0) @ la.dag(g))
            m = la.herm(s @ s)
    if normalized:
        m = m / la.trace(m).real[..., None, None]
    return m


def rk4_flow(name, a, rho0, t_max, steps, normalized=True):
    """Integrate ``d rho/dt = V_a(rho)`` with classical RK4; returns ``(B, steps+1, n, n)``."""
    kind = FIELD_OF[name]

    def f(r):
        return field_raw(kind, a, r, normalized)

    h = t_max / steps
    r = rho0
    traj = [r]
    for _ in range(steps):
        k1 = f(r)
        k2 = f(r + 0.5 * h * k1)
        k3 = f(r + 0.5 * h * k2)
        k4 = f(r + h * k3)
        r = la.herm(r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        traj.append(r)
    traj = np.stack(traj, axis=-3)
    if not np.all(np.isfinite(traj)):
        raise StepTooLargeError("RK4 integration left the faithful cone")
    _require_faithful(traj, "RK4 trajectory")
    return traj


def _flow_deviations(name, a, rho0, t_max, steps, normalized=True):
    devs = []
    traj = None
    for s in steps:
        traj = rk4_flow(name, a, rho0, t_max, s, normalized)
        ts = np.linspace(0.0, t_max, s + 1)
        orbit = _orbit(name, a, rho0, ts, normalized)
        devs.append(np.max(la.frob(traj - orbit), axis=-1))
    return np.array(devs), traj, np.linspace(0.0, t_max, steps[-1] + 1)


def _convergence_order(devs, steps, floor=1e-13):
    devs = np.asarray(devs, dtype=float)
    if np.max(devs) <= floor:
        return None
    slope = np.polyfit(np.log(np.asarray(steps, dtype=float)), np.log(np.maximum(devs, 1e-300)), 1)[0]
    return -slope


# ------------------------------------------------------------------ suite registry


@dataclass(frozen=True)
class _Check:
    key: str
    suite: str
    outputs: tuple  # ((report name, default tol), ...)
    fn: Callable  # (rngs, n, label) -> [(errs, extra), ...] aligned with outputs
    labels: tuple = (None,)
    dims: Callable = None  # optional filter on the configured dims
    trials: int = None  # fixed trial count (deterministic checks)


_REGISTRY: list = []


def _register(key, suite, outputs, labels=(None,), dims=None, trials=None):
    if isinstance(outputs, str):
        outputs = ((outputs, None),)

    def deco(fn):
        _REGISTRY.append(_Check(key, suite, tuple(outputs), fn, tuple(labels), dims, trials))
        return fn

    return deco


_METRIC_LABELS = tuple({"metric": m.name} for m in _METRICS)


def _metric(label):
    return MetricName[label["metric"]]


# ---- operator core


@_register("core_spectral_reconstruction", "gradient", (("core_spectral_reconstruction", 1e-10),))
def _c_spectral(rngs, n, label):
    errs = []
    for r in rngs:
        h = draw_observable_matrix(r, n)
        sd = spectral_decompose(h)
        u, w = sd.eigenvectors, sd.eigenvalues
        recon = np.max(np.abs(sd.reconstruct() - h)) / (n * np.max(np.abs(w)))
        unit = np.max(np.abs(u.conj().T @ u - np.eye(n)))
        ascending = 0.0 if np.all(np.diff(w) >= 0) else 1.0
        errs.append(max(recon, unit, ascending))
    return [(errs, {})]


@_register("core_power_split", "gradient", (("core_power_split", 1e-10), ("core_sqrt_pow_agreement", 1e-12)))
def _c_power(rngs, n, label):
    rho = _states(rngs, n)
    errs = 0.0
    for lam in (0.25, 0.5, 0.75):
        prod = la.func(rho, lambda w: np.power(w, lam)) @ la.func(rho, lambda w: np.power(w, 1.0 - lam))
        errs = np.maximum(errs, la.frob(prod - rho))
    agree = la.frob(la.func(rho, lambda w: np.power(w, 0.5)) - la.sqrtm(rho))
    return [(errs, {"exponents": [0.25, 0.5, 0.75]}), (agree, {})]


@_register("core_exp_log_inverse", "gradient", (("core_exp_log_inverse", 1e-10),))
def _c_explog(rngs, n, label):
    rho = _states(rngs, n)
    return [(la.frob(la.expm(la.logm(rho)) - rho), {})]


@_register("core_anticommutator_roundtrip", "gradient", (("core_anticommutator_roundtrip", 1e-10),))
def _c_anticomm(rngs, n, label):
    base = _states(rngs, n)
    y = _obs(rngs, n)
    beta, u = la.eigh(base)
    b = _anticomm_solve_raw(beta, u, y)
    return [(la.frob(base @ b + b @ base - y) / la.frob(y), {})]


@_register("core_dexp_quadrature", "gradient", (("core_dexp_quadrature", 1e-10),))
def _c_dexp(rngs, n, label):
    A = _obs(rngs, n) * _scal(3.0 * _uniform(rngs, 0.0, 1.0))
    a = _obs(rngs, n)
    return [(la.frob(_dexp_raw(A, a) - dexp_quadrature(A, a)), {"nodes": GAUSS_NODES, "max_norm_A": 3.0})]


def _observed_order(errs_coarse, errs_fine, ratio):
    return np.log(errs_coarse / errs_fine) / np.log(ratio)


@_register("core_sqrt_derivative_order", "gradient", (("core_sqrt_derivative_order", 0.25),))
def _c_sqrt_fd(rngs, n, label):
    rho = _states(rngs, n, 0.05)
    H = _obs(rngs, n)
    beta, u = la.eigh(la.sqrtm(rho))
    exact = _anticomm_solve_raw(beta, u, H)
    e = [la.frob((la.sqrtm(rho + h * H) - la.sqrtm(rho - h * H)) / (2 * h) - exact) for h in (1e-3, 1e-4)]
    order = _observed_order(e[0], e[1], 10.0)
    return [(np.abs(order - 2.0), {"steps": [1e-3, 1e-4], "min_eigenvalue": 0.05, "max_err_at_1e-3": float(np.max(e[0]))})]


# ---- metrics


@_register("gradient_identity", "gradient", (("gradient_identity", 1e-9),), labels=_METRIC_LABELS)
def _m_grad(rngs, n, label):
    rho, a, x = _states(rngs, n), _obs(rngs, n), _tangents(rngs, n)
    return [(_gradient_identity_errs(_metric(label), rho, a, x), {})]


@_register(
    "gradient_identity_unnormalized", "gradient", (("gradient_identity_unnormalized", 1e-9),), labels=_METRIC_LABELS
)
def _m_grad_un(rngs, n, label):
    rho = _states(rngs, n) * _scal(_uniform(rngs, 0.5, 2.0))
    a, x = _obs(rngs, n), _obs(rngs, n)
    return [(_gradient_identity_errs(_metric(label), rho, a, x, normalized=False), {})]


@_register("metric_gradient_field", "gradient", (("metric_gradient_field", 1e-10),), labels=_METRIC_LABELS)
def _m_gradfield(rngs, n, label):
    name = _metric(label)
    rho, a = _states(rngs, n), _obs(rngs, n)
    errs = la.frob(metric_gradient_raw(name, a, rho) - field_raw(FIELD_OF[name], a, rho))
    rho_u = rho * _scal(_uniform(rngs, 0.5, 2.0))
    errs_u = la.frob(metric_gradient_raw(name, a, rho_u, False) - field_raw(FIELD_OF[name], a, rho_u, False))
    return [(np.maximum(errs, errs_u), {})]


@_register(
    "metric_symmetry",
    "gradient",
    (("metric_symmetry", 1e-12), ("metric_positivity", 0.0)),
    labels=_METRIC_LABELS,
)
def _m_sym(rngs, n, label):
    name = _metric(label)
    rho, x, y = _states(rngs, n), _tangents(rngs, n), _tangents(rngs, n)
    sym = np.abs(metric_eval_raw(name, rho, x, y) - metric_eval_raw(name, rho, y, x))
    gxx = metric_eval_raw(name, rho, x, x)
    return [(sym, {}), (np.maximum(0.0, 1e-12 - gxx), {"floor": 1e-12, "min_G_XX": float(np.min(gxx))})]


@_register("metric_isometry", "gradient", (("metric_isometry", 1e-10),), labels=_METRIC_LABELS)
def _m_iso(rngs, n, label):
    rho, x, y, u = _states(rngs, n), _tangents(rngs, n), _tangents(rngs, n), _unitaries(rngs, n)
    return [(_isometry_errs(_metric(label), rho, x, y, u), {})]


@_register("sheet_wellposed", "gradient", (("sheet_wellposed", 1e-10),), labels=_METRIC_LABELS)
def _m_sheet(rngs, n, label):
    rho, y = _states(rngs, n), _tangents(rngs, n)
    k_inv = metric_inverse_raw(_metric(label), rho, y)
    return [(np.abs(la.trace(rho @ k_inv)), {})]


@_register(
    "divergence_hessian",
    "gradient",
    (("divergence_hessian", 1e-4), ("divergence_hessian_order", 0.5)),
    labels=_METRIC_LABELS,
)
def _m_hessian(rngs, n, label):
    name = _metric(label)
    rho, x, y = _states(rngs, n, 1e-2), _tangents(rngs, n), _tangents(rngs, n)
    for m in (x, y):
        for s in (1, -1):
            _require_faithful(rho + s * FD_HESSIAN_STEP * m, "divergence step")
    g = metric_eval_raw(name, rho, x, y)
    scale = np.sqrt(metric_eval_raw(name, rho, x, x) * metric_eval_raw(name, rho, y, y))
    gap = np.abs(metric_fd_raw(name, rho, x, y, FD_HESSIAN_STEP) - g)
    gap_double = np.abs(metric_fd_raw(name, rho, x, y, 2.0 * FD_HESSIAN_STEP) - g)
    # batch maxima: single trials can sit near a zero of the h**2 coefficient
    ratio = float(np.max(gap_double) / np.max(gap))
    extra = {"h": FD_HESSIAN_STEP, "min_eigenvalue": 1e-2}
    return [
        (gap / scale, extra),
        ([abs(ratio - 4.0)], {**extra, "steps": [FD_HESSIAN_STEP, 2.0 * FD_HESSIAN_STEP], "ratio": ratio}),
    ]


@_register("suzuki_identity_order", "gradient", (("suzuki_identity_order", 0.25),))
def _m_suzuki(rngs, n, label):
    rho, a = _states(rngs, n, 0.05), _obs(rngs, n)
    y = 0.5 * (rho @ a + a @ rho)
    s = la.sqrtm(rho)

    def f(t):
        return la.func(la.herm(s @ (rho + t * y) @ s), lambda w: w**-0.5)

    ri = la.func(rho, lambda w: w**-0.5)
    exact = -0.5 * ri @ a @ ri
    e = [la.frob((f(h) - f(-h)) / (2 * h) - exact) for h in (1e-3, 1e-4)]
    order = _observed_order(e[0], e[1], 10.0)
    return [(np.abs(order - 2.0), {"steps": [1e-3, 1e-4], "min_eigenvalue": 0.05, "max_err_at_1e-3": float(np.max(e[0]))})]


_SPOT = {MetricName.BH: 1.0, MetricName.WY: 0.5, MetricName.BKM: 1.0}


@_register(
    "qubit_spot_values",
    "gradient",
    (("qubit_spot_closed_form", 1e-9), ("qubit_spot_fd", 1e-4)),
    labels=_METRIC_LABELS,
    dims=lambda n: n == 2,
    trials=1,
)
def _m_spot(rngs, n, label):
    name = _metric(label)
    rho = np.eye(2)[None] / 2
    x = np.diag([0.5, -0.5])[None].astype(complex)
    closed = metric_eval_raw(name, rho, x, x)
    fd = metric_fd_raw(name, rho, x, x, FD_HESSIAN_STEP)
    extra = {"expected": _SPOT[name]}
    return [
        (np.abs(closed - _SPOT[name]), {**extra, "value": float(closed[0])}),
        (np.abs(fd - _SPOT[name]), {**extra, "value": float(fd[0]), "h": FD_HESSIAN_STEP}),
    ]


# ---- actions

_ACTION_LABELS = tuple({"action": a, "normalized": nm} for a in ("gl", "wy", "cotangent") for nm in (True, False))


def _draw_group(rngs, n, action):
    if action == "cotangent":
        return (_unitaries(rngs, n), _obs(rngs, n))
    return _gls(rngs, n)


def _act_raw(action, g, rho, normalized):
    if action == "cotangent":
        u, a = g
        return cotangent_act_raw(u, a, rho, normalized)
    if action == "gl":
        return gl_act_raw(g, rho, normalized)
    return wy_act_raw(g, rho, normalized)


def _cot_mul_raw(g1, g2):
    (u1, a1), (u2, a2) = g1, g2
    return u1 @ u2, la.herm(u1 @ a2 @ la.dag(u1)) + a1


def _group_mul(action, g1, g2):
    return _cot_mul_raw(g1, g2) if action == "cotangent" else g1 @ g2


def _draw_rho(rngs, n, normalized):
    rho = _states(rngs, n)
    return rho if normalized else rho * _scal(_uniform(rngs, 0.5, 2.0))


@_register(
    "action_composition",
    "actions",
    (("action_composition", 1e-10), ("action_identity", 1e-10)),
    labels=_ACTION_LABELS,
)
def _a_comp(rngs, n, label):
    act, nm = label["action"], label["normalized"]
    rho = _draw_rho(rngs, n, nm)
    g1, g2 = _draw_group(rngs, n, act), _draw_group(rngs, n, act)
    lhs = _act_raw(act, _group_mul(act, g1, g2), rho, nm)
    rhs = _act_raw(act, g1, _act_raw(act, g2, rho, nm), nm)
    eye = np.broadcast_to(np.eye(n, dtype=complex), rho.shape)
    ident = (eye, np.zeros_like(rho)) if act == "cotangent" else eye
    # unnormalized images of gl draws can have norm ~1e4; measure relative to it
    scale = np.maximum(1.0, la.frob(lhs))
    return [(la.frob(lhs - rhs) / scale, {"relative_to": "max(1, |lhs|)"}), (la.frob(_act_raw(act, ident, rho, nm) - rho), {})]


@_register("action_unitary_restriction", "actions", (("action_unitary_restriction", 1e-10),))
def _a_unitary(rngs, n, label):
    rho, u = _states(rngs, n), _unitaries(rngs, n)
    ref = la.herm(u @ rho @ la.dag(u))
    errs = np.maximum.reduce(
        [
            la.frob(gl_act_raw(u, rho) - ref),
            la.frob(wy_act_raw(u, rho) - ref),
            la.frob(cotangent_act_raw(u, np.zeros_like(rho), rho) - ref),
        ]
    )
    return [(errs, {"actions": ["gl", "wy", "cotangent"]})]


@_register("cotangent_associativity", "actions", (("cotangent_associativity", 1e-12),))
def _a_assoc(rngs, n, label):
    g = [(_unitaries(rngs, n), _obs(rngs, n)) for _ in range(3)]
    l_u, l_a = _cot_mul_raw(_cot_mul_raw(g[0], g[1]), g[2])
    r_u, r_a = _cot_mul_raw(g[0], _cot_mul_raw(g[1], g[2]))
    return [(np.maximum(la.frob(l_u - r_u), la.frob(l_a - r_a)), {})]


def _curve(action, a, b, t):
    if action == "cotangent":
        w, v = la.eigh(b)
        return (la.from_eig(np.exp(0.5j * t * w), v), t * a)
    return scipy.linalg.expm(0.5 * t * (a + 1j * b))


_GRADIENT_KIND = {"gl": FieldKind.Y_bh, "wy": FieldKind.W_wy, "cotangent": FieldKind.Z_bkm}


@_register("fundamental_field_fd", "actions", (("fundamental_field_fd", 1e-6),), labels=_ACTION_LABELS)
def _a_fund(rngs, n, label):
    act, nm = label["action"], label["normalized"]
    rho = _draw_rho(rngs, n, nm)
    a, b = _obs(rngs, n), _obs(rngs, n)
    h = ACTION_FD_STEP
    fd = (_act_raw(act, _curve(act, a, b, h), rho, nm) - _act_raw(act, _curve(act, a, b, -h), rho, nm)) / (2 * h)
    exact = field_raw(_GRADIENT_KIND[act], a, rho, nm) + x_field_raw(b, rho)
    return [(la.frob(fd - exact), {"h": h})]


_GRADIENT_FIELD_LABELS = tuple({"kind": k.value} for k in (FieldKind.Y_bh, FieldKind.W_wy, FieldKind.Z_bkm))


@_register("gauge_invariance", "actions", (("gauge_invariance", 1e-12),), labels=_GRADIENT_FIELD_LABELS)
def _a_gauge(rngs, n, label):
    kind = field_kind(label["kind"])
    rho, a = _states(rngs, n), _obs(rngs, n)
    c = _uniform(rngs, -5.0, 5.0)
    shifted = a + _scal(c) * np.eye(n)
    return [(la.frob(field_raw(kind, shifted, rho) - field_raw(kind, a, rho)), {"shift_range": [-5.0, 5.0]})]


@_register(
    "tangency", "actions", (("tangency", 1e-12),), labels=tuple({"kind": k.value} for k in FieldKind)
)
def _a_tangent(rngs, n, label):
    kind = field_kind(label["kind"])
    rho, a = _states(rngs, n), _obs(rngs, n)
    return [(np.abs(la.trace(field_raw(kind, a, rho))), {})]


@_register("z_field_quadrature", "actions", (("z_field_quadrature", 1e-10),))
def _a_zquad(rngs, n, label):
    rho, a = _states(rngs, n), _obs(rngs, n)
    return [(la.frob(z_field_raw(a, rho) - z_field_quadrature(a, rho)), {"nodes": GAUSS_NODES})]


# ---- brackets


@_register(
    "commutation_calibration", "brackets", (("commutation_calibration", 1e-6),), dims=lambda n: n == 2, trials=1
)
def _b_calib(rngs, n, label):
    order, chosen, other = calibrate_commutator_order()
    return [([chosen], {"commutant": _COMMUTANT_ORDERS[order], "other_order_residual": other})]


@_register("bracket_xx", "brackets", (("bracket_xx", 1e-6),))
def _b_xx(rngs, n, label):
    rho, b, c = _states(rngs, n), _obs(rngs, n), _obs(rngs, n)
    br = bracket_raw(lambda r: x_field_raw(b, r), lambda r: x_field_raw(c, r), rho)
    expected = -0.25 * la.comm(rho, la.comm(b, c))
    return [(la.frob(br - expected), {"h": BRACKET_STEP})]


@_register("commutation", "brackets", (("commutation", 1e-6),), labels=_METRIC_LABELS)
def _b_comm(rngs, n, label):
    name = _metric(label)
    kind = FIELD_OF[name]
    order = commutator_order()
    rho, b, a = _states(rngs, n), _obs(rngs, n), _obs(rngs, n)
    br = bracket_raw(lambda r: x_field_raw(b, r), lambda r: field_raw(kind, a, r), rho)
    ref = field_raw(kind, _commutator_param(a, b, order), rho)
    return [(la.frob(br - ref), {"commutant": _COMMUTANT_ORDERS[order], "h": BRACKET_STEP})]


@_register("commutation_sign_consistency", "brackets", (("commutation_sign_consistency", 0.0),))
def _b_consistency(rngs, n, label):
    order = commutator_order()
    rho, b, a = _states(rngs, n), _obs(rngs, n), _obs(rngs, n)
    mismatches = np.zeros(len(rngs))
    for name in _METRICS:
        kind = FIELD_OF[name]
        br = bracket_raw(lambda r: x_field_raw(b, r), lambda r: field_raw(kind, a, r), rho)
        res = {s: la.frob(br - field_raw(kind, _commutator_param(a, b, s), rho)) for s in (1, -1)}
        best = np.where(res[1] < res[-1], 1, -1)
        # a commuting pair gives both orders the same (zero) commutant
        tie = np.abs(res[1] - res[-1]) <= 1e-9
        mismatches += (best != order) & ~tie
    return [(mismatches, {"commutant": _COMMUTANT_ORDERS[order], "metrics": [m.name for m in _METRICS]})]


@_register("bracket_gradient_pair", "brackets", (("bracket_gradient_pair", 1e-6),), labels=_METRIC_LABELS)
def _b_vv(rngs, n, label):
    name = _metric(label)
    kind = FIELD_OF[name]
    rho, a, c = _states(rngs, n), _obs(rngs, n), _obs(rngs, n)
    br = bracket_raw(lambda r: field_raw(kind, a, r), lambda r: field_raw(kind, c, r), rho)
    if name is MetricName.BKM:
        expected, what = np.zeros_like(br), "0"
    else:
        expected, what = x_field_raw(la.herm(0.5j * la.comm(a, c)), rho), "X_{(i/2)[a,c]}"
    return [(la.frob(br - expected), {"expected": what, "h": BRACKET_STEP})]


@_register(
    "bracket_richardson",
    "brackets",
    (("bracket_richardson", 0.0),),
    labels=({"kind": "W"}, {"kind": "Z"}),
)
def _b_richardson(rngs, n, label):
    kind = field_kind(label["kind"])
    order = commutator_order()
    rho, b, a = _states(rngs, n), _obs(rngs, n), _obs(rngs, n)
    ref = field_raw(kind, _commutator_param(a, b, order), rho)
    res = []
    for h in RICHARDSON_STEPS:
        br = bracket_raw(lambda r: x_field_raw(b, r), lambda r: field_raw(kind, a, r), rho, h)
        res.append(float(np.max(la.frob(br - ref))))
    ratio = res[0] / res[1]
    return [([max(0.0, 8.0 - ratio)], {"steps": list(RICHARDSON_STEPS), "residuals": res, "ratio": ratio})]


# ---- degeneracies


@_register("z_pure", "degeneracy", (("z_pure", 1e-10),))
def _d_zpure(rngs, n, label):
    return [(_z_pure_errs(rngs, n), {"nodes": GAUSS_NODES})]


@_register("pure_action_agreement", "degeneracy", (("pure_action_agreement", 1e-10),))
def _d_pure(rngs, n, label):
    return [(_pure_action_errs(rngs, n, unitary=False), {})]


@_register("pure_unitary_action", "degeneracy", (("pure_unitary_action", 1e-10),))
def _d_pure_u(rngs, n, label):
    return [(_pure_action_errs(rngs, n, unitary=True), {})]


@_register("mixed_action_difference", "degeneracy", (("mixed_action_difference", 0.0),))
def _d_mixed(rngs, n, label):
    rho, g = _states(rngs, n), _gls(rngs, n)
    diff = la.frob(gl_act_raw(g, rho) - wy_act_raw(g, rho))
    best = float(np.max(diff))
    return [([max(0.0, 1e-3 - best)], {"threshold": 1e-3, "max_difference": best})]


@_register("near_pure_monotone", "degeneracy", (("near_pure_monotone", 0.0),))
def _d_near(rngs, n, label):
    errs, norms = _near_pure_errs(rngs, n)
    return [(errs, {"eps": [1e-2, 1e-4], "max_norm": [float(np.max(v)) for v in norms]})]


# ---- flows


@_register(
    "flow",
    "flows",
    (("flow_orbit_deviation", 1e-6), ("flow_convergence_order", 0.5), ("flow_monotone", 1e-12)),
    labels=_METRIC_LABELS,
)
def _f_flow(rngs, n, label):
    name = _metric(label)
    rho, a = _states(rngs, n), _obs(rngs, n)
    devs, traj, _ = _flow_deviations(name, a, rho, 1.0, FLOW_STEPS)
    orders = np.array([_convergence_order(devs[:, k], FLOW_STEPS) for k in range(len(rngs))], dtype=float)
    order_err = np.where(np.isnan(orders), 0.0, np.abs(orders - 4.0))
    f = expectation_raw(a[:, None], traj)
    drop = np.max(np.maximum(0.0, -np.diff(f, axis=-1)), axis=-1)
    extra = {"t_max": 1.0, "steps": list(FLOW_STEPS)}
    return [
        (devs[-1], extra),
        (order_err, {**extra, "min_order": float(np.nanmin(orders)), "max_order": float(np.nanmax(orders))}),
        (drop, extra),
    ]


# ------------------------------------------------------------------ runner


def _label_key(label):
    return () if label is None else tuple(str(v) for v in label.values())


def _run_task(check: _Check, config: SuiteConfig, n: int, label) -> list:
    trials = check.trials or config.trials_per_check
    lab = dict(label or {})
    check_id = "/".join([check.key, *(f"{k}={v}" for k, v in lab.items()), f"dim={n}"])
    rngs = trial_rngs(config.seed, check_id, trials)
    params = {**lab, "dim": n, "seed": config.seed}
    try:
        results = check.fn(rngs, n, label)
    except QIGError as exc:
        results = [([math.inf], {"error": str(exc)})] * len(check.outputs)
    reports = []
    for (name, default), (errs, extra) in zip(check.outputs, results):
        tol = config.tolerances.get(name, default * config.tol_scale)
        reports.append(make_report(name, {**params, **extra}, errs, tol, trials))
    return reports


def suite_checks(suites=SUITES) -> list:
    return [c for c in _REGISTRY if c.suite in suites]


def run_suite(config: SuiteConfig = SuiteConfig()) -> list:
    """Run every registered check of the selected suites.

    Failures are recorded in the reports and never abort the run. Reports
    are sorted by (check name, label, dimension) and depend only on
    ``config``, not on ``config.workers``.
    """
    tasks = [
        (check, n, label)
        for check in suite_checks(config.suites)
        for label in check.labels
        for n in sorted(set(int(d) for d in config.dims))
        if check.dims is None or check.dims(n)
    ]
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(lambda t: _run_task(t[0], config, t[1], t[2]), tasks))
    else:
        chunks = [_run_task(c, config, n, lab) for c, n, lab in tasks]
    reports = [r for chunk in chunks for r in chunk]
    return sorted(reports, key=lambda r: (r.check_name, _label_key({k: v for k, v in r.params.items() if k in ("metric", "action", "kind", "normalized")}), r.params["dim"]))


def flow_trajectory(name, a, rho0: FaithfulState, t_max: float = 1.0, steps: int = 64) -> list:
    """RK4 gradient flow of ``f_a`` sampled on its grid, compared with the closed-form orbit.

    Returns a list of ``(t, f_a, orbit_deviation, min_eigenvalue)`` tuples.
    """
    name = metric_name(name)
    a_ = hermitian_entries(a)
    if a_.shape != rho0.entries.shape:
        raise ValidationError(f"observable is {a_.shape}, state is {rho0.dim}x{rho0.dim}")
    if steps < 1 or not t_max > 0:
        raise ValidationError("steps must be >= 1 and t_max positive")
    if t_max * np.linalg.norm(a_, 2) > 2.0 + 1e-12:
        raise ValidationError("t_max * |a| must not exceed 2")
    traj = rk4_flow(name, a_[None], rho0.entries[None], t_max, steps, rho0.normalized)[0]
    ts = np.linspace(0.0, t_max, steps + 1)
    orbit = _orbit(name, a_[None], rho0.entries[None], ts, rho0.normalized)[0]
    dev = la.frob(traj - orbit)
    f = expectation_raw(a_, traj)
    mins = np.linalg.eigvalsh(traj)[:, 0]
    return [(float(t), float(fv), float(d), float(m)) for t, fv, d, m in zip(ts, f, dev, mins)]
