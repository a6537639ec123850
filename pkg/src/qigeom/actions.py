"""Group actions on faithful states and their fundamental vector fields.

Four actions are provided:

* ``unitary``   : ``U rho U^dagger``
* ``gl``        : ``g rho g^dagger`` (divided by its trace on normalized states)
* ``wy``        : ``(g sqrt(rho) g^dagger)**2``, i.e. the ``gl`` action
  transported through the square root
* ``cotangent`` : ``exp(U ln(rho) U^dagger + a)`` for ``(U, a)`` in the
  cotangent group of the unitary group, i.e. the Euclidean motion of
  ``ln(rho)`` transported back through ``exp``

The matching gradient fields of ``f_a(rho) = Tr(rho a)`` are the ``Y``
(Bures-Helstrom), ``W`` (Wigner-Yanase) and ``Z`` (Bogoliubov-Kubo-Mori)
fields; ``X`` fields generate the unitary action.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _linalg as la
from .errors import ContractError, ShapeError, ValidationError
from .kernels import expdd_kernel
from .operators import (
    FaithfulState,
    HermitianOperator,
    TangentVector,
    as_array,
    hermitian_entries,
)

UNITARY_ATOL = 1e-10
SINGULAR_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class GLElement:
    """An invertible complex matrix."""

    entries: np.ndarray

    def __post_init__(self):
        g = np.array(self.entries, dtype=np.complex128, copy=True)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] == 0:
            raise ShapeError(f"group element must be square, got shape {g.shape}")
        s = np.linalg.svd(g, compute_uv=False)
        if not np.all(np.isfinite(s)) or s[-1] <= SINGULAR_RTOL * s[0]:
            raise ValidationError(
                f"group element is singular: smallest singular value {s[-1]:.6g}, largest {s[0]:.6g}"
            )
        g.setflags(write=False)
        object.__setattr__(self, "entries", g)

    @classmethod
    def identity(cls, n: int) -> "GLElement":
        return cls(np.eye(n))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def is_unitary(self, atol: float = UNITARY_ATOL) -> bool:
        g = self.entries
        return bool(np.max(np.abs(g.conj().T @ g - np.eye(self.dim))) <= atol)

    def __matmul__(self, other: "GLElement") -> "GLElement":
        return GLElement(self.entries @ other.entries)


def _check_unitary(u, what="u"):
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if dev > UNITARY_ATOL:
        raise ValidationError(f"{what} is not unitary: max |u^dagger u - I| = {dev:.3e}")


@dataclass(frozen=True, eq=False)
class CotangentElement:
    """``(U, a)`` in the cotangent group, with ``(U1,a1)(U2,a2) = (U1 U2, U1 a2 U1^dagger + a1)``."""

    u: np.ndarray
    a: HermitianOperator

    def __post_init__(self):
        u = np.array(self.u.entries if isinstance(self.u, GLElement) else self.u, dtype=np.complex128)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ShapeError(f"unitary part must be square, got shape {u.shape}")
        _check_unitary(u)
        a = self.a if isinstance(self.a, HermitianOperator) else HermitianOperator(self.a)
        if a.dim != u.shape[0]:
            raise ShapeError(f"unitary part is {u.shape[0]}x{u.shape[0]} but translation is {a.dim}x{a.dim}")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "a", a)

    @classmethod
    def identity(cls, n: int) -> "CotangentElement":
        return cls(np.eye(n), np.zeros((n, n)))

    @property
    def dim(self) -> int:
        return self.u.shape[0]

    def __matmul__(self, other: "CotangentElement") -> "CotangentElement":
        return cotangent_multiply(self, other)


class FieldKind(enum.Enum):
    X_unitary = "X"
    Y_bh = "Y"
    W_wy = "W"
    Z_bkm = "Z"


ACTIONS = ("unitary", "gl", "wy", "cotangent")
_ACTION_ALIASES = {"u": "unitary", "cot": "cotangent"}
GRADIENT_KIND = {"gl": FieldKind.Y_bh, "wy": FieldKind.W_wy, "cotangent": FieldKind.Z_bkm}


def action_name(action: str) -> str:
    name = _ACTION_ALIASES.get(action, action)
    if name not in ACTIONS:
        raise ValidationError(f"unknown action {action!r}; expected one of {ACTIONS}")
    return name


def field_kind(kind) -> FieldKind:
    if isinstance(kind, FieldKind):
        return kind
    for k in FieldKind:
        if kind in (k.name, k.value):
            return k
    raise ValidationError(f"unknown field kind {kind!r}")


# ----------------------------------------------------------- raw, batched


def _normalize(m, normalized):
    if not normalized:
        return m
    return m / la.trace(m).real[..., None, None]


def gl_act_raw(g, rho, normalized=True):
    return _normalize(la.herm(g @ rho @ la.dag(g)), normalized)


def sqrt_psd(a):
    # roundoff-level eigenvalues are treated as exact zeros so pure states stay pure
    return la.psd_power(a, 0.5)


def wy_act_raw(g, rho, normalized=True):
    s = la.herm(g @ sqrt_psd(rho) @ la.dag(g))
    return _normalize(la.herm(s @ s), normalized)


def cotangent_act_raw(u, a, rho, normalized=True):
    h = la.herm(u @ la.logm(rho) @ la.dag(u)) + a
    return _normalize(la.herm(la.expm(h)), normalized)


def expectation_raw(a, rho):
    return np.real(la.trace(rho @ a))


def x_field_raw(b, rho):
    return la.herm((rho @ b - b @ rho) / 2j)


def y_field_raw(a, rho, normalized=True):
    v = 0.5 * (rho @ a + a @ rho)
    if normalized:
        v = v - expectation_raw(a, rho)[..., None, None] * rho
    return la.herm(v)


def w_field_raw(a, rho, normalized=True):
    s = la.sqrtm(rho)
    v = 0.5 * (rho @ a + a @ rho) + s @ a @ s
    if normalized:
        v = v - 2.0 * expectation_raw(a, rho)[..., None, None] * rho
    return la.herm(v)


def z_field_raw(a, rho, normalized=True):
    # derivative of exp at ln(rho) along a
    p, u = la.eigh(rho)
    v = la.sandwich(u, expdd_kernel(np.log(p)), a)
    if normalized:
        v = v - expectation_raw(a, rho)[..., None, None] * rho
    return la.herm(v)


def field_raw(kind: FieldKind, param, rho, normalized=True):
    if kind is FieldKind.X_unitary:
        return x_field_raw(param, rho)
    if kind is FieldKind.Y_bh:
        return y_field_raw(param, rho, normalized)
    if kind is FieldKind.W_wy:
        return w_field_raw(param, rho, normalized)
    return z_field_raw(param, rho, normalized)


# ----------------------------------------------------------- typed API


def _state(rho) -> FaithfulState:
    if isinstance(rho, FaithfulState):
        return rho
    raise ValidationError("expected a FaithfulState")


def _same_dim(n, *items):
    for name, m in items:
        if m.shape != (n, n):
            raise ShapeError(f"{name} has shape {m.shape}, state is {n}x{n}")


def act(action: str, g, rho: FaithfulState) -> FaithfulState:
    """Act on ``rho`` with the group element ``g``.

    ``g`` is a :class:`GLElement` (or array) for ``unitary``, ``gl`` and
    ``wy`` and a :class:`CotangentElement` for ``cotangent``. Normalized
    states are mapped to normalized states; unnormalized states get the raw
    formula.
    """
    action = action_name(action)
    rho = _state(rho)
    n = rho.dim
    if action == "cotangent":
        if not isinstance(g, CotangentElement):
            raise ContractError("the cotangent action needs a CotangentElement")
        _same_dim(n, ("g", g.u))
        out = cotangent_act_raw(g.u, g.a.entries, rho.entries, rho.normalized)
    else:
        if isinstance(g, CotangentElement):
            raise ContractError(f"the {action} action needs a GLElement, not a CotangentElement")
        g = g if isinstance(g, GLElement) else GLElement(g)
        _same_dim(n, ("g", g.entries))
        if action == "unitary":
            _check_unitary(g.entries, "g")
            out = la.herm(g.entries @ rho.entries @ g.entries.conj().T)
        elif action == "gl":
            out = gl_act_raw(g.entries, rho.entries, rho.normalized)
        else:
            out = wy_act_raw(g.entries, rho.entries, rho.normalized)
    return FaithfulState(HermitianOperator(out), rho.normalized)


def cotangent_multiply(g1: CotangentElement, g2: CotangentElement) -> CotangentElement:
    """Semidirect-product law ``(U1 U2, U1 a2 U1^dagger + a1)``."""
    if g1.dim != g2.dim:
        raise ShapeError(f"dimension mismatch: {g1.dim} vs {g2.dim}")
    u1 = g1.u
    a = la.herm(u1 @ g2.a.entries @ u1.conj().T) + g1.a.entries
    return CotangentElement(u1 @ g2.u, HermitianOperator(a))


def field(kind, param, rho: FaithfulState) -> TangentVector:
    """Evaluate the ``X``, ``Y``, ``W`` or ``Z`` field with parameter ``param`` at ``rho``.

    ``X`` fields are always traceless; the others are traceless exactly
    when ``rho`` is normalized.
    """
    kind = field_kind(kind)
    rho = _state(rho)
    p = hermitian_entries(param)
    _same_dim(rho.dim, ("param", p))
    v = field_raw(kind, p, rho.entries, rho.normalized)
    traceless = kind is FieldKind.X_unitary or rho.normalized
    return TangentVector(HermitianOperator(v), traceless=traceless)


def fundamental_field(action: str, a, b, rho: FaithfulState) -> TangentVector:
    """Fundamental field of ``action`` for the generator ``(a, b)``: ``V_a + X_b``."""
    action = action_name(action)
    if action == "unitary":
        raise ContractError("fundamental_field takes one of gl, wy, cotangent")
    v = field(GRADIENT_KIND[action], a, rho)
    x = field(FieldKind.X_unitary, b, rho)
    return TangentVector(HermitianOperator(la.herm(v.entries + x.entries)), traceless=v.traceless)


def expectation(a, rho: FaithfulState) -> float:
    """``f_a(rho) = Tr(rho a)``."""
    rho = _state(rho)
    a_ = hermitian_entries(a)
    _same_dim(rho.dim, ("a", a_))
    val = np.trace(rho.entries @ a_)
    scale = 1e-12 * max(1.0, float(np.sum(np.abs(rho.entries) * np.abs(a_.T))))
    if abs(val.imag) > scale:
        raise ValidationError(f"expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)


def one_parameter_element(action: str, a, b, t: float):
    """Group element at time ``t`` on the curve generating ``V_a + X_b``.

    ``gl``/``wy``: ``exp(t (a + i b) / 2)``; ``cotangent``:
    ``(exp(i t b / 2), t a)``.
    """
    action = action_name(action)
    a_ = hermitian_entries(a)
    b_ = hermitian_entries(b)
    if action == "cotangent":
        beta, v = np.linalg.eigh(b_)
        u = (v * np.exp(0.5j * t * beta)) @ v.conj().T
        return CotangentElement(u, HermitianOperator(t * a_))
    if action == "unitary":
        raise ContractError("use gl, wy or cotangent")
    return GLElement(scipy.linalg.expm(0.5 * t * (a_ + 1j * b_)))
