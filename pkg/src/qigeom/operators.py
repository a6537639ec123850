"""Validated Hermitian and state types plus the spectral calculus built on them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _linalg as la
from .errors import (
    DomainError,
    FaithfulnessError,
    HermiticityError,
    ShapeError,
    ValidationError,
)
from .kernels import DEGENERACY_RTOL, expdd_kernel

HERMITIAN_RTOL = 1e-12
FAITHFUL_RTOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


def _square(a, what="matrix"):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ShapeError(f"{what} must be a non-empty square matrix, got shape {a.shape}")
    return a


def hermiticity_tolerance(a: np.ndarray) -> float:
    n = a.shape[-1]
    return HERMITIAN_RTOL * n * float(np.max(np.abs(a), initial=0.0))


def check_hermitian(a: np.ndarray, what="matrix") -> None:
    """Raise :class:`HermiticityError` naming the worst offending entry."""
    dev = np.abs(a - a.conj().T)
    tol = hermiticity_tolerance(a)
    if dev.max(initial=0.0) > tol:
        i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
        raise HermiticityError(
            f"{what} is not Hermitian: entry ({i},{j}) = {complex(a[i, j])} but "
            f"conj of entry ({j},{i}) = {complex(np.conj(a[j, i]))} (tolerance {tol:.3e})"
        )


def as_array(x) -> np.ndarray:
    """Return the complex entries of any operator-like value."""
    if isinstance(x, (HermitianOperator, TangentVector, FaithfulState)):
        return x.entries
    return np.asarray(x, dtype=np.complex128)


def hermitian_entries(x) -> np.ndarray:
    """Entries of ``x``, validating Hermiticity unless ``x`` is already typed."""
    if isinstance(x, (HermitianOperator, TangentVector, FaithfulState)):
        return x.entries
    return HermitianOperator(x).entries


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A dense ``n x n`` complex matrix equal to its conjugate transpose."""

    entries: np.ndarray

    def __post_init__(self):
        a = _square(self.entries)
        if not np.all(np.isfinite(a)):
            raise ValidationError("matrix has non-finite entries")
        a = _frozen(a)
        check_hermitian(a)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True, eq=False)
class TangentVector:
    base: HermitianOperator
    traceless: bool = False

    def __post_init__(self):
        if not isinstance(self.base, HermitianOperator):
            object.__setattr__(self, "base", HermitianOperator(self.base))
        if self.traceless:
            a = self.base.entries
            tol = HERMITIAN_RTOL * self.dim * float(np.max(np.abs(a), initial=0.0))
            tr = abs(np.trace(a))
            if tr > tol:
                raise ValidationError(f"tangent flagged traceless has |Tr| = {tr:.3e} > {tol:.3e}")

    @property
    def entries(self) -> np.ndarray:
        return self.base.entries

    @property
    def dim(self) -> int:
        return self.base.dim

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True, eq=False)
class FaithfulState:
    """A strictly positive density operator, trace one when ``normalized``."""

    matrix: HermitianOperator
    normalized: bool = True
    _eig: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.matrix, HermitianOperator):
            object.__setattr__(self, "matrix", HermitianOperator(self.matrix))
        a = self.matrix.entries
        w, u = np.linalg.eigh(a)
        top = float(w[-1])
        floor = FAITHFUL_RTOL * max(top, 0.0)
        if top <= 0.0 or w[0] <= floor:
            k = int(np.argmin(w))
            raise FaithfulnessError(
                f"state is not faithful: eigenvalue #{k} = {float(w[k])!r} is not above "
                f"the floor {floor:.3e}"
            )
        if self.normalized:
            tr = np.trace(a).real
            if abs(tr - 1.0) > FAITHFUL_RTOL * self.dim:
                raise ValidationError(f"normalized state has trace {float(tr)!r}, expected 1")
        w.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "_eig", (w, u))

    @property
    def entries(self) -> np.ndarray:
        return self.matrix.entries

    @property
    def dim(self) -> int:
        return self.matrix.dim

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._eig[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._eig[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def make_state(a, normalized: bool | None = None) -> FaithfulState:
    """Build a :class:`FaithfulState`, inferring ``normalized`` from the trace if omitted."""
    h = a if isinstance(a, HermitianOperator) else HermitianOperator(as_array(a))
    if normalized is None:
        normalized = abs(h.trace() - 1.0) <= FAITHFUL_RTOL * h.dim
    return FaithfulState(h, normalized)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        return la.from_eig(self.eigenvalues, self.eigenvectors)


@dataclass(frozen=True)
class RandomSpec:
    seed: int
    dim: int
    min_eigenvalue: float = 1e-3

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ValidationError(f"dim must be a positive integer, got {self.dim!r}")
        if not 0.0 < self.min_eigenvalue < 1.0 / self.dim:
            raise ValidationError(
                f"min_eigenvalue must lie in (0, 1/dim) = (0, {1.0 / self.dim:g}), "
                f"got {self.min_eigenvalue!r}"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")


def _is_degenerate(x, y):
    return abs(x - y) <= DEGENERACY_RTOL * (1.0 + abs(x) + abs(y))


def _fix_cluster(vecs: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(vecs) obtained from the standard basis in order."""
    n, k = vecs.shape
    proj = vecs @ vecs.conj().T
    basis = []
    for i in range(n):
        v = proj[:, i].copy()
        for _ in range(2):
            for b in basis:
                v -= b * np.vdot(b, v)
        nv = np.linalg.norm(v)
        if nv > 1e-3:
            basis.append(v / nv)
        if len(basis) == k:
            break
    return np.column_stack(basis)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    mag = np.abs(v)
    k = int(np.argmax(mag >= mag.max() * (1 - 1e-12)))
    return v * (np.conj(v[k]) / mag[k])


def spectral_decompose(h) -> SpectralDecomposition:
    """Eigen-decomposition with a reproducible eigenvector choice.

    Eigenvalues are ascending. Each non-degenerate eigenvector is rotated so
    that its first largest-magnitude component is real and positive; each
    degenerate cluster is replaced by the Gram-Schmidt orthonormalization of
    the standard basis vectors projected onto that eigenspace.
    """
    if not isinstance(h, HermitianOperator):
        h = HermitianOperator(as_array(h))
    w, u = np.linalg.eigh(h.entries)
    u = u.copy()
    n = len(w)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and _is_degenerate(w[stop - 1], w[stop]):
            stop += 1
        if stop - start == 1:
            u[:, start] = _fix_phase(u[:, start])
        else:
            u[:, start:stop] = _fix_cluster(u[:, start:stop])
        start = stop
    w.setflags(write=False)
    u.setflags(write=False)
    return SpectralDecomposition(w, u)


_POSITIVE_ONLY = {"sqrt", "log", "pow"}


def _scalar_fn(fn: str, exponent):
    if fn == "sqrt":
        return np.sqrt
    if fn == "log":
        return np.log
    if fn == "exp":
        return np.exp
    if fn == "pow":
        if exponent is None:
            raise ValidationError("fn='pow' needs an exponent")
        e = float(exponent)
        return lambda w: np.power(w, e)
    raise ValidationError(f"unknown matrix function {fn!r}; expected sqrt, log, exp or pow")


def apply_matrix_function(h, fn: str, exponent: float | None = None) -> HermitianOperator:
    """Apply ``fn`` in {"sqrt", "log", "exp", "pow"} through the spectrum of ``h``.

    ``sqrt``, ``log`` and ``pow`` require a strictly positive spectrum.
    """
    a = hermitian_entries(h)
    f = _scalar_fn(fn, exponent)
    w, u = np.linalg.eigh(a)
    if fn in _POSITIVE_ONLY and w[0] <= 0.0:
        raise DomainError(f"{fn} needs a strictly positive spectrum, smallest eigenvalue is {float(w[0])!r}")
    return HermitianOperator(la.herm(la.from_eig(f(w), u)))


def anticommutator_solve(base, y) -> HermitianOperator:
    """Solve ``base @ b + b @ base = y`` for Hermitian ``b``.

    In the eigenbasis of ``base`` with eigenvalues ``beta``,
    ``b_ij = y_ij / (beta_i + beta_j)``.
    """
    B = as_array(base)
    Y = as_array(y)
    _square(B, "base")
    if Y.shape != B.shape:
        raise ShapeError(f"shape mismatch: base {B.shape} vs right-hand side {Y.shape}")
    check_hermitian(B, "base")
    check_hermitian(Y, "right-hand side")
    beta, u = np.linalg.eigh(B)
    if beta[0] <= 0.0:
        raise DomainError(f"base must be strictly positive, smallest eigenvalue is {float(beta[0])!r}")
    return HermitianOperator(la.herm(_anticomm_solve_raw(beta, u, Y)))


def _anticomm_solve_raw(beta, u, y):
    return la.sandwich(u, 1.0 / (beta[..., :, None] + beta[..., None, :]), y)


def dexp_direction(A, a) -> HermitianOperator:
    """Directional derivative of ``exp`` at ``A`` along ``a``.

    Equals ``int_0^1 e^{sA} a e^{(1-s)A} ds``, evaluated with the divided
    differences of ``exp`` in the eigenbasis of ``A``.
    """
    A_ = as_array(A)
    a_ = as_array(a)
    _square(A_, "A")
    if a_.shape != A_.shape:
        raise ShapeError(f"shape mismatch: A {A_.shape} vs direction {a_.shape}")
    check_hermitian(A_, "A")
    check_hermitian(a_, "direction")
    return HermitianOperator(la.herm(_dexp_raw(A_, a_)))


def _dexp_raw(A, a):
    x, u = la.eigh(A)
    return la.sandwich(u, expdd_kernel(x), a)
