"""Seeded random states, observables, tangents and group elements."""

import numpy as np

from . import _linalg as la
from .operators import FaithfulState, HermitianOperator, RandomSpec, TangentVector
from .errors import ValidationError

KINDS = ("state", "observable", "tangent", "unitary", "gl")
GL_CONDITION_CAP = 100.0


def _gaussian(rng, n):
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)


def draw_unitary(rng, n):
    """Haar unitary: QR of a complex Gaussian with the phases of diag(R) divided out."""
    q, r = np.linalg.qr(_gaussian(rng, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def draw_state_matrix(rng, n, min_eigenvalue=1e-3):
    w = rng.standard_exponential(n)
    w /= w.sum()
    p = min_eigenvalue + (1.0 - n * min_eigenvalue) * w
    u = draw_unitary(rng, n)
    return la.herm(la.from_eig(p, u))


def draw_observable_matrix(rng, n):
    h = la.herm(_gaussian(rng, n))
    return h / la.frob(h)


def draw_tangent_matrix(rng, n):
    h = la.herm(_gaussian(rng, n))
    h = h - (np.trace(h).real / n) * np.eye(n)
    return h / la.frob(h)


def draw_gl_matrix(rng, n, cap=GL_CONDITION_CAP):
    while True:
        g = _gaussian(rng, n)
        if np.linalg.cond(g) <= cap:
            return g


def _stream(spec: RandomSpec, kind: str, index: int):
    code = KINDS.index(kind)
    return np.random.default_rng(np.random.SeedSequence([int(spec.seed), code, int(index)]))


def sample_random(spec: RandomSpec, kind: str, index: int = 0):
    """Draw one random object of ``kind`` from the stream ``(seed, kind, index)``.

    Parameters
    ----------
    spec : RandomSpec
        Seed, dimension and eigenvalue floor for states.
    kind : {"state", "observable", "tangent", "unitary", "gl"}
    index : int
        Draw index; distinct indices give independent draws.

    Returns
    -------
    FaithfulState, HermitianOperator, TangentVector or GLElement
        States are normalized with every eigenvalue at least
        ``spec.min_eigenvalue``; observables and tangents have unit Frobenius
        norm and tangents are traceless; ``gl`` draws have condition number at
        most 100.
    """
    if kind not in KINDS:
        raise ValidationError(f"unknown kind {kind!r}; expected one of {KINDS}")
    rng = _stream(spec, kind, index)
    n = spec.dim
    if kind == "state":
        return FaithfulState(HermitianOperator(draw_state_matrix(rng, n, spec.min_eigenvalue)), True)
    if kind == "observable":
        return HermitianOperator(draw_observable_matrix(rng, n))
    if kind == "tangent":
        return TangentVector(HermitianOperator(draw_tangent_matrix(rng, n)), traceless=True)

    from .actions import GLElement

    if kind == "unitary":
        return GLElement(draw_unitary(rng, n))
    return GLElement(draw_gl_matrix(rng, n))
