import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qigeom import (
    ContractError,
    DomainError,
    RandomSpec,
    StepTooLargeError,
    ValidationError,
    divergence,
    field,
    make_state,
    metric_eval,
    metric_fd,
    metric_gradient,
    metric_kernel,
    sample_random,
)
from qigeom.metrics import FIELD_OF, MetricName, metric_inverse_raw

import oracles

NAMES = ["bh", "wy", "bkm"]
HALF = make_state(np.eye(2) / 2)
Z2 = oracles.SZ / 2
SPOT = {"bh": 1.0, "wy": 0.5, "bkm": 1.0}
seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 6)


@pytest.mark.parametrize("name", NAMES)
def test_qubit_spot_values(name):
    assert metric_eval(name, HALF, Z2, Z2) == pytest.approx(SPOT[name], abs=1e-9)
    assert metric_fd(name, HALF, Z2, Z2, 1e-3) == pytest.approx(SPOT[name], abs=1e-4)


@pytest.mark.parametrize("name", NAMES)
def test_offdiagonal_values_against_frozen(name):
    rho = make_state(np.diag([0.7, 0.3]))
    x = oracles.SX / 2
    assert metric_eval(name, rho, x, x) == pytest.approx(oracles.OFFDIAG_G[name], rel=1e-13)


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("seed", range(3))
def test_metric_eval_matches_loop_oracle(name, seed):
    rng = np.random.default_rng(seed)
    n = 3 + seed
    rho = oracles.rand_state(rng, n)
    x, y = oracles.rand_traceless(rng, n), oracles.rand_traceless(rng, n)
    got = metric_eval(name, make_state(rho), x, y)
    assert got == pytest.approx(oracles.metric_loops(name, rho, x, y), rel=1e-11)


def test_metric_kernel_examples():
    assert metric_kernel("bkm", 0.3, 0.3) == pytest.approx(0.3)
    assert metric_kernel("bkm", 1.0, math.e) == pytest.approx(oracles.E_MINUS_1, rel=1e-14)
    assert metric_kernel("wy", 0.5, 0.5) == pytest.approx(1.0)
    assert metric_kernel("bh", 0.4, 0.4) == pytest.approx(0.4)
    assert metric_kernel("WY", 0.4, 0.4) == pytest.approx(0.8)
    with pytest.raises(DomainError):
        metric_kernel("bh", 0.0, 1.0)
    with pytest.raises(ValidationError):
        metric_kernel("fisher", 1.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(NAMES), st.floats(1e-6, 10), st.floats(1e-6, 10))
def test_metric_kernel_symmetric(name, x, y):
    assert metric_kernel(name, x, y) == pytest.approx(metric_kernel(name, y, x), rel=1e-14)


def test_divergence_examples():
    rho, sigma = HALF, make_state(np.diag([0.9, 0.1]))
    assert divergence("bures", rho, sigma) == pytest.approx(oracles.BURES_PAIR, rel=1e-12)
    assert divergence("vnu", rho, sigma) == pytest.approx(oracles.VNU_PAIR, rel=1e-12)
    assert divergence("wy", rho, sigma) == pytest.approx(oracles.WY_PAIR, rel=1e-12)
    for name in ("bures", "wy", "vnu"):
        assert divergence(name, sigma, sigma) == 0.0


def test_divergence_contract_errors():
    with pytest.raises(ContractError):
        divergence("vnu", HALF, make_state(np.eye(2), normalized=False))
    with pytest.raises(ValidationError):
        divergence("kl", HALF, HALF)


@settings(max_examples=25, deadline=None)
@given(seeds, dims, st.sampled_from(["bures", "wy", "vnu"]))
def test_divergence_nonnegative(seed, n, name):
    spec = RandomSpec(seed, n)
    assert divergence(name, sample_random(spec, "state", 0), sample_random(spec, "state", 1)) >= -1e-12


@settings(max_examples=30, deadline=None)
@given(seeds, dims, st.sampled_from(NAMES))
def test_gradient_identity(seed, n, name):
    spec = RandomSpec(seed, n)
    rho, a, x = sample_random(spec, "state"), sample_random(spec, "observable"), sample_random(spec, "tangent")
    v = field(FIELD_OF[MetricName(name)], a, rho)
    lhs = metric_eval(name, rho, x, v)
    rhs = np.trace(a.entries @ x.entries).real
    assert abs(lhs - rhs) <= 1e-9 * (1 + np.linalg.norm(a.entries) * np.linalg.norm(x.entries))


@settings(max_examples=30, deadline=None)
@given(seeds, dims, st.sampled_from(NAMES))
def test_symmetry_positivity_isometry(seed, n, name):
    spec = RandomSpec(seed, n)
    rho = sample_random(spec, "state")
    x, y = sample_random(spec, "tangent", 0), sample_random(spec, "tangent", 1)
    u = sample_random(spec, "unitary").entries
    g = metric_eval(name, rho, x, y)
    assert g == pytest.approx(metric_eval(name, rho, y, x), abs=1e-12)
    assert metric_eval(name, rho, x, x) >= 1e-12
    rho_u = make_state(u @ rho.entries @ u.conj().T)
    gu = metric_eval(name, rho_u, u @ x.entries @ u.conj().T, u @ y.entries @ u.conj().T)
    assert abs(gu - g) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(seeds, dims, st.sampled_from(NAMES))
def test_metric_gradient_matches_field(seed, n, name):
    spec = RandomSpec(seed, n)
    rho, a = sample_random(spec, "state"), sample_random(spec, "observable")
    v = metric_gradient(name, a, rho)
    assert v.traceless
    assert np.linalg.norm(v.entries - field(FIELD_OF[MetricName(name)], a, rho).entries) <= 1e-10
    rho_u = make_state(rho.entries * 2.5, normalized=False)
    vu = metric_gradient(name, a, rho_u)
    assert np.linalg.norm(vu.entries - field(FIELD_OF[MetricName(name)], a, rho_u).entries) <= 1e-10


@pytest.mark.parametrize("name", NAMES)
def test_metric_gradient_examples(name):
    np.testing.assert_allclose(metric_gradient(name, np.eye(2), HALF).entries, 0, atol=1e-16)
    if name == "bh":
        np.testing.assert_allclose(metric_gradient(name, oracles.SZ, HALF).entries, oracles.SZ / 2, atol=1e-16)


@settings(max_examples=30, deadline=None)
@given(seeds, dims, st.sampled_from(list(MetricName)))
def test_sheet_wellposed(seed, n, name):
    spec = RandomSpec(seed, n)
    rho, y = sample_random(spec, "state"), sample_random(spec, "tangent")
    assert abs(np.trace(rho.entries @ metric_inverse_raw(name, rho.entries, y.entries))) <= 1e-10


def test_metric_eval_contract_errors():
    with pytest.raises(ContractError):
        metric_eval("bh", HALF, np.eye(2), Z2)
    # unnormalized states accept any Hermitian direction
    assert metric_eval("bh", make_state(np.eye(2), normalized=False), np.eye(2), np.eye(2)) == pytest.approx(2.0)


@pytest.mark.parametrize("name", NAMES)
def test_metric_fd_zero_direction_and_step_errors(name):
    assert metric_fd(name, HALF, Z2, np.zeros((2, 2))) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(StepTooLargeError):
        metric_fd(name, HALF, Z2, Z2, h=1.5)
    with pytest.raises(ValidationError):
        metric_fd(name, HALF, Z2, Z2, h=0.0)


@pytest.mark.parametrize("name", NAMES)
def test_metric_fd_quadratic_convergence(name):
    spec = RandomSpec(3, 3, 1e-2)
    rho, x = sample_random(spec, "state"), sample_random(spec, "tangent")
    g = metric_eval(name, rho, x, x)
    gaps = [abs(metric_fd(name, rho, x, x, h) - g) for h in (2e-3, 1e-3)]
    assert gaps[0] / gaps[1] == pytest.approx(4.0, abs=0.5)
    assert gaps[1] / g <= 1e-3
