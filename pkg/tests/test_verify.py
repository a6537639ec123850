import json
import time

import numpy as np
import pytest

from qigeom import (
    CheckReport,
    HermitianOperator,
    RandomSpec,
    StepTooLargeError,
    SuiteConfig,
    ValidationError,
    bracket_fd,
    calibrate_commutator_order,
    check_commutation,
    check_degeneracies,
    check_gradient_identity,
    check_isometry,
    check_orbit_flow,
    field,
    make_state,
    run_suite,
    sample_random,
)
from qigeom.verify import (
    SUITES,
    commutator_order,
    flow_trajectory,
    make_report,
    suite_checks,
    z_field_quadrature,
)

import oracles

NAMES = ["bh", "wy", "bkm"]


def _spec_objs(seed=0, n=3):
    spec = RandomSpec(seed, n)
    return spec, sample_random(spec, "state"), sample_random(spec, "observable", 0), sample_random(spec, "observable", 1)


def test_report_invariants():
    r = make_report("x", {"dim": 2}, [1e-3, 2e-3], 1e-2, 2)
    assert r.passed and r.max_abs_err == 2e-3
    assert not make_report("x", {}, [np.nan], 1.0, 1).passed
    assert make_report("x", {}, [np.nan], 1.0, 1).to_dict()["max_abs_err"] is None
    with pytest.raises(ValidationError):
        CheckReport("x", {}, 0.0, 1.0, True, 0)


def test_suite_config_validation():
    with pytest.raises(ValidationError):
        SuiteConfig(dims=(1, 2))
    with pytest.raises(ValidationError):
        SuiteConfig(trials_per_check=0)
    with pytest.raises(ValidationError):
        SuiteConfig(suites=("nope",))


# ---- brackets


def test_bracket_with_itself_vanishes():
    _, rho, b, _ = _spec_objs()
    br = bracket_fd(("X", b), ("X", b), rho)
    assert np.linalg.norm(br.entries) <= 1e-12


def test_bracket_xx_closed_form():
    _, rho, b, c = _spec_objs(4)
    br = bracket_fd(("X", b), ("X", c), rho).entries
    r, bb, cc = rho.entries, b.entries, c.entries
    expected = -0.25 * (r @ (bb @ cc - cc @ bb) - (bb @ cc - cc @ bb) @ r)
    assert np.linalg.norm(br - expected) <= 1e-6
    # equivalently X at parameter (i/2)[c,b]
    alt = field("X", HermitianOperator(0.5j * (cc @ bb - bb @ cc)), rho).entries
    assert np.linalg.norm(br - alt) <= 1e-6


def test_qubit_bracket_example():
    rho = sample_random(RandomSpec(9, 2), "state")
    br = bracket_fd(("X", oracles.SZ), ("Y", oracles.SX), rho).entries
    assert np.linalg.norm(br - field("Y", oracles.SY, rho).entries) <= 1e-6


def test_bracket_step_too_large():
    rho = make_state(np.diag([0.999, 0.001]))
    with pytest.raises(StepTooLargeError):
        bracket_fd(("Y", oracles.SZ * 5), ("Y", oracles.SX), rho, h=1.0)


def test_calibration_picks_derived_order():
    order, chosen, other = calibrate_commutator_order()
    assert order == -1 == commutator_order()
    assert chosen <= 1e-9 < 1e-2 <= other


@pytest.mark.parametrize("name", NAMES)
def test_check_commutation_examples(name):
    _, rho, a, _ = _spec_objs(2)
    assert check_commutation(name, a, a, rho).max_abs_err <= 1e-9
    assert check_commutation(name, np.eye(3), a, rho).max_abs_err <= 1e-9
    qubit = sample_random(RandomSpec(1, 2), "state")
    rep = check_commutation(name, oracles.SZ, oracles.SX, qubit)
    assert rep.passed and rep.params["commutant"] == "(i/2)[a,b]"


@pytest.mark.parametrize("name", NAMES)
def test_check_commutation_random(name):
    for seed in range(3):
        spec, rho, a, b = _spec_objs(seed, 2 + seed)
        assert check_commutation(name, b, a, rho).passed


# ---- single-instance checks


@pytest.mark.parametrize("name", NAMES)
def test_check_gradient_identity_and_isometry(name):
    spec, rho, a, _ = _spec_objs(5, 4)
    x, y = sample_random(spec, "tangent", 0), sample_random(spec, "tangent", 1)
    assert check_gradient_identity(name, rho, a, x).passed
    assert check_gradient_identity(name, rho, np.eye(4), x).max_abs_err <= 1e-15
    assert check_gradient_identity(name, rho, a, np.zeros((4, 4))).max_abs_err == 0.0
    u = sample_random(spec, "unitary")
    assert check_isometry(name, rho, x, y, u).passed
    assert check_isometry(name, rho, x, y, np.eye(4)).max_abs_err <= 1e-15


def test_isometry_permutation_on_diagonal_state():
    rho = make_state(np.diag([0.5, 0.3, 0.2]))
    perm = np.eye(3)[[2, 0, 1]]
    x = np.diag([1.0, -0.5, -0.5]) + 0.1 * (oracles.rand_traceless(np.random.default_rng(0), 3))
    for name in NAMES:
        assert check_isometry(name, rho, x, x, perm).max_abs_err <= 1e-14


@pytest.mark.parametrize("dim", [2, 3, 5])
def test_check_degeneracies(dim):
    assert check_degeneracies(RandomSpec(dim, dim)).passed


def test_z_vanishes_on_qubit_projector():
    p = np.diag([1.0, 0.0]).astype(complex)
    assert np.linalg.norm(z_field_quadrature(oracles.SX, p)) <= 1e-12


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("n", [2, 3])
def test_check_orbit_flow(name, n):
    spec = RandomSpec(17, n)
    rho, a = sample_random(spec, "state"), sample_random(spec, "observable")
    rep = check_orbit_flow(name, a, rho)
    assert rep.passed
    assert 3.5 <= rep.params["order"] <= 4.5


def test_orbit_flow_gauge_direction_is_constant():
    rho = sample_random(RandomSpec(1, 3), "state")
    rep = check_orbit_flow("bkm", np.eye(3) * 0.5, rho)
    assert rep.max_abs_err <= 1e-13 and rep.params["order"] is None


def test_commuting_bkm_flow_matches_scalar_orbit():
    rho = make_state(np.diag([0.7, 0.3]))
    rows = flow_trajectory("bkm", np.diag([0.5, -0.5]), rho, 1.0, 64)
    t, f, dev, mins = rows[-1]
    assert t == 1.0 and dev <= 1e-9
    # f_a = p1/2 - p2/2 = p1 - 1/2
    assert f == pytest.approx(oracles.BKM_ORBIT_T1 - 0.5, abs=1e-9)
    assert all(r1[1] <= r2[1] + 1e-15 for r1, r2 in zip(rows, rows[1:]))
    assert min(r[3] for r in rows) > 0


def test_orbit_flow_rejects_large_horizon():
    rho = sample_random(RandomSpec(1, 2), "state")
    with pytest.raises(ValidationError):
        check_orbit_flow("bh", oracles.SZ * 3, rho, t_max=1.0)


# ---- suite


def test_every_suite_has_checks():
    for s in SUITES:
        assert suite_checks((s,))


def test_smoke_run_is_fast():
    run_suite(SuiteConfig(dims=(2,), trials_per_check=1))  # warm-up
    t = time.perf_counter()
    reports = run_suite(SuiteConfig(dims=(2,), trials_per_check=1))
    assert time.perf_counter() - t < 1.0
    assert reports and all(r.trials >= 1 for r in reports)


def _dump(reports):
    return "\n".join(json.dumps(r.to_dict()) for r in reports)


def test_suite_is_deterministic_across_runs_and_workers():
    cfg = dict(seed=42, dims=(2, 3), trials_per_check=3)
    a = _dump(run_suite(SuiteConfig(**cfg)))
    b = _dump(run_suite(SuiteConfig(**cfg)))
    c = _dump(run_suite(SuiteConfig(**cfg, workers=4)))
    assert a == b == c
    assert a != _dump(run_suite(SuiteConfig(**{**cfg, "seed": 43})))


def test_suite_records_failures_without_aborting():
    reports = run_suite(SuiteConfig(dims=(2,), trials_per_check=2, suites=("actions",), tolerances={"tangency": 0.0, "gauge_invariance": -1.0}))
    failed = {r.check_name for r in reports if not r.passed}
    assert "gauge_invariance" in failed
    assert any(r.check_name == "z_field_quadrature" and r.passed for r in reports)


def test_suite_sorted_by_check_then_dim():
    reports = run_suite(SuiteConfig(dims=(3, 2), trials_per_check=1, suites=("degeneracy",)))
    keys = [(r.check_name, r.params["dim"]) for r in reports]
    assert keys == sorted(keys)


def test_tol_scale_applies_to_defaults():
    reports = run_suite(SuiteConfig(dims=(2,), trials_per_check=1, suites=("degeneracy",), tol_scale=10.0))
    z = next(r for r in reports if r.check_name == "z_pure")
    assert z.tol == pytest.approx(1e-9)
