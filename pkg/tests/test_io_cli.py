import json
import subprocess
import sys

import numpy as np
import pytest

from qigeom import (
    FaithfulnessError,
    FaithfulState,
    HermiticityError,
    HermitianOperator,
    ParseError,
    RandomSpec,
    ShapeError,
    emit_report,
    load_matrix,
    make_state,
    sample_random,
    save_matrix,
)
from qigeom.cli import main
from qigeom.io import read_trajectory
from qigeom.verify import make_report


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return path


def test_load_projector_example(tmp_path):
    p = _write(tmp_path / "p.json", {"n": 2, "re": [[1, 0], [0, 0]], "im": [[0, 0], [0, 0]]})
    h = load_matrix(p)
    assert isinstance(h, HermitianOperator)
    np.testing.assert_array_equal(h.entries, np.diag([1.0, 0.0]))


def test_load_errors_are_distinct(tmp_path):
    bad_json = tmp_path / "a.json"
    bad_json.write_text('{"n": 2,')
    with pytest.raises(ParseError, match="invalid JSON"):
        load_matrix(bad_json)
    with pytest.raises(ParseError, match="missing key"):
        load_matrix(_write(tmp_path / "b.json", {"n": 2, "re": [[1, 0], [0, 1]]}))
    with pytest.raises(ShapeError, match="row 1"):
        load_matrix(_write(tmp_path / "c.json", {"n": 2, "re": [[1, 0], [0]], "im": [[0, 0], [0, 0]]}))
    with pytest.raises(ParseError, match=r"'im'\[0\]\[1\]"):
        load_matrix(_write(tmp_path / "d.json", {"n": 2, "re": [[1, 0], [0, 1]], "im": [[0, "x"], [0, 0]]}))
    with pytest.raises(HermiticityError, match=r"entry \(0,1\)"):
        load_matrix(_write(tmp_path / "e.json", {"n": 2, "re": [[1, 2], [0, 1]], "im": [[0, 1], [1, 0]]}))
    with pytest.raises(FaithfulnessError, match="eigenvalue #0"):
        load_matrix(_write(tmp_path / "f.json", {"n": 2, "re": [[1, 0], [0, 0]], "im": [[0, 0], [0, 0]], "normalized": True}))
    with pytest.raises(FaithfulnessError):
        load_matrix(tmp_path / "f.json", "state")


def test_load_missing_file(tmp_path):
    with pytest.raises(ParseError, match="cannot read"):
        load_matrix(tmp_path / "nope.json")


def test_roundtrip_100_matrices_bit_exact(tmp_path):
    path = tmp_path / "m.json"
    for k in range(100):
        spec = RandomSpec(k, 2 + k % 5)
        x = sample_random(spec, "state") if k % 2 else sample_random(spec, "observable")
        save_matrix(x, path)
        y = load_matrix(path)
        assert type(y) is type(x)
        assert y.entries.tobytes() == x.entries.tobytes()
        if isinstance(x, FaithfulState):
            assert y.normalized == x.normalized


def test_general_matrix_roundtrip(tmp_path):
    g = sample_random(RandomSpec(3, 4), "gl").entries
    save_matrix(g, tmp_path / "g.json")
    assert load_matrix(tmp_path / "g.json", "general").tobytes() == g.tobytes()


def test_emit_report_empty_and_failing(tmp_path):
    out = tmp_path / "r.jsonl"
    assert emit_report([], out)
    lines = out.read_text().splitlines()
    assert len(lines) == 1 and json.loads(lines[0])["summary"]["total"] == 0
    reps = [make_report("a", {"dim": 2}, [0.5], 1.0, 3), make_report("b", {"dim": 2}, [2.0], 1.0, 3)]
    assert not emit_report(reps, out)
    lines = [json.loads(s) for s in out.read_text().splitlines()]
    assert list(lines[0]) == ["check", "params", "max_abs_err", "tol", "pass", "trials"]
    assert lines[1]["pass"] is False
    assert lines[-1]["summary"] == {"total": 2, "passed": 1, "failed": 1, "pass": False}


# ---- CLI


@pytest.fixture
def files(tmp_path):
    d = {}
    d["half"] = tmp_path / "half.json"
    save_matrix(make_state(np.eye(2) / 2), d["half"])
    d["r"] = tmp_path / "r.json"
    save_matrix(make_state(np.diag([0.9, 0.1])), d["r"])
    d["z"] = tmp_path / "z.json"
    save_matrix(np.diag([0.5, -0.5]), d["z"])
    d["g"] = tmp_path / "g.json"
    save_matrix(np.diag([2.0, 1.0]), d["g"])
    d["a"] = tmp_path / "a.json"
    save_matrix(np.diag([np.log(2.0), 0.0]), d["a"])
    d["u"] = tmp_path / "u.json"
    save_matrix(np.eye(2), d["u"])
    d["dir"] = tmp_path
    return d


def test_cli_metric(files, capsys):
    for name, want in (("bh", 1.0), ("wy", 0.5), ("bkm", 1.0)):
        assert main(["metric", "--name", name, "--state", str(files["half"]), "--x", str(files["z"]), "--y", str(files["z"])]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(want, abs=1e-12)
        args = ["metric", "--name", name, "--state", str(files["half"]), "--x", str(files["z"]), "--y", str(files["z"]), "--fd", "--step", "1e-3"]
        assert main(args) == 0
        assert float(capsys.readouterr().out) == pytest.approx(want, abs=1e-4)


def test_cli_divergence(files, capsys):
    assert main(["divergence", "--name", "bures", "--rho", str(files["half"]), "--sigma", str(files["r"])]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.4222912360003365, rel=1e-12)


def test_cli_act(files):
    out = files["dir"] / "out.json"
    assert main(["act", "--action", "gl", "--g", str(files["g"]), "--state", str(files["half"]), "--out", str(out)]) == 0
    np.testing.assert_allclose(load_matrix(out).entries, np.diag([0.8, 0.2]))
    assert main(["act", "--action", "wy", "--g", str(files["g"]), "--state", str(files["half"]), "--out", str(out)]) == 0
    np.testing.assert_allclose(load_matrix(out).entries, np.diag([16 / 17, 1 / 17]))
    args = ["act", "--action", "cot", "--g", str(files["u"]), "--a", str(files["a"]), "--state", str(files["half"]), "--out", str(out)]
    assert main(args) == 0
    np.testing.assert_allclose(load_matrix(out).entries, np.diag([2 / 3, 1 / 3]))
    assert main(["act", "--action", "u", "--g", str(files["g"]), "--state", str(files["half"]), "--out", str(out)]) == 2


def test_cli_flow(files):
    out = files["dir"] / "traj.csv"
    assert main(["flow", "--name", "bkm", "--state", str(files["r"]), "--obs", str(files["z"]), "--t-max", "1.0", "--steps", "32", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "t,f_a,orbit_deviation,min_eigenvalue"
    rows = read_trajectory(out)
    assert len(rows) == 33 and rows[-1].t == 1.0
    assert all(r.min_eigenvalue > 0 for r in rows)
    assert all(a.t <= b.t for a, b in zip(rows, rows[1:]))
    assert max(r.orbit_deviation for r in rows) < 1e-6


def test_cli_usage_errors(files, capsys):
    assert main(["metric", "--name", "bh", "--state", str(files["z"]), "--x", str(files["z"]), "--y", str(files["z"])]) == 2
    assert "FaithfulnessError" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["metric", "--name", "fisher"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--dims", "1,2"])
    assert exc.value.code == 2


def test_cli_verify_exit_codes_and_determinism(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    args = ["verify", "--suite", "degeneracy", "--dims", "2,3", "--trials", "3", "--seed", "5"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--workers", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    # tightening every tolerance a millionfold makes some check fail
    assert main(args + ["--out", str(b), "--tol-scale", "1e-6"]) == 1
    assert json.loads(b.read_text().splitlines()[-1])["summary"]["failed"] > 0


def test_module_entry_point_stdout_is_deterministic():
    cmd = [sys.executable, "-m", "qigeom", "verify", "--suite", "actions", "--dims", "2", "--trials", "2", "--seed", "9"]
    outs = [subprocess.run(cmd, capture_output=True, text=True) for _ in range(2)]
    assert outs[0].returncode == 0
    assert outs[0].stdout == outs[1].stdout and outs[0].stdout
