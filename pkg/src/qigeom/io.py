"""Matrix files, JSON-lines reports and trajectory CSVs.

Matrices are stored as ``{"n": n, "re": [[...]], "im": [[...]]}`` in row-major
order, with an optional ``"normalized"`` flag for states. ``json`` writes the
shortest repr of each double, so a save/load cycle is bit-exact.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ParseError, ShapeError
from .operators import FaithfulState, HermitianOperator, TangentVector, make_state

MATRIX_KINDS = ("auto", "hermitian", "state", "general")
TRAJECTORY_HEADER = ("t", "f_a", "orbit_deviation", "min_eigenvalue")


def _real_grid(obj, n, field, path):
    if not isinstance(obj, list) or len(obj) != n:
        got = len(obj) if isinstance(obj, list) else type(obj).__name__
        raise ShapeError(f"{path}: '{field}' must have {n} rows, got {got}")
    out = np.empty((n, n), dtype=float)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != n:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise ShapeError(f"{path}: '{field}' row {i} must have {n} entries, got {got}")
        for j, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError(f"{path}: '{field}'[{i}][{j}] is not a number: {v!r}")
            if not math.isfinite(v):
                raise ParseError(f"{path}: '{field}'[{i}][{j}] is not finite")
            out[i, j] = v
    return out


def read_matrix_json(path) -> tuple:
    """Parse a matrix file into ``(complex array, normalized flag or None)`` without validation."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file ({exc.strerror})") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected a JSON object with keys n, re, im")
    missing = [k for k in ("n", "re", "im") if k not in obj]
    if missing:
        raise ParseError(f"{path}: missing key(s) {', '.join(missing)}")
    n = obj["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParseError(f"{path}: 'n' must be a positive integer, got {n!r}")
    norm = obj.get("normalized")
    if norm is not None and not isinstance(norm, bool):
        raise ParseError(f"{path}: 'normalized' must be true or false, got {norm!r}")
    re = _real_grid(obj["re"], n, "re", path)
    im = _real_grid(obj["im"], n, "im", path)
    return re + 1j * im, norm


def load_matrix(path, kind: str = "auto"):
    """Load and validate a matrix file.

    Parameters
    ----------
    path : str or Path
    kind : {"auto", "hermitian", "state", "general"}
        ``auto`` returns a :class:`FaithfulState` when the file carries a
        ``normalized`` flag and a :class:`HermitianOperator` otherwise.
        ``state`` infers a missing flag from the trace. ``general`` skips
        all checks and returns a complex array (group elements).

    Raises
    ------
    ParseError, ShapeError, HermiticityError, FaithfulnessError
    """
    if kind not in MATRIX_KINDS:
        raise ValueError(f"kind must be one of {MATRIX_KINDS}")
    a, norm = read_matrix_json(path)
    if kind == "general":
        return a
    try:
        h = HermitianOperator(a)
        if kind == "state" or (kind == "auto" and norm is not None):
            return make_state(h, norm)
        return h
    except ValueError as exc:
        # keep the subclass, prefix the file name
        raise type(exc)(f"{path}: {exc}") from exc


def matrix_to_json(x, normalized=None) -> dict:
    if isinstance(x, FaithfulState):
        normalized = x.normalized if normalized is None else normalized
    if isinstance(x, (FaithfulState, HermitianOperator, TangentVector)):
        a = x.entries
    else:
        a = np.asarray(x, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"can only save square matrices, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ParseError("cannot save non-finite entries")
    obj = {"n": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}
    if normalized is not None:
        obj["normalized"] = bool(normalized)
    return obj


def save_matrix(x, path, normalized=None) -> None:
    """Write ``x`` in the matrix file format; states keep their ``normalized`` flag."""
    Path(path).write_text(json.dumps(matrix_to_json(x, normalized)) + "\n")


@contextmanager
def _open_out(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def summary_record(reports) -> dict:
    reports = list(reports)
    passed = sum(1 for r in reports if r.passed)
    return {"summary": {"total": len(reports), "passed": passed, "failed": len(reports) - passed, "pass": passed == len(reports)}}


def report_lines(reports) -> list:
    reports = list(reports)
    lines = [json.dumps(r.to_dict()) for r in reports]
    lines.append(json.dumps(summary_record(reports)))
    return lines


def emit_report(reports, path) -> bool:
    """Write one JSON object per report and a final summary line; return True iff all passed.

    ``path`` of ``"-"`` or None writes to stdout.
    """
    reports = list(reports)
    with _open_out(path) as fh:
        for line in report_lines(reports):
            fh.write(line + "\n")
    return all(r.passed for r in reports)


@dataclass(frozen=True)
class TrajectoryRow:
    t: float
    f_a: float
    orbit_deviation: float
    min_eigenvalue: float


def write_trajectory(rows: Iterable[TrajectoryRow], path) -> None:
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        for r in rows:
            w.writerow([repr(float(r.t)), repr(float(r.f_a)), repr(float(r.orbit_deviation)), repr(float(r.min_eigenvalue))])


def read_trajectory(path) -> list:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if tuple(header) != TRAJECTORY_HEADER:
            raise ParseError(f"{path}: unexpected header {header}")
        return [TrajectoryRow(*map(float, row)) for row in rd]
