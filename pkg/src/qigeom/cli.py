"""Command-line entry point: ``qigeom verify|metric|act|flow|divergence``.

Exit status is 0 on success (and, for ``verify``, when every check passed),
1 when a ``verify`` check failed and 2 for usage or validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io
from .actions import CotangentElement, GLElement, act, action_name
from .errors import QIGError, ValidationError
from .metrics import divergence, metric_eval, metric_fd
from .operators import FaithfulState, HermitianOperator
from .verify import SUITES, SuiteConfig, flow_trajectory, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dims(text):
    try:
        dims = tuple(int(d) for d in text.split(",") if d.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not dims or min(dims) < 2:
        raise argparse.ArgumentTypeError("dimensions must be integers >= 2")
    return dims


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qigeom", description="Monotone quantum metrics, group actions and their numerical checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run the randomised check suite")
    v.add_argument("--suite", choices=("all",) + SUITES, default="all")
    v.add_argument("--dims", type=_dims, default=(2, 3, 4, 6))
    v.add_argument("--trials", type=_positive_int, default=100)
    v.add_argument("--seed", type=_seed, default=0)
    v.add_argument("--out", default="-", help="JSON-lines report path ('-' for stdout)")
    v.add_argument("--tol-scale", type=float, default=1.0)
    v.add_argument("--workers", type=_positive_int, default=1)

    m = sub.add_parser("metric", help="evaluate G(X, Y) at a state")
    m.add_argument("--name", choices=("bh", "wy", "bkm"), required=True)
    m.add_argument("--state", required=True)
    m.add_argument("--x", required=True)
    m.add_argument("--y", required=True)
    m.add_argument("--fd", action="store_true", help="use the divergence finite-difference oracle")
    m.add_argument("--step", type=float, default=1e-3)

    a = sub.add_parser("act", help="act on a state with a group element")
    a.add_argument("--action", choices=("u", "gl", "wy", "cot"), required=True)
    a.add_argument("--g", required=True)
    a.add_argument("--a", help="Hermitian translation part (cot only)")
    a.add_argument("--state", required=True)
    a.add_argument("--out", required=True)

    f = sub.add_parser("flow", help="integrate the gradient flow of Tr(rho a)")
    f.add_argument("--name", choices=("bh", "wy", "bkm"), required=True)
    f.add_argument("--state", required=True)
    f.add_argument("--obs", required=True)
    f.add_argument("--t-max", type=float, default=1.0)
    f.add_argument("--steps", type=_positive_int, default=64)
    f.add_argument("--out", required=True)

    d = sub.add_parser("divergence", help="evaluate a divergence between two states")
    d.add_argument("--name", choices=("bures", "wy", "vnu"), required=True)
    d.add_argument("--rho", required=True)
    d.add_argument("--sigma", required=True)
    return p


def _state(path) -> FaithfulState:
    return io.load_matrix(path, "state")


def _hermitian(path) -> HermitianOperator:
    return io.load_matrix(path, "hermitian")


def _cmd_verify(ns) -> int:
    suites = SUITES if ns.suite == "all" else (ns.suite,)
    cfg = SuiteConfig(
        seed=ns.seed, dims=ns.dims, trials_per_check=ns.trials, tol_scale=ns.tol_scale, suites=suites, workers=ns.workers
    )
    reports = run_suite(cfg)
    ok = io.emit_report(reports, ns.out)
    if ns.out != "-":
        print(json.dumps(io.summary_record(reports)))
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_metric(ns) -> int:
    rho = _state(ns.state)
    x, y = _hermitian(ns.x), _hermitian(ns.y)
    if ns.fd:
        val = metric_fd(ns.name, rho, x, y, ns.step)
    else:
        val = metric_eval(ns.name, rho, x, y)
    print(repr(val))
    return EXIT_OK


def _cmd_act(ns) -> int:
    action = action_name(ns.action)
    rho = _state(ns.state)
    g = io.load_matrix(ns.g, "general")
    if action == "cotangent":
        t = _hermitian(ns.a) if ns.a else np.zeros_like(g)
        elem = CotangentElement(g, t)
    else:
        if ns.a:
            raise ValidationError("--a is only used with --action cot")
        elem = GLElement(g)
    out = act(action, elem, rho)
    io.save_matrix(out, ns.out)
    return EXIT_OK


def _cmd_flow(ns) -> int:
    rho = _state(ns.state)
    a = _hermitian(ns.obs)
    rows = flow_trajectory(ns.name, a, rho, ns.t_max, ns.steps)
    io.write_trajectory((io.TrajectoryRow(*r) for r in rows), ns.out)
    return EXIT_OK


def _cmd_divergence(ns) -> int:
    print(repr(divergence(ns.name, _state(ns.rho), _state(ns.sigma))))
    return EXIT_OK


_COMMANDS = {
    "verify": _cmd_verify,
    "metric": _cmd_metric,
    "act": _cmd_act,
    "flow": _cmd_flow,
    "divergence": _cmd_divergence,
}


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return _COMMANDS[ns.command](ns)
    except QIGError as exc:
        print(f"qigeom {ns.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qigeom {ns.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
