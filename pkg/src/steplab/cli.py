"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numerical failure. Outputs go to
files under --out; standard output carries one summary line per run so the
CSV contracts stay bit-stable.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path

from . import descent, experiments, operators
from .errors import NumericalError

METHODS = ("constant", "sd", "lsd", "alternating", "nesterov", "cg")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="steplab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("table1", help="maximum LSD step size per grid size")
    add_out(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=100_000)

    p = sub.add_parser("compare", help="SD/LSD/CG/Nesterov on one Poisson grid")
    add_out(p)
    p.add_argument("--m", type=int, default=63)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--beta", type=float, default=0.95, help="momentum parameter")

    p = sub.add_parser("filter-curves", help="exponential and Tikhonov filter curves")
    add_out(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.5)

    p = sub.add_parser("midpoint-search", help="midpoint instability witness search")
    add_out(p)
    p.add_argument("--gamma", type=float, default=1.0)

    p = sub.add_parser("descent", help="one iterative run with a chosen step rule")
    add_out(p)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--m", type=int, default=63)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--alpha", type=float, help="step size for --method constant")
    p.add_argument("--beta", type=float, default=0.95, help="momentum for --method nesterov")
    p.add_argument("--ferr", action="store_true", help="record f(x_k) - f(x*) (runs the oracle)")

    p = sub.add_parser("solve", help="reference solve of the Poisson system")
    add_out(p)
    p.add_argument("--m", type=int, default=63)
    p.add_argument("--tol", type=float, default=1e-12)

    return parser


def _run_spec_command(name: str, out_dir, **overrides) -> dict:
    spec = experiments.default_spec(name, **overrides)
    return experiments.run_experiment(spec, out_dir)


def _cmd_table1(args) -> int:
    entry = _run_spec_command("table1", args.out, tol=args.tol, max_iter=args.max_iter)
    experiments.write_manifest(args.out, [entry])
    print(f"table1: wrote {entry['outputs'][0]['file']} to {args.out}")
    return 0


def _cmd_compare(args) -> int:
    entry = _run_spec_command("fig_compare", args.out, m=args.m, tol=args.tol,
                              momentum=args.beta)
    experiments.write_manifest(args.out, [entry])
    print(f"compare: wrote compare.csv for m={args.m} to {args.out}")
    return 0


def _cmd_filter_curves(args) -> int:
    entry = _run_spec_command("fig_filter", args.out, t=args.t, beta=args.beta)
    experiments.write_manifest(args.out, [entry])
    print(f"filter-curves: wrote filter_curves.csv (t={args.t:g}, beta={args.beta:g})")
    return 0


def _cmd_midpoint_search(args) -> int:
    spec = experiments.default_spec("midpoint_search", gamma=args.gamma)
    report = experiments.run_midpoint_search(spec)
    failed = [pt for pt in report.points if pt.error is not None]
    if failed:
        pt = failed[0]
        raise NumericalError(
            f"midpoint-search failed at point (p={pt.p:g}, c={pt.c:g}): {pt.error}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    text_path = out_dir / "midpoint_search.csv"
    report.to_csv(text_path)
    digest = hashlib.sha256(text_path.read_bytes()).hexdigest()
    entry = {"name": spec.name, "spec": spec.to_dict(),
             "outputs": [{"file": "midpoint_search.csv", "sha256": digest}]}
    experiments.write_manifest(args.out, [entry])
    n_wit = len(report.witnesses())
    print(f"midpoint-search: {n_wit} witness point(s) flagged out of {len(report.points)}")
    return 0


def _build_policy(args) -> descent.StepPolicy:
    if args.method == "constant":
        if args.alpha is None:
            raise UsageError("--method constant requires --alpha")
        return descent.ConstantStep(args.alpha)
    if args.method == "sd":
        return descent.SteepestDescentStep()
    if args.method == "lsd":
        return descent.LaggedSteepestDescentStep()
    return descent.AlternatingSDStep()


def _cmd_descent(args) -> int:
    obj = experiments.poisson_objective(args.m)
    cfg = descent.RunConfig(tol=args.tol, max_iter=args.max_iter,
                            record_ferr=args.ferr)
    if args.method == "nesterov":
        trace = descent.nesterov(obj, args.beta, cfg)
    elif args.method == "cg":
        trace = descent.conjugate_gradient(obj, cfg)
    else:
        trace = descent.gradient_descent(obj, _build_policy(args), cfg,
                                         method=args.method)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "trace.csv"
    trace.to_csv(path)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    params = {"method": args.method, "m": args.m, "tol": args.tol,
              "max_iter": args.max_iter, "alpha": args.alpha,
              "beta": args.beta, "ferr": args.ferr}
    entry = {"name": "descent", "spec": {"name": "descent", "parameters": params},
             "outputs": [{"file": "trace.csv", "sha256": digest}]}
    experiments.write_manifest(args.out, [entry])
    if trace.diverged:
        raise NumericalError(
            f"descent ({args.method}, m={args.m}) diverged after "
            f"{trace.iterations} iterations")
    status = "converged" if trace.converged else "hit the iteration cap"
    if trace.iterations:
        print(f"descent {args.method} m={args.m}: {status} after "
              f"{trace.iterations} iterations, final Er {trace.er[-1]:.3e}")
    else:
        print(f"descent {args.method} m={args.m}: initial iterate already converged")
    return 0


def _cmd_solve(args) -> int:
    obj = experiments.poisson_objective(args.m)
    x = operators.solve_reference(obj, args.tol)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "solution.csv"
    with open(path, "w", newline="") as fh:
        fh.write("i,x\n")
        for i, value in enumerate(x):
            fh.write(f"{i},{value:.17g}\n")
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    params = {"m": args.m, "tol": args.tol}
    entry = {"name": "solve", "spec": {"name": "solve", "parameters": params},
             "outputs": [{"file": "solution.csv", "sha256": digest}]}
    experiments.write_manifest(args.out, [entry])
    print(f"solve m={args.m}: f(x*) = {obj.fstar_cache:.12g}")
    return 0


_COMMANDS = {
    "table1": _cmd_table1,
    "compare": _cmd_compare,
    "filter-curves": _cmd_filter_curves,
    "midpoint-search": _cmd_midpoint_search,
    "descent": _cmd_descent,
    "solve": _cmd_solve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"steplab: error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"steplab: error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"steplab: numerical failure in '{args.command}': {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
