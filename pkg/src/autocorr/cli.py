"""Command-line front end.

Every subcommand prints a JSON report on stdout.  Exit status is 0 on
success, 2 for invalid input and 1 for anything unexpected.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from . import extremality, functional, matrix_spec, optimizer
from .errors import AutocorrError, DimensionMismatchError
from .grid_fn import GridFunction, l1_norm, shape_class, support_hull
from .io import (
    dumps,
    function_to_dict,
    functional_report_to_dict,
    load_function,
    load_matrix,
    matrix_to_dict,
    save_function,
    write_curve_csv,
)

log = logging.getLogger("autocorr")


class UsageError(AutocorrError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _matrix(args) -> matrix_spec.ShiftMatrix:
    if args.matrix:
        if args.preset not in (None, "custom"):
            raise UsageError("--matrix conflicts with --preset " + args.preset)
        return load_matrix(args.matrix)
    if args.preset == "bs" or args.preset is None:
        return matrix_spec.bs_preset()
    if args.preset == "identity_n":
        if args.n is None:
            raise UsageError("--preset identity_n needs --n")
        return matrix_spec.identity_preset(args.n)
    raise UsageError("--preset custom needs --matrix")


def _function(args) -> GridFunction:
    if not args.function:
        raise UsageError("--function is required")
    return load_function(args.function)


def _params(args) -> optimizer.AscentParams:
    p = optimizer.AscentParams(seed=args.seed)
    if args.tol is not None:
        p = replace(p, tol=args.tol)
    if args.max_iters is not None:
        p = replace(p, max_iters=args.max_iters)
    if args.bump_height is not None:
        p = replace(p, bump_height=args.bump_height)
    if args.refine_depth is not None:
        p = replace(p, refine_depth=args.refine_depth)
    return p


# -- subcommands ----------------------------------------------------------------


def cmd_eval(args):
    f, A = _function(args), _matrix(args)
    if args.t is None:
        raise UsageError("--t is required")
    value = functional.shifted_product_integral(f, A, args.t)
    out = {"t": args.t, "value": value, "l1_norm": l1_norm(f)}
    if args.x is not None:
        out["f_at_x"] = f(args.x)
        out["S"] = extremality.sum_product_S(f, A, args.x, args.t)
    return out


def cmd_curve(args):
    f, A = _function(args), _matrix(args)
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    points = functional.correlation_curve(f, A, args.samples)
    if args.out:
        write_curve_csv(points, args.out)
    return {"samples": args.samples, "out": args.out,
            "curve": [[t.coords[0], g] for t, g in points]}


def cmd_minmax(args):
    f, A = _function(args), _matrix(args)
    lo = functional.min_over_shifts(f, A, tgrid=args.tgrid)
    hi = functional.max_over_shifts(f, A, tgrid=args.tgrid)
    return {"min_value": lo.value, "argmin_t": lo.t, "max_value": hi.value,
            "argmax_t": hi.t, "method": lo.method}


def cmd_ratio(args):
    f, A = _function(args), _matrix(args)
    rep = functional.ratio(f, A, tgrid=args.tgrid)
    out = functional_report_to_dict(rep)
    if A.d == 1:
        out["averaging_upper_bound"] = functional.averaging_upper_bound(f, A)
    return out


def cmd_extremality(args):
    f, A = _function(args), _matrix(args)
    rep = extremality.check_conditions(f, A, args.xres, widen_x2=args.widen_x2,
                                       tol=args.tol if args.tol is not None else 1e-9,
                                       tgrid=args.tgrid)
    return rep.to_dict()


def cmd_shape(args):
    f = _function(args)
    tol = args.tol if args.tol is not None else 0.0
    out = {"shape": shape_class(f, tol)}
    hull = support_hull(f)
    out["support"] = [hull.left, hull.right]
    if out["shape"].value in ("convex", "concave"):
        A = _matrix(args)
        out["specialization"] = extremality.check_shape_specialization(f, A, args.xres, tol).to_dict()
    return out


def cmd_rank(args):
    A = _matrix(args)
    v = matrix_spec.finiteness_check(A, args.tol if args.tol is not None else 1e-10)
    return {"matrix": matrix_to_dict(A), "B": matrix_spec.build_B(A).tolist(),
            "verdict": v.tag, "rank_of_B": v.rank_of_B, "singular_values": list(v.singular_values)}


def cmd_bl(args):
    A = _matrix(args)
    res = matrix_spec.bl_constant(A)
    out = {"D": res.D, "lambda": list(res.lam), "gauge": res.gauge}
    try:
        out["ratio_bound"] = matrix_spec.bl_ratio_bound(A)
    except AutocorrError as exc:
        out["ratio_bound"] = None
        out["note"] = str(exc)
    return out


def cmd_optimize(args):
    A = _matrix(args)
    params = _params(args)
    if args.function:
        f, trace = optimizer.perturb_ascent(load_function(args.function), A, params)
        rep = functional.ratio(f, A)
        out = {"mode": "single", "restart_ratios": [rep.ratio], "best_index": 0}
    else:
        res = optimizer.random_restart_search(A, args.restarts, args.m, args.h, params)
        f, trace, rep = res.f, res.trace, res.report
        out = {"mode": "random_restart", "restart_ratios": res.restart_ratios,
               "best_index": res.best_index}
    if args.out:
        optimizer.save_trace(trace, args.out)
    if args.save_function:
        save_function(f, args.save_function)
    out.update({"ratio": rep.ratio, "report": functional_report_to_dict(rep),
                "function": function_to_dict(f), "seed": args.seed,
                "iterations": len(trace), "trace": args.out})
    return out


def cmd_oracle(args):
    A = _matrix(args)
    f, r = optimizer.brute_force_oracle(A, args.m, args.h, args.values)
    return {"ratio": r, "function": function_to_dict(f), "m": args.m, "h": args.h,
            "values": sorted(set(args.values))}


COMMANDS = {
    "eval": (cmd_eval, "evaluate the functional at one shift point"),
    "curve": (cmd_curve, "sample g(t) on [0, 1] (CSV via --out)"),
    "minmax": (cmd_minmax, "min and max of the functional over the shift cube"),
    "ratio": (cmd_ratio, "normalised minimum (the ratio) and its report"),
    "extremality": (cmd_extremality, "check both necessary extremality conditions"),
    "shape": (cmd_shape, "convexity class and the convex/concave specialization"),
    "rank": (cmd_rank, "rank test on the ones-augmented matrix"),
    "bl": (cmd_bl, "Brascamp-Lieb constant D and the bound 1/sqrt(D)"),
    "optimize": (cmd_optimize, "perturbation ascent / random-restart search"),
    "oracle": (cmd_oracle, "exhaustive search over a finite value set"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--function", help="function file (JSON or CSV)")
    common.add_argument("--matrix", help="shift matrix file (JSON)")
    common.add_argument("--preset", choices=["bs", "identity_n", "custom"])
    common.add_argument("--n", type=int, help="size for --preset identity_n")
    common.add_argument("--tol", type=float)
    common.add_argument("--tgrid", type=int, help="grid resolution per axis for d >= 2")
    common.add_argument("--xres", type=float, help="x scan spacing (default: h for extremality, h/2 for shape)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file (curve CSV or optimizer trace)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="autocorr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "eval":
            p.add_argument("--t", type=_floats)
            p.add_argument("--x", type=float, help="also report f(x) and S(x, t)")
        elif name == "curve":
            p.add_argument("--samples", type=int, default=101)
        elif name == "extremality":
            p.add_argument("--widen-x2", action="store_true",
                           help="also scan x2 over the padded support hull")
        elif name == "optimize":
            p.add_argument("--restarts", type=int, default=1)
            p.add_argument("--m", type=int, default=64)
            p.add_argument("--h", type=float, default=1 / 16)
            p.add_argument("--max-iters", type=int)
            p.add_argument("--bump-height", type=float)
            p.add_argument("--refine-depth", type=int)
            p.add_argument("--save-function", help="write the best function here")
        elif name == "oracle":
            p.add_argument("--m", type=int, default=3)
            p.add_argument("--h", type=float, default=1.0)
            p.add_argument("--values", type=_floats, default=[0.0, 1.0, 2.0])
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            stream=stderr, format="%(name)s: %(message)s")
        out = COMMANDS[args.command][0](args)
    except AutocorrError as exc:
        print(f"autocorr: error: {exc}", file=stderr)
        return 2
    except (ValueError, argparse.ArgumentTypeError) as exc:
        print(f"autocorr: error: {exc}", file=stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"autocorr: internal error: {exc!r}", file=stderr)
        return 1
    stdout.write(dumps({"command": args.command, **out}, indent=2) + "\n")
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
