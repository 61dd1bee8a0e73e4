"""Command-line interface.

Exit status is 0 on success, 1 when a computation fails and 2 on usage
errors.  Every output carries the tool version, the resolved configuration
and (for random commands) the seed.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from ._format import to_json
from .diagnostics import mixing_curve, si_check
from .exact import Fugacities, dist_side, enum_cap, log_partition_function
from .graph import load_graph
from .ising import reduce, verify_reduction
from .recursion import TreeParams, find_fixpoints
from .samplers import SAMPLERS, FieldDynamicsParams, format_samples, sample
from .uniqueness import (
    closed_form_pair, is_delta_unique, low_temp_threshold, phase_csv, phase_table,
    small_alpha_bound, solve_critical_system,
)

TOOL = "bihc"


class UsageError(Exception):
    pass


def _meta(args: argparse.Namespace) -> dict:
    config = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func", "out") and v is not None}
    return {"tool": TOOL, "version": __version__, "config": config}


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, result: dict) -> None:
    _emit(args, to_json({**_meta(args), "result": result}) + "\n")


def _comment_header(args) -> str:
    meta = _meta(args)
    lines = [f"# tool: {meta['tool']} {meta['version']}"]
    lines += [f"# {k}: {v}" for k, v in meta["config"].items()]
    return "\n".join(lines) + "\n"


def _field_params(args, g) -> FieldDynamicsParams:
    base = FieldDynamicsParams.practical(g, eps=args.eps)
    return FieldDynamicsParams(
        args.theta if args.theta is not None else base.theta,
        args.T if args.T is not None else base.T,
        args.m if args.m is not None else base.m,
        args.inner)


def cmd_threshold(args) -> int:
    if (args.w is None) == (args.alpha is None):
        raise UsageError("threshold needs exactly one of --w or --alpha")
    if args.w is not None:
        if args.delta:
            raise UsageError("--delta applies only with --alpha")
        lam_c, alpha_c = closed_form_pair(args.d, args.w)
        _emit_json(args, {"branch": "closed-form", "lambda_c": lam_c, "alpha_c": alpha_c,
                          "lambda_low": low_temp_threshold(args.d, args.w)})
        return 0
    rep = solve_critical_system(args.d, args.alpha, args.delta)
    out = rep.as_dict()
    out["branch_condition"] = {"alpha": args.alpha,
                               "small_alpha_bound": small_alpha_bound(args.d, args.delta)}
    _emit_json(args, out)
    return 0


def cmd_check(args) -> int:
    alpha = args.lam if args.alpha is None else args.alpha
    if args.w is not None:
        rep = find_fixpoints(TreeParams(args.d, args.w, args.lam, alpha, args.delta))
        _emit_json(args, {"scope": "fixed-w", "delta_unique": rep.delta_unique,
                          "fixpoints": rep.as_dict()})
    else:
        thr = solve_critical_system(args.d, alpha, args.delta)
        _emit_json(args, {"scope": "all-w",
                          "delta_unique": is_delta_unique(args.lam, args.d, alpha, args.delta),
                          "lambda_2c": thr.lambda_2c, "threshold": thr.as_dict()})
    return 0


def cmd_phase(args) -> int:
    if args.steps < 2 or args.w_max <= args.w_min:
        raise UsageError("need --steps >= 2 and --w-max > --w-min")
    grid = np.linspace(args.w_min, args.w_max, args.steps)
    _emit(args, _comment_header(args) + phase_csv(phase_table(args.d, grid)))
    return 0


def cmd_sample(args) -> int:
    g = load_graph(args.graph)
    f = Fugacities(args.lam, args.alpha)
    fp = _field_params(args, g) if args.sampler == "field" else None
    left, right = sample(g, f, args.sampler, args.n_samples, args.seed,
                         steps=args.steps, field_params=fp)
    if fp is not None:
        args.theta, args.T, args.m = fp.theta, fp.T, fp.m
    _emit(args, _comment_header(args) + format_samples(left, right, {}))
    return 0


def cmd_exact(args) -> int:
    g = load_graph(args.graph)
    f = Fugacities(args.lam, args.alpha)
    if args.what == "Z":
        logz = log_partition_function(g, f)
        res = {"log_Z": logz, "Z": math.exp(logz) if logz < 709 else math.inf}
    elif args.what == "marginals":
        res = {"left": dist_side(g, f, "L").marginals().tolist()}
        if g.n_right <= enum_cap():
            res["right"] = dist_side(g, f, "R").marginals().tolist()
    else:
        res = {"side": args.side, "dist": dist_side(g, f, args.side).as_dict()}
    _emit_json(args, res)
    return 0


def _parse_times(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad time list {text!r}") from None


def cmd_tv_test(args) -> int:
    g = load_graph(args.graph)
    f = Fugacities(args.lam, args.alpha)
    fp = _field_params(args, g) if args.sampler == "field" else None
    curve = mixing_curve(args.sampler, g, f, args.times, args.replicas, args.seed,
                         fp, jobs=args.jobs)
    if args.format == "json":
        _emit_json(args, curve.as_dict())
    else:
        _emit(args, _comment_header(args) + curve.to_csv())
    return 0


def cmd_si_check(args) -> int:
    g = load_graph(args.graph)
    rep = si_check(g, Fugacities(args.lam, args.alpha), args.delta,
                   policy=args.policy, k=args.k)
    _emit_json(args, rep.as_dict())
    return 0 if rep.passed or not rep.applicable else 1


def cmd_ising_reduce(args) -> int:
    g = load_graph(args.graph)
    inst = reduce(g, args.lam, args.lam_right, allow_unequal=args.allow_unequal)
    res = inst.as_dict()
    if args.verify:
        res["max_deviation"] = verify_reduction(g, args.lam, inst)
    _emit_json(args, res)
    return 0


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return x


def _delta(text: str) -> float:
    x = float(text)
    if not 0 <= x < 1:
        raise argparse.ArgumentTypeError(f"delta must lie in [0, 1), got {text}")
    return x


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=TOOL, description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--out", help="write to this file instead of stdout")
        return sp

    def graph_args(sp, alpha=True):
        sp.add_argument("--graph", required=True)
        sp.add_argument("--lam", type=_positive, required=True)
        if alpha:
            sp.add_argument("--alpha", type=_positive, required=True)

    def chain_args(sp):
        sp.add_argument("--sampler", choices=SAMPLERS, required=True)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--theta", type=float)
        sp.add_argument("--T", type=int)
        sp.add_argument("--m", type=int)
        sp.add_argument("--eps", type=float, default=0.01)
        sp.add_argument("--inner", choices=("glauber", "exact"), default="glauber")

    sp = add("threshold", cmd_threshold, "critical fugacities")
    sp.add_argument("--d", type=_positive, required=True)
    sp.add_argument("--w", type=_positive)
    sp.add_argument("--alpha", type=_positive)
    sp.add_argument("--delta", type=_delta, default=0.0)

    sp = add("check", cmd_check, "delta-uniqueness verdict")
    sp.add_argument("--lam", type=_positive, required=True)
    sp.add_argument("--d", type=_positive, required=True)
    sp.add_argument("--alpha", type=_positive)
    sp.add_argument("--w", type=_positive)
    sp.add_argument("--delta", type=_delta, default=0.0)

    sp = add("phase", cmd_phase, "phase-diagram table as CSV")
    sp.add_argument("--d", type=_positive, required=True)
    sp.add_argument("--w-min", type=_positive, default=1.0)
    sp.add_argument("--w-max", type=_positive, default=8.0)
    sp.add_argument("--steps", type=int, default=64)

    sp = add("sample", cmd_sample, "draw samples")
    graph_args(sp)
    chain_args(sp)
    sp.add_argument("--n-samples", type=int, default=1)
    sp.add_argument("--steps", type=int, help="single-site updates per sample")

    sp = add("exact", cmd_exact, "exact quantities by enumeration")
    graph_args(sp)
    sp.add_argument("--what", choices=("Z", "marginals", "dist"), default="Z")
    sp.add_argument("--side", choices=("L", "R", "full"), default="L")

    sp = add("tv-test", cmd_tv_test, "empirical TV distance curve")
    graph_args(sp)
    chain_args(sp)
    sp.add_argument("--replicas", type=int, default=1000)
    sp.add_argument("--times", type=_parse_times, default=[0, 10, 100, 1000])
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = add("si-check", cmd_si_check, "spectral independence against the eta bound")
    graph_args(sp)
    sp.add_argument("--delta", type=_delta, required=True)
    sp.add_argument("--policy", choices=("none", "all-up-to-k"), default="all-up-to-k")
    sp.add_argument("--k", type=int)

    sp = add("ising-reduce", cmd_ising_reduce, "reduce a left-degree-2 instance to Ising")
    graph_args(sp, alpha=False)
    sp.add_argument("--lam-right", type=_positive)
    sp.add_argument("--allow-unequal", action="store_true")
    sp.add_argument("--verify", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{TOOL}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError, ArithmeticError) as exc:
        print(f"{TOOL}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
