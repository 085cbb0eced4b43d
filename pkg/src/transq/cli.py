"""Command-line entry point.

Exit codes: 0 success, 1 methods disagree, 2 bad input, 3 cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import exact, oracle
from .distribution import BusyPeriodDistribution, decimal17
from .errors import CapExceeded, TransqError
from .model import Model, format_rational, load_model, model_from_rate, model_from_sequence
from .montecarlo import default_workers, estimate_busy_dist
from .paths import enumerate_dyck, enumerate_feasible, first_return, is_feasible, path_weight

EXIT_OK, EXIT_MISMATCH, EXIT_BAD_INPUT, EXIT_CAP = 0, 1, 2, 3

METHODS = ("recursion", "binomial", "matrix", "explicit", "oracle")


class InputError(Exception):
    pass


# -- model arguments ---------------------------------------------------------

def _add_model_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_argument_group("model (give --n/--lambda, --lambda-seq, or --config)")
    g.add_argument("--n", type=int, help="pool size N (proportional rates lambda_j = lambda (N - j))")
    g.add_argument("--lambda", dest="lam", help="base arrival rate, e.g. 1 or 3/2")
    g.add_argument("--lambda-seq", help="comma-separated strictly decreasing rates ending in 0")
    g.add_argument("--mu", help="service rate")
    g.add_argument("--config", help="JSON model file")
    p.set_defaults(model_required=required)


def _model_from_args(args) -> Model | None:
    sources = [args.config is not None, args.lambda_seq is not None,
               args.n is not None or args.lam is not None]
    if sum(sources) == 0:
        if args.model_required:
            raise InputError("no model given: use --n/--lambda/--mu, --lambda-seq/--mu, or --config")
        return None
    if sum(sources) > 1:
        raise InputError("give exactly one model source")
    if args.config is not None:
        if args.mu is not None:
            raise InputError("--mu cannot be combined with --config")
        return load_model(args.config)
    if args.mu is None:
        raise InputError("--mu is required")
    if args.lambda_seq is not None:
        return model_from_sequence([x for x in args.lambda_seq.split(",") if x.strip()], args.mu)
    if args.n is None or args.lam is None:
        raise InputError("--n and --lambda go together")
    return model_from_rate(args.n, args.lam, args.mu)


# -- output helpers ----------------------------------------------------------

def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if getattr(args, "output", None):
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False)


def _fmt(x) -> str:
    return format_rational(x) if isinstance(x, (Fraction, int)) else decimal17(x)


# -- routes ------------------------------------------------------------------

def _run_method(model: Model, name: str, mode: str, cap: int, workers: int) -> BusyPeriodDistribution:
    if name == "recursion":
        return exact.busy_dist_recursion(model, mode)
    if name == "binomial":
        return exact.busy_dist_recursion_binomial(model, mode)
    if name == "matrix":
        return exact.busy_dist_matrix(model, mode)
    if name == "explicit":
        return exact.busy_dist_explicit(model, mode, workers=workers)
    if name == "oracle":
        if mode != "exact":
            raise InputError("the oracle only runs in exact mode")
        return oracle.busy_dist_bruteforce(model, cap=cap)
    raise InputError(f"unknown method {name!r}")


def _methods_for(model: Model, selector: str, mode: str) -> list[str]:
    if selector != "all":
        return [selector]
    names = ["recursion"]
    if model.proportional_rate is not None:
        names.append("binomial")
    names += ["matrix", "explicit"]
    if mode == "exact":
        names.append("oracle")
    return names


def cmd_dist(args) -> int:
    model = _model_from_args(args)
    names = _methods_for(model, args.method, args.mode)
    dists = [_run_method(model, name, args.mode, args.cap, args.workers) for name in names]
    if args.format == "json":
        if args.method == "all":
            doc = {"n": model.n_customers, "method": "all", "results": [d.to_json() for d in dists]}
        else:
            doc = dists[0].to_json()
        _emit(args, _json_text(doc))
    else:
        rows = []
        for d in dists:
            for entry in d.to_json()["s"]:
                row = [entry["i"], entry["exact"] if entry["exact"] is not None else "", entry["decimal"]]
                rows.append([d.method.value] + row if args.method == "all" else row)
        header = ["i", "exact", "decimal"]
        _emit(args, _csv_text(["method"] + header if args.method == "all" else header, rows))
    return EXIT_OK


def cmd_validate(args) -> int:
    model = _model_from_args(args)
    names = _methods_for(model, "all", "exact")
    dists = {name: _run_method(model, name, "exact", args.cap, args.workers) for name in names}
    if args.inject_fault:
        if args.inject_fault not in dists:
            raise InputError(f"cannot corrupt unknown method {args.inject_fault!r}")
        d = dists[args.inject_fault]
        s = list(d.s)
        s[-1] += Fraction(1, 10 ** 9)
        dists[args.inject_fault] = BusyPeriodDistribution(tuple(s), d.method, d.model_digest)

    ref = dists[names[0]]
    first_bad = None
    entries = []
    for i in range(1, model.n_customers + 1):
        vals = {name: dists[name].prob(i) for name in names}
        agree = len(set(vals.values())) == 1
        entries.append((i, vals, agree))
        if not agree and first_bad is None:
            first_bad = i
    sums = {name: dists[name].total for name in names}
    sums_ok = all(v == 1 for v in sums.values())
    ok = first_bad is None and sums_ok

    if args.format == "json":
        doc = {
            "n": model.n_customers,
            "methods": names,
            "entries": [{"i": i, "values": {k: format_rational(v) for k, v in vals.items()}, "agree": a}
                        for i, vals, a in entries],
            "sums": {k: format_rational(v) for k, v in sums.items()},
            "agree": ok,
            "first_mismatch": first_bad,
        }
        _emit(args, _json_text(doc))
    else:
        width = max(12, *(len(format_rational(v)) for _, vals, _ in entries for v in vals.values()))
        lines = ["i    " + "".join(f"{n:>{width + 2}}" for n in names) + "  status"]
        for i, vals, agree in entries:
            cells = "".join(f"{format_rational(vals[n]):>{width + 2}}" for n in names)
            lines.append(f"{i:<5}{cells}  {'ok' if agree else 'DIFF'}")
        lines.append("sum  " + "".join(f"{format_rational(sums[n]):>{width + 2}}" for n in names)
                     + f"  {'ok' if sums_ok else 'BAD'}")
        _emit(args, "\n".join(lines))
    if first_bad is not None:
        vals = entries[first_bad - 1][1]
        detail = ", ".join(f"{k}={format_rational(v)}" for k, v in vals.items())
        print(f"mismatch at i={first_bad}: {detail}", file=sys.stderr)
    elif not sums_ok:
        print("probabilities do not sum to 1", file=sys.stderr)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_paths(args) -> int:
    model = _model_from_args(args)
    order = args.order
    if order is None:
        if model is None:
            raise InputError("give --order or a model")
        order = model.n_customers
    if model is not None and order != model.n_customers:
        raise InputError(f"--order {order} differs from model N = {model.n_customers}")
    if order < 1:
        raise InputError("--order must be >= 1")
    if args.feasible_only:
        stream = enumerate_feasible(order)
    else:
        if order > args.cap:
            raise CapExceeded(f"order {order} exceeds enumeration cap {args.cap}")
        stream = enumerate_dyck(order)

    header = ["u", "feasible"] + (["weight"] if model is not None else []) + ["first_return"]
    records = []
    for u in stream:
        rec = {"u": ",".join(map(str, u)), "feasible": int(is_feasible(u))}
        if model is not None:
            rec["weight"] = format_rational(path_weight(model, u))
        rec["first_return"] = first_return(u)
        records.append(rec)
    if args.format == "json":
        doc = {"order": order, "count": len(records),
               "paths": [dict(r, u=[int(x) for x in r["u"].split(",")]) for r in records]}
        _emit(args, _json_text(doc))
    else:
        _emit(args, _csv_text(header, [[r[h] for h in header] for r in records]))
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = _model_from_args(args)
    if args.reps < 1:
        raise InputError("--reps must be >= 1")
    report = estimate_busy_dist(model, args.reps, args.seed, args.workers, joint=args.joint)
    if args.format == "json":
        _emit(args, _json_text(report.to_json()))
    else:
        doc = report.to_json()
        rows = [["first", e["i"], e["count"], repr(e["frequency"]), repr(e["std_error"])]
                for e in doc["first_busy_period"]]
        for e in doc.get("joint", []):
            rows.append(["joint", "+".join(map(str, e["composition"])), e["count"],
                         repr(e["frequency"]), repr(e["std_error"])])
        _emit(args, _csv_text(["kind", "key", "count", "frequency", "std_error"], rows))
    return EXIT_OK


def cmd_inverse(args) -> int:
    model = _model_from_args(args)
    a = exact.matrix_A(model)
    inv = exact.invert_lower_triangular(a)
    if args.format == "json":
        doc = {"n": model.n_customers,
               "A": [[format_rational(x) for x in r] for r in a.rows()],
               "A_inv": [[format_rational(x) for x in r] for r in inv.rows()]}
        _emit(args, _json_text(doc))
    else:
        rows = []
        for name, m in (("A", a), ("A_inv", inv)):
            for i, r in enumerate(m.rows(), start=1):
                for j, x in enumerate(r, start=1):
                    rows.append([name, i, j, format_rational(x)])
        _emit(args, _csv_text(["matrix", "i", "j", "value"], rows))
    return EXIT_OK


def cmd_cancellation(args) -> int:
    model = _model_from_args(args)
    report = exact.cancellation_report(model)
    _emit(args, _json_text(report.to_json()))
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transq",
        description="Exact busy-period distribution of the finite-pool exponential queue.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("json", "csv"), default="json"):
        p.add_argument("--format", choices=formats, default=default)
        p.add_argument("--output", "-o", help="write to this file instead of stdout")

    p = sub.add_parser("dist", help="busy-period distribution by one or all methods",
                       description="With --lambda-seq, the k-th later busy period uses the "
                                   "last rates of the sequence (re-indexed from 1).")
    _add_model_args(p)
    p.add_argument("--method", choices=METHODS + ("all",), default="recursion")
    p.add_argument("--mode", choices=("exact", "float"), default="exact")
    p.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP, help="largest N the oracle accepts")
    p.add_argument("--workers", type=int, default=default_workers())
    common(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("validate", help="run every route and require exact agreement")
    _add_model_args(p)
    p.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP)
    p.add_argument("--workers", type=int, default=default_workers())
    p.add_argument("--inject-fault", choices=METHODS, help=argparse.SUPPRESS)
    common(p, ("text", "json"), "text")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("paths", help="enumerate Dyck paths or feasible allocations")
    _add_model_args(p, required=False)
    p.add_argument("--order", type=int)
    p.add_argument("--feasible-only", action="store_true")
    p.add_argument("--cap", type=int, default=oracle.ENUMERATION_CAP)
    common(p, ("csv", "json"), "csv")
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the busy-period law")
    _add_model_args(p)
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--joint", action="store_true", help="also tally full busy-period sequences")
    p.add_argument("--workers", type=int, default=default_workers())
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("inverse", help="print A and its inverse")
    _add_model_args(p)
    common(p, ("csv", "json"), "csv")
    p.set_defaults(func=cmd_inverse)

    p = sub.add_parser("cancellation", help="float64 vs exact signed-sum deviation")
    _add_model_args(p)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_cancellation)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InputError, TransqError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
