"""``matdyadic`` command line: one subcommand per computation, key=value output.

Exit codes: 0 success, 1 invalid input, 2 numerical failure. ``verify``
exits 1 when any invariant is violated.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import files
from .bounds import (
    CarlesonSequence,
    carleson_constants,
    log_floor,
    necessity_lower_bound,
    s123_decomposition,
    square_constants,
    testing_ratio,
    testing_supremum,
    tv_embedding_ratio,
    weighted_op_norm,
)
from .checks import run_verify
from .dyadic import VectorField
from .errors import InvalidInputError, NumericalError
from .experiments import (
    MEASUREMENTS,
    FamilySpec,
    exponent_report,
    run_sweep,
    write_csv,
)
from .operators import MultiplierSymbol, sigma_norm
from .weights import WeightField, a2_characteristic, averages_tree, dyadic_maximal, truncate


def emit(**pairs) -> None:
    for key, val in pairs.items():
        if isinstance(val, (float, np.floating)):
            val = repr(float(val))
        print(f"{key}={val}")


def _load(path, kind: type, what: str, levels: int | None = None):
    obj = files.load(path, levels)
    if not isinstance(obj, kind):
        raise InvalidInputError(f"{path}: --{what} expects a {what} document")
    return obj


def _weight(args) -> WeightField:
    return _load(args.weight, WeightField, "weight")


def _function(args, w: WeightField) -> VectorField:
    f = _load(args.function, VectorField, "function")
    if f.depth != w.depth or f.dim != w.dim:
        raise InvalidInputError(
            f"function has depth {f.depth}, dim {f.dim}; weight has depth {w.depth}, dim {w.dim}")
    return f


def _check_dim(obj, w: WeightField, what: str) -> None:
    if obj.dim != w.dim:
        raise InvalidInputError(f"{what} has dim {obj.dim}, weight has dim {w.dim}")


def cmd_a2(args) -> int:
    emit(a2=a2_characteristic(averages_tree(_weight(args))))
    return 0


def cmd_square_bounds(args) -> int:
    w = _weight(args)
    t = averages_tree(w)
    sq = square_constants(w, include_mean=args.include_mean, method=args.method, tree=t)
    a2 = a2_characteristic(t)
    emit(a2=a2, c_up=sq.c_up, c_low=sq.c_low,
         c_w=a2 * log_floor(a2), b_w=a2 ** 2 * log_floor(a2))
    return 0


def cmd_shift_norm(args) -> int:
    w = _weight(args)
    t = averages_tree(w)
    r = weighted_op_norm("shift", w, args.method, tree=t)
    emit(a2=a2_characteristic(t), shift_norm=r.value, method=r.method)
    return 0


def cmd_multiplier_norm(args) -> int:
    w = _weight(args)
    sigma = _load(args.sigma, MultiplierSymbol, "symbol", w.depth)
    _check_dim(sigma, w, "symbol")
    t = averages_tree(w)
    r = weighted_op_norm(sigma, w, args.method, tree=t)
    emit(a2=a2_characteristic(t), tsigma_norm=r.value, sigma_inf=sigma_norm(sigma, t),
         necessity_lower=necessity_lower_bound(sigma, w, tree=t), method=r.method)
    return 0


def cmd_embedding(args) -> int:
    w = _weight(args)
    r = tv_embedding_ratio(w, _function(args, w))
    emit(lhs=r.lhs, ratio=r.ratio)
    return 0


def cmd_s123(args) -> int:
    w = _weight(args)
    r = s123_decomposition(w, _function(args, w))
    emit(s1=r.s1, s2_bound=r.s2_bound, s3=r.s3, s3_averaged=r.s3_averaged, total=r.total)
    return 0


def cmd_testing(args) -> int:
    t = averages_tree(_weight(args))
    emit(a2=a2_characteristic(t), testing_sup=testing_supremum(t), testing_ratio=testing_ratio(t))
    return 0


def cmd_carleson(args) -> int:
    w = _weight(args)
    seq = _load(args.sequence, CarlesonSequence, "carleson", w.depth)
    _check_dim(seq, w, "sequence")
    r = carleson_constants(seq, w, args.method)
    emit(c_embed=r.c_embed, c_test=r.c_test, ratio=r.ratio)
    return 0


def cmd_truncate(args) -> int:
    w = _weight(args)
    wn = truncate(w, args.n)
    files.save_document(files.to_doc(wn), args.out)
    emit(a2=a2_characteristic(averages_tree(w)), a2_truncated=a2_characteristic(averages_tree(wn)),
         out=args.out)
    return 0


def cmd_maximal(args) -> int:
    w = _weight(args)
    m = dyadic_maximal(_function(args, w), w)
    emit(sup=float(np.max(m)), values=",".join(repr(float(v)) for v in m))
    return 0


def cmd_sweep(args) -> int:
    which = tuple(s.strip() for s in args.measure.split(",") if s.strip())
    unknown = set(which) - set(MEASUREMENTS)
    if unknown:
        raise InvalidInputError(f"--measure: unknown {sorted(unknown)}; choose from {MEASUREMENTS}")
    spec = FamilySpec.from_range(args.family, args.range, depth=args.depth, dim=args.dim,
                                 seed=args.seed)
    rows = run_sweep(spec, which, jobs=args.jobs)
    with open(args.out, "w", newline="") as fh:
        write_csv(rows, fh, timing=args.timing)
    emit(rows=len(rows), failed=sum(r.failed for r in rows), out=args.out)
    for col in which:
        try:
            rep = exponent_report(rows, col)
        except InvalidInputError as exc:
            emit(**{f"fit_{col}": f"refused ({exc})"})
            continue
        pairs = {f"slope_{col}": rep["raw"].slope, f"r2_{col}": rep["raw"].r2}
        for key, fit in rep.items():
            if key.startswith("residual_"):
                pairs[f"{key}_{col}"] = fit.slope
        emit(**pairs)
    return 0


def cmd_verify(args) -> int:
    for name in ("depth", "dim", "trials"):
        if getattr(args, name) < 1:
            raise InvalidInputError(f"--{name} must be >= 1")
    tally = run_verify(args.depth, args.dim, args.seed, args.trials,
                       Path(args.fixtures) if args.fixtures else None)
    for line in tally.lines():
        print(line)
    for name in tally.failed:
        for detail in tally.stats[name].failures:
            print(f"{name}: {detail}", file=sys.stderr)
    passed = sum(s.passed == s.total for s in tally.stats.values())
    emit(checks=len(tally.stats), passed=passed, failed=len(tally.failed))
    return 1 if tally.failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="matdyadic", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help, weight=True, method=False):
        sp = sub.add_parser(name, help=help)
        if weight:
            sp.add_argument("--weight", required=True, help="weight JSON file")
        if method:
            sp.add_argument("--method", default="auto", choices=("auto", "dense", "power"))
        sp.set_defaults(fn=fn)
        return sp

    cmd("a2", cmd_a2, "matrix A2 characteristic")
    sp = cmd("square-bounds", cmd_square_bounds, "square-function constants", method=True)
    sp.add_argument("--include-mean", action="store_true")
    cmd("shift-norm", cmd_shift_norm, "weighted norm of the dyadic shift", method=True)
    sp = cmd("multiplier-norm", cmd_multiplier_norm, "weighted Haar multiplier norm", method=True)
    sp.add_argument("--sigma", required=True, help="symbol JSON file")
    for name, fn, help in (("embedding", cmd_embedding, "embedding sum and ratio"),
                           ("s123", cmd_s123, "S1/S2/S3 split of the inverse form"),
                           ("maximal", cmd_maximal, "dyadic weighted maximal function")):
        cmd(name, fn, help).add_argument("--function", required=True, help="function JSON file")
    cmd("testing", cmd_testing, "testing supremum and ratio")
    sp = cmd("carleson", cmd_carleson, "Carleson embedding and testing constants", method=True)
    sp.add_argument("--sequence", required=True, help="carleson JSON file")
    sp = cmd("truncate", cmd_truncate, "eigenvalue truncation of a weight")
    sp.add_argument("--n", type=float, required=True)
    sp.add_argument("--out", required=True)

    sp = cmd("sweep", cmd_sweep, "weight-family sweep to CSV", weight=False)
    sp.add_argument("--family", required=True)
    sp.add_argument("--range", required=True, help="a:b:n or a:b:n:geom")
    sp.add_argument("--depth", type=int, default=4)
    sp.add_argument("--dim", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--measure", default=",".join(MEASUREMENTS))
    sp.add_argument("--out", required=True)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--timing", action="store_true", help="fill the runtime_ms column")

    sp = cmd("verify", cmd_verify, "run the invariant suite", weight=False)
    sp.add_argument("--depth", type=int, default=5)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--fixtures", help="directory of JSON fixtures (default: shipped set)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.fn(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except InvalidInputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
