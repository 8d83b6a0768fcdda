"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 capacity error, 4 inconsistent
state during decoding.  Relative output paths are resolved against
``$QARRAY_OUTPUT_DIR`` when it is set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import bounds as _bounds  # noqa: F401  (registers decoder)
from . import sort as _sort  # noqa: F401
from .analyzer import (
    BUILDERS,
    SWEEP_COLUMNS,
    degree_histogram_compare,
    fit,
    resource_report,
    sweep,
)
from .errors import CapacityError, InconsistentStateError, QArrayError
from .program import decode
from .qubofile import atomic_write, dump_json, read_program_files, write_program
from .search import build_array_assign, build_search
from .solver import (
    AnnealSchedule,
    classify_states,
    eliminate_ground_states,
    enumerate_ground_states,
    simulated_anneal,
)

EXIT_USAGE, EXIT_CAPACITY, EXIT_INCONSISTENT = 2, 3, 4


class UsageError(QArrayError):
    pass


def _out_path(p: str) -> Path:
    path = Path(p)
    base = os.environ.get("QARRAY_OUTPUT_DIR")
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def _ints(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _frac_json(f: Fraction) -> dict:
    return {"exact": str(f), "decimal": float(f)}


def _build_program(args):
    values = _ints(args.values)
    if args.builder == "search":
        return build_search(args.n, args.bits, args.variant, values=values, target=args.target,
                            index=args.index, predicate=args.predicate)
    if args.builder == "assign":
        return build_array_assign(args.n, args.bits, values=values, target=args.target,
                                  index=args.index)
    if args.builder == "bounds":
        return _bounds.build_bounds(args.n, args.bits, values=values, target=args.target)
    return _sort.build_sort(args.n, args.bits, values=values)


# ---------------------------------------------------------------------------
# commands


def cmd_build(args) -> int:
    program = _build_program(args)
    prefix = _out_path(args.out or args.builder)
    qpath, vpath = write_program(program, prefix, fold=args.fold)
    print(f"wrote {qpath} and {vpath}")
    return 0


def _solve(qubo, clamp, variables, args):
    if args.method == "exhaustive":
        return enumerate_ground_states(qubo, clamp, cap=args.cap, limit=args.limit,
                                       variables=variables)
    if args.method == "eliminate":
        return eliminate_ground_states(qubo, clamp, cap=args.cap, variables=variables)
    schedule = AnnealSchedule(sweeps=args.sweeps, reads=args.reads, seed=args.seed)
    return simulated_anneal(qubo, schedule, clamp, variables=variables)


def cmd_solve(args) -> int:
    qpath = Path(args.qubo)
    if not qpath.exists() and qpath.with_name(qpath.name + ".qubo").exists():
        qpath = qpath.with_name(qpath.name + ".qubo")
    qubo, vm = read_program_files(qpath, args.varmap)
    clamp = {int(k): int(v) for k, v in vm.get("clamp", {}).items()}
    if args.clamp:
        labels = {row["label"]: row["id"] for row in vm["variables"]}
        for key, bit in json.loads(Path(args.clamp).read_text()).items():
            vid = labels[key] if key in labels else int(key)
            clamp[vid] = int(bit)
    variables = [row["id"] for row in vm["variables"]]
    result = _solve(qubo, clamp, variables, args)

    decoded = [decode(vm["kind"], vm["decode"], a) for a in result.ground_states]
    unique = []
    for d in decoded:
        if d not in unique:
            unique.append(d)
    report = {
        "program": vm["kind"],
        "method": result.method,
        "exhausted": result.exhausted,
        "ground_energy": str(result.ground_energy),
        "ground_energy_decimal": float(result.ground_energy),
        "ground_count": result.ground_count,
        "free_variables": len(result.variables),
        "ground_states": unique,
    }
    if unique:
        report.update(unique[0])
    if result.samples is not None:
        report["seed"] = args.seed
        report["samples"] = [
            {"energy": str(s.energy), "multiplicity": s.multiplicity} for s in result.samples
        ]
    text = dump_json(report)
    if args.out:
        atomic_write(_out_path(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_classify(args) -> int:
    program = build_search(args.n, args.bits, args.variant, values=_ints(args.values),
                           target=args.target)
    table = classify_states(program)
    out = {
        "minima": {k: (None if v is None else str(v)) for k, v in table["minima"].items()},
        "counts": table["counts"],
    }
    sys.stdout.write(dump_json(out))
    return 0


def cmd_analyze(args) -> int:
    from .analyzer import build

    if args.compare:
        a = resource_report(build("search_sum", args.n, args.bits))
        b = resource_report(build("search_or", args.n, args.bits))
        out = {"search_sum": a.to_json(), "search_or": b.to_json(),
               "compare": degree_histogram_compare(a, b, args.threshold)}
    else:
        out = resource_report(build(args.builder, args.n, args.bits)).to_json()
    sys.stdout.write(dump_json(out))
    return 0


def _ns(args) -> list[int]:
    if args.range:
        try:
            start, stop, step = (int(t) for t in args.range.split(":"))
        except ValueError:
            raise UsageError(f"--range expects start:stop:step, got {args.range!r}") from None
        ns = list(range(start, stop + 1, step))
    else:
        ns = _ints(args.n) or []
    if not ns:
        raise UsageError("sweep needs a non-empty list of array sizes")
    return ns


def sweep_csv(rows, timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        d = r.__dict__.copy()
        if not timing:
            d["build_millis"] = ""
        w.writerow(["" if d[c] is None else d[c] for c in SWEEP_COLUMNS])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    rows = sweep(args.builder, _ns(args), args.bits)
    text = sweep_csv(rows, timing=not args.no_timing)
    if args.out:
        atomic_write(_out_path(args.out), text)
    else:
        sys.stdout.write(text)
    if args.fit:
        pts = [(r.n, getattr(r, args.y)) for r in rows if not r.error]
        if args.skip_first:
            pts = pts[1:]
        sys.stderr.write(json.dumps(fit(args.fit, pts).to_json()) + "\n")
    return 0


def cmd_fit(args) -> int:
    with open(args.csv) as fh:
        rows = [r for r in csv.DictReader(fh) if not r.get("error")]
    pts = [(Fraction(r[args.x]), Fraction(r[args.y])) for r in rows]
    if args.skip_first:
        pts = pts[1:]
    sys.stdout.write(dump_json(fit(args.model, pts).to_json()))
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_program_args(p, variants=True):
    p.add_argument("--n", type=int, required=True, help="array size N")
    p.add_argument("--bits", type=int, required=True, help="element width K_v")
    if variants:
        p.add_argument("--variant", default="summation",
                       choices=["basic", "summation", "or", "logical_or", "count"])
    p.add_argument("--values", help="known array values, decimal, comma-separated")
    p.add_argument("--target", type=int, help="known target value x")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qarray",
                                     description="Compile and verify array search/sort QUBOs.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="write .qubo and .varmap.json for a program")
    b.add_argument("builder", choices=["search", "bounds", "sort", "assign"])
    _add_program_args(b)
    b.add_argument("--index", type=int, help="known index n (search/assign)")
    b.add_argument("--predicate", help="e.g. '0:4>1 & 4:4==0' (offset:width OP const)")
    b.add_argument("--out", help="output prefix (default: the builder name)")
    b.add_argument("--fold", action="store_true", help="substitute known values into the QUBO")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("solve", help="solve a .qubo file and decode via its varmap")
    s.add_argument("qubo")
    s.add_argument("--varmap")
    s.add_argument("--method", default="exhaustive", choices=["exhaustive", "eliminate", "anneal"])
    s.add_argument("--clamp", help="JSON file mapping labels or ids to 0/1")
    s.add_argument("--cap", type=int, default=64, help="ground states to list")
    s.add_argument("--limit", type=int, default=24, help="exhaustive free-variable limit")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sweeps", type=int, default=1000)
    s.add_argument("--reads", type=int, default=100)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("classify", help="class minima of a search program")
    _add_program_args(c)
    c.set_defaults(func=cmd_classify)

    a = sub.add_parser("analyze", help="resource report of a program")
    a.add_argument("builder", choices=BUILDERS)
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--bits", type=int, required=True)
    a.add_argument("--compare", action="store_true",
                   help="compare summation and OR search variants")
    a.add_argument("--threshold", type=int, default=8)
    a.set_defaults(func=cmd_analyze)

    w = sub.add_parser("sweep", help="resource rows over array sizes as CSV")
    w.add_argument("builder", choices=BUILDERS)
    w.add_argument("--n", help="comma-separated sizes")
    w.add_argument("--range", help="start:stop:step (inclusive)")
    w.add_argument("--bits", type=int, required=True)
    w.add_argument("--out")
    w.add_argument("--no-timing", action="store_true", help="blank the build_millis column")
    w.add_argument("--fit", choices=["linear", "quadratic"])
    w.add_argument("--y", default="total_vars")
    w.add_argument("--skip-first", action="store_true")
    w.set_defaults(func=cmd_sweep)

    f = sub.add_parser("fit", help="least-squares fit of two CSV columns")
    f.add_argument("csv")
    f.add_argument("--x", default="n")
    f.add_argument("--y", default="total_vars")
    f.add_argument("--model", default="linear", choices=["linear", "quadratic"])
    f.add_argument("--skip-first", action="store_true")
    f.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except InconsistentStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (QArrayError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
