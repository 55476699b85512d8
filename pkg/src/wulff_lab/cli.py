"""Command-line front end.

Three subcommands: `amgm` runs the randomized stable-mean suite, `verify`
checks the quantitative inequalities on body files or random pairs, and
`conjecture` sweeps the shifted-box family to a CSV table.  Every command is
deterministic given its flags; output files are written to a temporary name
and atomically renamed so failures never leave partial artifacts.

Exit codes: 0 success, 2 inequality violation, 64 usage error, 65 malformed
body file or out-of-range parameter, 66 symmetric mode on an asymmetric body.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile

from . import lab, means
from .bodies import load_body
from .errors import (
    MalformedBodyFile,
    NotCentrallySymmetric,
    OutOfRangeEntry,
    WulffLabError,
)
from .rng import RngSeed

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NOT_SYMMETRIC = 66


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; remap to 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _jsonable(value):
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return _jsonable(dataclasses.asdict(value))
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, bool):
        return value
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    return value


def _render(doc: dict) -> str:
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".wulff-lab-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(doc: dict, out: str | None) -> None:
    text = _render(doc)
    sys.stdout.write(text)
    if out:
        _write_atomic(out, text)


def _parse_int_list(text: str) -> list[int]:
    """Accepts '4', '2,3,5', or '2..8' (inclusive range)."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(part) for part in text.split(",") if part]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError(f"empty integer list {text!r}")
    return values


def _parse_float_list(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError(f"empty float list {text!r}")
    return values


def build_parser() -> _Parser:
    parser = _Parser(prog="wulff-lab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_amgm = sub.add_parser("amgm", help="randomized stable AM-GM suite")
    p_amgm.add_argument("--count", type=int, required=True,
                        help="total number of random tuples")
    p_amgm.add_argument("--n", type=_parse_int_list, default=list(range(2, 17)),
                        help="tuple lengths: '4', '2,3,5', or '2..16'")
    p_amgm.add_argument("--seed", type=int, default=0)
    p_amgm.add_argument("--out", default=None, help="also write the JSON here")
    p_amgm.set_defaults(func=_cmd_amgm)

    p_verify = sub.add_parser("verify", help="quantitative inequality checks")
    p_verify.add_argument("kind", choices=("iso", "bm", "dar"))
    p_verify.add_argument("--k", default=None, help="body JSON file for K")
    p_verify.add_argument("--l", default=None, help="body JSON file for L")
    p_verify.add_argument("--random", action="store_true",
                          help="use randomly generated pairs instead of files")
    p_verify.add_argument("--n", type=int, default=None,
                          help="dimension for --random")
    p_verify.add_argument("--pairs", type=int, default=8,
                          help="number of random pairs")
    p_verify.add_argument("--mode", default="general",
                          choices=("body-specific", "general", "symmetric"),
                          help="constant mode for the perimeter check")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--out", default=None)
    p_verify.set_defaults(func=_cmd_verify)

    p_conj = sub.add_parser("conjecture", help="shifted-box lower-bound sweep")
    p_conj.add_argument("--n", type=_parse_int_list, required=True,
                        help="dimensions: '2..8' or '2,4,6'")
    p_conj.add_argument("--eps", type=_parse_float_list, required=True,
                        help="comma-separated epsilon values")
    p_conj.add_argument("--out", required=True, help="CSV output path")
    p_conj.set_defaults(func=_cmd_conjecture)
    return parser


def _cmd_amgm(args) -> int:
    if args.count < 1:
        raise _UsageError("--count must be >= 1")
    if min(args.n) < 2:
        raise _UsageError("tuple lengths must be >= 2")
    result = means.amgm_suite(args.count, args.n, RngSeed(args.seed, 1))
    doc = {
        "schema": 1,
        "command": "amgm",
        "config": {"count": args.count, "n": args.n, "seed": args.seed,
                   "out": args.out, "format": "json"},
        "result": {
            "count": result.count,
            "violations": result.violations,
            "min_residuals": result.min_residuals,
            "quantiles": result.quantiles,
            "worst": list(result.worst) if result.worst is not None else None,
        },
    }
    _emit(doc, args.out)
    return EXIT_OK if result.violations == 0 else EXIT_VIOLATION


def _cmd_verify(args) -> int:
    file_mode = args.k is not None or args.l is not None
    if file_mode and args.random:
        raise _UsageError("give either --k/--l files or --random, not both")
    if file_mode and (args.k is None or args.l is None):
        raise _UsageError("file mode needs both --k and --l")
    if args.random and args.n is None:
        raise _UsageError("--random needs --n")
    if not file_mode and not args.random:
        raise _UsageError("give --k/--l files or --random")
    if args.random and args.pairs < 1:
        raise _UsageError("--pairs must be >= 1")

    if file_mode:
        pairs = [(load_body(args.k), load_body(args.l))]
    else:
        force_sym = True if (args.kind == "iso" and args.mode == "symmetric") else None
        pairs = lab.random_pair_corpus(
            args.n, args.pairs, RngSeed(args.seed, 2), symmetric_k=force_sym
        )

    reports = []
    for i, (k, l) in enumerate(pairs):
        s = RngSeed(args.seed, 3).derive(i)
        if args.kind == "iso":
            reports.append(
                lab.verify_isoperimetric(k, l, constant_mode=args.mode, seed=s)
            )
        elif args.kind == "bm":
            reports.append(lab.verify_bm(k, l, seed=s))
        else:
            reports.append(lab.verify_dar(k, l, seed=s))
    all_passed = all(r.passed for r in reports)
    doc = {
        "schema": 1,
        "command": "verify",
        "config": {"kind": args.kind, "k": args.k, "l": args.l,
                   "random": args.random, "n": args.n,
                   "pairs": args.pairs if args.random else len(pairs),
                   "mode": args.mode, "seed": args.seed, "out": args.out,
                   "format": "json"},
        "reports": reports,
        "all_passed": all_passed,
    }
    _emit(doc, args.out)
    return EXIT_OK if all_passed else EXIT_VIOLATION


def _cmd_conjecture(args) -> int:
    table = lab.box_conjecture_experiment(args.n, args.eps)
    limits = {str(n): v for n, v in table.limits.items()}
    if table.fitted_exponent is None:
        summary = "# exponent fit skipped (single n); limits: " + ", ".join(
            f"{n}={v!r}" for n, v in sorted(table.limits.items())
        )
    else:
        summary = (
            f"# fitted_exponent={table.fitted_exponent!r} "
            f"stderr={table.exponent_stderr!r}; limits: "
            + ", ".join(f"{n}={v!r}" for n, v in sorted(table.limits.items()))
        )
    csv_text = lab.experiment_table_to_csv(table) + summary + "\n"
    _write_atomic(args.out, csv_text)
    ci = None
    if table.fitted_exponent is not None and table.exponent_stderr is not None:
        ci = [table.fitted_exponent - 2.0 * table.exponent_stderr,
              table.fitted_exponent + 2.0 * table.exponent_stderr]
    doc = {
        "schema": 1,
        "command": "conjecture",
        "config": {"n": args.n, "eps": args.eps, "out": args.out,
                   "format": "csv"},
        "rows": len(table.rows),
        "limits": limits,
        "fitted_exponent": table.fitted_exponent,
        "exponent_stderr": table.exponent_stderr,
        "exponent_ci95": ci,
    }
    sys.stdout.write(_render(doc))
    return EXIT_OK


class _UsageError(Exception):
    pass


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        sys.stderr.write(f"wulff-lab: error: {exc}\n")
        return EXIT_USAGE
    except NotCentrallySymmetric as exc:
        sys.stderr.write(f"wulff-lab: {exc}\n")
        return EXIT_NOT_SYMMETRIC
    except (MalformedBodyFile, OutOfRangeEntry) as exc:
        sys.stderr.write(f"wulff-lab: {exc}\n")
        return EXIT_DATA
    except FileNotFoundError as exc:
        sys.stderr.write(f"wulff-lab: {exc}\n")
        return EXIT_DATA
    except WulffLabError as exc:
        sys.stderr.write(f"wulff-lab: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
