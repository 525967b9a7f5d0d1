"""Command-line front end.

Subcommands::

    gen     build a model from a generator and write its JSON
    exact   brute-force log Z of a model file
    bound   certified lower/upper bounds (BoundReport JSON)
    cw      Curie-Weiss level sum and magnetization formula
    rank    threshold-rank diagnostics of a regular model
    bench   regime sweep over random d-regular +-J models (CSV)

Exit codes: 0 ok, 1 usage, 2 numerical failure, 3 I/O. Every failure writes
one JSON line ``{"error": kind, "exit_code": code, "message": ...}`` to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from typing import List, Optional

from .curie_weiss import cw_analytic, cw_levelsum
from .exact import EnumerationError, exact_log_z
from .model import (
    CurieWeiss,
    DenseRandom,
    ModelError,
    RegularPM,
    adjacency_matrix,
    density,
    generate,
    jacobi_eigenvalues,
    load_model,
    model_to_dict,
    regularity,
)
from .pseudomarginals import PseudoMarginalError
from .rng import SplitMix64
from .rounding import bound_report
from .solver import LPStall, RelaxationError, RelaxationOptions

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

# |J| = c / d for the high-temperature, near-threshold and low-temperature sweeps
BENCH_REGIMES = (("high", 0.1), ("threshold", 2.0), ("low", 10.0))
BENCH_COLUMNS = ["regime", "n", "J_scale", "delta", "exact_log_z", "lower", "upper", "gap", "guarantee", "wall_ms"]
BENCH_EXACT_MAX_N = 16


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_USAGE, "usage", message)


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="isingbound", description="Certified bounds on Ising log-partition functions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def output_flags(p, default_format="json"):
        p.add_argument("--format", choices=["json", "csv"], default=default_format)
        p.add_argument("--out", help="write to this path instead of stdout")

    def solver_flags(p, max_iters):
        p.add_argument("--tol", type=_positive_float, default=1e-6)
        p.add_argument("--max-iters", type=int, default=max_iters)
        p.add_argument("--timing", action="store_true", help="report wall-clock timings (output is then not reproducible)")

    p = sub.add_parser("gen", help="generate a model")
    p.add_argument("--spec", choices=["curie-weiss", "dense-random", "regular-pm"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    output_flags(p)

    p = sub.add_parser("exact", help="brute-force log Z")
    p.add_argument("model")
    output_flags(p)

    p = sub.add_parser("bound", help="certified lower and upper bounds")
    p.add_argument("model")
    p.add_argument("--seed-size", type=int, default=0)
    p.add_argument("--strict", action="store_true", help="exit 2 if the cutting-plane loop does not converge")
    solver_flags(p, 200)
    output_flags(p)

    p = sub.add_parser("cw", help="Curie-Weiss log Z")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--J", type=float, required=True)
    p.add_argument("--diagonal", action="store_true", help="keep the i = j terms of (sum x)^2 / n")
    output_flags(p)

    p = sub.add_parser("rank", help="threshold-rank diagnostics")
    p.add_argument("model")
    p.add_argument("--tau", type=float, default=0.5)
    output_flags(p)

    p = sub.add_parser("bench", help="temperature-regime sweep on random regular +-J models")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=2)
    p.add_argument("--seed-size", type=int, nargs="+", default=[0, 1])
    solver_flags(p, 100)
    output_flags(p, default_format="csv")
    return parser


# --- formatting ---------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _csv_text(columns: List[str], rows: List[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _render(record: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(record) + "\n"
    scalars = [k for k, v in record.items() if v is None or isinstance(v, (int, float, str, bool))]
    return _csv_text(scalars, [record])


def _emit(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(EXIT_IO, "io", f"cannot write {out}: {exc}") from None


def _load(path: str):
    try:
        return load_model(path)
    except OSError as exc:
        raise CliError(EXIT_IO, "io", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_IO, "io", f"{path} is not valid JSON: {exc}") from None
    except ModelError as exc:
        raise CliError(EXIT_IO, "io", f"{path} is not a valid model: {exc}") from None


# --- subcommands --------------------------------------------------------------

def _cmd_gen(args) -> int:
    if args.spec == "curie-weiss":
        spec = CurieWeiss(args.n, args.J)
    elif args.spec == "dense-random":
        spec = DenseRandom(args.n, args.scale)
    else:
        spec = RegularPM(args.n, args.d, args.J)
    model = generate(spec, args.seed)
    if args.format == "csv":
        rows = [{"i": i, "j": j, "value": v} for i, j, v in model.edges()]
        _emit(_csv_text(["i", "j", "value"], rows), args.out)
    else:
        _emit(json.dumps(model_to_dict(model)) + "\n", args.out)
    return EXIT_OK


def _cmd_exact(args) -> int:
    model = _load(args.model)
    _emit(_render({"n": model.n, "log_z": exact_log_z(model)}, args.format), args.out)
    return EXIT_OK


def _options(args, seed_size: int) -> RelaxationOptions:
    return RelaxationOptions(seed_size=seed_size, tol=args.tol, max_iters=args.max_iters)


def _cmd_bound(args) -> int:
    model = _load(args.model)
    report = bound_report(model, _options(args, args.seed_size))
    record = report.to_dict()
    record["converged"] = report.certificate.converged
    if not args.timing:
        record.pop("timings")
    _emit(_render(record, args.format), args.out)
    if args.strict and not report.certificate.converged:
        raise CliError(EXIT_NUMERIC, "not_converged", f"no convergence within {args.max_iters} iterations")
    return EXIT_OK


def _cmd_cw(args) -> int:
    value = cw_levelsum(args.n, args.J, args.diagonal)
    analytic = cw_analytic(args.n, args.J)
    record = {
        "n": args.n,
        "J": args.J,
        "include_diagonal": args.diagonal,
        "log_z": value,
        "analytic_log_z": analytic.log_z,
        "m_star": analytic.m_star,
    }
    _emit(_render(record, args.format), args.out)
    return EXIT_OK


def _cmd_rank(args) -> int:
    model = _load(args.model)
    eig = jacobi_eigenvalues(adjacency_matrix(model))
    record = {
        "n": model.n,
        "tau": args.tau,
        "threshold_rank": int((eig >= args.tau).sum()),
        "j_prime": regularity(model),
        "eigenvalues": [float(e) for e in eig[::-1]],
    }
    _emit(_render(record, args.format), args.out)
    return EXIT_OK


def bench_rows(n: int, d: int, seed: int, instances: int, seed_sizes: List[int], tol: float, max_iters: int,
               timing: bool = False) -> List[dict]:
    """One row per (regime, instance, seed size), in that nesting order.

    Instance ``k`` uses the k-th draw of a splitmix64 stream seeded with
    ``seed`` for its graph and signs, so all regimes share the same graphs.
    """
    rng = SplitMix64(seed)
    instance_seeds = [rng.next_u64() for _ in range(instances)]
    rows = []
    for regime, c in BENCH_REGIMES:
        J = c / d
        for inst_seed in instance_seeds:
            model = generate(RegularPM(n, d, J), inst_seed)
            exact = exact_log_z(model) if n <= BENCH_EXACT_MAX_N else None
            try:
                delta = density(model)
            except ModelError:
                delta = None
            for t in seed_sizes:
                t0 = time.perf_counter()
                rep = bound_report(model, RelaxationOptions(seed_size=t, tol=tol, max_iters=max_iters))
                wall = 1e3 * (time.perf_counter() - t0)
                rows.append({
                    "regime": regime,
                    "n": n,
                    "J_scale": J,
                    "delta": delta,
                    "exact_log_z": exact,
                    "lower": rep.lower,
                    "upper": rep.upper,
                    "gap": rep.gap,
                    "guarantee": rep.guarantee,
                    "wall_ms": wall if timing else None,
                    "seed_size": t,
                })
    return rows


def _cmd_bench(args) -> int:
    if args.instances < 1:
        raise CliError(EXIT_USAGE, "usage", "--instances must be positive")
    rows = bench_rows(args.n, args.d, args.seed, args.instances, args.seed_size, args.tol, args.max_iters, args.timing)
    columns = BENCH_COLUMNS + ["seed_size"]
    if args.format == "csv":
        text = _csv_text(columns, rows)
    else:
        text = "".join(json.dumps({c: r[c] for c in columns}) + "\n" for r in rows)
    _emit(text, args.out)
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "exact": _cmd_exact,
    "bound": _cmd_bound,
    "cw": _cmd_cw,
    "rank": _cmd_rank,
    "bench": _cmd_bench,
}


def _diagnose(code: int, kind: str, message: str) -> int:
    line = json.dumps({"error": kind, "exit_code": code, "message": " ".join(str(message).split())})
    sys.stderr.write(line + "\n")
    return code


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv`` and execute the subcommand; returns the exit code."""
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except CliError as exc:
        return _diagnose(exc.code, exc.kind, str(exc))
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except LPStall as exc:
        return _diagnose(EXIT_NUMERIC, "lp_stall", str(exc))
    except RelaxationError as exc:
        return _diagnose(EXIT_NUMERIC, "relaxation", str(exc))
    except (ModelError, EnumerationError, PseudoMarginalError, ValueError) as exc:
        return _diagnose(EXIT_USAGE, "usage", str(exc))
    except OSError as exc:
        return _diagnose(EXIT_IO, "io", str(exc))


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
