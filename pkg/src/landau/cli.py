"""Command-line front end: ``landau {eval,grid,lambda,search,audit}``.

Dyadic arguments use ``MpE`` syntax (``3p-2`` is 0.75); complex points are
``re,im``.  Budget defaults can be overridden through ``LANDAU_MAX_POINTS``,
``LANDAU_MAX_EVALS``, ``LANDAU_MAX_STAGES`` and ``LANDAU_MAX_T``.

Exit codes: 0 success, 1 computation error, 2 usage error, 3 resource cap,
4 budget exhausted (lambda only; the search reports it as a status).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .certify import Budget, LambdaCertificate, audit_report, lambda_lower_bound
from .dyadic import parse_complex, parse_dyadic
from .errors import BudgetExhausted, FormatError, LandauError, ResourceCap
from .fixtures import fixture_bounds, fixture_name, fixture_stream
from .grid import DEFAULT_MAX_POINTS, grid_from_image, grid_csv_text, grid_l_value, write_trace_csv
from .schedule import ANTIDERIVATIVE, VALUE, GenericBounds, make_schedule, polynomial_bounds
from .search import SearchBudget, landau_estimate
from .series import EvalRequest, eval_series
from .stream import encode_coefficients, read_coefficient_file, read_stream_file

ORDERS = {"antiderivative": ANTIDERIVATIVE, "f": ANTIDERIVATIVE, "value": VALUE, "fprime": VALUE,
          "derivative": 1, "fsecond": 1}


class UsageError(Exception):
    pass


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}")


def _dyadic(text: str):
    try:
        return parse_dyadic(text)
    except (ValueError, FormatError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _complex(text: str):
    try:
        return parse_complex(text)
    except (ValueError, FormatError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _order(text: str) -> int:
    if text in ORDERS:
        return ORDERS[text]
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown order {text!r}")
    if k < ANTIDERIVATIVE:
        raise argparse.ArgumentTypeError("order must be >= -1")
    return k


def load_stream(spec: str, schedule):
    """Stream and (when known) its coefficient list from a fixture name or a file."""
    name = fixture_name(spec)
    if name is not None:
        return fixture_stream(name, schedule), name, None
    path = Path(spec)
    if not path.is_file():
        raise UsageError(f"--stream: no fixture or file named {spec!r}")
    head = path.read_text()[:4]
    if head == "pad=":
        return read_stream_file(path), None, None
    coeffs = read_coefficient_file(path)
    return encode_coefficients(coeffs, schedule), None, coeffs


def load_bounds(spec: str, schedule, coeffs):
    if spec == "generic":
        return GenericBounds(schedule)
    if spec == "polynomial":
        if coeffs is None:
            raise UsageError("--bounds polynomial needs a coefficient-file stream")
        return polynomial_bounds(coeffs, "polynomial")
    name = fixture_name(spec)
    if name is None:
        raise UsageError(f"--bounds: expected generic, polynomial or a fixture name, got {spec!r}")
    return fixture_bounds(name)


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="landau", description="Certified largest-disc bounds for normalised functions.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, stream=True):
        if stream:
            sp.add_argument("--stream", required=True, help="fixture name (fixtures/identity) or stream/coefficient file")
        sp.add_argument("--schedule", choices=["landau", "test"], default="landau")
        sp.add_argument("--c-exponent", type=int, default=100, help="c = 1 + 2**-C in the bound schedule")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--out", help="output file (default: stdout)")

    ev = sub.add_parser("eval", help="enclose f, f' or f'' at a point")
    common(ev)
    ev.add_argument("--order", type=_order, default=VALUE,
                    help="antiderivative (f), value (f'), derivative (f''), or an integer k >= -1")
    ev.add_argument("--z", type=_complex, required=True)
    ev.add_argument("--tol", type=_dyadic, required=True)

    gr = sub.add_parser("grid", help="build an eps-covering grid of f(D_r) and dump it as CSV")
    common(gr)
    gr.add_argument("--radius", type=_dyadic, required=True)
    gr.add_argument("--eps", type=_dyadic, required=True)
    gr.add_argument("--bounds", default="generic")
    gr.add_argument("--trace", help="also dump the domain values d_z to this CSV")
    gr.add_argument("--max-points", type=int, default=None)

    la = sub.add_parser("lambda", help="certified lower bound on lambda_f")
    common(la)
    la.add_argument("--n", type=int, required=True)
    la.add_argument("--bounds", default="generic")
    la.add_argument("--eps-override", type=_dyadic, default=None)
    la.add_argument("--guard-bits", type=int, default=8)
    la.add_argument("--max-points", type=int, default=None)
    la.add_argument("--max-evals", type=int, default=None)
    la.add_argument("--max-stages", type=int, default=None)

    se = sub.add_parser("search", help="infimum over w 1^inf under a budget")
    common(se, stream=False)
    se.add_argument("--n", type=int, required=True)
    se.add_argument("--bounds", default="generic", choices=["generic"])
    se.add_argument("--max-t", type=int, default=None)
    se.add_argument("--guard-bits", type=int, default=8)
    se.add_argument("--max-points", type=int, default=None)
    se.add_argument("--max-evals", type=int, default=None)
    se.add_argument("--max-stages", type=int, default=None)
    se.add_argument("--csv", help="per-word table")

    au = sub.add_parser("audit", help="re-verify a certificate file")
    au.add_argument("certificate")
    return p


def _budget(args) -> Budget:
    return Budget(
        max_stages=args.max_stages if args.max_stages is not None else _env_int("LANDAU_MAX_STAGES", Budget.max_stages),
        max_evals=args.max_evals if args.max_evals is not None else _env_int("LANDAU_MAX_EVALS", Budget.max_evals),
        max_points=args.max_points if args.max_points is not None else _env_int("LANDAU_MAX_POINTS", DEFAULT_MAX_POINTS),
    )


def _run(args) -> int:
    if args.command == "audit":
        cert = LambdaCertificate.from_json(Path(args.certificate).read_text())
        print(audit_report(cert))
        return 0 if cert.audit_ok() else 1
    if args.threads < 1:
        raise UsageError("--threads must be positive")
    schedule = make_schedule("geometric" if args.schedule == "test" else "landau", args.c_exponent)

    if args.command == "search":
        if args.n < 1:
            raise UsageError("--n must be at least 1")
        max_t = args.max_t if args.max_t is not None else _env_int("LANDAU_MAX_T", 1)
        report = landau_estimate(args.n, schedule, GenericBounds(schedule), SearchBudget(max_t, _budget(args)),
                                 args.guard_bits, args.threads)
        _write(report.to_json(), args.out)
        if args.csv:
            report.write_csv(args.csv)
        return 0

    stream, fixture, coeffs = load_stream(args.stream, schedule)
    if args.command == "eval":
        val = eval_series(stream, schedule, EvalRequest(args.order, args.z, args.tol))
        doc = {"order": args.order, "z": [str(args.z.re), str(args.z.im)], "tol": str(args.tol),
               "value": [str(val.re), str(val.im)], "approx": [float(val.re), float(val.im)],
               "query_depth": stream.query_depth}
        _write(json.dumps(doc, sort_keys=True), args.out)
        return 0

    bounds = load_bounds(args.bounds, schedule, coeffs)
    if args.command == "grid":
        budget = _budget_points(args)
        grid, trace = grid_from_image(stream, schedule, args.radius, args.eps, bounds, max_points=budget,
                                      workers=args.threads, keep_trace=bool(args.trace))
        _write(grid_csv_text(grid).rstrip("\n"), args.out)
        if args.trace:
            write_trace_csv(trace, args.trace)
        est = grid_l_value(grid, 53)
        sys.stderr.write(f"points={len(grid)} s={est.s} l in [{float(est.lower):.9f}, {float(est.upper):.9f}]\n")
        return 0

    if args.n < 1:
        raise UsageError("--n must be at least 1")
    cert = lambda_lower_bound(stream, schedule, args.n, bounds, _budget(args), args.guard_bits,
                              args.eps_override, args.threads)
    _write(cert.to_json(), args.out)
    return 0


def _budget_points(args) -> int:
    return args.max_points if args.max_points is not None else _env_int("LANDAU_MAX_POINTS", DEFAULT_MAX_POINTS)


def _fail(category: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": category, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        return _fail("UsageError", str(exc), 2)
    except ResourceCap as exc:
        return _fail(exc.category, str(exc), 3)
    except BudgetExhausted as exc:
        return _fail(exc.category, str(exc), 4)
    except LandauError as exc:
        return _fail(exc.category, str(exc), 1)
    except (ValueError, OSError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)


dispatch = main


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
