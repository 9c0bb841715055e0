"""Command-line front-end.

Commands: classify | beta | eigen | norms | solve | verify-bounds.
Exit codes: 0 success, 2 malformed input, 3 solver non-convergence,
4 bound violation (the counterexample is serialized next to the report).
All randomness flows from --seed through per-task substreams, so repeated
runs with identical flags produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .bounds import (
    GENERATOR_FAMILIES,
    BoundViolationError,
    GeneratorSpec,
    reports_to_csv,
    reports_to_jsonl,
    verify_bounds,
)
from .config import RunConfig
from .eigen import spectrum
from .operators import OP_ROOT, OP_SCALED, estimate_norm
from .semipositive import beta as compute_beta
from .semipositive import classify
from .tcp import NonConvergenceError, TcpInstance, solve_enumeration, solve_iterative
from .tensor import TensorFormatError, load_tensor

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_BOUND_VIOLATION = 4

EIGEN_CLI_KINDS = (
    "h_plus",
    "h_plusplus",
    "z_plus",
    "z_plusplus",
    "pareto_h",
    "pareto_z",
    "delta_h_plus",
    "delta_z_plus",
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol", type=float, default=1e-6, help="sign-decision tolerance (default 1e-6)")
    parser.add_argument("--grid", type=int, default=None, help="grid points per axis (default: by dimension)")
    parser.add_argument("--starts", type=int, default=None, help="override every multistart budget")
    parser.add_argument("--seed", type=int, default=0, help="64-bit master seed (default 0)")
    parser.add_argument("--threads", type=int, default=1, help="parallelism degree (default 1)")
    parser.add_argument(
        "--format", choices=("json", "csv", "text"), default="json", help="output format (default json)"
    )


def _config(args) -> RunConfig:
    overrides = {
        "tol": args.tol,
        "grid": args.grid,
        "seed": args.seed,
        "threads": args.threads,
        "format": args.format,
    }
    if args.starts is not None:
        overrides.update(
            face_starts=args.starts,
            newton_starts=args.starts,
            tcp_newton_starts=args.starts,
            norm_starts=args.starts,
        )
    return RunConfig(**overrides)


def _emit(payload: dict, args, text_lines: list[str], csv_text: str | None = None) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    elif args.format == "csv":
        if csv_text is None:
            rows = ["key,value"]
            rows.extend(f"{k},{json.dumps(v, sort_keys=True)}" for k, v in sorted(payload["result"].items()))
            csv_text = "\n".join(rows) + "\n"
        sys.stdout.write(csv_text)
    else:
        for line in text_lines:
            print(line)


def _payload(command: str, cfg: RunConfig, result) -> dict:
    return {"command": command, "config": cfg.to_dict(), "result": result}


def _cmd_classify(args) -> int:
    cfg = _config(args)
    A = load_tensor(args.tensor)
    cls = classify(A, cfg)
    result = cls.to_jsonable()
    lines = [f"{cls.verdict}, beta={cls.beta.value}"]
    if cls.counterexample is not None:
        lines.append(f"counterexample: {[float(v) for v in cls.counterexample]}")
    _emit(_payload("classify", cfg, result), args, lines)
    return EXIT_OK


def _cmd_beta(args) -> int:
    cfg = _config(args)
    A = load_tensor(args.tensor)
    res = compute_beta(A, cfg)
    lines = [
        f"beta={res.value}",
        f"argmin={[float(v) for v in res.argmin]}",
        f"certified_by={res.certified_by} grid={res.grid_resolution}",
    ]
    _emit(_payload("beta", cfg, res.to_jsonable()), args, lines)
    return EXIT_OK


def _cmd_eigen(args) -> int:
    cfg = _config(args)
    A = load_tensor(args.tensor)
    summary = spectrum(A, args.kind, cfg)
    result = summary.to_jsonable()
    lines = [f"kind={args.kind} completeness={summary.completeness}"]
    for rec in summary.records:
        lines.append(
            f"value={rec.value} support={[i + 1 for i in rec.support]} residual={rec.residual:.2e}"
        )
    for name in ("delta_h_plus", "delta_z_plus", "lambda_min_pareto_h", "mu_min_pareto_z"):
        val = result[name]
        if val is not None:
            lines.append(f"{name}={val}")
    _emit(_payload("eigen", cfg, result), args, lines)
    return EXIT_OK


def _cmd_norms(args) -> int:
    cfg = _config(args)
    A = load_tensor(args.tensor)
    m = A.m
    p_values = [1.0, 2.0, float(m), m / (m - 1.0), math.inf]
    ops = [OP_SCALED] + ([OP_ROOT] if m % 2 == 0 else [])
    rows = []
    for op in ops:
        for p in p_values:
            report = estimate_norm(A, op, p, cfg=cfg)
            rows.append(report.to_jsonable())
    lines = ["op,p,empirical_norm,closed_form_bound"]
    for r in rows:
        lines.append(f"{r['op']},{r['p']},{r['empirical_norm']},{r['closed_form_bound']}")
    csv_text = "\n".join(lines) + "\n"
    _emit(_payload("norms", cfg, {"reports": rows}), args, lines, csv_text)
    return EXIT_OK


def _cmd_solve(args) -> int:
    cfg = _config(args)
    try:
        with open(args.instance, "r", encoding="utf-8") as fh:
            inst = TcpInstance.from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise TensorFormatError(f"cannot read instance file {args.instance}: {exc}") from exc
    method = args.method
    if method == "auto":
        method = "enumeration" if inst.A.n <= cfg.support_cap else "iterative"
    if method == "enumeration":
        solutions = solve_enumeration(inst, cfg)
        status = "ok" if solutions else "no_solutions_found"
        result = {"status": status, "solutions": [s.to_jsonable() for s in solutions]}
        lines = [f"status={status}"] + [f"x={s.to_jsonable()['x']}" for s in solutions]
    else:
        sol = solve_iterative(inst, cfg)
        result = {"status": "ok", "solutions": [sol.to_jsonable()]}
        lines = [f"x={sol.to_jsonable()['x']}"]
    _emit(_payload("solve", cfg, result), args, lines)
    return EXIT_OK


def _cmd_verify_bounds(args) -> int:
    cfg = _config(args)
    spec = GeneratorSpec(
        family=args.family,
        m=args.m,
        n=args.n,
        seed=args.seed,
        parameters={"symmetric": args.symmetric} if args.symmetric else {},
    )
    try:
        reports = verify_bounds(spec, args.count, cfg)
    except BoundViolationError as err:
        with open(args.violation_out, "w", encoding="utf-8") as fh:
            json.dump(err.payload(), fh, sort_keys=True, indent=2)
        print(f"bound violation; counterexample written to {args.violation_out}", file=sys.stderr)
        return EXIT_BOUND_VIOLATION
    jsonl = reports_to_jsonl(reports)
    csv_text = reports_to_csv(reports)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(jsonl)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    result = {
        "family": spec.family,
        "m": spec.m,
        "n": spec.n,
        "seed": spec.seed,
        "instances": args.count,
        "reports": len(reports),
        "violations": 0,
    }
    lines = [f"{len(reports)} reports, 0 violations"]
    _emit(_payload("verify-bounds", cfg, result), args, lines, csv_text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tcpkit",
        description="Semi-positivity margins, orthant/Pareto eigenpairs, operator-norm "
        "bounds, complementarity solving, and solution-norm bound verification "
        "for dense order-m tensors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="three-way semi-positivity verdict")
    p.add_argument("tensor", help="tensor JSON file")
    _add_common(p)
    p.set_defaults(fn=_cmd_classify)

    p = sub.add_parser("beta", help="activity margin over the nonnegative unit sphere")
    p.add_argument("tensor")
    _add_common(p)
    p.set_defaults(fn=_cmd_beta)

    p = sub.add_parser("eigen", help="eigenpair enumeration and derived minima")
    p.add_argument("tensor")
    p.add_argument("--kind", choices=EIGEN_CLI_KINDS, required=True)
    _add_common(p)
    p.set_defaults(fn=_cmd_eigen)

    p = sub.add_parser("norms", help="closed-form bounds and empirical operator norms")
    p.add_argument("tensor")
    _add_common(p)
    p.set_defaults(fn=_cmd_norms)

    p = sub.add_parser("solve", help="solve a complementarity instance")
    p.add_argument("instance", help="instance JSON file: {tensor, q}")
    p.add_argument("--method", choices=("enumeration", "iterative", "auto"), default="auto")
    _add_common(p)
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("verify-bounds", help="generate instances and check every sandwich")
    p.add_argument("--family", choices=GENERATOR_FAMILIES, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--symmetric", action="store_true", help="symmetric variant (matrix family)")
    p.add_argument("--report", default=None, help="write one report per line (JSON) here")
    p.add_argument("--csv", default=None, help="write the CSV summary here")
    p.add_argument("--violation-out", default="bound_violation.json")
    _add_common(p)
    p.set_defaults(fn=_cmd_verify_bounds)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except TensorFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
