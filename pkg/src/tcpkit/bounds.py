"""Closed-form sandwich bounds on solution norms, generators, and the harness.

For a strictly semi-positive instance every solution norm (infinity, 2-
and m-norm, each raised to m-1) is sandwiched between a closed-form lower
bound built from row absolute sums and an upper bound dividing the matching
norm of the negative part of q by a structural positive quantity (the
activity margin for the infinity norm, the least Pareto value for the
symmetric 2-/m-norm cases).  ``verify_bounds`` generates gated instances,
solves them exactly, and checks every applicable sandwich at 1e-6, failing
loudly with the counterexample when one is violated.

Bounds use the closed-form denominators, so reports carry no optimization
noise; the raw operator-norm lower bounds are additionally evaluated with
empirical norm estimates, which can only tighten them, and the reports
keep both so the dominance is checkable.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig, DEFAULT_CONFIG
from .eigen import pareto_h_eigenvalues, pareto_z_eigenvalues
from .operators import OP_ROOT, OP_SCALED, estimate_norm, norm_bound
from .semipositive import STRICTLY_SEMI_POSITIVE, Classification, classify
from .tcp import TcpInstance, TcpSolution, solve_enumeration, solve_iterative
from .tensor import Tensor, identity_tensor, pos_part, symmetrize

__all__ = [
    "GeneratorSpec",
    "BoundEntry",
    "BoundsReport",
    "BoundViolationError",
    "GENERATOR_FAMILIES",
    "SANDWICH_TOL",
    "generate",
    "min_pareto_h",
    "min_pareto_z",
    "upper_bounds",
    "lower_bounds",
    "evaluate_instance",
    "verify_bounds",
    "reports_to_jsonl",
    "reports_to_csv",
]

SANDWICH_TOL = 1e-6

GENERATOR_FAMILIES = (
    "identity_shift",
    "diag_dominant",
    "random_symmetric_copositive",
    "matrix_m2",
)


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    m: int
    n: int
    seed: int = 0
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in GENERATOR_FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "matrix_m2" and self.m != 2:
            raise ValueError("matrix_m2 generates order-2 tensors only")
        if self.m < 2 or self.n < 1:
            raise ValueError("need m >= 2 and n >= 1")


def _spec_rng(spec: GeneratorSpec, *tags: object) -> np.random.Generator:
    label = "/".join(str(t) for t in (spec.family, spec.m, spec.n, *tags))
    return np.random.default_rng([spec.seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(label.encode())])


def _draw_tensor(spec: GeneratorSpec, rng: np.random.Generator) -> Tensor:
    m, n, params = spec.m, spec.n, spec.parameters
    margin = float(params.get("margin", 0.5))
    if spec.family == "identity_shift":
        eps = float(params.get("epsilon", 0.3))
        noise = Tensor(rng.uniform(-1.0, 1.0, size=(n,) * m))
        c = params.get("c")
        if c is None:
            c = margin + eps * norm_bound(noise, OP_SCALED, np.inf) * n ** ((m - 2) / 2.0)
        return identity_tensor(m, n).scale(float(c)).add(noise.scale(eps))
    if spec.family == "diag_dominant":
        data = rng.uniform(-1.0, 1.0, size=(n,) * m)
        idx = np.arange(n)
        diag_cell = tuple([idx] * m)
        data[diag_cell] = 0.0
        off = np.abs(data).reshape(n, -1).sum(axis=1)
        data[diag_cell] = off + margin + rng.uniform(0.0, 1.0, size=n)
        return Tensor(data)
    if spec.family == "random_symmetric_copositive":
        base = symmetrize(Tensor(rng.uniform(0.0, 1.0, size=(n,) * m)))
        data = base.data.copy()
        idx = np.arange(n)
        data[tuple([idx] * m)] += margin + rng.uniform(0.0, 1.0, size=n)
        return Tensor(data, symmetric=True)
    # matrix_m2: strictly diagonally dominant with positive diagonal
    off = rng.uniform(-1.0, 1.0, size=(n, n))
    if params.get("symmetric", False):
        off = (off + off.T) / 2.0
    np.fill_diagonal(off, 0.0)
    diag = np.abs(off).sum(axis=1) + margin + rng.uniform(0.0, 1.0, size=n)
    return Tensor(off + np.diag(diag))


def _generate_gated(
    spec: GeneratorSpec, instance_index: int, cfg: RunConfig
) -> tuple[Tensor, Classification]:
    for attempt in range(100):
        rng = _spec_rng(spec, "tensor", instance_index, attempt)
        A = _draw_tensor(spec, rng)
        cls = classify(A, cfg)
        if cls.verdict == STRICTLY_SEMI_POSITIVE:
            return A, cls
    raise RuntimeError(
        f"generator {spec.family} failed to produce a strictly semi-positive "
        f"tensor in 100 attempts (m={spec.m}, n={spec.n})"
    )


def generate(spec: GeneratorSpec, cfg: RunConfig = DEFAULT_CONFIG) -> Tensor:
    """Draw one tensor from the family; re-checked strictly semi-positive."""
    return _generate_gated(spec, 0, cfg)[0]


def min_pareto_h(A: Tensor, cfg: RunConfig = DEFAULT_CONFIG) -> float:
    records = pareto_h_eigenvalues(A, cfg)
    if not records:
        raise ValueError("no Pareto value found; cannot form an upper bound")
    return min(r.value for r in records)


def min_pareto_z(A: Tensor, cfg: RunConfig = DEFAULT_CONFIG) -> float:
    records = pareto_z_eigenvalues(A, cfg)
    if not records:
        raise ValueError("no Pareto value found; cannot form an upper bound")
    return min(r.value for r in records)


def _vec_norm(v: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(np.abs(v).max(initial=0.0))
    return float((np.abs(v) ** p).sum() ** (1.0 / p))


@dataclass
class BoundEntry:
    """One sandwich: lower <= (solution norm)^(m-1) <= upper, when applicable."""

    entry_id: str
    quantity: str  # which solution norm: "inf", "two" or "m"
    lower: float | None = None
    upper: float | None = None
    lower_empirical: float | None = None
    achieved: float | None = None
    applicable: bool = True
    reason: str = ""
    flags: tuple[str, ...] = ()
    passed: bool | None = None

    def evaluate(self, achieved: float, tol: float = SANDWICH_TOL) -> "BoundEntry":
        ok = True
        if self.applicable:
            if self.lower is not None and achieved < self.lower - tol:
                ok = False
            if self.upper is not None and achieved > self.upper + tol:
                ok = False
        return BoundEntry(
            self.entry_id, self.quantity, self.lower, self.upper,
            self.lower_empirical, achieved, self.applicable, self.reason,
            self.flags, ok,
        )

    def to_jsonable(self) -> dict:
        return {
            "entry_id": self.entry_id,
            "quantity": self.quantity,
            "lower": self.lower,
            "upper": self.upper,
            "lower_empirical": self.lower_empirical,
            "achieved": self.achieved,
            "applicable": self.applicable,
            "reason": self.reason,
            "flags": list(self.flags),
            "passed": self.passed,
        }


@dataclass
class BoundsReport:
    instance_id: str
    solution_index: int
    entries: list[BoundEntry]
    provenance: dict
    passed: bool = True

    def to_jsonable(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "solution_index": self.solution_index,
            "entries": [e.to_jsonable() for e in self.entries],
            "provenance": self.provenance,
            "passed": self.passed,
        }


class BoundViolationError(RuntimeError):
    """An applicable sandwich failed; carries the offending instance and report."""

    def __init__(self, instance: TcpInstance, report: BoundsReport):
        failing = [e.entry_id for e in report.entries if e.passed is False]
        super().__init__(f"bound violation on {report.instance_id}: {failing}")
        self.instance = instance
        self.report = report

    def payload(self) -> dict:
        return {"instance": self.instance.to_dict(), "report": self.report.to_jsonable()}


def upper_bounds(
    inst: TcpInstance,
    beta_value: float,
    lambda_value: float | None = None,
    mu_value: float | None = None,
) -> dict[str, float]:
    """Division-form upper bounds on solution norms raised to m-1.

    The infinity-norm bound divides by the activity margin; the symmetric
    2-norm and m-norm bounds divide by the least Pareto values and are
    present only when those are supplied (symmetric tensors).
    """
    if beta_value <= 0:
        raise ValueError("nonpositive activity margin; instance is misclassified")
    q = inst.q
    m = inst.A.m
    out = {"inf": _vec_norm(pos_part(-q), math.inf) / beta_value}
    if mu_value is not None:
        if mu_value <= 0:
            raise ValueError("nonpositive Pareto divisor; instance is misclassified")
        out["two"] = _vec_norm(pos_part(-q), 2.0) / mu_value
    if lambda_value is not None:
        if lambda_value <= 0:
            raise ValueError("nonpositive Pareto divisor; instance is misclassified")
        out["m"] = _vec_norm(pos_part(-q), m / (m - 1.0)) / lambda_value
    return out


def lower_bounds(
    inst: TcpInstance,
    cfg: RunConfig = DEFAULT_CONFIG,
    estimate_budget: int | None = 8,
) -> dict[str, float | None]:
    """Closed-form lower bounds on solution norms raised to m-1.

    Keys: "inf" (any order), "inf_even" (even order, via the root
    operator), "two", "m" (even order).  When ``estimate_budget`` is not
    None the raw operator-norm forms are also evaluated with empirical
    norm estimates under keys suffixed ``_empirical``; estimates sit below
    the closed-form bounds, so these can only be larger (tighter), and
    they are reported for comparison, not certification.
    """
    A, q = inst.A, inst.q
    m, n = A.m, A.n
    neg = pos_part(-q)
    q_inf = _vec_norm(neg, math.inf)
    q_two = _vec_norm(neg, 2.0)
    q_m = _vec_norm(neg, float(m))
    rows = A.row_abs_sums()
    if rows.max() == 0.0:
        raise ValueError("zero tensor: the row-sum denominators vanish "
                         "(the instance cannot be strictly semi-positive)")
    scale_inf = n ** ((m - 2) / 2.0) * float(rows.max())
    out: dict[str, float | None] = {
        "inf": q_inf / scale_inf,
        "two": q_two / (n ** ((m - 2) / 2.0) * float(np.sqrt((rows**2).sum()))),
        "inf_even": None,
        "m": None,
    }
    if m % 2 == 0:
        out["inf_even"] = q_inf / float(rows.max())
        out["m"] = q_m / norm_bound(A, OP_ROOT, float(m)) ** (m - 1)
    if estimate_budget is not None:
        est_t_inf = estimate_norm(A, OP_SCALED, math.inf, budget=estimate_budget, cfg=cfg)
        est_t_two = estimate_norm(A, OP_SCALED, 2.0, budget=estimate_budget, cfg=cfg)
        out["inf_empirical"] = (
            q_inf / (n ** ((m - 2) / 2.0) * est_t_inf.empirical_norm)
            if est_t_inf.empirical_norm > 0 else None
        )
        out["two_empirical"] = (
            q_two / est_t_two.empirical_norm if est_t_two.empirical_norm > 0 else None
        )
        if m % 2 == 0:
            est_f_inf = estimate_norm(A, OP_ROOT, math.inf, budget=estimate_budget, cfg=cfg)
            est_f_m = estimate_norm(A, OP_ROOT, float(m), budget=estimate_budget, cfg=cfg)
            out["inf_even_empirical"] = (
                q_inf / est_f_inf.empirical_norm ** (m - 1)
                if est_f_inf.empirical_norm > 0 else None
            )
            out["m_empirical"] = (
                q_m / est_f_m.empirical_norm ** (m - 1)
                if est_f_m.empirical_norm > 0 else None
            )
    return out


def _bound_templates(
    inst: TcpInstance,
    beta_value: float,
    lambda_value: float | None,
    mu_value: float | None,
    cfg: RunConfig,
    estimate_budget: int | None,
) -> list[BoundEntry]:
    A = inst.A
    m = A.m
    lo = lower_bounds(inst, cfg, estimate_budget)
    up = upper_bounds(inst, beta_value, lambda_value, mu_value)
    sym_flags = ("copositive_equivalent",) if A.symmetric else ()

    entries = [
        BoundEntry(
            "inf_general", "inf",
            lower=lo["inf"], upper=up["inf"],
            lower_empirical=lo.get("inf_empirical"),
            applicable=True, reason="strictly semi-positive", flags=sym_flags,
        ),
        BoundEntry(
            "inf_even_order", "inf",
            lower=lo["inf_even"], upper=up["inf"],
            lower_empirical=lo.get("inf_even_empirical"),
            applicable=m % 2 == 0,
            reason="even order" if m % 2 == 0 else "odd order", flags=sym_flags,
        ),
    ]
    if A.symmetric:
        two_flags = sym_flags if m % 2 == 0 else sym_flags + ("interpretation_dependent",)
        entries.append(
            BoundEntry(
                "two_norm_symmetric", "two",
                lower=lo["two"], upper=up.get("two"),
                lower_empirical=lo.get("two_empirical"),
                applicable=True,
                reason="symmetric" if m % 2 == 0
                else "symmetric; odd order leaves the upper-bound divisor undefined",
                flags=two_flags,
            )
        )
        entries.append(
            BoundEntry(
                "m_norm_symmetric_even", "m",
                lower=lo["m"], upper=up.get("m"),
                lower_empirical=lo.get("m_empirical"),
                applicable=m % 2 == 0,
                reason="symmetric and even order" if m % 2 == 0 else "odd order",
                flags=sym_flags,
            )
        )
    else:
        entries.append(
            BoundEntry("two_norm_symmetric", "two", applicable=False, reason="not symmetric")
        )
        entries.append(
            BoundEntry("m_norm_symmetric_even", "m", applicable=False, reason="not symmetric")
        )
    if m == 2:
        entries.append(
            BoundEntry(
                "matrix_inf", "inf", lower=lo["inf"], upper=up["inf"],
                applicable=True, reason="order 2",
            )
        )
        entries.append(
            BoundEntry(
                "matrix_two_symmetric", "two",
                lower=lo["two"], upper=up.get("two"),
                applicable=A.symmetric,
                reason="order 2, symmetric" if A.symmetric else "not symmetric",
            )
        )
    return entries


def _achieved(x: np.ndarray, m: int) -> dict[str, float]:
    return {
        "inf": _vec_norm(x, math.inf) ** (m - 1),
        "two": _vec_norm(x, 2.0) ** (m - 1),
        "m": _vec_norm(x, float(m)) ** (m - 1),
    }


def evaluate_instance(
    inst: TcpInstance,
    solutions: list[TcpSolution],
    beta_value: float,
    lambda_value: float | None,
    mu_value: float | None,
    instance_id: str,
    cfg: RunConfig = DEFAULT_CONFIG,
    estimate_budget: int | None = 8,
    provenance: dict | None = None,
) -> list[BoundsReport]:
    templates = _bound_templates(inst, beta_value, lambda_value, mu_value, cfg, estimate_budget)
    reports = []
    for j, sol in enumerate(solutions):
        ach = _achieved(sol.x, inst.A.m)
        entries = [t.evaluate(ach[t.quantity]) for t in templates]
        reports.append(
            BoundsReport(
                instance_id=instance_id,
                solution_index=j,
                entries=entries,
                provenance=provenance or {},
                passed=all(e.passed for e in entries),
            )
        )
    return reports


def verify_bounds(
    spec: GeneratorSpec,
    count: int,
    cfg: RunConfig = DEFAULT_CONFIG,
    estimate_budget: int | None = 8,
) -> list[BoundsReport]:
    """Generate, solve, and check ``count`` instances of one family.

    Every certified solution of every instance is evaluated against every
    applicable sandwich; the first violation aborts the run by raising
    :class:`BoundViolationError` with the instance attached.  Roughly one
    instance in ten gets a nonnegative q to exercise the zero-solution
    branch, where all bounds and achieved norms collapse to zero.
    """
    reports: list[BoundsReport] = []
    for k in range(count):
        A, cls = _generate_gated(spec, k, cfg)
        rng = _spec_rng(spec, "q", k)
        q_low, q_high = spec.parameters.get("q_range", (-2.0, 1.0))
        if k % 10 == 9:
            q = rng.uniform(0.0, 1.0, size=spec.n)
        else:
            q = rng.uniform(q_low, q_high, size=spec.n)
        inst = TcpInstance(A, q)
        solutions = solve_enumeration(inst, cfg)
        if not solutions:
            solutions = [solve_iterative(inst, cfg)]
        lam = mu = None
        if A.symmetric:
            lam = min_pareto_h(A, cfg)
            if A.m % 2 == 0:
                mu = min_pareto_z(A, cfg)
        provenance = {
            "family": spec.family,
            "beta_certified_by": cls.beta.certified_by,
            "pareto_values_heuristic": A.symmetric and A.m > 2,
            "solver": solutions[0].method,
        }
        instance_id = f"{spec.family}-m{spec.m}-n{spec.n}-s{spec.seed}-{k:04d}"
        for report in evaluate_instance(
            inst, solutions, cls.beta.value, lam, mu,
            instance_id, cfg, estimate_budget, provenance,
        ):
            if not report.passed:
                raise BoundViolationError(inst, report)
            reports.append(report)
    return reports


def reports_to_jsonl(reports: list[BoundsReport]) -> str:
    return "\n".join(json.dumps(r.to_jsonable(), sort_keys=True) for r in reports) + "\n"


def reports_to_csv(reports: list[BoundsReport]) -> str:
    lines = ["instance_id,solution,entry_id,lower,achieved,upper,applicable,passed"]
    for r in reports:
        for e in r.entries:
            lines.append(
                ",".join(
                    [
                        r.instance_id,
                        str(r.solution_index),
                        e.entry_id,
                        "" if e.lower is None else repr(e.lower),
                        "" if e.achieved is None else repr(e.achieved),
                        "" if e.upper is None else repr(e.upper),
                        str(e.applicable).lower(),
                        str(e.passed).lower(),
                    ]
                )
            )
    return "\n".join(lines) + "\n"
