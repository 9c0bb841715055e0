"""Desk-scale complementarity solvers and independent solution certificates.

An instance pairs a tensor with an offset vector q; a solution is x >= 0
with w = q + A x^(m-1) >= 0 and x'w = 0.  Two routes are provided: exact
support enumeration (per support, solve the polynomial system on the
active coordinates and check the inactive rows) and a projected
fixed-point iteration with a backtracking step on the natural-residual
merit.  Every returned solution is re-certified by :func:`verify_solution`
from scratch.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .config import RunConfig, DEFAULT_CONFIG, parallel_map
from .operators import OP_SCALED, norm_bound
from .optimize import damped_newton
from .tensor import (
    Tensor,
    TensorFormatError,
    as_vector,
    contract_m1,
    jacobian_m1,
    pos_part,
    power_component,
    principal_subtensor,
    tensor_from_dict,
    tensor_to_dict,
)

__all__ = [
    "TcpInstance",
    "TcpSolution",
    "ResidualRecord",
    "NonConvergenceError",
    "verify_solution",
    "solve_enumeration",
    "solve_iterative",
]


class NonConvergenceError(RuntimeError):
    """The iterative solver exhausted its budget; carries diagnostics."""

    def __init__(self, message: str, best_merit: float, iterations: int):
        super().__init__(message)
        self.best_merit = best_merit
        self.iterations = iterations


@dataclass
class TcpInstance:
    A: Tensor
    q: np.ndarray

    def __post_init__(self):
        self.q = as_vector(self.q, self.A.n)

    @classmethod
    def from_dict(cls, obj) -> "TcpInstance":
        if not isinstance(obj, dict) or "tensor" not in obj or "q" not in obj:
            raise TensorFormatError("instance object needs 'tensor' and 'q' fields")
        A = tensor_from_dict(obj["tensor"])
        try:
            q = np.asarray([float(v) for v in obj["q"]], dtype=float)
        except (TypeError, ValueError) as exc:
            raise TensorFormatError("'q' must be a list of reals") from exc
        if q.size != A.n:
            raise TensorFormatError(f"q has length {q.size}, tensor dimension is {A.n}")
        return cls(A, q)

    def to_dict(self) -> dict:
        return {"tensor": tensor_to_dict(self.A), "q": [float(v) for v in self.q]}


@dataclass
class ResidualRecord:
    primal: float  # min_i x_i
    dual: float    # min_i w_i
    compl: float   # |x'w|
    ok: bool

    def to_jsonable(self) -> dict:
        return {"primal": self.primal, "dual": self.dual, "compl": self.compl, "ok": self.ok}


@dataclass
class TcpSolution:
    x: np.ndarray
    w: np.ndarray
    support: tuple[int, ...]
    residuals: ResidualRecord
    method: str

    def to_jsonable(self) -> dict:
        return {
            "x": [float(v) for v in self.x],
            "w": [float(v) for v in self.w],
            "support": [i + 1 for i in self.support],
            "residuals": self.residuals.to_jsonable(),
            "method": self.method,
        }


def verify_solution(inst: TcpInstance, x, tol: float = 1e-8) -> ResidualRecord:
    """Recompute w and the three residuals from scratch; pass iff all within tol."""
    x = as_vector(x, inst.A.n)
    w = inst.q + contract_m1(inst.A, x)
    primal = float(np.min(x))
    dual = float(np.min(w))
    compl = abs(float(x @ w))
    return ResidualRecord(primal, dual, compl, primal >= -tol and dual >= -tol and compl <= tol)


def _natural_merit(inst: TcpInstance, x: np.ndarray) -> float:
    return float(np.linalg.norm(np.minimum(x, inst.q + contract_m1(inst.A, x))))


def _make_solution(inst: TcpInstance, x: np.ndarray, method: str, cfg: RunConfig) -> TcpSolution | None:
    x = np.maximum(x, 0.0)
    # Newton stalls on boundary roots (x_i^(m-1) = 0) leave dust components;
    # canonicalize to the zeroed vector whenever that still certifies, so the
    # same solution is not double counted across neighboring supports.
    dusted = np.where(x > cfg.solution_dust_tol, x, 0.0)
    if not np.array_equal(dusted, x) and verify_solution(inst, dusted, cfg.residual_tol).ok:
        x = dusted
    record = verify_solution(inst, x, cfg.residual_tol)
    if not record.ok:
        return None
    support = tuple(i for i in range(inst.A.n) if x[i] > cfg.positivity_floor)
    w = inst.q + contract_m1(inst.A, x)
    return TcpSolution(x=x, w=w, support=support, residuals=record, method=method)


def _support_roots(inst: TcpInstance, J: tuple[int, ...], cfg: RunConfig) -> list[np.ndarray]:
    """Strictly positive roots of the active system A_J y^(m-1) = -q_J."""
    sub = principal_subtensor(inst.A, J)
    qJ = inst.q[list(J)]
    r, m = sub.n, sub.m
    if m == 2:
        try:
            y = np.linalg.solve(sub.data, -qJ)
        except np.linalg.LinAlgError:
            y, *_ = np.linalg.lstsq(sub.data, -qJ, rcond=None)
        if float(np.max(np.abs(sub.data @ y + qJ))) > 1e-9 * (1.0 + float(np.abs(qJ).max(initial=0.0))):
            return []
        return [y] if np.min(y) > cfg.positivity_floor else []

    def residual(y: np.ndarray) -> np.ndarray:
        return contract_m1(sub, y) + qJ

    def jac(y: np.ndarray) -> np.ndarray:
        return jacobian_m1(sub, y)

    rng = cfg.substream("tcp", tuple(J))
    starts = []
    heuristic = power_component(pos_part(-qJ), 1.0 / (m - 1))
    if np.min(heuristic) > 0:
        starts.append(heuristic)
    starts.extend(rng.uniform(0.1, 1.0, size=(cfg.tcp_newton_starts, r)))

    scale = 1.0 + float(np.abs(qJ).max(initial=0.0))
    roots: list[np.ndarray] = []
    for y0 in starts:
        y, ok = damped_newton(residual, jac, np.asarray(y0, dtype=float), cfg)
        if not ok or np.min(y) <= cfg.positivity_floor:
            continue
        if float(np.linalg.norm(residual(y))) > 1e-9 * scale:
            continue
        if any(np.max(np.abs(y - seen)) <= cfg.cluster_tol for seen in roots):
            continue
        roots.append(y)
    return roots


def solve_enumeration(inst: TcpInstance, cfg: RunConfig = DEFAULT_CONFIG) -> list[TcpSolution]:
    """All certified solutions found by enumerating active supports.

    For every support the active polynomial system is solved (linear solve
    for matrices, multi-start Newton otherwise); interior roots are
    zero-extended and kept when the inactive rows stay nonnegative.  An
    empty list is legitimate for tensors that are not strictly
    semi-positive; for strictly semi-positive ones it indicates a missed
    solution and triggers a warning, not an error.
    """
    n = inst.A.n
    if n > cfg.support_cap:
        raise ValueError(
            f"enumeration is capped at dimension {cfg.support_cap}, instance has {n}"
        )
    solutions: list[TcpSolution] = []
    zero = _make_solution(inst, np.zeros(n), "enumeration", cfg)
    if zero is not None:
        solutions.append(zero)
    supports = [
        J for size in range(1, n + 1) for J in itertools.combinations(range(n), size)
    ]
    per_support = parallel_map(
        lambda J: _support_roots(inst, J, cfg), supports, cfg.threads
    )
    for J, roots in zip(supports, per_support):
        for y in roots:
            x = np.zeros(n)
            x[list(J)] = y
            sol = _make_solution(inst, x, "enumeration", cfg)
            if sol is not None:
                solutions.append(sol)
    deduped: list[TcpSolution] = []
    for sol in sorted(
        solutions, key=lambda s: (float(np.max(np.abs(s.x))), tuple(s.x))
    ):
        if any(np.max(np.abs(sol.x - kept.x)) <= cfg.cluster_tol for kept in deduped):
            continue
        deduped.append(sol)
    if not deduped:
        warnings.warn(
            "enumeration found no solution; for a strictly semi-positive tensor "
            "this means the search missed one",
            stacklevel=2,
        )
    return deduped


def _polish_active_set(inst: TcpInstance, x: np.ndarray, cfg: RunConfig) -> TcpSolution | None:
    """Solve the support system suggested by the iterate's active pattern."""
    J = tuple(i for i in range(inst.A.n) if x[i] > 1e-6)
    if not J:
        return _make_solution(inst, np.zeros(inst.A.n), "iterative", cfg)
    sub = principal_subtensor(inst.A, J)
    qJ = inst.q[list(J)]

    def residual(y: np.ndarray) -> np.ndarray:
        return contract_m1(sub, y) + qJ

    def jac(y: np.ndarray) -> np.ndarray:
        return jacobian_m1(sub, y)

    y, ok = damped_newton(residual, jac, x[list(J)], cfg)
    if not ok or np.min(y) <= cfg.positivity_floor:
        return None
    full = np.zeros(inst.A.n)
    full[list(J)] = y
    return _make_solution(inst, full, "iterative", cfg)


def solve_iterative(inst: TcpInstance, cfg: RunConfig = DEFAULT_CONFIG) -> TcpSolution:
    """Projected fixed-point iteration x <- max(0, x - gamma*(q + A x^(m-1))).

    The step backtracks (halving) whenever the natural-residual merit does
    not decrease and is cautiously re-enlarged after successes.  When the
    merit plateaus, the active pattern of the iterate seeds a Newton polish
    of that support system (projected methods identify the active set long
    before the values converge).  Several deterministic-plus-seeded starts
    are tried; exhausting them raises :class:`NonConvergenceError` with the
    best merit reached instead of returning an uncertified point.
    """
    n, m = inst.A.n, inst.A.m
    gamma0 = 1.0 / (1.0 + norm_bound(inst.A, OP_SCALED, np.inf))
    rng = cfg.substream("tcp_iterative")
    starts = [power_component(pos_part(-inst.q), 1.0 / (m - 1)), np.zeros(n)]
    starts.extend(rng.uniform(0.0, 1.0, size=(6, n)))

    best_merit = np.inf
    total_iters = 0
    for x0 in starts:
        x = np.maximum(np.asarray(x0, dtype=float), 0.0)
        merit = _natural_merit(inst, x)
        gamma = gamma0
        window_best = merit
        stalled = False
        for it in range(cfg.fixed_point_max_iter):
            total_iters += 1
            if merit <= cfg.merit_tol or stalled:
                break
            w = inst.q + contract_m1(inst.A, x)
            candidate = np.maximum(x - gamma * w, 0.0)
            cand_merit = _natural_merit(inst, candidate)
            if cand_merit < merit:
                x, merit = candidate, cand_merit
                gamma = min(gamma * 1.2, 10.0 * gamma0)
            else:
                gamma *= 0.5
                if gamma < 1e-15:
                    stalled = True
            if (it + 1) % 40 == 0 or stalled:
                sol = _polish_active_set(inst, x, cfg)
                if sol is not None:
                    return sol
                if merit > 0.99 * window_best and not stalled:
                    break  # plateau without a certifiable active set
                window_best = merit
        best_merit = min(best_merit, merit)
        if merit <= cfg.merit_tol:
            sol = _make_solution(inst, x, "iterative", cfg)
            if sol is not None:
                return sol
        sol = _polish_active_set(inst, x, cfg)
        if sol is not None:
            return sol
    raise NonConvergenceError(
        f"projected iteration did not certify a solution (best merit {best_merit:.3e})",
        best_merit=best_merit,
        iterations=total_iters,
    )
