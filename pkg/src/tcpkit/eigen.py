"""Eigenpair enumeration over the nonnegative orthant.

Four eigenpair variants are enumerated by support: a vector carried by a
support J is strictly positive there, so candidates come from solving the
eigen system of the principal sub-tensor on J with a strictly positive
unknown, then zero-extending and checking the remaining rows.  Equality
off the support gives the orthant-constrained eigenpairs (``h_plus`` /
``z_plus`` and their interior ``*plusplus`` restrictions); a one-sided
inequality gives the Pareto variants.

Per-support solving is exact for matrices (dense eigensolver plus a small
LP that finds a strictly positive eigenvector when one exists) and closed
form on singleton supports; everything else is damped Newton from many
random positive starts, so completeness is heuristic and flagged as such.
For symmetric tensors the minimum Pareto value is additionally seeded from
a direct minimization of the full contraction over the feasible cone
(its KKT points are exactly the Pareto eigenpairs), which makes the
minimum — the quantity downstream bounds divide by — reliable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .config import RunConfig, DEFAULT_CONFIG, parallel_map
from .optimize import damped_newton, minimize_nonneg_sphere
from .tensor import (
    Tensor,
    contract_m1,
    contract_m1_batch,
    jacobian_m1,
    principal_subtensor,
)

__all__ = [
    "EigenRecord",
    "SpectrumSummary",
    "DeltaResult",
    "h_plus_eigenpairs",
    "h_plusplus_eigenpairs",
    "z_plus_eigenpairs",
    "z_plusplus_eigenpairs",
    "pareto_h_eigenvalues",
    "pareto_z_eigenvalues",
    "delta_h_plus",
    "delta_z_plus",
    "spectrum",
    "distinct_values",
    "EIGEN_KINDS",
]

EIGEN_KINDS = (
    "h_plus",
    "h_plusplus",
    "z_plus",
    "z_plusplus",
    "pareto_h",
    "pareto_z",
)


@dataclass
class EigenRecord:
    kind: str
    value: float
    vector: np.ndarray
    support: tuple[int, ...]
    residual: float
    normalization: str  # "max_abs=1" or "two_norm=1"

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "vector": [float(v) for v in self.vector],
            "support": [i + 1 for i in self.support],
            "residual": self.residual,
            "normalization": self.normalization,
        }


@dataclass
class DeltaResult:
    """Minimum eigenvalue over all principal sub-tensors possessing one."""

    value: float
    heuristic: bool
    records: list[EigenRecord] = field(default_factory=list)


@dataclass
class SpectrumSummary:
    records: list[EigenRecord]
    delta_h_plus: float | None = None
    delta_z_plus: float | None = None
    lambda_min_pareto_h: float | None = None
    mu_min_pareto_z: float | None = None
    completeness: str = "heuristic"

    def to_jsonable(self) -> dict:
        return {
            "records": [r.to_jsonable() for r in self.records],
            "delta_h_plus": self.delta_h_plus,
            "delta_z_plus": self.delta_z_plus,
            "lambda_min_pareto_h": self.lambda_min_pareto_h,
            "mu_min_pareto_z": self.mu_min_pareto_z,
            "completeness": self.completeness,
        }


def distinct_values(records: list[EigenRecord], tol: float = 1e-6) -> list[float]:
    """Sorted eigenvalues with duplicates within tol collapsed."""
    out: list[float] = []
    for v in sorted(r.value for r in records):
        if not out or v - out[-1] > tol:
            out.append(v)
    return out


def _supports(n: int) -> list[tuple[int, ...]]:
    return [
        J
        for size in range(1, n + 1)
        for J in itertools.combinations(range(n), size)
    ]


# ---------------------------------------------------------------------------
# per-support interior solves: strictly positive y with
#   H:  A_J y^(m-1) = lam * y^[m-1]      Z:  A_J y^(m-1) = lam * y, ||y||_2 = 1
# ---------------------------------------------------------------------------


def _positive_eigvec(basis: np.ndarray) -> np.ndarray | None:
    """A strictly positive vector in the column span, found by a small LP."""
    r, k = basis.shape
    if k == 0:
        return None
    c = np.zeros(k + 1)
    c[-1] = -1.0  # maximize the smallest component
    A_ub = np.hstack([-basis, np.ones((r, 1))])
    b_ub = np.zeros(r)
    A_eq = np.hstack([basis.sum(axis=0)[None, :], np.zeros((1, 1))])
    b_eq = np.array([1.0])
    res = linprog(
        c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
        bounds=[(None, None)] * (k + 1), method="highs",
    )
    if not res.success or res.x[-1] <= 1e-10:
        return None
    y = basis @ res.x[:k]
    if np.min(y) <= 0:
        return None
    return y / np.linalg.norm(y)


def _matrix_support_candidates(M: np.ndarray) -> list[tuple[float, np.ndarray]]:
    """Exact interior eigenpairs of a matrix: real eigenvalues whose eigenspace
    meets the strictly positive orthant."""
    r = M.shape[0]
    real = sorted(float(v.real) for v in np.linalg.eigvals(M) if abs(v.imag) < 1e-9)
    clusters: list[list[float]] = []
    for v in real:
        if clusters and v - clusters[-1][-1] <= 1e-9:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    scale = max(1.0, float(np.abs(M).max()))
    out: list[tuple[float, np.ndarray]] = []
    for group in clusters:
        lam = float(np.mean(group))
        shifted = M - lam * np.eye(r)
        _, s, vh = np.linalg.svd(shifted)
        basis = vh[s < 1e-8 * scale].T
        if basis.shape[1] == 0:
            basis = vh[[-1]].T  # eigvals certifies singularity; take the weakest direction
        y = _positive_eigvec(basis)
        if y is not None:
            out.append((float(y @ (M @ y)), y))
    return out


def _newton_support_candidates(
    A_sub: Tensor, kind: str, cfg: RunConfig, tag: str,
    seeds: list[tuple[np.ndarray, float]] | None = None,
) -> list[tuple[float, np.ndarray]]:
    """Multi-start damped Newton on the support system; y normalized to the
    2-sphere inside the iteration, strict positivity enforced afterwards."""
    r, m = A_sub.n, A_sub.m

    def residual(z: np.ndarray) -> np.ndarray:
        y, lam = z[:r], z[r]
        core = contract_m1(A_sub, y)
        eig_part = core - lam * (y ** (m - 1) if kind == "H" else y)
        return np.concatenate([eig_part, [y @ y - 1.0]])

    def jac(z: np.ndarray) -> np.ndarray:
        y, lam = z[:r], z[r]
        J_top = jacobian_m1(A_sub, y)
        if kind == "H":
            J_top = J_top - lam * (m - 1) * np.diag(y ** (m - 2))
            dlam = -(y ** (m - 1))
        else:
            J_top = J_top - lam * np.eye(r)
            dlam = -y
        out = np.zeros((r + 1, r + 1))
        out[:r, :r] = J_top
        out[:r, r] = dlam
        out[r, :r] = 2.0 * y
        return out

    rng = cfg.substream("eigen", kind, tag)
    starts: list[tuple[np.ndarray, float]] = list(seeds or [])
    uniform = np.ones(r) / np.sqrt(r)
    starts.append((uniform, _rayleigh(A_sub, uniform, kind)))
    raw = rng.uniform(0.1, 1.0, size=(cfg.newton_starts, r))
    for row in raw:
        y0 = row / np.linalg.norm(row)
        starts.append((y0, _rayleigh(A_sub, y0, kind)))

    found: list[tuple[float, np.ndarray]] = []
    for y0, lam0 in starts:
        z0 = np.concatenate([y0, [lam0]])
        z, ok = damped_newton(residual, jac, z0, cfg)
        if not ok:
            continue
        y, lam = z[:r], float(z[r])
        # roots with dust components are boundary solutions of this support;
        # their true (smaller) support enumerates them separately
        if np.min(y) <= cfg.eigen_interior_floor:
            continue
        nrm = float(np.linalg.norm(y))
        if abs(nrm - 1.0) > 1e-6:
            continue
        y = y / nrm
        if kind == "Z":
            lam = float(y @ contract_m1(A_sub, y))
        resid = float(np.linalg.norm(residual(np.concatenate([y, [lam]]))))
        if resid > 1e-9 * (1.0 + abs(lam)):
            continue
        found.append((lam, y))
    return _cluster_pairs(found, cfg.cluster_tol)


def _rayleigh(A_sub: Tensor, y: np.ndarray, kind: str) -> float:
    core = contract_m1(A_sub, y)
    if kind == "H":
        denom = float(np.sum(y**A_sub.m))
        return float(y @ core) / denom if denom > 0 else 0.0
    return float(y @ core)


def _cluster_pairs(
    pairs: list[tuple[float, np.ndarray]], tol: float
) -> list[tuple[float, np.ndarray]]:
    pairs = sorted(pairs, key=lambda p: (p[0], tuple(p[1])))
    kept: list[tuple[float, np.ndarray]] = []
    for lam, y in pairs:
        if any(
            abs(lam - l2) <= tol and np.max(np.abs(y - y2)) <= tol for l2, y2 in kept
        ):
            continue
        kept.append((lam, y))
    return kept


def _support_candidates(
    A: Tensor, J: tuple[int, ...], kind: str, cfg: RunConfig,
    seeds: list[tuple[np.ndarray, float]] | None = None,
) -> list[tuple[float, np.ndarray]]:
    """Interior (strictly positive, 2-normalized) eigenpairs of A restricted to J."""
    if len(J) == 1:
        lam = float(A.data[tuple([J[0]] * A.m)])
        return [(lam, np.array([1.0]))]
    sub = principal_subtensor(A, J)
    if A.m == 2:
        exact = _matrix_support_candidates(sub.data)
        if seeds:
            exact = _cluster_pairs(
                exact + _newton_support_candidates(sub, kind, cfg, str(J), seeds),
                cfg.cluster_tol,
            )
        return exact
    return _newton_support_candidates(sub, kind, cfg, str(J), seeds)


def _interior_candidates(
    A: Tensor, kind: str, cfg: RunConfig,
    extra_seeds: dict[tuple[int, ...], list[tuple[np.ndarray, float]]] | None = None,
) -> dict[tuple[int, ...], list[tuple[float, np.ndarray]]]:
    extra_seeds = extra_seeds or {}
    supports = _supports(A.n)
    chunks = parallel_map(
        lambda J: _support_candidates(A, J, kind, cfg, extra_seeds.get(J)),
        supports,
        cfg.threads,
    )
    return dict(zip(supports, chunks))


# ---------------------------------------------------------------------------
# zero-extension, verification, record assembly
# ---------------------------------------------------------------------------


def _embed(y: np.ndarray, J: tuple[int, ...], n: int) -> np.ndarray:
    x = np.zeros(n)
    x[list(J)] = y
    return x


def _verify_h(
    A: Tensor, J: tuple[int, ...], lam: float, y: np.ndarray,
    pareto: bool, cfg: RunConfig,
) -> EigenRecord | None:
    x = _embed(y, J, A.n)
    x = x / float(np.max(np.abs(x)))
    rows = contract_m1(A, x)
    target = lam * x ** (A.m - 1)
    gap = rows - target
    in_res = float(np.max(np.abs(gap[list(J)])))
    off = [i for i in range(A.n) if i not in J]
    if pareto:
        off_violation = float(max(0.0, -np.min(gap[off]))) if off else 0.0
        value_gap = abs(float(x @ rows) - lam * float(np.sum(x**A.m)))
        residual = max(in_res, off_violation, value_gap)
    else:
        residual = float(np.max(np.abs(gap))) if off else in_res
    if residual > cfg.residual_tol:
        return None
    return EigenRecord(
        kind="pareto_h" if pareto else "h_plus",
        value=lam, vector=x, support=J, residual=residual,
        normalization="max_abs=1",
    )


def _verify_z(
    A: Tensor, J: tuple[int, ...], lam: float, y: np.ndarray,
    pareto: bool, cfg: RunConfig,
) -> EigenRecord | None:
    x = _embed(y, J, A.n)
    x = x / float(np.linalg.norm(x))
    rows = contract_m1(A, x)
    gap = rows - lam * x  # ||x||_2 = 1 makes the Pareto scaling factor 1
    in_res = float(np.max(np.abs(gap[list(J)])))
    off = [i for i in range(A.n) if i not in J]
    if pareto:
        off_violation = float(max(0.0, -np.min(gap[off]))) if off else 0.0
        value_gap = abs(float(x @ rows) - lam)
        residual = max(in_res, off_violation, value_gap)
    else:
        residual = float(np.max(np.abs(gap))) if off else in_res
    if residual > cfg.residual_tol:
        return None
    return EigenRecord(
        kind="pareto_z" if pareto else "z_plus",
        value=lam, vector=x, support=J, residual=residual,
        normalization="two_norm=1",
    )


def _dedupe_records(records: list[EigenRecord], tol: float) -> list[EigenRecord]:
    records = sorted(records, key=lambda r: (r.value, r.support, tuple(r.vector)))
    kept: list[EigenRecord] = []
    for rec in records:
        if any(
            abs(rec.value - k.value) <= tol
            and np.max(np.abs(rec.vector - k.vector)) <= tol
            for k in kept
        ):
            continue
        kept.append(rec)
    return kept


def _completeness(A: Tensor) -> str:
    return "closed_form" if A.m == 2 or A.n == 1 else "heuristic"


# ---------------------------------------------------------------------------
# variational seeding of the minimum Pareto value (symmetric tensors)
#
# For symmetric A the KKT points of  min A x^m  over {x >= 0, s(x) = 1}
# (s the m-th power sum for the H variant, the m/2 power of x.x for Z) are
# exactly the Pareto eigenpairs and the global minimum attains the least
# one, so a cone minimization of the scale-invariant ratio supplies a
# high-quality Newton seed on the minimizer's support.
# ---------------------------------------------------------------------------


def _variational_seed(
    A: Tensor, kind: str, cfg: RunConfig
) -> dict[tuple[int, ...], list[tuple[np.ndarray, float]]]:
    if not A.symmetric:
        return {}

    def ratio(X: np.ndarray) -> np.ndarray:
        num = np.sum(X * contract_m1_batch(A, X), axis=1)
        if kind == "H":
            den = np.sum(X**A.m, axis=1)
        else:
            den = np.sum(X**2, axis=1) ** (A.m / 2.0)
        return num / den

    res = minimize_nonneg_sphere(ratio, A.n, cfg, f"pareto_seed_{kind}")
    x = res.argmin
    J = tuple(i for i in range(A.n) if x[i] > 1e-7)
    if not J:
        return {}
    y0 = x[list(J)]
    y0 = y0 / np.linalg.norm(y0)
    return {J: [(y0, float(res.value))]}


# ---------------------------------------------------------------------------
# public enumeration operations
# ---------------------------------------------------------------------------


def h_plus_eigenpairs(A: Tensor, cfg: RunConfig = DEFAULT_CONFIG) -> list[EigenRecord]:
    """Orthant eigenpairs: per-support interior solves whose zero-extension
    satisfies the full eigen system (off-support rows must vanish)."""
    records = []
    for J, cands in _interior_candidates(A, "H", cfg).items():
        for lam, y in cands:
            rec = _verify_h(A, J, lam, y, pareto=False, cfg=cfg)
            if rec is not None:
                records.append(rec)
    return _dedupe_records(records, cfg.cluster_tol)


def z_plus_eigenpairs(A: Tensor, cfg: RunConfig = DEFAULT_CONFIG) -> list[EigenRecord]:
    records = []
    for J, cands in _interior_candidates(A, "Z", cfg).items():
        for lam, y in cands:
            rec = _verify_z(A, J, lam, y, pareto=False, cfg=cfg)
            if rec is not None:
                records.append(rec)
    return _dedupe_records(records, cfg.cluster_tol)


def h_plusplus_eigenpairs(A: Tensor, cfg: RunConfig = DEFAULT_CONFIG) -> list[EigenRecord]:
    full = tuple(range(A.n))
    records = [
        EigenRecord("h_plusplus", r.value, r.vector, r.support, r.residual, r.normalization)
        for r in h_plus_eigenpairs(A, cfg)
        if r.support == full and np.min(r.vector) > cfg.positivity_floor
    ]
    return records


def z_plusplus_eigenpairs(A: Tensor, cfg: RunConfig = DEFAULT_CONFIG) -> list[EigenRecord]:
    full = tuple(range(A.n))
    records = [
        EigenRecord("z_plusplus", r.value, r.vector, r.support, r.residual, r.normalization)
        for r in z_plus_eigenpairs(A, cfg)
        if r.support == full and np.min(r.vector) > cfg.positivity_floor
    ]
    return records


def pareto_h_eigenvalues(A: Tensor, cfg: RunConfig = DEFAULT_CONFIG) -> list[EigenRecord]:
    """Pareto variant: off-support rows only need to be nonnegative."""
    seeds = _variational_seed(A, "H", cfg)
    records = []
    for J, cands in _interior_candidates(A, "H", cfg, seeds).items():
        for lam, y in cands:
            rec = _verify_h(A, J, lam, y, pareto=True, cfg=cfg)
            if rec is not None:
                records.append(rec)
    return _dedupe_records(records, cfg.cluster_tol)


def pareto_z_eigenvalues(A: Tensor, cfg: RunConfig = DEFAULT_CONFIG) -> list[EigenRecord]:
    if A.m % 2 != 0:
        raise ValueError("the Pareto Z variant is only defined here for even order")
    seeds = _variational_seed(A, "Z", cfg)
    records = []
    for J, cands in _interior_candidates(A, "Z", cfg, seeds).items():
        for lam, y in cands:
            rec = _verify_z(A, J, lam, y, pareto=True, cfg=cfg)
            if rec is not None:
                records.append(rec)
    return _dedupe_records(records, cfg.cluster_tol)


def _delta(A: Tensor, kind: str, cfg: RunConfig) -> DeltaResult:
    candidates = _interior_candidates(A, kind, cfg)
    records: list[EigenRecord] = []
    norm_tag = "max_abs=1" if kind == "H" else "two_norm=1"
    for J, cands in candidates.items():
        sub = principal_subtensor(A, J)
        for lam, y in cands:
            if kind == "H":
                vec = y / float(np.max(y))
                resid = float(
                    np.max(np.abs(contract_m1(sub, vec) - lam * vec ** (A.m - 1)))
                )
            else:
                vec = y
                resid = float(np.max(np.abs(contract_m1(sub, vec) - lam * vec)))
            records.append(
                EigenRecord("h_plus" if kind == "H" else "z_plus",
                            lam, vec, J, resid, norm_tag)
            )
    if not records:
        raise RuntimeError("no eigenvalue found for any principal sub-tensor")
    records.sort(key=lambda r: (r.value, r.support, tuple(r.vector)))
    return DeltaResult(
        value=min(r.value for r in records),
        heuristic=not (A.m == 2 or A.n == 1),
        records=records,
    )


def delta_h_plus(A: Tensor, cfg: RunConfig = DEFAULT_CONFIG) -> DeltaResult:
    """Smallest interior eigenvalue found over all principal sub-tensors.

    Every interior pair on a support J is an orthant eigenpair of the
    sub-tensor on J itself, and conversely every sub-tensor's orthant
    eigenvalue arises from an interior solve on some smaller support, so
    the minimum over interior candidates equals the minimum over
    sub-tensors (singletons always contribute their diagonal entry).
    """
    return _delta(A, "H", cfg)


def delta_z_plus(A: Tensor, cfg: RunConfig = DEFAULT_CONFIG) -> DeltaResult:
    if A.m % 2 != 0:
        raise ValueError("this minimum is only taken for even order")
    return _delta(A, "Z", cfg)


def spectrum(A: Tensor, kind: str, cfg: RunConfig = DEFAULT_CONFIG) -> SpectrumSummary:
    """Assemble the record list plus derived minima for one eigen variant."""
    summary = SpectrumSummary(records=[], completeness=_completeness(A))
    if kind == "h_plus":
        summary.records = h_plus_eigenpairs(A, cfg)
    elif kind == "h_plusplus":
        summary.records = h_plusplus_eigenpairs(A, cfg)
    elif kind == "z_plus":
        summary.records = z_plus_eigenpairs(A, cfg)
    elif kind == "z_plusplus":
        summary.records = z_plusplus_eigenpairs(A, cfg)
    elif kind == "pareto_h":
        summary.records = pareto_h_eigenvalues(A, cfg)
        if summary.records:
            summary.lambda_min_pareto_h = min(r.value for r in summary.records)
    elif kind == "pareto_z":
        summary.records = pareto_z_eigenvalues(A, cfg)
        if summary.records:
            summary.mu_min_pareto_z = min(r.value for r in summary.records)
    elif kind == "delta_h_plus":
        res = delta_h_plus(A, cfg)
        summary.records = res.records
        summary.delta_h_plus = res.value
        if res.heuristic:
            summary.completeness = "heuristic"
    elif kind == "delta_z_plus":
        res = delta_z_plus(A, cfg)
        summary.records = res.records
        summary.delta_z_plus = res.value
        if res.heuristic:
            summary.completeness = "heuristic"
    else:
        raise ValueError(f"unknown eigen kind {kind!r}")
    return summary
