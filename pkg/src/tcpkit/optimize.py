"""Shared search primitives.

Two workhorses live here: a face-by-face grid + pattern-search minimizer
over the nonnegative unit infinity-sphere ``{x >= 0, max_i x_i = 1}``
(that set is the union of the n faces ``{x_k = 1, 0 <= x_j <= 1}``), and a
damped Newton iteration for small square systems.  Both are deterministic
given the caller-supplied random generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import RunConfig, parallel_map

BatchObjective = Callable[[np.ndarray], np.ndarray]


def pattern_search_min(
    batch_fn: BatchObjective,
    x0: np.ndarray,
    project: Callable[[np.ndarray], np.ndarray],
    step0: float = 0.25,
    step_floor: float = 1e-9,
    max_iter: int = 300,
) -> tuple[float, np.ndarray]:
    """Coordinate pattern search with shrinking steps.

    All 2n axis moves are evaluated per sweep as a single batch; the step
    halves whenever no move improves, down to ``step_floor``.  ``project``
    maps raw trial points back onto the feasible set.
    """
    x = project(np.asarray(x0, dtype=float)[None, :])[0]
    fx = float(batch_fn(x[None, :])[0])
    n = x.size
    eye = np.eye(n)
    step = step0
    for _ in range(max_iter):
        if step < step_floor:
            break
        trials = project(np.vstack([x + step * eye, x - step * eye]))
        vals = batch_fn(trials)
        j = int(np.argmin(vals))
        if vals[j] < fx:
            x = trials[j]
            fx = float(vals[j])
        else:
            step *= 0.5
    return fx, x


@dataclass
class SphereMinimum:
    value: float
    argmin: np.ndarray
    certified_by: str        # "grid+refine" or "multistart"
    grid_resolution: int


def _face_project(k: int) -> Callable[[np.ndarray], np.ndarray]:
    def project(P: np.ndarray) -> np.ndarray:
        Q = np.clip(P, 0.0, 1.0)
        Q[:, k] = 1.0
        return Q

    return project


def _face_candidates(
    batch_fn: BatchObjective, n: int, k: int, cfg: RunConfig, rng: np.random.Generator
) -> list[tuple[float, np.ndarray]]:
    free = [j for j in range(n) if j != k]
    G = cfg.grid_for(n)
    out: list[tuple[float, np.ndarray]] = []

    vertex = np.zeros(n)
    vertex[k] = 1.0
    if not free:
        out.append((float(batch_fn(vertex[None, :])[0]), vertex))
        return out

    starts = [vertex]
    if G >= 2:
        axes = np.linspace(0.0, 1.0, G)
        mesh = np.meshgrid(*([axes] * len(free)), indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
        X = np.ones((pts.shape[0], n))
        X[:, free] = pts
        vals = batch_fn(X)
        best = np.argsort(vals, kind="stable")[: cfg.refine_top]
        for i in best:
            out.append((float(vals[i]), X[i].copy()))
            starts.append(X[i].copy())
    R = rng.uniform(0.0, 1.0, size=(cfg.face_starts, n))
    R[:, k] = 1.0
    starts.extend(R)

    project = _face_project(k)
    for s in starts:
        val, x = pattern_search_min(batch_fn, s, project)
        out.append((val, x))
    return out


def minimize_nonneg_sphere(
    batch_fn: BatchObjective, n: int, cfg: RunConfig, rng_tag: str
) -> SphereMinimum:
    """Global minimum (heuristic) of a batch objective over {x >= 0, ||x||_inf = 1}.

    Ties within 1e-10 of the best value break to the lexicographically
    smallest argmin so repeated runs return the same witness.
    """
    G = cfg.grid_for(n)

    def face_job(k: int) -> list[tuple[float, np.ndarray]]:
        rng = cfg.substream(rng_tag, "face", k)
        return _face_candidates(batch_fn, n, k, cfg, rng)

    chunks = parallel_map(face_job, list(range(n)), cfg.threads)
    candidates = [c for chunk in chunks for c in chunk]
    best_val = min(v for v, _ in candidates)
    near = [x for v, x in candidates if v <= best_val + 1e-10]
    argmin = min(near, key=lambda x: tuple(x))
    return SphereMinimum(
        value=float(batch_fn(argmin[None, :])[0]),
        argmin=argmin,
        certified_by="grid+refine" if G >= 2 else "multistart",
        grid_resolution=G,
    )


def damped_newton(
    res_fn: Callable[[np.ndarray], np.ndarray],
    jac_fn: Callable[[np.ndarray], np.ndarray],
    z0: np.ndarray,
    cfg: RunConfig,
) -> tuple[np.ndarray, bool]:
    """Newton with halving line search on the residual norm.

    Singular or exploding Jacobian solves fall back to least squares, which
    also rides rank-deficient solution manifolds.  Convergence is declared
    on a step shorter than ``cfg.newton_step_tol`` (relative to the iterate)
    once the residual is small.
    """
    z = np.asarray(z0, dtype=float).copy()
    r = res_fn(z)
    rnorm = float(np.linalg.norm(r))
    for _ in range(cfg.newton_max_iter):
        if rnorm < 1e-14:
            return z, True
        J = jac_fn(z)
        try:
            dz = np.linalg.solve(J, -r)
            if not np.all(np.isfinite(dz)) or np.linalg.norm(dz) > 1e8:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            dz = np.linalg.lstsq(J, -r, rcond=None)[0]
            if not np.all(np.isfinite(dz)):
                return z, False
        t = 1.0
        accepted = False
        while t >= 1e-12:
            z_new = z + t * dz
            r_new = res_fn(z_new)
            rnorm_new = float(np.linalg.norm(r_new))
            if rnorm_new < rnorm:
                z, r, rnorm = z_new, r_new, rnorm_new
                accepted = True
                break
            t *= 0.5
        if not accepted:
            return z, rnorm < 1e-10
        if t * float(np.linalg.norm(dz)) < cfg.newton_step_tol * (1.0 + float(np.linalg.norm(z))):
            return z, rnorm < 1e-8
    return z, rnorm < 1e-10
