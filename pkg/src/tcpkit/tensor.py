"""Dense order-m dimension-n tensors and their multilinear contractions.

Storage is a plain row-major ndarray of shape ``(n,) * m``; at desk scale
(n <= 8, m <= 4) that is at most a few thousand entries, so contractions
are direct numpy reductions and nothing is ever kept sparse.  Indices are
0-based everywhere in the library; the JSON interchange format is 1-based
and conversion happens exactly once, in :func:`tensor_from_dict` /
:func:`tensor_to_dict`.

Tensors are immutable after construction, so every operation here is a
pure function that is safe to call concurrently.
"""

from __future__ import annotations

import itertools
import json
import math
from typing import Iterable

import numpy as np

__all__ = [
    "Tensor",
    "TensorFormatError",
    "as_vector",
    "contract_m1",
    "contract_m1_batch",
    "contract_full",
    "jacobian_m1",
    "principal_subtensor",
    "validate_index_set",
    "identity_tensor",
    "diagonal_tensor",
    "zero_tensor",
    "symmetrize",
    "e_apply",
    "e_tensor",
    "pos_part",
    "power_component",
    "tensor_from_dict",
    "tensor_to_dict",
    "load_tensor",
    "save_tensor",
]


class TensorFormatError(ValueError):
    """Malformed tensor or instance interchange data."""


def _is_symmetric_array(data: np.ndarray, rtol: float = 1e-12, atol: float = 1e-12) -> bool:
    m = data.ndim
    if m > 5:
        # spot-check a sample of permutations; full check is factorial in m
        perms = list(itertools.islice(itertools.permutations(range(m)), 1, 25))
    else:
        perms = list(itertools.permutations(range(m)))[1:]
    return all(
        np.allclose(data, np.transpose(data, axes=p), rtol=rtol, atol=atol)
        for p in perms
    )


class Tensor:
    """Immutable dense tensor with a uniform mode dimension.

    Parameters
    ----------
    data:
        Anything convertible to a float ndarray of shape ``(n,) * m`` with
        m >= 2.  The array is copied and frozen.
    symmetric:
        ``None`` detects symmetry from the entries; ``True`` additionally
        validates that the entries really are permutation invariant.
    """

    __slots__ = ("data", "m", "n", "symmetric")

    def __init__(self, data, symmetric: bool | None = None):
        arr = np.array(data, dtype=float)
        if arr.ndim < 2:
            raise ValueError(f"tensor order must be >= 2, got {arr.ndim}")
        n = arr.shape[0]
        if any(s != n for s in arr.shape):
            raise ValueError(f"all mode dimensions must agree, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor entries must be finite")
        if symmetric is None:
            symmetric = _is_symmetric_array(arr)
        elif symmetric and not _is_symmetric_array(arr):
            raise ValueError("symmetric=True but entries are not permutation invariant")
        arr.setflags(write=False)
        self.data = arr
        self.m = arr.ndim
        self.n = n
        self.symmetric = bool(symmetric)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        tag = ", symmetric" if self.symmetric else ""
        return f"Tensor(m={self.m}, n={self.n}{tag})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Tensor)
            and self.m == other.m
            and self.n == other.n
            and np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.m, self.n, self.data.tobytes()))

    def diagonal(self) -> np.ndarray:
        """The vector of entries with all indices equal."""
        idx = np.arange(self.n)
        return self.data[tuple([idx] * self.m)].copy()

    def row_abs_sums(self) -> np.ndarray:
        """Per-slot absolute sums: sum of |entries| over all trailing modes."""
        return np.abs(self.data).reshape(self.n, -1).sum(axis=1)

    def scale(self, t: float) -> "Tensor":
        return Tensor(self.data * float(t), symmetric=self.symmetric or None)

    def add(self, other: "Tensor") -> "Tensor":
        if (self.m, self.n) != (other.m, other.n):
            raise ValueError("tensor shapes do not match")
        return Tensor(self.data + other.data)


def as_vector(x, n: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got array of ndim {v.ndim}")
    if n is not None and v.size != n:
        raise ValueError(f"vector length {v.size} does not match dimension {n}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def contract_m1(A: Tensor, x) -> np.ndarray:
    """Contract x into all but the first mode: the degree-(m-1) polynomial map.

    Component i is the sum over all trailing multi-indices of
    ``A[i, i2, ..., im] * x[i2] * ... * x[im]``.
    """
    v = as_vector(x, A.n)
    out = A.data
    for _ in range(A.m - 1):
        out = out @ v
    return np.atleast_1d(out)


_BATCH_SUBSCRIPTS: dict[int, str] = {}


def contract_m1_batch(A: Tensor, X: np.ndarray) -> np.ndarray:
    """contract_m1 for a batch of vectors, shape (B, n) -> (B, n)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != A.n:
        raise ValueError(f"expected batch of shape (B, {A.n})")
    if A.m == 2:
        return X @ A.data.T
    subs = _BATCH_SUBSCRIPTS.get(A.m)
    if subs is None:
        letters = "ijklmnopqr"[: A.m]
        subs = letters + "," + ",".join("b" + c for c in letters[1:]) + "->b" + letters[0]
        _BATCH_SUBSCRIPTS[A.m] = subs
    # path planning only pays off on big batches (grid evaluations)
    optimize = X.shape[0] >= 1000
    return np.einsum(subs, A.data, *([X] * (A.m - 1)), optimize=optimize)


def contract_full(A: Tensor, x) -> float:
    """Full contraction: x dotted with the degree-(m-1) map at x."""
    v = as_vector(x, A.n)
    return float(v @ contract_m1(A, v))


def jacobian_m1(A: Tensor, x) -> np.ndarray:
    """Jacobian of ``y -> contract_m1(A, y)`` at x, for general tensors.

    Entry (i, j) sums, over each trailing mode p, the contraction of x into
    every mode except the first and p.  For symmetric tensors this equals
    (m-1) times the order-2 contraction.
    """
    v = as_vector(x, A.n)
    m, n = A.m, A.n
    if m == 2:
        return A.data.copy()
    total = np.zeros((n, n))
    for p in range(1, m):
        part = A.data
        # remove higher axes first so lower axis numbers stay valid
        for axis in range(m - 1, 0, -1):
            if axis == p:
                continue
            part = np.tensordot(part, v, axes=([axis], [0]))
        total += part
    return total


def validate_index_set(J: Iterable[int], n: int) -> tuple[int, ...]:
    """Normalize a 0-based index subset: sorted, unique, in range, nonempty."""
    idx = tuple(int(i) for i in J)
    if len(idx) == 0:
        raise ValueError("index set must be nonempty")
    if len(set(idx)) != len(idx):
        raise ValueError(f"index set has duplicates: {idx}")
    if any(i < 0 or i >= n for i in idx):
        raise ValueError(f"index out of range for dimension {n}: {idx}")
    return tuple(sorted(idx))


def principal_subtensor(A: Tensor, J: Iterable[int]) -> Tensor:
    """Restrict every mode to the index subset J (0-based), reindexed by J's order."""
    idx = validate_index_set(J, A.n)
    sel = np.array(idx, dtype=int)
    sub = A.data[np.ix_(*([sel] * A.m))]
    return Tensor(sub, symmetric=A.symmetric or None)


def identity_tensor(m: int, n: int) -> Tensor:
    """Diagonal tensor of ones; contracting maps x to its componentwise (m-1) power."""
    return diagonal_tensor(np.ones(n), m)


def diagonal_tensor(d, m: int) -> Tensor:
    d = as_vector(d)
    data = np.zeros((d.size,) * m)
    idx = np.arange(d.size)
    data[tuple([idx] * m)] = d
    return Tensor(data, symmetric=True)


def zero_tensor(m: int, n: int) -> Tensor:
    return Tensor(np.zeros((n,) * m), symmetric=True)


def symmetrize(A: Tensor) -> Tensor:
    """Average over all index permutations; preserves x -> full contraction."""
    if A.symmetric:
        return A
    acc = np.zeros_like(A.data)
    perms = list(itertools.permutations(range(A.m)))
    for p in perms:
        acc += np.transpose(A.data, axes=p)
    return Tensor(acc / len(perms), symmetric=True)


def e_apply(x, m: int) -> np.ndarray:
    """The map x -> ||x||_2^(m-2) * x (identity map for m = 2)."""
    v = as_vector(x)
    if m < 2:
        raise ValueError("order must be >= 2")
    if m == 2:
        return v.copy()
    return float(np.linalg.norm(v)) ** (m - 2) * v


def e_tensor(m: int, n: int) -> Tensor:
    """Tensor realization of :func:`e_apply`; only exists for even order.

    Built as a chain of identity-matrix factors over consecutive index
    pairs, so contracting with x yields ``||x||_2^(m-2) * x``.
    """
    if m < 2 or m % 2 != 0:
        raise ValueError("tensor realization requires an even order >= 2")
    eye = np.eye(n)
    data = eye
    for _ in range(m // 2 - 1):
        data = np.multiply.outer(data, eye)
    return Tensor(data)


def pos_part(x) -> np.ndarray:
    """Componentwise max(., 0)."""
    return np.maximum(as_vector(x), 0.0)


def _is_odd_reciprocal(p: float, tol: float = 1e-12) -> bool:
    if p <= 0:
        return False
    k = 1.0 / p
    k_round = round(k)
    return abs(k - k_round) < tol and k_round % 2 == 1


def power_component(x, p: float) -> np.ndarray:
    """Componentwise p-th power.

    Negative components are only accepted when the power is total on the
    reals: an integer exponent, or the reciprocal of an odd integer (an
    odd-root, applied sign-preservingly).
    """
    v = as_vector(x)
    p = float(p)
    if np.all(v >= 0):
        return v**p
    if abs(p - round(p)) < 1e-12:
        return v ** round(p)
    if _is_odd_reciprocal(p):
        return np.sign(v) * np.abs(v) ** p
    raise ValueError(f"fractional power {p} of negative components is undefined")


# ---------------------------------------------------------------------------
# JSON interchange
#
# {"m": int, "n": int, "symmetric": bool,
#  "entries": [{"idx": [i1, ..., im], "v": value}, ...]}
#
# idx is 1-based; unspecified cells default to 0; with "symmetric": true each
# entry is replicated to all permutations of its index, and two entries that
# land on the same cell with different values are an error.
# ---------------------------------------------------------------------------


def tensor_from_dict(obj) -> Tensor:
    if not isinstance(obj, dict):
        raise TensorFormatError("tensor object must be a JSON object")
    try:
        m = int(obj["m"])
        n = int(obj["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise TensorFormatError("tensor object needs integer fields 'm' and 'n'") from exc
    if m < 2:
        raise TensorFormatError(f"tensor order must be >= 2, got {m}")
    if n < 1:
        raise TensorFormatError(f"tensor dimension must be >= 1, got {n}")
    symmetric = bool(obj.get("symmetric", False))
    entries = obj.get("entries", [])
    if not isinstance(entries, list):
        raise TensorFormatError("'entries' must be a list")

    data = np.zeros((n,) * m)
    assigned: dict[tuple[int, ...], float] = {}
    for k, ent in enumerate(entries):
        try:
            idx = tuple(int(i) for i in ent["idx"])
            val = float(ent["v"])
        except (KeyError, TypeError, ValueError) as exc:
            raise TensorFormatError(f"entry {k} needs 'idx' (list of ints) and 'v' (real)") from exc
        if len(idx) != m:
            raise TensorFormatError(f"entry {k}: idx has length {len(idx)}, expected {m}")
        if any(i < 1 or i > n for i in idx):
            raise TensorFormatError(f"entry {k}: index out of range 1..{n}: {idx}")
        if not math.isfinite(val):
            raise TensorFormatError(f"entry {k}: value must be finite")
        zero_based = tuple(i - 1 for i in idx)
        cells = set(itertools.permutations(zero_based)) if symmetric else {zero_based}
        for cell in cells:
            if cell in assigned and assigned[cell] != val:
                one_based = tuple(i + 1 for i in cell)
                raise TensorFormatError(
                    f"conflicting duplicate values {assigned[cell]} and {val} at index {one_based}"
                )
            assigned[cell] = val
            data[cell] = val
    return Tensor(data, symmetric=symmetric or None)


def tensor_to_dict(A: Tensor) -> dict:
    entries = []
    for cell in itertools.product(range(A.n), repeat=A.m):
        v = float(A.data[cell])
        if v != 0.0:
            entries.append({"idx": [i + 1 for i in cell], "v": v})
    return {"m": A.m, "n": A.n, "symmetric": A.symmetric, "entries": entries}


def load_tensor(path) -> Tensor:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise TensorFormatError(f"cannot read tensor file {path}: {exc}") from exc
    return tensor_from_dict(obj)


def save_tensor(A: Tensor, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(tensor_to_dict(A), fh, sort_keys=True)
        fh.write("\n")
