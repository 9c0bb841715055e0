"""Eigenpair enumeration: closed forms, matrix oracles, positivity, minima."""

import itertools

import numpy as np
import pytest

from tcpkit import (
    Tensor,
    beta,
    delta_h_plus,
    delta_z_plus,
    diagonal_tensor,
    distinct_values,
    h_plus_eigenpairs,
    h_plusplus_eigenpairs,
    identity_tensor,
    pareto_h_eigenvalues,
    pareto_z_eigenvalues,
    principal_subtensor,
    spectrum,
    symmetrize,
    z_plus_eigenpairs,
    z_plusplus_eigenpairs,
)
from tcpkit.config import RunConfig
from oracles import pareto_matrix_oracle

FAST = RunConfig(newton_starts=12)


def strictly_positive_sample(seed, m=None, n=None):
    """Positive entries plus dominant diagonal: strictly semi-positive."""
    rng = np.random.default_rng(seed)
    m = m or int(rng.integers(2, 5))
    n = n or int(rng.integers(2, 4))
    data = rng.uniform(0.0, 1.0, size=(n,) * m)
    idx = np.arange(n)
    data[tuple([idx] * m)] += rng.uniform(0.5, 1.5, size=n)
    return Tensor(data)


# --- closed forms -------------------------------------------------------------


def test_identity_orthant_eigenvalue_is_one():
    recs = h_plus_eigenpairs(identity_tensor(3, 2), FAST)
    assert distinct_values(recs) == pytest.approx([1.0], abs=1e-8)
    supports = {r.support for r in recs}
    assert (0,) in supports and (1,) in supports and (0, 1) in supports
    # the coordinate vectors and the all-ones direction are all eigenvectors
    assert any(np.allclose(r.vector, [1.0, 1.0], atol=1e-8) for r in recs)


def test_diagonal_matrix_spectrum():
    recs = h_plus_eigenpairs(diagonal_tensor([2.0, 5.0], 2), FAST)
    assert distinct_values(recs) == pytest.approx([2.0, 5.0])
    by_value = {round(r.value): r for r in recs}
    np.testing.assert_allclose(by_value[2].vector, [1.0, 0.0], atol=1e-9)
    np.testing.assert_allclose(by_value[5].vector, [0.0, 1.0], atol=1e-9)


def test_diagonal_tensor_higher_order_spectrum():
    d = [1.5, 2.5, 4.0]
    recs = h_plus_eigenpairs(diagonal_tensor(d, 4), FAST)
    assert distinct_values(recs) == pytest.approx(sorted(d), abs=1e-8)
    for rec in recs:
        assert len(rec.support) == 1


def test_identity_z_family():
    recs = z_plus_eigenpairs(identity_tensor(4, 2), FAST)
    assert distinct_values(recs) == pytest.approx([0.5, 1.0], abs=1e-8)
    pair = [r for r in recs if r.support == (0, 1)]
    assert len(pair) == 1
    np.testing.assert_allclose(pair[0].vector, [1 / np.sqrt(2)] * 2, atol=1e-8)


def test_matrix_z_matches_symmetric_eigensolver():
    rng = np.random.default_rng(8)
    M = rng.uniform(-1.0, 1.0, size=(3, 3))
    M = Tensor((M + M.T) / 2)
    recs = z_plus_eigenpairs(M, FAST)
    # oracle: per principal submatrix, eigenpairs with a nonnegative eigenvector
    want = set()
    for size in range(1, 4):
        for J in itertools.combinations(range(3), size):
            sub = M.data[np.ix_(J, J)]
            vals, vecs = np.linalg.eigh(sub)
            for k in range(size):
                v = vecs[:, k] * np.sign(vecs[np.argmax(np.abs(vecs[:, k])), k])
                if np.min(v) <= 1e-9:
                    continue
                x = np.zeros(3)
                x[list(J)] = v
                off = [i for i in range(3) if i not in J]
                if off and np.max(np.abs((M.data @ x)[off] - vals[k] * x[off])) > 1e-9:
                    continue
                want.add(round(vals[k], 8))
    got = {round(v, 8) for v in distinct_values(recs)}
    assert got == want


def test_pareto_identity_single_value():
    recs = pareto_h_eigenvalues(identity_tensor(3, 2), FAST)
    assert distinct_values(recs) == pytest.approx([1.0], abs=1e-8)


def test_pareto_diagonal_matrix():
    recs = pareto_h_eigenvalues(diagonal_tensor([1.0, 2.0], 2), FAST)
    assert distinct_values(recs) == pytest.approx([1.0, 2.0])
    assert all(len(r.support) == 1 for r in recs)


@pytest.mark.parametrize("n", [2, 3])
def test_pareto_z_identity_family(n):
    recs = pareto_z_eigenvalues(identity_tensor(4, n), FAST)
    want = sorted(r ** (-1.0) for r in range(1, n + 1))
    assert distinct_values(recs) == pytest.approx(want, abs=1e-8)


def test_pareto_z_identity_matrix_case():
    recs = pareto_z_eigenvalues(identity_tensor(2, 3), FAST)
    assert distinct_values(recs) == pytest.approx([1.0], abs=1e-10)


def test_pareto_z_refuses_odd_order():
    with pytest.raises(ValueError):
        pareto_z_eigenvalues(identity_tensor(3, 2), FAST)
    with pytest.raises(ValueError):
        delta_z_plus(identity_tensor(3, 2), FAST)


@pytest.mark.parametrize("seed", range(5))
def test_matrix_pareto_matches_eigendecomposition_oracle(seed):
    rng = np.random.default_rng(40 + seed)
    M = Tensor(rng.uniform(-1.0, 1.0, size=(3, 3)))
    got = distinct_values(pareto_h_eigenvalues(M, FAST))
    want = pareto_matrix_oracle(M.data)
    assert got == pytest.approx(want, abs=1e-7)


# --- record certificates --------------------------------------------------------


def test_records_satisfy_their_own_invariants():
    A = strictly_positive_sample(3, m=3, n=3)
    for rec in h_plus_eigenpairs(A, FAST):
        x = rec.vector
        assert np.min(x) >= 0
        assert np.max(np.abs(x)) == pytest.approx(1.0, abs=1e-12)
        from tcpkit import contract_m1

        resid = np.max(np.abs(contract_m1(A, x) - rec.value * x ** (A.m - 1)))
        assert resid <= 1e-8
    for rec in z_plus_eigenpairs(A, FAST):
        x = rec.vector
        assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-10)
        from tcpkit import contract_m1

        resid = np.max(np.abs(contract_m1(A, x) - rec.value * x))
        assert resid <= 1e-8


def test_pareto_records_satisfy_inequality_and_value_equation():
    A = symmetrize(strictly_positive_sample(11, m=4, n=3))
    from tcpkit import contract_m1

    for rec in pareto_h_eigenvalues(A, FAST):
        x = rec.vector
        rows = contract_m1(A, x)
        assert np.min(rows - rec.value * x ** (A.m - 1)) >= -1e-8
        assert abs(float(x @ rows) - rec.value * float(np.sum(x**A.m))) <= 1e-8
    for rec in pareto_z_eigenvalues(A, FAST):
        x = rec.vector
        rows = contract_m1(A, x)
        assert np.min(rows - rec.value * x) >= -1e-8
        assert abs(float(x @ rows) - rec.value) <= 1e-8


def test_interior_variants_are_full_support():
    A = identity_tensor(3, 2)
    for rec in h_plusplus_eigenpairs(A, FAST):
        assert rec.support == (0, 1)
        assert np.min(rec.vector) > 0
    for rec in z_plusplus_eigenpairs(identity_tensor(4, 2), FAST):
        assert rec.support == (0, 1)
        assert np.min(rec.vector) > 0


# --- positivity for strictly semi-positive tensors -------------------------------


@pytest.mark.parametrize("seed", range(6))
def test_orthant_eigenvalues_positive_for_strict_tensors(seed):
    A = strictly_positive_sample(seed)
    for rec in h_plus_eigenpairs(A, FAST):
        assert rec.value > 1e-10
    for rec in z_plus_eigenpairs(A, FAST):
        assert rec.value > 1e-10


@pytest.mark.parametrize("seed", range(4))
def test_subtensor_eigenvalues_positive_for_strict_tensors(seed):
    A = strictly_positive_sample(100 + seed, n=3)
    for size in range(1, A.n + 1):
        for J in itertools.combinations(range(A.n), size):
            sub = principal_subtensor(A, J)
            for rec in h_plus_eigenpairs(sub, FAST):
                assert rec.value > 1e-10
            for rec in z_plus_eigenpairs(sub, FAST):
                assert rec.value > 1e-10


def test_semi_positive_tensors_have_nonnegative_eigenvalues():
    rng = np.random.default_rng(55)
    for _ in range(4):
        data = rng.uniform(0.0, 1.0, size=(3, 3, 3))
        idx = np.arange(3)
        data[tuple([idx] * 3)] = 0.0  # zero diagonal still semi-positive
        A = Tensor(data)
        for rec in h_plus_eigenpairs(A, FAST):
            assert rec.value >= -1e-8
        for rec in z_plus_eigenpairs(A, FAST):
            assert rec.value >= -1e-8


# --- minima over principal sub-tensors --------------------------------------------


def test_delta_identity():
    assert delta_h_plus(identity_tensor(3, 2), FAST).value == pytest.approx(1.0, abs=1e-8)
    assert delta_z_plus(identity_tensor(4, 2), FAST).value == pytest.approx(0.5, abs=1e-8)


@pytest.mark.parametrize("m", [2, 4])
def test_delta_diagonal(m):
    res = delta_h_plus(diagonal_tensor([2.0, 5.0], m), FAST)
    assert res.value == pytest.approx(2.0, abs=1e-8)
    assert res.heuristic == (m != 2)


@pytest.mark.parametrize("seed", range(4))
def test_delta_at_most_min_diagonal(seed):
    A = strictly_positive_sample(200 + seed)
    res = delta_h_plus(A, FAST)
    assert res.value <= float(A.diagonal().min()) + 1e-8
    if A.m % 2 == 0:
        res_z = delta_z_plus(A, FAST)
        assert res_z.value <= float(A.diagonal().min()) + 1e-8


@pytest.mark.parametrize("seed", range(4))
def test_margin_bounded_by_delta(seed):
    A = strictly_positive_sample(300 + seed)
    margin = beta(A).value
    assert margin <= delta_h_plus(A, FAST).value + 1e-6
    if A.m % 2 == 0:
        assert margin <= A.n ** ((A.m - 2) / 2.0) * delta_z_plus(A, FAST).value + 1e-6


def test_spectrum_summary_fields():
    I42 = identity_tensor(4, 2)
    s = spectrum(I42, "pareto_z", FAST)
    assert s.mu_min_pareto_z == pytest.approx(0.5, abs=1e-8)
    assert s.completeness == "heuristic"
    s = spectrum(I42, "delta_z_plus", FAST)
    assert s.delta_z_plus == pytest.approx(0.5, abs=1e-8)
    assert s.records
    s = spectrum(diagonal_tensor([2.0, 5.0], 2), "h_plus", FAST)
    assert s.completeness == "closed_form"
    with pytest.raises(ValueError):
        spectrum(I42, "nope", FAST)


def test_enumeration_is_deterministic():
    A = strictly_positive_sample(77, m=3, n=3)
    r1 = h_plus_eigenpairs(A, FAST)
    r2 = h_plus_eigenpairs(A, FAST)
    assert [(a.value, tuple(a.vector)) for a in r1] == [(b.value, tuple(b.vector)) for b in r2]
