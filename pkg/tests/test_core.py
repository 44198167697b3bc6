import math

import numpy as np
import pytest

from ncsplit.core import (
    ContractError,
    DenseOperator,
    FactorizationError,
    FirstDifference,
    IdentityOperator,
    SpdSystem,
    SpectralEstimationError,
    extreme_eigenvalues,
    power_iteration,
    spd_solve,
    thomas_solve,
)
from oracles import jacobi_eigenvalues, sturm_eigenvalue


def operators(rng):
    yield DenseOperator(rng.standard_normal((7, 12)))
    yield DenseOperator(rng.standard_normal((12, 5)))
    yield IdentityOperator(9)
    yield FirstDifference(15)


@pytest.mark.parametrize("seed", range(5))
def test_adjoint_pairing(seed):
    rng = np.random.default_rng(seed)
    for op in operators(rng):
        x = rng.standard_normal(op.cols)
        y = rng.standard_normal(op.rows)
        lhs = float(op.apply(x) @ y)
        rhs = float(x @ op.adjoint(y))
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_shape_contract():
    op = DenseOperator(np.ones((3, 4)))
    with pytest.raises(ContractError):
        op.apply(np.ones(3))
    with pytest.raises(ContractError):
        op.adjoint(np.ones(4))
    with pytest.raises(ContractError):
        IdentityOperator(0)


def test_dense_matrix_is_read_only():
    a = np.ones((2, 3))
    op = DenseOperator(a)
    a[0, 0] = 5.0
    assert op.matrix[0, 0] == 1.0
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 2.0


def test_first_difference_dense():
    d = FirstDifference(5).to_dense()
    expected = np.diff(np.eye(5), axis=0)
    np.testing.assert_array_equal(d, expected)


@pytest.mark.parametrize("shape", [(5, 20), (20, 50), (30, 30), (40, 12)])
def test_spectral_estimates_vs_jacobi(shape):
    rng = np.random.default_rng(sum(shape))
    op = DenseOperator(rng.standard_normal(shape))
    ev_out = jacobi_eigenvalues(op.gram_out())
    assert math.isclose(op.lambda_max_gram(), ev_out[-1], rel_tol=1e-6)
    if shape[0] <= shape[1]:
        assert math.isclose(op.sigma(), ev_out[0], rel_tol=1e-6)
    else:
        assert op.sigma() == 0.0
        ev_in = jacobi_eigenvalues(op.gram_in())
        assert math.isclose(op.lambda_min_gram_in(), ev_in[0], rel_tol=1e-6)


@pytest.mark.parametrize("n", [2, 3, 10, 50, 200])
def test_first_difference_closed_forms_vs_sturm(n):
    # D D^* is tridiagonal with 2 on the diagonal and -1 off it
    op = FirstDifference(n)
    diag, off = np.full(n - 1, 2.0), np.full(n - 2, -1.0)
    assert math.isclose(op.sigma(), sturm_eigenvalue(diag, off, 0), rel_tol=1e-6)
    assert math.isclose(op.lambda_max_gram(), sturm_eigenvalue(diag, off, n - 2), rel_tol=1e-6)
    if n <= 50:
        ev = jacobi_eigenvalues(op.gram_out())
        assert math.isclose(op.sigma(), ev[0], rel_tol=1e-6)


def test_identity_spectrum():
    op = IdentityOperator(4)
    assert op.sigma() == 1.0 and op.lambda_max_gram() == 1.0 and op.is_identity


@pytest.mark.parametrize("seed", range(4))
def test_extreme_eigenvalues_indefinite(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((20, 20))
    q = a + a.T
    ev = jacobi_eigenvalues(q)
    top, bottom = extreme_eigenvalues(q)
    assert math.isclose(top, ev[-1], rel_tol=1e-6)
    assert math.isclose(bottom, ev[0], rel_tol=1e-6)


def test_power_iteration_cap():
    g = np.diag([1.0, 0.999, 0.5])
    with pytest.raises(SpectralEstimationError) as info:
        power_iteration(lambda v: g @ v, 3, tol=1e-12, max_iter=3)
    assert 0.5 < info.value.estimate <= 1.0


def test_power_iteration_null_start():
    # the all-ones vector lies in the null space; fall back to e1
    g = np.array([[1.0, -1.0], [-1.0, 1.0]])
    lam, _ = power_iteration(lambda v: g @ v, 2)
    assert math.isclose(lam, 2.0, rel_tol=1e-10)


def test_thomas_matches_dense():
    rng = np.random.default_rng(3)
    n = 30
    lower, upper = rng.standard_normal(n - 1), rng.standard_normal(n - 1)
    diag = 4.0 + np.abs(rng.standard_normal(n))
    rhs = rng.standard_normal(n)
    a = np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)
    x = thomas_solve(lower, diag, upper, rhs)
    assert np.linalg.norm(a @ x - rhs) <= 1e-10 * np.linalg.norm(rhs)


@pytest.mark.parametrize(
    "op, c, hessian, mode",
    [
        (IdentityOperator(20), 0.5, None, "diagonal"),
        (FirstDifference(500), 1.0, None, "tridiagonal"),
        (DenseOperator(np.random.default_rng(1).standard_normal((10, 40))), 2.0, None, "woodbury"),
        (DenseOperator(np.random.default_rng(2).standard_normal((10, 40))), 0.0, np.eye(40), "dense"),
        (DenseOperator(np.random.default_rng(4).standard_normal((30, 10))), 0.0, None, "dense"),
    ],
)
def test_spd_solve_residual(op, c, hessian, mode):
    rng = np.random.default_rng(7)
    system = SpdSystem(op, 3.0, c=c, hessian=hessian)
    assert system.mode == mode
    rhs = rng.standard_normal(op.cols)
    x = system.solve(rhs)
    assert np.linalg.norm(system.matvec(x) - rhs) <= 1e-10 * np.linalg.norm(rhs)
    np.testing.assert_allclose(spd_solve(op, 3.0, rhs, c=c, hessian=hessian), x)


def test_spd_solve_not_positive_definite():
    op = DenseOperator(np.ones((2, 5)))
    with pytest.raises(FactorizationError):
        SpdSystem(op, 1.0)
