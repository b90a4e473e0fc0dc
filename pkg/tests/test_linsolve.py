"""Tests for Dirichlet elimination and the sparse solvers."""

import numpy as np
import pytest
import scipy.sparse as sp

from dpflow.assembly import AssembledSystem
from dpflow.config import settings
from dpflow.errors import InvalidArgumentError, SingularMatrixError
from dpflow.linsolve import (
    ConstrainedOperator,
    apply_dirichlet,
    canonical,
    factorize,
    merge_dirichlet,
    solve,
    solve_direct,
)


def laplacian(n):
    """Tridiagonal 1D Laplacian of size n."""
    return sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]).tocsr()


def system_of(matrix, rhs, rows=(), values=()):
    return AssembledSystem(
        matrix=sp.csr_matrix(matrix),
        rhs=np.asarray(rhs, dtype=float),
        dofmap=None,
        dirichlet_rows=np.asarray(rows, dtype=np.int64),
        dirichlet_values=np.asarray(values, dtype=float),
    )


class TestDirichlet:
    """Test symmetric elimination of fixed rows."""

    def test_linear_profile(self):
        """Test that fixing both ends of a Laplacian gives a straight line."""
        n = 11
        system = system_of(laplacian(n), np.zeros(n), [0, n - 1], [1.0, 3.0])
        x, report = solve_direct(system)

        np.testing.assert_allclose(x, np.linspace(1.0, 3.0, n), atol=1e-12)
        assert report.method == "direct"
        assert report.residual_norm < 1e-12

    def test_elimination_keeps_symmetry(self):
        """Test that eliminated rows and columns become identity entries."""
        constrained = apply_dirichlet(system_of(laplacian(5), np.ones(5), [2], [4.0]))
        matrix = constrained.matrix.toarray()

        np.testing.assert_allclose(matrix, matrix.T)
        assert matrix[2, 2] == 1.0
        assert np.count_nonzero(matrix[2]) == 1
        assert constrained.rhs[2] == 4.0
        assert constrained.rhs[1] == pytest.approx(1.0 + 4.0)
        assert constrained.constrained

    def test_duplicate_rows_must_agree(self):
        """Test that a row fixed twice needs the same value."""
        rows, values = merge_dirichlet(np.array([3, 1, 3]), np.array([2.0, 0.0, 2.0]), 5)
        np.testing.assert_array_equal(rows, [1, 3])
        np.testing.assert_array_equal(values, [0.0, 2.0])
        with pytest.raises(InvalidArgumentError, match="conflicting"):
            merge_dirichlet(np.array([3, 3]), np.array([2.0, 1.0]), 5)

    def test_row_out_of_range(self):
        """Test that rows beyond the matrix are rejected."""
        with pytest.raises(InvalidArgumentError):
            merge_dirichlet(np.array([7]), np.array([0.0]), 5)

    def test_canonical_sums_duplicates(self):
        """Test the canonical CSR form."""
        coo = sp.coo_matrix(([1.0, 2.0, 3.0], ([0, 0, 1], [1, 1, 0])), shape=(2, 2))
        csr = canonical(coo)
        assert csr.nnz == 2
        assert csr[0, 1] == 3.0
        assert csr.has_sorted_indices


class TestFactorization:
    """Test the LU wrapper."""

    def test_singular_matrix_detected(self):
        """Test that a zero pivot raises SingularMatrixError."""
        matrix = sp.csr_matrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
        with pytest.raises(SingularMatrixError):
            factorize(matrix)

    def test_singular_error_carries_dof(self):
        """Test that a tiny pivot names a dof."""
        matrix = sp.diags([1.0, 1e-20, 1.0]).tocsc()
        with pytest.raises(SingularMatrixError) as info:
            factorize(matrix)
        assert info.value.dof == 1

    def test_factorization_is_reused(self):
        """Test repeated right-hand sides with one constrained operator."""
        n = 6
        operator = ConstrainedOperator(laplacian(n), np.array([0, n - 1]))
        for left in (0.0, 1.0, 2.0):
            x, _ = operator.solve(np.zeros(n), np.array([0, n - 1]), np.array([left, 0.0]))
            np.testing.assert_allclose(x, np.linspace(left, 0.0, n), atol=1e-12)

    def test_rows_must_match_factorization(self):
        """Test that the Dirichlet row set is fixed."""
        operator = ConstrainedOperator(laplacian(4), np.array([0]))
        with pytest.raises(InvalidArgumentError):
            operator.solve(np.zeros(4), np.array([3]), np.array([0.0]))


class TestIterative:
    """Test the GMRES path."""

    def test_gmres_matches_direct(self, monkeypatch):
        """Test that ILU-preconditioned GMRES agrees with LU."""
        rng = np.random.default_rng(5)
        n = 40
        matrix = laplacian(n) + sp.diags(rng.uniform(0.1, 1.0, size=n))
        rhs = rng.standard_normal(n)
        direct, _ = solve(system_of(matrix, rhs))

        monkeypatch.setattr(settings, "solver_method", "gmres")
        iterative, report = solve(system_of(matrix, rhs))

        assert report.method == "gmres"
        np.testing.assert_allclose(iterative, direct, rtol=1e-8, atol=1e-10)
