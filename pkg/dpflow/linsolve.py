"""Dirichlet elimination and sparse linear solves."""

import logging
import warnings
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly.system import AssembledSystem
from .config import settings
from .errors import AccuracyWarning, InvalidArgumentError, SingularMatrixError

logger = logging.getLogger(__name__)

# Row-compressed storage with sorted, duplicate-free column indices per row.
SparseMatrix = sp.csr_matrix


def canonical(matrix: sp.spmatrix) -> SparseMatrix:
    """CSR copy with summed duplicates and strictly increasing column indices."""
    csr = sp.csr_matrix(matrix, copy=True)
    csr.sum_duplicates()
    csr.sort_indices()
    return csr


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one linear solve."""
    residual_norm: float
    method: str
    n_dofs: int
    nnz: int
    factor_nnz: Optional[int] = None
    min_pivot_ratio: Optional[float] = None
    iterations: Optional[int] = None


def merge_dirichlet(rows: np.ndarray, values: np.ndarray, size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Sorted unique rows; duplicates must agree on their value."""
    rows = np.asarray(rows, dtype=np.int64).reshape(-1)
    values = np.asarray(values, dtype=float).reshape(-1)
    if rows.size != values.size:
        raise InvalidArgumentError("rows and values differ in length")
    if rows.size == 0:
        return rows, values
    if rows.min() < 0 or rows.max() >= size:
        raise InvalidArgumentError("Dirichlet row out of range")
    unique, first, inverse = np.unique(rows, return_index=True, return_inverse=True)
    merged = values[first]
    spread = np.abs(values - merged[inverse.reshape(-1)])
    tol = 1e-12 * (1.0 + np.abs(values))
    if np.any(spread > tol):
        bad = int(rows[np.argmax(spread - tol)])
        raise InvalidArgumentError(f"conflicting Dirichlet values on row {bad}")
    return unique, merged


def eliminate(matrix: sp.spmatrix, rows: np.ndarray) -> Tuple[SparseMatrix, sp.csc_matrix]:
    """Zero the rows and columns in `rows`, put 1 on their diagonal.

    Returns the eliminated matrix and the removed columns (for lifting the
    right-hand side).
    """
    csr = canonical(matrix)
    size = csr.shape[0]
    keep = np.ones(size)
    keep[rows] = 0.0
    lifting = sp.csc_matrix(csr)[:, rows]
    mask = sp.diags(keep)
    eliminated = (mask @ csr @ mask + sp.diags(1.0 - keep)).tocsr()
    eliminated.eliminate_zeros()
    eliminated.sort_indices()
    return eliminated, lifting


def lift(
    rhs: np.ndarray, rows: np.ndarray, values: np.ndarray, lifting: sp.spmatrix
) -> np.ndarray:
    """Right-hand side of the eliminated system."""
    out = np.asarray(rhs, dtype=float) - lifting @ values
    out[rows] = values
    return out


def apply_dirichlet(
    system: AssembledSystem,
    rows: Optional[np.ndarray] = None,
    values: Optional[np.ndarray] = None,
) -> AssembledSystem:
    """Symmetric elimination of fixed rows; defaults to the system's recorded rows."""
    if rows is None:
        rows, values = system.dirichlet_rows, system.dirichlet_values
        if system.constrained:
            return system
    elif values is None:
        raise InvalidArgumentError("values are required when rows are given")
    rows, values = merge_dirichlet(rows, values, system.size)
    if rows.size == 0:
        return replace(system, constrained=True)
    matrix, lifting = eliminate(system.matrix, rows)
    return replace(
        system,
        matrix=matrix,
        rhs=lift(system.rhs, rows, values, lifting),
        dirichlet_rows=rows,
        dirichlet_values=values,
        constrained=True,
    )


def relative_residual(matrix: sp.spmatrix, x: np.ndarray, b: np.ndarray) -> float:
    r = np.linalg.norm(matrix @ x - b)
    scale = np.linalg.norm(b)
    return float(r / scale) if scale > 0 else float(r)


def _check_residual(report: SolveReport) -> None:
    if not report.residual_norm <= settings.residual_tol:
        message = (
            f"{report.method} solve of {report.n_dofs} dofs finished with "
            f"relative residual {report.residual_norm:.3e}"
        )
        logger.warning(message)
        warnings.warn(message, AccuracyWarning, stacklevel=3)


class Factorization:
    """Sparse LU with a fill-reducing column ordering and pivot monitoring."""

    def __init__(self, matrix: sp.spmatrix):
        self.matrix = sp.csc_matrix(matrix)
        n = self.matrix.shape[0]
        if self.matrix.shape != (n, n):
            raise InvalidArgumentError(f"matrix must be square, got {self.matrix.shape}")
        try:
            self._lu = spla.splu(self.matrix, permc_spec="COLAMD")
        except RuntimeError as e:
            raise SingularMatrixError(None, str(e)) from e

        pivots = np.abs(self._lu.U.diagonal())
        largest = float(pivots.max()) if pivots.size else 0.0
        ratios = pivots / largest if largest > 0 else np.zeros_like(pivots)
        position = int(np.argmin(ratios)) if ratios.size else 0
        self.min_pivot_ratio = float(ratios[position]) if ratios.size else 0.0
        if largest == 0 or self.min_pivot_ratio < settings.singular_pivot_tol:
            dof = int(np.argsort(self._lu.perm_c)[position])
            raise SingularMatrixError(dof, f"relative pivot {self.min_pivot_ratio:.3e}")
        self.factor_nnz = int(self._lu.L.nnz + self._lu.U.nnz)

    def solve(self, rhs: np.ndarray) -> Tuple[np.ndarray, SolveReport]:
        rhs = np.asarray(rhs, dtype=float)
        x = self._lu.solve(rhs)
        report = SolveReport(
            residual_norm=relative_residual(self.matrix, x, rhs),
            method="direct",
            n_dofs=int(self.matrix.shape[0]),
            nnz=int(self.matrix.nnz),
            factor_nnz=self.factor_nnz,
            min_pivot_ratio=self.min_pivot_ratio,
        )
        _check_residual(report)
        return x, report


def factorize(matrix: sp.spmatrix) -> Factorization:
    return Factorization(matrix)


def _constrained(system: AssembledSystem) -> AssembledSystem:
    return system if system.constrained else apply_dirichlet(system)


def solve_direct(system: AssembledSystem) -> Tuple[np.ndarray, SolveReport]:
    """Eliminate recorded Dirichlet rows (if still pending) and solve by sparse LU."""
    system = _constrained(system)
    x, report = Factorization(system.matrix).solve(system.rhs)
    logger.debug(f"direct solve: {report.n_dofs} dofs, residual {report.residual_norm:.2e}")
    return x, report


def solve_iterative(system: AssembledSystem) -> Tuple[np.ndarray, SolveReport]:
    """GMRES preconditioned with an incomplete LU factorization."""
    system = _constrained(system)
    matrix = sp.csc_matrix(system.matrix)
    try:
        ilu = spla.spilu(matrix, drop_tol=1e-6, fill_factor=20)
    except RuntimeError as e:
        raise SingularMatrixError(None, str(e)) from e
    preconditioner = spla.LinearOperator(matrix.shape, ilu.solve)
    iterations = [0]

    def count(_: np.ndarray) -> None:
        iterations[0] += 1

    kwargs = dict(M=preconditioner, restart=200, maxiter=1000, callback=count, callback_type="pr_norm")
    try:
        x, info = spla.gmres(matrix, system.rhs, rtol=settings.gmres_tol, atol=0.0, **kwargs)
    except TypeError:  # scipy < 1.12
        x, info = spla.gmres(matrix, system.rhs, tol=settings.gmres_tol, atol=0.0, **kwargs)
    report = SolveReport(
        residual_norm=relative_residual(matrix, x, system.rhs),
        method="gmres",
        n_dofs=int(matrix.shape[0]),
        nnz=int(matrix.nnz),
        iterations=iterations[0],
    )
    if info != 0:
        logger.warning(f"gmres stopped with info={info} after {iterations[0]} iterations")
    _check_residual(report)
    return x, report


def solve(system: AssembledSystem) -> Tuple[np.ndarray, SolveReport]:
    """Solve with the method selected in the settings."""
    if settings.solver_method == "gmres":
        return solve_iterative(system)
    return solve_direct(system)


class ConstrainedOperator:
    """Eliminated matrix for a fixed set of Dirichlet rows, factorized once.

    Successive right-hand sides and Dirichlet values (same rows) reuse the
    factorization.
    """

    def __init__(self, matrix: sp.spmatrix, rows: np.ndarray):
        self.rows = np.unique(np.asarray(rows, dtype=np.int64))
        self.matrix, self._lifting = eliminate(matrix, self.rows)
        self._factorization: Optional[Factorization] = None

    def solve(
        self, rhs: np.ndarray, rows: np.ndarray, values: np.ndarray
    ) -> Tuple[np.ndarray, SolveReport]:
        rows, values = merge_dirichlet(rows, values, self.matrix.shape[0])
        if not np.array_equal(rows, self.rows):
            raise InvalidArgumentError("Dirichlet rows differ from the factorized ones")
        b = lift(rhs, rows, values, self._lifting)
        if settings.solver_method == "gmres":
            system = AssembledSystem(
                matrix=self.matrix, rhs=b, dofmap=None, constrained=True  # type: ignore[arg-type]
            )
            return solve_iterative(system)
        if self._factorization is None:
            self._factorization = Factorization(self.matrix)
        return self._factorization.solve(b)
