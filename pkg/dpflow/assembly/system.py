"""Assembled linear systems and the stability-norm block forms."""

from dataclasses import dataclass, field, replace
from typing import Dict, Optional

import numpy as np
import scipy.sparse as sp

from ..fespace.dofmap import DofMap


@dataclass(frozen=True, eq=False)
class DatumConstraint:
    """Scalar Lagrange multiplier enforcing a zero mean of one pressure field.

    The multiplier occupies the last row and column; `weights` holds the
    integrals of the constrained pressure basis functions.
    """
    field: str
    index: int
    weights: np.ndarray


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    """Sparse operator, right-hand side and the constraints still to apply.

    Strong Dirichlet rows are recorded in `dirichlet_rows`/`dirichlet_values`
    and eliminated by `linsolve.apply_dirichlet`; `constrained` tells whether
    that has happened.
    """
    matrix: sp.csr_matrix
    rhs: np.ndarray
    dofmap: DofMap
    constraint: Optional[DatumConstraint] = None
    dirichlet_rows: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    dirichlet_values: np.ndarray = field(default_factory=lambda: np.empty(0))
    constrained: bool = False

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])

    def with_terms(
        self, matrix: Optional[sp.spmatrix] = None, rhs: Optional[np.ndarray] = None
    ) -> "AssembledSystem":
        """Copy with extra matrix and right-hand side contributions added."""
        new_matrix = self.matrix if matrix is None else (self.matrix + _pad(matrix, self.size)).tocsr()
        new_rhs = self.rhs if rhs is None else self.rhs + _pad_vector(rhs, self.size)
        return replace(self, matrix=new_matrix, rhs=new_rhs)

    def with_dirichlet(self, rows: np.ndarray, values: np.ndarray) -> "AssembledSystem":
        return replace(
            self,
            dirichlet_rows=np.concatenate([self.dirichlet_rows, np.asarray(rows, dtype=np.int64)]),
            dirichlet_values=np.concatenate([self.dirichlet_values, np.asarray(values, dtype=float)]),
        )


def _pad(matrix: sp.spmatrix, size: int) -> sp.spmatrix:
    if matrix.shape == (size, size):
        return matrix
    coo = sp.coo_matrix(matrix)
    return sp.coo_matrix((coo.data, (coo.row, coo.col)), shape=(size, size))


def _pad_vector(vector: np.ndarray, size: int) -> np.ndarray:
    if vector.size == size:
        return vector
    out = np.zeros(size)
    out[: vector.size] = vector
    return out


@dataclass(frozen=True, eq=False)
class StabNormWeights:
    """Block quadratic forms of the stability norm.

    ||x||_stab^2 = sum over blocks of x_b^T Q_b x_b, with velocity masses weighted
    by mu K^-1 / 2, pressure-gradient stiffnesses by K / (2 mu) and the
    pressure-difference mass by beta / mu.
    """
    dofmap: DofMap
    velocity1: sp.csr_matrix
    velocity2: sp.csr_matrix
    gradient1: sp.csr_matrix
    gradient2: sp.csr_matrix
    transfer: sp.csr_matrix

    def blocks(self) -> Dict[str, sp.csr_matrix]:
        return {
            "velocity1": self.velocity1,
            "velocity2": self.velocity2,
            "gradient1": self.gradient1,
            "gradient2": self.gradient2,
            "transfer": self.transfer,
        }

    def squared(self, x: np.ndarray) -> float:
        """||x||_stab^2 for a coefficient vector (a trailing multiplier is ignored)."""
        dm = self.dofmap
        x = np.asarray(x, dtype=float)[: dm.n_dofs]
        u1, u2 = x[dm.field_dofs("u1")], x[dm.field_dofs("u2")]
        p1, p2 = x[dm.field_dofs("p1")], x[dm.field_dofs("p2")]
        dp = p1 - p2
        return float(
            u1 @ (self.velocity1 @ u1)
            + u2 @ (self.velocity2 @ u2)
            + p1 @ (self.gradient1 @ p1)
            + p2 @ (self.gradient2 @ p2)
            + dp @ (self.transfer @ dp)
        )

    def norm(self, x: np.ndarray) -> float:
        return float(np.sqrt(max(self.squared(x), 0.0)))
