"""Equispaced Lagrange bases on reference cells."""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Tuple

import numpy as np

from ..errors import InvalidArgumentError, UnsupportedError
from ..mesh.cells import get_cell

logger = logging.getLogger(__name__)

MAX_ORDER = 14


def _lagrange_1d(nodes: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the 1D Lagrange polynomials on `nodes` at `x`."""
    n = nodes.size
    diff = x[:, None] - nodes[None, :]  # (n_x, n)
    denom = np.array([np.prod([nodes[j] - nodes[m] for m in range(n) if m != j]) for j in range(n)])
    values = np.empty((x.size, n))
    derivs = np.zeros((x.size, n))
    for j in range(n):
        others = [m for m in range(n) if m != j]
        values[:, j] = np.prod(diff[:, others], axis=1) / denom[j]
        for k in others:
            rest = [m for m in others if m != k]
            derivs[:, j] += np.prod(diff[:, rest], axis=1) / denom[j]
    return values, derivs


def _triangle_exponents(order: int) -> np.ndarray:
    return np.array([(a, b) for b in range(order + 1) for a in range(order + 1 - b)])


def _monomials(points: np.ndarray, exponents: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x, y = points[:, 0:1], points[:, 1:2]
    a, b = exponents[:, 0][None, :], exponents[:, 1][None, :]
    values = x**a * y**b
    dx = np.where(a > 0, a * x ** np.maximum(a - 1, 0), 0.0) * y**b
    dy = np.where(b > 0, b * y ** np.maximum(b - 1, 0), 0.0) * x**a
    return values, np.stack([dx, dy], axis=-1)


@dataclass(frozen=True)
class ReferenceBasis:
    """Nodal Lagrange basis of order `order` on an equispaced layout.

    Tensor cells number layout nodes lexicographically with the first axis
    fastest; triangles number them row by row from the (0, 0) vertex.
    """

    kind: str
    order: int
    nodes: np.ndarray = field(init=False, repr=False)
    _coefficients: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        cell = get_cell(self.kind)
        if self.order < 1 and cell.dim > 0:
            raise InvalidArgumentError(f"polynomial order must be >= 1, got {self.order}")
        if self.order > MAX_ORDER:
            raise UnsupportedError(f"polynomial order {self.order} exceeds maximum {MAX_ORDER}")

        coefficients = np.empty((0, 0))
        if cell.dim == 0:
            nodes = np.zeros((1, 0))
        elif cell.tensor:
            line = np.linspace(-1.0, 1.0, self.order + 1)
            grids = np.meshgrid(*([line] * cell.dim), indexing="ij")
            nodes = np.column_stack([g.ravel(order="F") for g in grids])
        else:
            exponents = _triangle_exponents(self.order)
            nodes = exponents / float(self.order)
            vandermonde, _ = _monomials(nodes, exponents)
            coefficients = np.linalg.inv(vandermonde)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "_coefficients", coefficients)

    @property
    def dim(self) -> int:
        return get_cell(self.kind).dim

    @property
    def n_basis(self) -> int:
        return int(self.nodes.shape[0])

    def tabulate(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Values (n_points, n_basis) and reference gradients (n_points, n_basis, dim)."""
        cell = get_cell(self.kind)
        if cell.dim == 0:
            n_points = max(np.asarray(points).shape[0], 1) if np.ndim(points) else 1
            return np.ones((n_points, 1)), np.zeros((n_points, 1, 0))
        points = np.asarray(points, dtype=float).reshape(-1, cell.dim)
        n_points = points.shape[0]

        if not cell.tensor:
            exponents = _triangle_exponents(self.order)
            mono, dmono = _monomials(points, exponents)
            values = mono @ self._coefficients
            grads = np.einsum("qmd,mn->qnd", dmono, self._coefficients)
            return values, grads

        line = np.linspace(-1.0, 1.0, self.order + 1)
        per_axis = [_lagrange_1d(line, points[:, a]) for a in range(cell.dim)]
        n1 = self.order + 1
        values = np.ones((n_points, self.n_basis))
        grads = np.ones((n_points, self.n_basis, cell.dim))
        for b, index in enumerate(product(range(n1), repeat=cell.dim)):
            # product() runs the last axis fastest; lexicographic order runs the first
            index = index[::-1]
            flat = sum(index[a] * n1**a for a in range(cell.dim))
            for a in range(cell.dim):
                val, der = per_axis[a]
                values[:, flat] *= val[:, index[a]]
                for g in range(cell.dim):
                    grads[:, flat, g] *= der[:, index[a]] if g == a else val[:, index[a]]
        return values, grads


@lru_cache(maxsize=None)
def lagrange_basis(kind: str, order: int) -> ReferenceBasis:
    """Shared basis instance for `kind` and `order`."""
    return ReferenceBasis(kind, int(order))


@dataclass(frozen=True)
class GeometryBasis:
    """Order-one shape functions numbered like the cell's vertices."""
    kind: str
    permutation: Tuple[int, ...]

    def tabulate(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        values, grads = lagrange_basis(self.kind, 1).tabulate(points)
        order = list(self.permutation)
        return values[:, order], grads[:, order]


@lru_cache(maxsize=None)
def geometry_basis(kind: str) -> GeometryBasis:
    """Multilinear (or linear) geometry map shape functions in vertex order."""
    cell = get_cell(kind)
    if cell.dim == 0:
        return GeometryBasis(kind, (0,))
    layout = lagrange_basis(kind, 1).nodes
    permutation = tuple(
        int(np.argmin(np.linalg.norm(layout - vertex, axis=1)))
        for vertex in cell.reference_vertices()
    )
    return GeometryBasis(kind, permutation)


def facet_layout_nodes(basis: ReferenceBasis, local_facet: int) -> np.ndarray:
    """Local indices of the layout nodes lying on a local facet."""
    cell = get_cell(basis.kind)
    vertices = cell.reference_vertices()[list(cell.facets[local_facet])]
    origin = vertices[0]
    if cell.dim == 1:
        normal = np.ones(1)
    elif cell.dim == 2:
        t = vertices[1] - vertices[0]
        normal = np.array([t[1], -t[0]])
    else:
        normal = np.cross(vertices[1] - vertices[0], vertices[-1] - vertices[0])
    distance = (basis.nodes - origin) @ normal
    return np.flatnonzero(np.abs(distance) < 1e-12)
