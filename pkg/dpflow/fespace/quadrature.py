"""Gauss quadrature on reference cells."""

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.special import roots_legendre

from ..errors import InvalidArgumentError, UnsupportedError
from ..mesh.cells import facet_cell, get_cell

MAX_DEGREE_1D = 29
MAX_DEGREE_PER_AXIS = 15


@dataclass(frozen=True)
class QuadratureRule:
    """Points (n_points, dim) and weights on a reference cell."""
    kind: str
    degree: int
    points: np.ndarray
    weights: np.ndarray

    @property
    def n_points(self) -> int:
        return int(self.weights.size)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=float)
    array.setflags(write=False)
    return array


@lru_cache(maxsize=None)
def _legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    return np.asarray(x, dtype=float), np.asarray(w, dtype=float)


@lru_cache(maxsize=None)
def gauss_rule(kind: str, degree: int) -> QuadratureRule:
    """Gauss rule on the reference `kind` exact for polynomials of `degree`.

    Tensor cells use Gauss-Legendre products; triangles use a collapsed
    (Duffy) product rule.
    """
    cell = get_cell(kind)
    degree = int(degree)
    if degree < 1 and cell.dim > 0:
        raise InvalidArgumentError(f"quadrature degree must be >= 1, got {degree}")

    if cell.dim == 0:
        return QuadratureRule(kind, degree, _frozen(np.zeros((1, 0))), _frozen(np.ones(1)))

    limit = MAX_DEGREE_1D if cell.dim == 1 else MAX_DEGREE_PER_AXIS
    if degree > limit:
        raise UnsupportedError(f"{kind} quadrature of degree {degree} exceeds maximum {limit}")

    if cell.tensor:
        x, w = _legendre(degree // 2 + 1)
        grids = np.meshgrid(*([x] * cell.dim), indexing="ij")
        wgrids = np.meshgrid(*([w] * cell.dim), indexing="ij")
        points = np.column_stack([g.ravel(order="F") for g in grids])
        weights = np.prod(np.column_stack([g.ravel(order="F") for g in wgrids]), axis=1)
        return QuadratureRule(kind, degree, _frozen(points), _frozen(weights))

    # collapsed rule: the (1 - v) Jacobian adds one degree in v
    xu, wu = _legendre(degree // 2 + 1)
    xv, wv = _legendre((degree + 1) // 2 + 1)
    u, wu = (xu + 1.0) / 2.0, wu / 2.0
    v, wv = (xv + 1.0) / 2.0, wv / 2.0
    uu, vv = np.meshgrid(u, v, indexing="ij")
    wuu, wvv = np.meshgrid(wu, wv, indexing="ij")
    points = np.column_stack([(uu * (1.0 - vv)).ravel(), vv.ravel()])
    weights = (wuu * wvv * (1.0 - vv)).ravel()
    return QuadratureRule(kind, degree, _frozen(points), _frozen(weights))


@dataclass(frozen=True)
class FacetRule:
    """Quadrature on one local facet, expressed in element reference coordinates.

    `facet_points` are the facet's own reference coordinates, `points` their image
    on the element reference cell and `weights` the facet reference weights.
    """
    kind: str
    local_facet: int
    degree: int
    facet_points: np.ndarray
    points: np.ndarray
    weights: np.ndarray


@lru_cache(maxsize=None)
def facet_rule(kind: str, local_facet: int, degree: int) -> FacetRule:
    """Gauss rule of `degree` on local facet `local_facet` of the reference `kind`."""
    from .basis import geometry_basis

    cell = get_cell(kind)
    if not 0 <= local_facet < len(cell.facets):
        raise InvalidArgumentError(f"{kind} has no local facet {local_facet}")
    fcell = facet_cell(kind)
    rule = gauss_rule(fcell.name, max(int(degree), 1))
    vertices = cell.reference_vertices()[list(cell.facets[local_facet])]
    shape, _ = geometry_basis(fcell.name).tabulate(rule.points)
    points = shape @ vertices
    return FacetRule(
        kind=kind,
        local_facet=local_facet,
        degree=rule.degree,
        facet_points=rule.points,
        points=_frozen(points),
        weights=rule.weights,
    )
