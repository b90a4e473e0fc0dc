"""Lagrange bases, quadrature, geometry and dof numbering."""

from .basis import MAX_ORDER, ReferenceBasis, lagrange_basis
from .dofmap import FIELDS, DofMap, build_dofmap, interpolate, interpolate_scalar
from .geometry import ElementGeometry, FacetGeometry, locate_points, map_gradients
from .quadrature import FacetRule, QuadratureRule, facet_rule, gauss_rule


def tabulate(basis: ReferenceBasis, points):  # type: ignore[no-untyped-def]
    """Values and reference gradients of `basis` at reference `points`."""
    return basis.tabulate(points)


__all__ = [
    "FIELDS",
    "MAX_ORDER",
    "DofMap",
    "ElementGeometry",
    "FacetGeometry",
    "FacetRule",
    "QuadratureRule",
    "ReferenceBasis",
    "build_dofmap",
    "facet_rule",
    "gauss_rule",
    "interpolate",
    "interpolate_scalar",
    "lagrange_basis",
    "locate_points",
    "map_gradients",
    "tabulate",
]
