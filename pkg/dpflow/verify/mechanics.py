"""Mechanics-based a-posteriori measures: dissipation and reciprocity."""

import logging
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..drivers.solution import FieldSolution
from ..errors import InsufficientDataError, InvalidArgumentError
from ..fespace.geometry import ElementGeometry, FacetGeometry
from ..mesh.cells import facet_cell
from ..models.types import BoundarySpec, MaterialData, evaluate_boundary
from .norms import clamp_degree, error_geometry

logger = logging.getLogger(__name__)

MONOTONE_SLACK = 1.001
RECIPROCAL_ABSOLUTE_BELOW = 1e-12


def dissipation(solution: FieldSolution, material: MaterialData, geometry: Optional[ElementGeometry] = None) -> float:
    """Sum over networks of int mu K^-1 u.u + 1/2 int (mu/beta) (div u)^2."""
    geometry = geometry or error_geometry(solution)
    c = material.sample(geometry.points)
    total = 0.0
    for i, name in enumerate(("u1", "u2"), start=1):
        u = solution.at_quadrature(geometry, name)
        div = solution.gradient_at_quadrature(geometry, name)
        drag = np.einsum("eqi,eqij,eqj->eq", u, np.linalg.inv(c.permeability(i)), u) * c.mu
        total += float(np.sum(drag * geometry.dv))
        if float(material.beta) == 0.0:
            scale = max(float(np.max(np.abs(u), initial=0.0)), 1.0)
            if np.max(np.abs(div), initial=0.0) > 1e-10 * scale:
                raise InvalidArgumentError(
                    f"beta = 0 leaves the exchange dissipation of {name} undefined (div u != 0)"
                )
            continue
        total += 0.5 * float(np.sum(c.mu / c.beta * div**2 * geometry.dv))
    return total


def kinematic_admissibility_residual(
    solution: FieldSolution, geometry: Optional[ElementGeometry] = None
) -> float:
    """L2 norm of div u1 + div u2."""
    geometry = geometry or error_geometry(solution)
    div = solution.gradient_at_quadrature(geometry, "u1") + solution.gradient_at_quadrature(geometry, "u2")
    return float(np.sqrt(max(float(np.sum(div**2 * geometry.dv)), 0.0)))


def is_monotone_decreasing(values: Sequence[float], slack: float = MONOTONE_SLACK) -> bool:
    """True when every value is at most `slack` times its predecessor."""
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        raise InsufficientDataError(f"need at least 3 refinement levels, got {values.size}")
    return bool(np.all(values[1:] <= values[:-1] * slack))


def minimum_dissipation_check(values: Sequence[float], slack: float = MONOTONE_SLACK) -> bool:
    """Dissipation over a refinement ladder must decrease (up to `slack`)."""
    ok = is_monotone_decreasing(values, slack)
    if not ok:
        logger.warning(
            f"dissipation is not decreasing over {list(values)}; check mass balance or velocity data"
        )
    return ok


class DataSet(NamedTuple):
    """Material and boundary data a solution was computed with."""
    material: MaterialData
    spec: BoundarySpec


def _check_partition(a: BoundarySpec, b: BoundarySpec) -> None:
    for i in (1, 2):
        na, nb = a.network(i), b.network(i)
        if set(na.pressure) != set(nb.pressure) or set(na.velocity) != set(nb.velocity):
            raise InvalidArgumentError(f"network {i}: data-sets split the boundary differently")


def _work(
    data: DataSet,
    own: FieldSolution,
    other_data: DataSet,
    other: FieldSolution,
    geometry: ElementGeometry,
    degree: int,
) -> float:
    """One side of the reciprocal identity: data and pressures of `own` against `other`."""
    mesh, dofmap = own.dofmap.mesh, own.dofmap
    gamma_b = data.material.sample(geometry.points).gamma_b
    velocity = other.at_quadrature(geometry, "u1") + other.at_quadrature(geometry, "u2")
    total = float(np.sum(np.einsum("eqd,eqd->eq", gamma_b, velocity) * geometry.dv))

    for i in (1, 2):
        network, other_network = data.spec.network(i), other_data.spec.network(i)
        u_name, p_name = f"u{i}", f"p{i}"
        for tag, value in network.pressure.items():
            facets = mesh.facets_with_tag(tag)
            if facets.size == 0:
                continue
            fg = FacetGeometry.build(mesh, dofmap.order, facets, degree)
            u = np.einsum("fqb,fbd->fqd", fg.values, other.nodal(u_name)[dofmap.cell_nodes[fg.owners]])
            un = np.einsum("fqd,fqd->fq", u, fg.normals)
            total -= float(np.sum(evaluate_boundary(value, fg.points) * un * fg.ds))
        for tag, value in other_network.velocity.items():
            facets = mesh.facets_with_tag(tag)
            if facets.size == 0:
                continue
            fg = FacetGeometry.build(mesh, dofmap.order, facets, degree)
            p = np.einsum("fqb,fb->fq", fg.values, own.nodal(p_name)[dofmap.cell_nodes[fg.owners]])
            total -= float(np.sum(p * evaluate_boundary(value, fg.points) * fg.ds))
    return total


def reciprocal_sides(
    sol_prime: FieldSolution, data_prime: DataSet, sol_star: FieldSolution, data_star: DataSet
) -> Tuple[float, float]:
    """Left and right sides of the reciprocal identity, by quadrature of degree 2p + 3."""
    if sol_prime.dofmap is not sol_star.dofmap:
        mesh_a, mesh_b = sol_prime.dofmap.mesh, sol_star.dofmap.mesh
        if sol_prime.dofmap.order != sol_star.dofmap.order or not mesh_a.same_as(mesh_b):
            raise InvalidArgumentError("reciprocal relation needs both solutions on the same mesh and space")
    _check_partition(data_prime.spec, data_star.spec)
    dofmap = sol_prime.dofmap
    degree = clamp_degree(dofmap.mesh.kind, 2 * dofmap.order + 3)
    geometry = ElementGeometry.build(dofmap.mesh, dofmap.order, degree)
    facet_degree = clamp_degree(facet_cell(dofmap.mesh.kind).name, 2 * dofmap.order + 3)
    lhs = _work(data_prime, sol_prime, data_star, sol_star, geometry, facet_degree)
    rhs = _work(data_star, sol_star, data_prime, sol_prime, geometry, facet_degree)
    return lhs, rhs


def reciprocal_error(
    sol_prime: FieldSolution, data_prime: DataSet, sol_star: FieldSolution, data_star: DataSet
) -> float:
    """|LHS - RHS| / |LHS|, or the absolute gap when |LHS| < 1e-12."""
    return reciprocal_gap(*reciprocal_sides(sol_prime, data_prime, sol_star, data_star))


def reciprocal_gap(lhs: float, rhs: float) -> float:
    gap = abs(lhs - rhs)
    if abs(lhs) < RECIPROCAL_ABSOLUTE_BELOW:
        logger.info(f"reciprocal LHS {lhs:.3e} vanishes; reporting the absolute gap")
        return gap
    return gap / abs(lhs)
