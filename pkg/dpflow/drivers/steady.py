"""Steady-state solves."""

import logging
from typing import Iterable, Optional

from ..assembly.flow import assemble_galerkin, assemble_stabilized
from ..assembly.nitsche import assemble_nitsche_boundary
from ..errors import InvalidArgumentError
from ..fespace.dofmap import DofMap, build_dofmap
from ..linsolve import solve
from ..mesh.base import Mesh
from ..models.types import BoundarySpec, MaterialData
from .solution import FieldSolution

logger = logging.getLogger(__name__)

ASSEMBLERS = {"stabilized": assemble_stabilized, "galerkin": assemble_galerkin}


def solve_steady(
    mesh: Mesh,
    order: int,
    material: MaterialData,
    spec: BoundarySpec,
    formulation: str = "stabilized",
    weak_bc_tags: Iterable[str] = (),
    eta: Optional[float] = None,
    h: Optional[float] = None,
    dofmap: Optional[DofMap] = None,
) -> FieldSolution:
    """Assemble, constrain and solve the steady four-field problem.

    Velocity data on `weak_bc_tags` is imposed with Nitsche terms, everything
    else strongly. A mean-zero p1 multiplier is added when no pressure data
    fixes the datum.
    """
    if formulation not in ASSEMBLERS:
        raise InvalidArgumentError(f"unknown formulation '{formulation}'")
    dofmap = dofmap or build_dofmap(mesh, order)
    weak = set(weak_bc_tags)
    system = ASSEMBLERS[formulation](mesh, dofmap, material, spec, weak)
    if weak:
        system = assemble_nitsche_boundary(system, mesh, dofmap, material, spec, eta, h, weak)
    logger.info(
        f"{formulation} system: {dofmap.n_dofs} dofs, order {order}, "
        f"{mesh.n_elements} elements, datum={'yes' if system.constraint else 'no'}"
    )
    x, report = solve(system)
    logger.info(f"solved with residual {report.residual_norm:.2e} ({report.method})")
    return FieldSolution.from_vector(dofmap, x, report=report)
