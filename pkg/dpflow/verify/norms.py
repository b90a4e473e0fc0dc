"""Error norms against reference solutions and the stability norm."""

import logging
from typing import Dict, Optional, Union

import numpy as np

from ..assembly.flow import assemble_stab_norm_weights
from ..config import settings
from ..drivers.solution import FieldSolution
from ..errors import InvalidArgumentError
from ..fespace.geometry import ElementGeometry
from ..fespace.quadrature import MAX_DEGREE_1D, MAX_DEGREE_PER_AXIS
from ..mesh.cells import get_cell
from ..models.types import MaterialData
from .analytical import ExactSolution

logger = logging.getLogger(__name__)

ERROR_COLUMNS = ("l2_u1", "l2_u2", "l2_p1", "l2_p2", "h1_p1", "h1_p2")


def clamp_degree(kind: str, degree: int) -> int:
    """Largest available quadrature degree not above `degree` for `kind`."""
    limit = MAX_DEGREE_1D if get_cell(kind).dim == 1 else MAX_DEGREE_PER_AXIS
    if degree > limit:
        logger.debug(f"quadrature degree {degree} clamped to {limit} on {kind} cells")
    return max(1, min(int(degree), limit))


def error_geometry(solution: FieldSolution, quadrature_boost: Optional[int] = None) -> ElementGeometry:
    """Geometry at degree 2p + 1 + boost (2p + 3 by default), clamped to the rule maximum."""
    boost = settings.quadrature_boost if quadrature_boost is None else int(quadrature_boost)
    dofmap = solution.dofmap
    degree = clamp_degree(dofmap.mesh.kind, 2 * dofmap.order + 1 + boost)
    return ElementGeometry.build(dofmap.mesh, dofmap.order, degree)


def _integrate(geometry: ElementGeometry, density: np.ndarray) -> float:
    return float(np.sum(density * geometry.dv))


def _exact_fields(exact: ExactSolution, points: np.ndarray) -> Dict[str, np.ndarray]:
    fields = {name: np.asarray(getattr(exact, name)(points), dtype=float) for name in ("u1", "u2", "p1", "p2")}
    for name in ("grad_p1", "grad_p2"):
        method = getattr(exact, name, None)
        fields[name] = np.asarray(method(points), dtype=float) if method is not None else None
    return fields


def error_norms(
    solution: FieldSolution,
    exact: Union[ExactSolution, FieldSolution],
    quadrature_boost: Optional[int] = None,
) -> Dict[str, float]:
    """L2 errors of all four fields and H1-seminorm errors of both pressures.

    `exact` is either an object with u1, u2, p1, p2 (and optionally grad_p1,
    grad_p2) callables of x, or another solution on the same space. A missing
    pressure gradient reports NaN for that H1 error.
    """
    geometry = error_geometry(solution, quadrature_boost)
    if isinstance(exact, FieldSolution):
        if exact.dofmap is not solution.dofmap:
            raise InvalidArgumentError("reference solution lives on a different space")
        solution, reference = solution - exact, None
    else:
        reference = _exact_fields(exact, geometry.points)

    errors: Dict[str, float] = {}
    for name in ("u1", "u2", "p1", "p2"):
        diff = solution.at_quadrature(geometry, name)
        if reference is not None:
            diff = diff - reference[name].reshape(diff.shape)
        squared = np.sum(diff**2, axis=-1) if diff.ndim == 3 else diff**2
        errors[f"l2_{name}"] = float(np.sqrt(max(_integrate(geometry, squared), 0.0)))
    for name in ("p1", "p2"):
        diff = solution.gradient_at_quadrature(geometry, name)
        if reference is not None:
            if reference[f"grad_{name}"] is None:
                errors[f"h1_{name}"] = float("nan")
                continue
            diff = diff - reference[f"grad_{name}"].reshape(diff.shape)
        errors[f"h1_{name}"] = float(np.sqrt(max(_integrate(geometry, np.sum(diff**2, axis=-1)), 0.0)))
    return errors


def max_nodal_deviation(solution: FieldSolution, exact: ExactSolution) -> Dict[str, float]:
    """Largest nodal deviation of each field from `exact`."""
    x = solution.dofmap.node_coords
    out = {}
    for name in ("u1", "u2", "p1", "p2"):
        reference = np.asarray(getattr(exact, name)(x), dtype=float)
        out[name] = float(np.max(np.abs(solution.nodal(name) - reference.reshape(solution.nodal(name).shape))))
    return out


def stab_norm(delta: FieldSolution, material: MaterialData, geometry: Optional[ElementGeometry] = None) -> float:
    """Stability norm of a discrete field (typically a difference of two solutions).

    The weights are the block forms of `assemble_stab_norm_weights`, so for the
    unconstrained stabilized volume operator A, stab_norm(x)^2 = x^T A x.
    """
    dofmap = delta.dofmap
    weights = assemble_stab_norm_weights(dofmap.mesh, dofmap, material, geometry)
    return weights.norm(delta.coefficients)
