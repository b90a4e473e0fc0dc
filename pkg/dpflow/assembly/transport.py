"""Backward-Euler SUPG discretization of conservative advection-diffusion."""

import logging
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from ..errors import InvalidArgumentError
from ..fespace.dofmap import DofMap
from ..fespace.geometry import ElementGeometry, FacetGeometry
from ..mesh.base import Mesh
from ..models.types import TransportData, evaluate_boundary, evaluate_field, evaluate_tensor
from .flow import scatter_matrix, scatter_vector
from .system import AssembledSystem

logger = logging.getLogger(__name__)

# Nodal velocity (n_scalar, d) on the flow space, or a callable of x.
Velocity = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def supg_parameter(speed: np.ndarray, h: np.ndarray, diffusivity: np.ndarray) -> np.ndarray:
    """tau = h / (2|u|) * min(1, Pe / 3) with Pe = |u| h / (2 |D|); zero where u = 0."""
    speed = np.asarray(speed, dtype=float)
    h = np.broadcast_to(h, speed.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        peclet = np.where(diffusivity > 0, speed * h / (2.0 * diffusivity), np.inf)
        tau = np.where(speed > 0, h / (2.0 * speed) * np.minimum(1.0, peclet / 3.0), 0.0)
    return tau


def _velocity_at(
    velocity: Velocity, dofmap: DofMap, geometry: ElementGeometry
) -> Tuple[np.ndarray, np.ndarray]:
    """Velocity (n_el, n_q, d) and its divergence (n_el, n_q) at quadrature points."""
    if callable(velocity):
        u = evaluate_field(velocity, geometry.points, (dofmap.dim,))
        return u, np.zeros(u.shape[:2])
    nodal = np.asarray(velocity, dtype=float).reshape(dofmap.n_scalar, dofmap.dim)
    local = nodal[dofmap.cell_nodes]  # (n_el, n_b, d)
    u = np.einsum("qb,ebd->eqd", geometry.values, local)
    div = np.einsum("eqbd,ebd->eq", geometry.grads, local)
    return u, div


def _velocity_on_facets(velocity: Velocity, dofmap: DofMap, fg: FacetGeometry) -> np.ndarray:
    if callable(velocity):
        return evaluate_field(velocity, fg.points, (dofmap.dim,))
    nodal = np.asarray(velocity, dtype=float).reshape(dofmap.n_scalar, dofmap.dim)
    return np.einsum("fqb,fbd->fqd", fg.values, nodal[dofmap.cell_nodes[fg.owners]])


def assemble_transport_step(
    mesh: Mesh,
    dofmap_scalar: DofMap,
    velocity_field: Velocity,
    transport: TransportData,
    dt: float,
    prev_c: np.ndarray,
    t: float = 0.0,
    geometry: Optional[ElementGeometry] = None,
) -> AssembledSystem:
    """Scalar system for c^{n+1} on the scalar nodes of `dofmap_scalar`.

    Galerkin weak form of (c - c^n)/dt + div(u c - D grad c) = f plus SUPG with
    the residual (c - c^n)/dt + u.grad c + c div u - f. Boundary tags follow
    `transport.boundary`: dirichlet rows, prescribed total flux, or outflow
    (zero diffusive flux).
    """
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    if dofmap_scalar.mesh is not mesh:
        raise InvalidArgumentError("dofmap was built on a different mesh")
    dm = dofmap_scalar
    n = dm.n_scalar
    prev_c = np.asarray(prev_c, dtype=float)
    if prev_c.shape != (n,):
        raise InvalidArgumentError(f"prev_c must have shape ({n},), got {prev_c.shape}")

    geo = geometry or ElementGeometry.build(mesh, dm.order)
    W, N, G = geo.dv, geo.values, geo.grads
    u, div_u = _velocity_at(velocity_field, dm, geo)
    D = evaluate_tensor(transport.D, geo.points)
    source = evaluate_field(transport.f, geo.points)
    c_old = np.einsum("qb,eb->eq", N, prev_c[dm.cell_nodes])

    speed = np.linalg.norm(u, axis=-1)
    d_norm = np.linalg.norm(D, ord=2, axis=(-2, -1))
    tau = supg_parameter(speed, mesh.element_diameters()[:, None], d_norm)

    mass = np.einsum("eq,qa,qb->eab", W / dt, N, N, optimize=True)
    advection = -np.einsum("eq,eqai,eqi,qb->eab", W, G, u, N, optimize=True)
    diffusion = np.einsum("eq,eqai,eqij,eqbj->eab", W, G, D, G, optimize=True)
    streamline = np.einsum("eqi,eqai->eqa", u, G)
    residual_op = N[None] / dt + streamline + div_u[..., None] * N[None]
    supg = np.einsum("eq,eqa,eqb->eab", W * tau, streamline, residual_op, optimize=True)
    Ke = mass + advection + diffusion + supg

    load = c_old / dt + source
    Fe = np.einsum("eq,qa,eq->ea", W, N, load) + np.einsum("eq,eqa,eq->ea", W * tau, streamline, load)

    matrix = scatter_matrix(dm.cell_nodes, Ke, n)
    rhs = scatter_vector(dm.cell_nodes, Fe, n)

    rows: List[np.ndarray] = []
    values: List[np.ndarray] = []
    for tag in mesh.boundary_tags():
        condition = transport.condition(tag)
        facets = mesh.facets_with_tag(tag)
        if condition.kind == "dirichlet":
            nodes = dm.nodes_with_tag(tag)
            rows.append(nodes)
            values.append(evaluate_boundary(condition.value, dm.node_coords[nodes], t))
            continue
        fg = FacetGeometry.build(mesh, dm.order, facets)
        owners_nodes = dm.cell_nodes[fg.owners]
        if condition.kind == "flux":
            q = evaluate_boundary(condition.value, fg.points, t)
            local = -np.einsum("fq,fqa->fa", fg.ds * q, fg.values)
            rhs += scatter_vector(owners_nodes, local, n)
        else:
            u_f = _velocity_on_facets(velocity_field, dm, fg)
            un = np.einsum("fqd,fqd->fq", u_f, fg.normals)
            local = np.einsum("fq,fqa,fqb->fab", fg.ds * un, fg.values, fg.values)
            matrix = (matrix + scatter_matrix(owners_nodes, local, n)).tocsr()

    dirichlet_rows = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    dirichlet_values = np.concatenate(values) if values else np.empty(0)
    return AssembledSystem(
        matrix=sp.csr_matrix(matrix),
        rhs=rhs,
        dofmap=dm,
        dirichlet_rows=dirichlet_rows,
        dirichlet_values=dirichlet_values,
    )
