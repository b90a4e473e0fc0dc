"""Galerkin, stabilized and transient assembly of the four-field flow system."""

import logging
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import InvalidArgumentError, UnsupportedError
from ..fespace.dofmap import DofMap
from ..fespace.geometry import ElementGeometry, FacetGeometry
from ..fespace.quadrature import MAX_DEGREE_1D, MAX_DEGREE_PER_AXIS
from ..mesh.base import Mesh
from ..models.types import (
    BoundarySpec,
    BoundaryValue,
    Coefficients,
    MaterialData,
    TransientData,
    evaluate_boundary,
)
from ..problem import needs_datum_constraint, validate_boundary_spec
from .system import AssembledSystem, DatumConstraint, StabNormWeights

logger = logging.getLogger(__name__)

# Weight of the adjoint-type stabilization terms.
STABILIZATION = 0.5

Operators = Tuple[np.ndarray, np.ndarray]  # (alpha, alpha^-1) at quadrature points


def _einsum(subscripts: str, *operands: np.ndarray) -> np.ndarray:
    return np.einsum(subscripts, *operands, optimize=True)


def scatter_matrix(dofs: np.ndarray, local: np.ndarray, size: int) -> sp.csr_matrix:
    """Sum element matrices (n_el, n_loc, n_loc) into a CSR matrix."""
    n_loc = dofs.shape[1]
    rows = np.broadcast_to(dofs[:, :, None], (dofs.shape[0], n_loc, n_loc))
    cols = np.broadcast_to(dofs[:, None, :], (dofs.shape[0], n_loc, n_loc))
    return sp.coo_matrix(
        (local.ravel(), (rows.ravel(), cols.ravel())), shape=(size, size)
    ).tocsr()


def scatter_vector(dofs: np.ndarray, local: np.ndarray, size: int) -> np.ndarray:
    return np.bincount(dofs.ravel(), weights=local.ravel(), minlength=size)


def field_at_quadrature(geometry: ElementGeometry, dofmap: DofMap, nodal: np.ndarray) -> np.ndarray:
    """Evaluate a velocity block (d * n_scalar,) at the quadrature points: (n_el, n_q, d)."""
    components = np.asarray(nodal, dtype=float).reshape(dofmap.dim, dofmap.n_scalar)
    local = components[:, dofmap.cell_nodes]  # (d, n_el, n_b)
    return _einsum("qb,ceb->eqc", geometry.values, local)


def steady_operators(coefficients: Coefficients) -> List[Operators]:
    """alpha = mu K^-1 and its inverse K / mu for both networks."""
    mu = coefficients.mu[..., None, None]
    return [
        (mu * np.linalg.inv(coefficients.permeability(i)), coefficients.permeability(i) / mu)
        for i in (1, 2)
    ]


def transient_operators(
    coefficients: Coefficients, transient: TransientData, dt: float
) -> List[Operators]:
    """Modified drag alpha = (rho/dt) I + mu K^-1 and its inverse."""
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    d = coefficients.gamma_b.shape[-1]
    operators = []
    for i, (alpha, _) in enumerate(steady_operators(coefficients), start=1):
        alpha = alpha + (transient.density(i) / dt) * np.eye(d)
        operators.append((alpha, np.linalg.inv(alpha)))
    return operators


def element_matrices(
    geometry: ElementGeometry,
    operators: List[Operators],
    transfer: np.ndarray,
    stabilization: float,
) -> np.ndarray:
    """Element matrices (n_el, n_loc, n_loc) in block-major local order."""
    W, N, G = geometry.dv, geometry.values, geometry.grads
    n_el, _, n_b, d = G.shape
    n_loc = (2 * d + 2) * n_b
    s = stabilization
    Ke = np.zeros((n_el, n_loc, n_loc))
    for i, (A, B) in enumerate(operators):
        u0, u1 = i * d * n_b, (i + 1) * d * n_b
        p0, p1 = (2 * d + i) * n_b, (2 * d + i + 1) * n_b
        drag = A - s * (A @ B @ A) if s else A
        Ke[:, u0:u1, u0:u1] += _einsum("eq,qa,qb,eqij->eiajb", W, N, N, drag).reshape(
            n_el, d * n_b, d * n_b
        )
        up = -_einsum("eq,eqai,qb->eiab", W, G, N)
        pu = _einsum("eq,qa,eqbi->eaib", W, N, G)
        if s:
            up -= s * _einsum("eq,qa,eqij,eqbj->eiab", W, N, A @ B, G)
            pu += s * _einsum("eq,eqaj,eqji,qb->eaib", W, G, B @ A, N)
            Ke[:, p0:p1, p0:p1] += s * _einsum("eq,eqai,eqij,eqbj->eab", W, G, B, G)
        Ke[:, u0:u1, p0:p1] += up.reshape(n_el, d * n_b, n_b)
        Ke[:, p0:p1, u0:u1] += pu.reshape(n_el, n_b, d * n_b)

    mass = _einsum("eq,qa,qb->eab", W * transfer, N, N)
    q1, q2, q3 = 2 * d * n_b, (2 * d + 1) * n_b, (2 * d + 2) * n_b
    Ke[:, q1:q2, q1:q2] += mass
    Ke[:, q1:q2, q2:q3] -= mass
    Ke[:, q2:q3, q1:q2] -= mass
    Ke[:, q2:q3, q2:q3] += mass
    return Ke


def element_rhs(
    geometry: ElementGeometry,
    operators: List[Operators],
    forces: List[np.ndarray],
    stabilization: float,
) -> np.ndarray:
    """Element body-force vectors (n_el, n_loc); `forces[i]` is (n_el, n_q, d)."""
    W, N, G = geometry.dv, geometry.values, geometry.grads
    n_el, _, n_b, d = G.shape
    Fe = np.zeros((n_el, (2 * d + 2) * n_b))
    s = stabilization
    for i, ((A, B), force) in enumerate(zip(operators, forces)):
        u0, u1 = i * d * n_b, (i + 1) * d * n_b
        p0, p1 = (2 * d + i) * n_b, (2 * d + i + 1) * n_b
        g = force - s * _einsum("eqij,eqjk,eqk->eqi", A, B, force) if s else force
        Fe[:, u0:u1] += _einsum("eq,qa,eqi->eia", W, N, g).reshape(n_el, d * n_b)
        if s:
            Fe[:, p0:p1] += s * _einsum("eq,eqaj,eqjk,eqk->ea", W, G, B, force)
    return Fe


def pressure_boundary_rhs(dofmap: DofMap, spec: BoundarySpec, t: float = 0.0) -> np.ndarray:
    """Natural pressure data: -<w_i . n, p0_i> on the pressure tags."""
    mesh, d, n = dofmap.mesh, dofmap.dim, dofmap.n_scalar
    rhs = np.zeros(dofmap.n_dofs)
    for i, network in enumerate(spec.networks):
        for tag, value in network.pressure.items():
            facets = mesh.facets_with_tag(tag)
            if facets.size == 0:
                continue
            fg = FacetGeometry.build(mesh, dofmap.order, facets)
            p0 = evaluate_boundary(value, fg.points, t)
            local = -_einsum("fq,fqa,fqc->fca", fg.ds * p0, fg.values, fg.normals)
            nodes = dofmap.cell_nodes[fg.owners]  # (n_f, n_b)
            for c in range(d):
                rows = (i * d + c) * n + nodes
                rhs += scatter_vector(rows, local[:, c], dofmap.n_dofs)
    return rhs


def _trace_degree(mesh: Mesh, order: int) -> int:
    limit = MAX_DEGREE_1D if mesh.dim <= 2 else MAX_DEGREE_PER_AXIS
    return min(2 * order + 3, limit)


def project_trace(
    dofmap: DofMap, facets: np.ndarray, value: BoundaryValue, t: float = 0.0
) -> Tuple[np.ndarray, np.ndarray]:
    """L2 projection of scalar boundary data onto the trace space of `facets`.

    Returns the scalar nodes on the facets and their values. Constants lie in
    the trace space, so the projection keeps the integral of the data.
    """
    mesh = dofmap.mesh
    fg = FacetGeometry.build(mesh, dofmap.order, facets, _trace_degree(mesh, dofmap.order))
    data = evaluate_boundary(value, fg.points, t)
    cell_nodes = dofmap.cell_nodes[fg.owners]
    mass = scatter_matrix(cell_nodes, _einsum("fq,fqa,fqb->fab", fg.ds, fg.values, fg.values), dofmap.n_scalar)
    load = scatter_vector(cell_nodes, _einsum("fq,fqa->fa", fg.ds * data, fg.values), dofmap.n_scalar)
    nodes = np.unique(np.concatenate([dofmap.facet_scalar_nodes(int(f)) for f in facets]))
    restricted = sp.csc_matrix(mass[nodes][:, nodes])
    return nodes, np.atleast_1d(spla.spsolve(restricted, load[nodes]))


def strong_velocity_rows(
    dofmap: DofMap,
    spec: BoundarySpec,
    weak_tags: Iterable[str] = (),
    t: float = 0.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """Rows and values fixing the normal velocity component on axis-aligned facets.

    Facets of one tag are grouped by normal axis and orientation; each group
    gets its data by nodal sampling or trace projection (`spec.velocity_trace`).
    """
    mesh, d, n = dofmap.mesh, dofmap.dim, dofmap.n_scalar
    weak = set(weak_tags)
    rows: List[np.ndarray] = []
    values: List[np.ndarray] = []
    for i, network in enumerate(spec.networks):
        for tag, value in network.velocity.items():
            if tag in weak:
                continue
            facets = mesh.facets_with_tag(tag)
            if facets.size == 0:
                continue
            fg = FacetGeometry.build(mesh, 1, facets, degree=1)
            groups: Dict[Tuple[int, float], List[int]] = {}
            for f, normal in zip(facets, fg.normals[:, 0, :]):
                axis = int(np.argmax(np.abs(normal)))
                if abs(abs(normal[axis]) - 1.0) > 1e-10:
                    raise UnsupportedError(
                        f"facet {int(f)} on '{tag}' is not axis-aligned; "
                        "impose its velocity weakly (Nitsche)"
                    )
                groups.setdefault((axis, float(np.sign(normal[axis]))), []).append(int(f))
            for (axis, sign), members in groups.items():
                group = np.asarray(members, dtype=np.int64)
                if spec.velocity_trace == "project":
                    nodes, u_n = project_trace(dofmap, group, value, t)
                else:
                    nodes = np.unique(np.concatenate([dofmap.facet_scalar_nodes(int(f)) for f in group]))
                    u_n = evaluate_boundary(value, dofmap.node_coords[nodes], t)
                rows.append((i * d + axis) * n + nodes)
                values.append(sign * np.broadcast_to(u_n, nodes.shape))
    if not rows:
        return np.empty(0, dtype=np.int64), np.empty(0)
    return np.concatenate(rows), np.concatenate(values)


def datum_constraint(geometry: ElementGeometry, dofmap: DofMap) -> DatumConstraint:
    """Mean-zero constraint on p1 through one extra multiplier unknown."""
    integrals = geometry.dv @ geometry.values  # (n_el, n_b)
    weights = np.bincount(
        dofmap.cell_nodes.ravel(), weights=integrals.ravel(), minlength=dofmap.n_scalar
    )
    return DatumConstraint(field="p1", index=dofmap.n_dofs, weights=weights)


def with_datum(matrix: sp.spmatrix, dofmap: DofMap, constraint: DatumConstraint) -> sp.csr_matrix:
    """Append the multiplier row and column to the matrix."""
    n = dofmap.n_dofs
    dofs = dofmap.field_dofs(constraint.field)
    border = sp.coo_matrix(
        (constraint.weights, (dofs, np.full(dofs.size, n))), shape=(n + 1, n + 1)
    )
    square = sp.coo_matrix(matrix)
    square = sp.coo_matrix((square.data, (square.row, square.col)), shape=(n + 1, n + 1))
    return (square + border + border.T).tocsr()


class FlowAssembler:
    """Assembles the flow system on one mesh/order, sharing quadrature data.

    `formulation` is "galerkin" or "stabilized"; with `transient` data the drag
    becomes (rho/dt) I + mu K^-1 and the matrix is cached per time step size.
    Tags in `weak_tags` are left to `assemble_nitsche_boundary`.
    """

    def __init__(
        self,
        dofmap: DofMap,
        material: MaterialData,
        spec: BoundarySpec,
        formulation: str = "stabilized",
        weak_tags: Iterable[str] = (),
        transient: Optional[TransientData] = None,
        geometry: Optional[ElementGeometry] = None,
    ):
        if formulation not in ("galerkin", "stabilized"):
            raise InvalidArgumentError(f"unknown formulation '{formulation}'")
        mesh = dofmap.mesh
        validate_boundary_spec(spec, mesh.boundary_tags())
        weak_tags = set(weak_tags)
        velocity_tags = {tag for network in spec.networks for tag in network.velocity}
        if not weak_tags <= velocity_tags:
            raise InvalidArgumentError(
                f"weak tags {sorted(weak_tags - velocity_tags)} carry no velocity data"
            )
        self.dofmap = dofmap
        self.material = material
        self.spec = spec
        self.formulation = formulation
        self.stabilization = STABILIZATION if formulation == "stabilized" else 0.0
        self.weak_tags = weak_tags
        self.transient = transient
        self.geometry = geometry or ElementGeometry.build(mesh, dofmap.order)
        self.coefficients = material.sample(self.geometry.points)
        self.transfer = self.coefficients.beta / self.coefficients.mu
        self.constraint = (
            datum_constraint(self.geometry, dofmap)
            if needs_datum_constraint(spec, mesh)
            else None
        )
        self._matrices: Dict[Optional[float], sp.csr_matrix] = {}

    def operators(self, dt: Optional[float] = None) -> List[Operators]:
        if self.transient is None:
            return steady_operators(self.coefficients)
        return transient_operators(self.coefficients, self.transient, dt or self.transient.dt)

    def matrix(self, dt: Optional[float] = None) -> sp.csr_matrix:
        """Volume operator without boundary constraints (n_dofs x n_dofs)."""
        key = None if self.transient is None else float(dt or self.transient.dt)
        if key not in self._matrices:
            Ke = element_matrices(self.geometry, self.operators(dt), self.transfer, self.stabilization)
            self._matrices[key] = scatter_matrix(self.dofmap.element_dofs(), Ke, self.dofmap.n_dofs)
            logger.debug(f"assembled {self.formulation} matrix for dt={key}")
        return self._matrices[key]

    def forces(
        self,
        dt: Optional[float] = None,
        previous: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    ) -> List[np.ndarray]:
        """Per-network body force, including (rho_i/dt) u_i^n in transient runs."""
        forces = [self.coefficients.gamma_b, self.coefficients.gamma_b]
        if self.transient is None or previous is None:
            return forces
        step = dt or self.transient.dt
        return [
            force + (self.transient.density(i) / step)
            * field_at_quadrature(self.geometry, self.dofmap, prev)
            for i, (force, prev) in enumerate(zip(forces, previous), start=1)
        ]

    def rhs(
        self,
        t: float = 0.0,
        dt: Optional[float] = None,
        previous: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    ) -> np.ndarray:
        Fe = element_rhs(self.geometry, self.operators(dt), self.forces(dt, previous), self.stabilization)
        rhs = scatter_vector(self.dofmap.element_dofs(), Fe, self.dofmap.n_dofs)
        return rhs + pressure_boundary_rhs(self.dofmap, self.spec, t)

    def system(
        self,
        t: float = 0.0,
        dt: Optional[float] = None,
        previous: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    ) -> AssembledSystem:
        matrix, rhs = self.matrix(dt), self.rhs(t, dt, previous)
        if self.constraint is not None:
            matrix = with_datum(matrix, self.dofmap, self.constraint)
            rhs = np.append(rhs, 0.0)
        rows, values = strong_velocity_rows(self.dofmap, self.spec, self.weak_tags, t)
        return AssembledSystem(
            matrix=matrix,
            rhs=rhs,
            dofmap=self.dofmap,
            constraint=self.constraint,
            dirichlet_rows=rows,
            dirichlet_values=values,
        )


def _check_mesh(mesh: Mesh, dofmap: DofMap) -> None:
    if dofmap.mesh is not mesh:
        raise InvalidArgumentError("dofmap was built on a different mesh")


def assemble_galerkin(
    mesh: Mesh,
    dofmap: DofMap,
    material: MaterialData,
    spec: BoundarySpec,
    weak_bc_tags: Iterable[str] = (),
    t: float = 0.0,
) -> AssembledSystem:
    """Classical mixed (unstabilized) system."""
    _check_mesh(mesh, dofmap)
    return FlowAssembler(dofmap, material, spec, "galerkin", weak_bc_tags).system(t)


def assemble_stabilized(
    mesh: Mesh,
    dofmap: DofMap,
    material: MaterialData,
    spec: BoundarySpec,
    weak_bc_tags: Iterable[str] = (),
    t: float = 0.0,
) -> AssembledSystem:
    """Galerkin system plus the adjoint-type stabilization terms with weight 1/2."""
    _check_mesh(mesh, dofmap)
    return FlowAssembler(dofmap, material, spec, "stabilized", weak_bc_tags).system(t)


def assemble_transient_step(
    mesh: Mesh,
    dofmap: DofMap,
    material: MaterialData,
    transient: TransientData,
    spec: BoundarySpec,
    prev_u1: np.ndarray,
    prev_u2: np.ndarray,
    dt: Optional[float] = None,
    t: float = 0.0,
    weak_bc_tags: Iterable[str] = (),
) -> AssembledSystem:
    """One backward-Euler step of the stabilized system from (prev_u1, prev_u2)."""
    _check_mesh(mesh, dofmap)
    step = transient.dt if dt is None else dt
    if not step > 0:
        raise InvalidArgumentError(f"dt must be positive, got {step}")
    assembler = FlowAssembler(
        dofmap, material, spec, "stabilized", weak_bc_tags, transient=transient
    )
    return assembler.system(t, step, (prev_u1, prev_u2))


def assemble_stab_norm_weights(
    mesh: Mesh, dofmap: DofMap, material: MaterialData, geometry: Optional[ElementGeometry] = None
) -> StabNormWeights:
    """Block quadratic forms of the stability norm on the discrete space."""
    _check_mesh(mesh, dofmap)
    geometry = geometry or ElementGeometry.build(mesh, dofmap.order)
    coefficients = material.sample(geometry.points)
    W, N, G = geometry.dv, geometry.values, geometry.grads
    n_el, _, n_b, d = G.shape
    n = dofmap.n_scalar
    nodes = dofmap.cell_nodes
    vector_dofs = np.concatenate([nodes + c * n for c in range(d)], axis=1)

    blocks = {}
    for i, (A, B) in enumerate(steady_operators(coefficients), start=1):
        mass = 0.5 * _einsum("eq,qa,qb,eqij->eiajb", W, N, N, A).reshape(n_el, d * n_b, d * n_b)
        stiffness = 0.5 * _einsum("eq,eqai,eqij,eqbj->eab", W, G, B, G)
        blocks[f"velocity{i}"] = scatter_matrix(vector_dofs, mass, d * n)
        blocks[f"gradient{i}"] = scatter_matrix(nodes, stiffness, n)
    transfer = _einsum("eq,qa,qb->eab", W * coefficients.beta / coefficients.mu, N, N)
    blocks["transfer"] = scatter_matrix(nodes, transfer, n)
    return StabNormWeights(dofmap=dofmap, **blocks)
