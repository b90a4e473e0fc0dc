"""Two-way coupled flow and concentration transport."""

import logging
from typing import Iterable

import numpy as np

from ..assembly.flow import FlowAssembler
from ..assembly.nitsche import nitsche_terms
from ..assembly.transport import assemble_transport_step
from ..errors import DPFlowError, InvalidArgumentError, SolverFailure
from ..fespace.dofmap import DofMap, build_dofmap, interpolate_scalar
from ..fespace.geometry import ElementGeometry
from ..linsolve import solve
from ..mesh.base import Mesh
from ..models.types import BoundarySpec, MaterialData, QuadratureField, TransportData
from ..problem import viscosity_of_concentration
from .solution import FieldSolution, TimeSeries, evaluate_nodal

logger = logging.getLogger(__name__)

CONCENTRATION_RANGE = (-0.1, 1.1)


def transport_velocity(flow: FieldSolution, mode: str = "sum") -> np.ndarray:
    """Nodal advecting velocity: u1 + u2, or u1 alone for mode "macro"."""
    if mode == "macro":
        return flow.nodal("u1")
    if mode == "sum":
        return flow.nodal("u1") + flow.nodal("u2")
    raise InvalidArgumentError(f"unknown velocity mode '{mode}'")


def solve_coupled(
    mesh: Mesh,
    order: int,
    material: MaterialData,
    transport: TransportData,
    dt: float,
    T: float,
    spec_flow: BoundarySpec,
    weak_bc_tags: Iterable[str] = (),
    keep_every: int = 1,
    log_every: int = 10,
) -> TimeSeries:
    """Alternate quasi-static flow solves with backward-Euler transport steps.

    Each step evaluates mu(c^n) at the quadrature points, solves the stabilized
    flow problem with it, then advances c with the flow's velocity. The
    viscosity in `material` is replaced by the concentration law of `transport`.
    """
    if not dt > 0 or not T >= dt * (1 - 1e-12):
        raise InvalidArgumentError(f"need dt > 0 and T >= dt, got dt={dt}, T={T}")
    dofmap = build_dofmap(mesh, order)
    geometry = ElementGeometry.build(mesh, order)
    weak = set(weak_bc_tags)
    concentration = interpolate_scalar(dofmap, transport.c0)

    n_steps = max(1, int(np.ceil(T / dt - 1e-9)))
    times = np.minimum(dt * np.arange(1, n_steps + 1), T)
    times[-1] = T
    series = TimeSeries(seed=transport.seed)
    low, high = CONCENTRATION_RANGE
    logger.info(
        f"coupled run: {n_steps} steps to T={T:g}, {dofmap.n_dofs} flow dofs, "
        f"velocity mode {transport.velocity_mode}, seed {transport.seed}"
    )

    flow = _flow_solve(dofmap, geometry, material, transport, spec_flow, weak, concentration, 0.0)
    series.append(0.0, flow, concentration.copy())
    t_prev = 0.0
    for step, t in enumerate(times, start=1):
        t = float(t)
        try:
            velocity = transport_velocity(flow, transport.velocity_mode)
            system = assemble_transport_step(
                mesh, dofmap, velocity, transport, t - t_prev, concentration, t, geometry
            )
            concentration, _ = solve(system)
            flow = _flow_solve(dofmap, geometry, material, transport, spec_flow, weak, concentration, t)
        except DPFlowError as e:
            raise SolverFailure(step, t, e) from e

        if concentration.min() < low or concentration.max() > high:
            series.out_of_range_steps += 1
            logger.warning(
                f"step {step}: concentration in [{concentration.min():.4f}, "
                f"{concentration.max():.4f}] leaves [{low}, {high}]"
            )
        if step % max(keep_every, 1) == 0 or step == n_steps:
            series.append(t, flow, concentration.copy())
        if step % max(log_every, 1) == 0 or step == n_steps:
            logger.info(f"step {step}/{n_steps}: t={t:g}, c in [{concentration.min():.3f}, {concentration.max():.3f}]")
        t_prev = t
    return series


def _flow_solve(
    dofmap: DofMap,
    geometry: ElementGeometry,
    material: MaterialData,
    transport: TransportData,
    spec: BoundarySpec,
    weak: set,
    concentration: np.ndarray,
    t: float,
) -> FieldSolution:
    c_q = np.einsum("qb,eb->eq", geometry.values, concentration[dofmap.cell_nodes])
    mu = viscosity_of_concentration(c_q, transport.mu0, transport.Rc)
    assembler = FlowAssembler(
        dofmap, material.with_viscosity(QuadratureField(mu)), spec, "stabilized", weak,
        geometry=geometry,
    )
    system = assembler.system(t)
    if weak:
        system = system.with_terms(*nitsche_terms(dofmap, spec, weak, t=t))
    x, report = solve(system)
    return FieldSolution.from_vector(dofmap, x, t, report)


def transverse_variance(dofmap: DofMap, concentration: np.ndarray, x: float, n_samples: int = 0) -> float:
    """Variance of c along the vertical line at abscissa `x`.

    Samples at `n_samples` equispaced interior heights (default: one per scalar
    node row).
    """
    nodes = dofmap.node_coords
    lower, upper = nodes[:, 1].min(), nodes[:, 1].max()
    if n_samples <= 0:
        n_samples = np.unique(np.round(nodes[:, 1], 9)).size
    y = lower + (upper - lower) * (np.arange(n_samples) + 0.5) / n_samples
    points = np.column_stack([np.full(n_samples, float(x)), y])
    values = evaluate_nodal(dofmap, concentration, points)
    values = values[np.isfinite(values)]
    if values.size == 0:
        raise InvalidArgumentError(f"line x={x} does not cross the mesh")
    return float(np.var(values))


def front_positions(dofmap: DofMap, concentration: np.ndarray, level: float = 0.5) -> np.ndarray:
    """Per node row, the first x (from the left) where c drops below `level`.

    Rows that never drop below `level` report their largest x; rows starting
    below it report their smallest x.
    """
    nodes = dofmap.node_coords
    rows = np.round(nodes[:, 1], 9)
    positions = []
    for y in np.unique(rows):
        members = np.flatnonzero(rows == y)
        members = members[np.argsort(nodes[members, 0])]
        xs, cs = nodes[members, 0], concentration[members]
        below = np.flatnonzero(cs < level)
        if below.size == 0:
            positions.append(xs[-1])
        elif below[0] == 0:
            positions.append(xs[0])
        else:
            k = int(below[0])
            frac = (cs[k - 1] - level) / (cs[k - 1] - cs[k])
            positions.append(xs[k - 1] + frac * (xs[k] - xs[k - 1]))
    return np.asarray(positions)


def total_mass(geometry: ElementGeometry, dofmap: DofMap, concentration: np.ndarray) -> float:
    """Integral of c over the mesh."""
    c_q = np.einsum("qb,eb->eq", geometry.values, np.asarray(concentration)[dofmap.cell_nodes])
    return float(np.sum(c_q * geometry.dv))
