"""Backward-Euler time stepping of the stabilized flow system."""

import logging
from typing import Dict, Iterable, Optional

import numpy as np

from ..assembly.flow import FlowAssembler, strong_velocity_rows, with_datum
from ..assembly.nitsche import nitsche_terms
from ..errors import DPFlowError, InvalidArgumentError, SolverFailure
from ..fespace.dofmap import build_dofmap, interpolate
from ..linsolve import ConstrainedOperator
from ..mesh.base import Mesh
from ..models.types import BoundarySpec, MaterialData, TransientData
from .solution import FieldSolution, TimeSeries

logger = logging.getLogger(__name__)


def solve_transient(
    mesh: Mesh,
    order: int,
    material: MaterialData,
    transient: TransientData,
    spec: BoundarySpec,
    weak_bc_tags: Iterable[str] = (),
    initial: Optional[FieldSolution] = None,
    log_every: int = 50,
) -> TimeSeries:
    """March from t = 0 to T with steps min(dt, T - t).

    The initial state is `initial` when given, otherwise the interpolated
    initial velocities of `transient` with zero pressures. The operator is
    assembled and factorized once per distinct step size; each step only
    rebuilds the right-hand side.
    """
    dofmap = initial.dofmap if initial is not None else build_dofmap(mesh, order)
    if dofmap.mesh is not mesh:
        raise InvalidArgumentError("initial state lives on a different mesh")
    weak = set(weak_bc_tags)
    assembler = FlowAssembler(dofmap, material, spec, "stabilized", weak, transient=transient)
    if initial is None:
        initial = FieldSolution(dofmap, interpolate(dofmap, u1=transient.u01, u2=transient.u02))

    series = TimeSeries()
    series.append(0.0, initial)
    operators: Dict[float, ConstrainedOperator] = {}
    nitsche_matrix = None
    if weak:
        nitsche_matrix, _ = nitsche_terms(dofmap, spec, weak)

    previous = initial
    times = transient.time_grid()
    logger.info(f"transient run: {times.size} steps to T={transient.T:g}, {dofmap.n_dofs} dofs")
    for step, (t, dt) in enumerate(zip(times, transient.step_sizes()), start=1):
        key = float(dt)
        try:
            rows, values = strong_velocity_rows(dofmap, spec, weak, float(t))
            if key not in operators:
                logger.debug(f"factorizing the step operator for dt={dt:g}")
                matrix = assembler.matrix(dt)
                if nitsche_matrix is not None:
                    matrix = (matrix + nitsche_matrix).tocsr()
                if assembler.constraint is not None:
                    matrix = with_datum(matrix, dofmap, assembler.constraint)
                operators[key] = ConstrainedOperator(matrix, rows)
            rhs = assembler.rhs(float(t), dt, (previous.block("u1"), previous.block("u2")))
            if weak:
                rhs = rhs + nitsche_terms(dofmap, spec, weak, t=float(t))[1]
            if assembler.constraint is not None:
                rhs = np.append(rhs, 0.0)
            x, report = operators[key].solve(rhs, rows, values)
        except DPFlowError as e:
            raise SolverFailure(step, float(t), e) from e
        except (ArithmeticError, np.linalg.LinAlgError) as e:
            raise SolverFailure(step, float(t), e) from e

        current = FieldSolution.from_vector(dofmap, x, float(t), report)
        series.append(float(t), current)
        if step % max(log_every, 1) == 0 or step == times.size:
            logger.info(f"step {step}/{times.size}: t={t:.6g}, residual {report.residual_norm:.2e}")
        previous = current
    return series


def settle_time(series: TimeSeries, network: int, tolerance: float = 0.01) -> float:
    """First time after which ||u_i(t) - u_i(T)|| / ||u_i(T)|| stays below `tolerance`."""
    if network not in (1, 2):
        raise InvalidArgumentError(f"network must be 1 or 2, got {network}")
    name = f"u{network}"
    final = series.final.flow.block(name)
    scale = np.linalg.norm(final)
    if scale == 0:
        raise InvalidArgumentError(f"{name} vanishes at the final time")
    deviations = np.array([np.linalg.norm(s.flow.block(name) - final) / scale for s in series])
    above = np.flatnonzero(deviations >= tolerance)
    index = 0 if above.size == 0 else int(above[-1]) + 1
    return float(series.times[min(index, len(series) - 1)])
