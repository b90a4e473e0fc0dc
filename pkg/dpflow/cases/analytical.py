"""Cases with closed-form solutions: constant-flow patch tests and convergence problems."""

import logging
from typing import Dict, Optional

from ..drivers.solution import FieldSolution
from ..errors import SingularMatrixError
from ..fespace.dofmap import interpolate
from ..models.types import BoundarySpec, NetworkBoundary
from ..verify import (
    AnalyticalSolution1D,
    AnalyticalSolution2D,
    ExactSolution,
    VerificationReport,
    error_norms,
    max_nodal_deviation,
    stab_norm,
)
from .base import CaseResult, CaseSetup, box_mesh, material_from, param, register_case, solve_setup
from .runconfig import RawConfig, RunConfig

logger = logging.getLogger(__name__)

# data set for pressure-driven constant flow in both networks
CONSTANT_FLOW = {"mu": 1.0, "beta": 1.0, "k1": 1.0, "k2": 0.01}
END_PRESSURES = {"p1_left": 10.0, "p1_right": 1.0, "p2_left": 10.0, "p2_right": 1.0}


def _pressure_driven(config: RunConfig) -> AnalyticalSolution1D:
    m = config.material
    return AnalyticalSolution1D(
        k1=m.k1[0],
        k2=m.k2[0],
        beta=m.beta,
        mu=m.mu,
        length=config.mesh.lengths[0],
        p1_left=param(config, "p1_left"),
        p1_right=param(config, "p1_right"),
        p2_left=param(config, "p2_left"),
        p2_right=param(config, "p2_right"),
    )


class AnalyticalCase:
    """Shared solve-and-measure loop for cases with an exact solution."""

    name = ""
    description = ""
    patch_tolerance: Optional[float] = None

    def defaults(self) -> RawConfig:
        raise NotImplementedError

    def exact(self, config: RunConfig) -> ExactSolution:
        raise NotImplementedError

    def spec(self, config: RunConfig, exact: ExactSolution) -> BoundarySpec:
        return exact.boundary_spec()  # type: ignore[attr-defined]

    def build(self, config: RunConfig) -> CaseSetup:
        mesh = box_mesh(config)
        exact = self.exact(config)
        return CaseSetup(mesh, material_from(config, mesh.dim), self.spec(config, exact))

    def run(self, config: RunConfig) -> CaseResult:
        setup = self.build(config)
        exact = self.exact(config)
        order = config.discretization.order
        formulation = config.discretization.formulation
        try:
            solution = solve_setup(setup, config)
        except SingularMatrixError as e:
            if self.patch_tolerance is None:
                raise
            logger.warning(f"{self.name}: {formulation} system is singular: {e}")
            return CaseResult(
                self.name,
                {"h": setup.mesh.h_max, "order": order, "formulation": formulation, "solved": False},
                [f"{self.name} ({formulation}, order {order})", f"PATCH TEST: FAIL (solve failed: {e})"],
                passed=False,
            )

        errors = error_norms(solution, exact)
        deviation = max_nodal_deviation(solution, exact)
        delta = solution - FieldSolution(
            solution.dofmap,
            interpolate(solution.dofmap, u1=exact.u1, u2=exact.u2, p1=exact.p1, p2=exact.p2),
        )
        report = VerificationReport.from_errors(
            errors,
            label=self.name,
            h=setup.mesh.h_max,
            order=order,
            n_dofs=solution.dofmap.n_dofs,
            stab_norm_error=stab_norm(delta, setup.material),
        )
        metrics: Dict[str, object] = {"formulation": formulation, "solved": True}
        metrics.update({k: v for k, v in report.row().items() if k != "label"})
        metrics.update({f"max_dev_{k}": v for k, v in deviation.items()})
        lines = report.to_text().splitlines()
        for name, value in deviation.items():
            lines.append(f"  max nodal deviation {name}: {value:.3e}")

        passed = None
        if self.patch_tolerance is not None:
            worst = max(deviation.values())
            passed = worst < self.patch_tolerance
            oscillation = max(deviation["p1"], deviation["p2"])
            metrics["pressure_oscillation"] = oscillation
            verdict = "PASS" if passed else "FAIL"
            lines.append(
                f"PATCH TEST: {verdict} (max nodal deviation {worst:.3e}, "
                f"tolerance {self.patch_tolerance:g}, pressure oscillation {oscillation:.3e})"
            )
        logger.info(f"{self.name}: L2 p1 error {errors['l2_p1']:.3e} on {solution.dofmap.n_dofs} dofs")
        return CaseResult(self.name, metrics, lines, [("final", solution, None)], passed=passed)


class Patch1DCase(AnalyticalCase):
    name = "patch1d"
    description = "one-dimensional constant flow patch test"
    patch_tolerance = 1e-10

    def defaults(self) -> RawConfig:
        return {
            "case": {"name": self.name},
            "mesh": {"lengths": [1.0], "cells": [10]},
            "discretization": {"order": 1, "formulation": "stabilized"},
            "material": {**CONSTANT_FLOW, "gamma_b": [0.0]},
            "problem": dict(END_PRESSURES),
        }

    def exact(self, config: RunConfig) -> ExactSolution:
        return _pressure_driven(config)


class Patch3DCase(AnalyticalCase):
    """Constant flow along x in a cube; the lateral faces are impermeable."""

    name = "patch3d"
    description = "three-dimensional constant flow patch test on hexahedra"
    patch_tolerance = 1e-9

    def defaults(self) -> RawConfig:
        return {
            "case": {"name": self.name},
            "mesh": {"lengths": [1.0, 1.0, 1.0], "cells": [4, 4, 4]},
            "discretization": {"order": 1, "formulation": "stabilized"},
            "material": {**CONSTANT_FLOW, "gamma_b": [0.0]},
            "problem": dict(END_PRESSURES),
        }

    def exact(self, config: RunConfig) -> ExactSolution:
        return _pressure_driven(config)

    def spec(self, config: RunConfig, exact: ExactSolution) -> BoundarySpec:
        walls = {tag: 0.0 for tag in ("bottom", "top", "back", "front")}
        return BoundarySpec(
            macro=NetworkBoundary(
                pressure={tag: (lambda x, t: exact.p1(x)) for tag in ("left", "right")},
                velocity=dict(walls),
            ),
            micro=NetworkBoundary(
                pressure={tag: (lambda x, t: exact.p2(x)) for tag in ("left", "right")},
                velocity=dict(walls),
            ),
        )


class Convergence1DCase(AnalyticalCase):
    """Pressure-driven flow with unequal network end pressures, so mass transfer is active."""

    name = "conv1d"
    description = "one-dimensional flow with active mass transfer"

    def defaults(self) -> RawConfig:
        return {
            "case": {"name": self.name},
            "mesh": {"lengths": [1.0], "cells": [10]},
            "discretization": {"order": 1, "formulation": "stabilized"},
            "material": {**CONSTANT_FLOW, "gamma_b": [0.0]},
            "problem": {"p1_left": 10.0, "p1_right": 1.0, "p2_left": 1.0, "p2_right": 10.0},
        }

    def exact(self, config: RunConfig) -> ExactSolution:
        return _pressure_driven(config)


class Convergence2DCase(AnalyticalCase):
    name = "conv2d"
    description = "two-dimensional analytical solution on the unit square"

    def defaults(self) -> RawConfig:
        return {
            "case": {"name": self.name},
            "mesh": {"lengths": [1.0, 1.0], "cells": [8, 8]},
            "discretization": {"order": 1, "formulation": "stabilized"},
            "material": {"mu": 1.0, "beta": 1.0, "k1": 1.0, "k2": 0.1, "gamma_b": [0.0]},
        }

    def exact(self, config: RunConfig) -> ExactSolution:
        m = config.material
        return AnalyticalSolution2D(k1=m.k1[0], k2=m.k2[0], beta=m.beta, mu=m.mu)


register_case(Patch1DCase())
register_case(Patch3DCase())
register_case(Convergence1DCase())
register_case(Convergence2DCase())
