"""Pipe bend: two velocity-driven data sets compared through dissipation and reciprocity."""

import logging
from typing import Callable, Dict

import numpy as np

from ..mesh.base import Mesh
from ..models.types import BoundarySpec, MaterialData, NetworkBoundary
from ..verify import (
    DataSet,
    dissipation,
    kinematic_admissibility_residual,
    reciprocal_gap,
    reciprocal_sides,
)
from .base import CaseResult, CaseSetup, box_mesh, material_from, param, register_case, solve_setup
from .runconfig import RawConfig, RunConfig

logger = logging.getLogger(__name__)

TAGS = ("bottom", "right", "top", "left")


def window(axis: int, low: float, high: float, profile: Callable[[np.ndarray], np.ndarray]):  # type: ignore[no-untyped-def]
    """Boundary data f(x, t) equal to `profile` on [low, high] along `axis` and 0 elsewhere."""

    def value(x: np.ndarray, t: float) -> np.ndarray:
        s = np.asarray(x, dtype=float)[..., axis]
        inside = (s >= low) & (s <= high)
        return np.where(inside, profile(s), 0.0)

    return value


class PipeBendCase:
    """Flow entering through the bottom window and leaving through the left one.

    Data set 1 (primed) has a body force and parabolic window profiles, data
    set 2 (starred) no body force and uniform profiles. Both prescribe the
    normal velocity of both networks on the whole boundary. The window ends are
    grid lines and the window data is projected onto the boundary trace, so
    every mesh carries the exact window flux.
    """

    name = "pipebend"
    description = "pipe bend: two velocity-driven data sets on the unit square"

    def defaults(self) -> RawConfig:
        return {
            "case": {"name": self.name},
            "mesh": {"lengths": [1.0, 1.0], "cells": [16, 16]},
            "discretization": {"order": 1, "formulation": "stabilized"},
            "material": {"mu": 1.0, "beta": 1.0, "k1": 1.0, "k2": 0.01, "gamma_b": [1.0, 1.0]},
            "problem": {
                "window_low": 0.6,
                "window_high": 0.8,
                "amplitude": 100.0,
                "uniform_flux": 1.0,
                "gamma_b_star": 0.0,
            },
        }

    def data_sets(self, config: RunConfig) -> Dict[str, DataSet]:
        low, high = param(config, "window_low"), param(config, "window_high")
        amplitude, flux = param(config, "amplitude"), param(config, "uniform_flux")

        def parabola(s: np.ndarray) -> np.ndarray:
            return amplitude * (s - low) * (high - s)

        def uniform(s: np.ndarray) -> np.ndarray:
            return np.full_like(s, flux)

        def negated(profile):  # type: ignore[no-untyped-def]
            return lambda s: -profile(s)

        def spec(profile) -> BoundarySpec:  # type: ignore[no-untyped-def]
            velocity = {tag: 0.0 for tag in TAGS}
            velocity["left"] = window(1, low, high, profile)
            velocity["bottom"] = window(0, low, high, negated(profile))
            return BoundarySpec(
                macro=NetworkBoundary(velocity=velocity),
                micro=NetworkBoundary(velocity={tag: 0.0 for tag in TAGS}),
                velocity_trace="project",
            )

        primed = material_from(config, 2)
        starred = MaterialData(
            mu=primed.mu, beta=primed.beta, gamma_b=param(config, "gamma_b_star"), K1=primed.K1, K2=primed.K2
        )
        return {"prime": DataSet(primed, spec(parabola)), "star": DataSet(starred, spec(uniform))}

    def mesh(self, config: RunConfig) -> Mesh:
        """Box whose grid lines pass through both window ends."""
        window_ends = (param(config, "window_low"), param(config, "window_high"))
        return box_mesh(config, [window_ends] * len(config.mesh.lengths))

    def build(self, config: RunConfig) -> CaseSetup:
        data = self.data_sets(config)["prime"]
        return CaseSetup(self.mesh(config), data.material, data.spec)

    def run(self, config: RunConfig) -> CaseResult:
        mesh = self.mesh(config)
        data = self.data_sets(config)
        solutions = {
            key: solve_setup(CaseSetup(mesh, d.material, d.spec), config) for key, d in data.items()
        }
        lhs, rhs = reciprocal_sides(solutions["prime"], data["prime"], solutions["star"], data["star"])
        error = reciprocal_gap(lhs, rhs)

        metrics: Dict[str, object] = {
            "h": mesh.h_max,
            "order": config.discretization.order,
            "dofs": solutions["prime"].dofmap.n_dofs,
            "reciprocal_lhs": lhs,
            "reciprocal_rhs": rhs,
            "reciprocal_error": error,
        }
        lines = [f"pipe bend, {mesh.n_elements} elements, order {config.discretization.order}"]
        for key, solution in solutions.items():
            phi = dissipation(solution, data[key].material)
            residual = kinematic_admissibility_residual(solution)
            metrics[f"dissipation_{key}"] = phi
            metrics[f"admissibility_{key}"] = residual
            lines.append(f"  data set {key}: dissipation {phi:.10e}, ||div(u1 + u2)|| {residual:.3e}")
        lines.append(f"  reciprocal relation: LHS {lhs:.10e}, RHS {rhs:.10e}, error {error:.3e}")
        logger.info(f"pipebend: reciprocal error {error:.3e} on {mesh.n_elements} elements")
        return CaseResult(
            self.name,
            metrics,
            lines,
            [(key, solution, None) for key, solution in solutions.items()],
        )


register_case(PipeBendCase())
