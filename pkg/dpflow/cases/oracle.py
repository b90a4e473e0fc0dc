"""Radially symmetric cases checked against the one-dimensional reference solver."""

import logging
from typing import Dict, Tuple

import numpy as np

from ..drivers.solution import FieldSolution
from ..errors import ConfigError
from ..mesh.generators import generate_annulus
from ..models.types import BoundarySpec, NetworkBoundary
from ..radial import RadialProblem, angular_spread, compare_fem_to_oracle, solve_radial
from ..verify import dissipation, kinematic_admissibility_residual
from .base import CaseResult, CaseSetup, material_from, register_case, solve_setup
from .runconfig import RawConfig, RunConfig

logger = logging.getLogger(__name__)

FILTER_MATERIAL = {"mu": 1.0, "beta": 1.0, "k1": 1.0, "k2": 0.01, "gamma_b": [0.0]}
FILTER_PROBLEM = {"p_inner": 1.0, "p_outer": 0.0, "n_points": 400.0}


def radial_problem(config: RunConfig, geometry: str) -> RadialProblem:
    if config.mesh.outer_radius != 1.0:
        raise ConfigError("the radial reference solver needs mesh.outer_radius = 1")
    m = config.material
    if len(m.k1) != 1 or len(m.k2) != 1:
        raise ConfigError("radial cases need scalar permeabilities")
    return RadialProblem(
        geometry=geometry,  # type: ignore[arg-type]
        a=config.mesh.inner_radius,
        mu=m.mu,
        beta=m.beta,
        k1=m.k1[0],
        k2=m.k2[0],
        p_inner=config.problem.get("p_inner", 1.0),
        p_outer=config.problem.get("p_outer", 0.0),
    )


class CandleFilterCase:
    """Annular cross-section of a candle filter.

    The macro network is driven by the inner and outer pressures, the micro
    network is sealed on both walls with weakly imposed zero normal velocity.
    """

    name = "candle"
    description = "candle filter: pressure-driven annulus with a sealed micro network"

    def defaults(self) -> RawConfig:
        return {
            "case": {"name": self.name},
            "mesh": {"inner_radius": 0.3, "outer_radius": 1.0, "cells": [32, 64]},
            "discretization": {"order": 1, "formulation": "stabilized"},
            "material": dict(FILTER_MATERIAL),
            "nitsche": {"eta": 10.0, "tags": ["inner", "outer"]},
            "problem": {**FILTER_PROBLEM, "sample_rays": 8.0},
        }

    def build(self, config: RunConfig) -> CaseSetup:
        cells = config.mesh.cells
        if len(cells) != 2:
            raise ConfigError("candle needs mesh.cells = <radial> <angular>")
        mesh = generate_annulus(config.mesh.inner_radius, config.mesh.outer_radius, cells[0], cells[1])
        p_inner = config.problem.get("p_inner", 1.0)
        p_outer = config.problem.get("p_outer", 0.0)
        spec = BoundarySpec(
            macro=NetworkBoundary(pressure={"inner": p_inner, "outer": p_outer}),
            micro=NetworkBoundary(velocity={"inner": 0.0, "outer": 0.0}),
        )
        return CaseSetup(mesh, material_from(config, 2), spec, tuple(config.nitsche.tags))

    def run(self, config: RunConfig) -> CaseResult:
        problem = radial_problem(config, "polar")
        setup = self.build(config)
        solution = solve_setup(setup, config)
        oracle = solve_radial(problem, int(config.problem.get("n_points", 400)))
        comparison = compare_fem_to_oracle(
            solution, oracle, sample_rays=int(config.problem.get("sample_rays", 8))
        )

        mid = 0.5 * (problem.a + 1.0)
        spread = angular_spread(solution, mid, "p1") / max(abs(problem.p_inner - problem.p_outer), 1e-300)
        wall_flux, interior = micro_wall_flux(solution, setup)
        metrics: Dict[str, object] = {
            "h": setup.mesh.h_max,
            "order": config.discretization.order,
            "dofs": solution.dofmap.n_dofs,
            "samples": comparison.n_samples,
            "skipped": comparison.skipped,
            "angular_spread_p1": spread,
            "max_u2": interior,
            "wall_flux_u2": wall_flux,
            "dissipation": dissipation(solution, setup.material),
            "admissibility_residual": kinematic_admissibility_residual(solution),
        }
        for name in comparison.l2_rel:
            metrics[f"l2_rel_{name}"] = comparison.l2_rel[name]
            metrics[f"max_rel_{name}"] = comparison.max_rel[name]

        ratio = wall_flux / interior if interior > 0 else 0.0
        lines = [
            f"candle filter, a = {problem.a}, {setup.mesh.n_elements} elements, order {config.discretization.order}",
            f"  Nitsche eta = {config.nitsche.eta}, weak tags {sorted(setup.weak_tags)}",
        ]
        lines += [
            f"  {name}: relative L2 deviation {comparison.l2_rel[name]:.3e}, "
            f"max {comparison.max_rel[name]:.3e}"
            for name in comparison.l2_rel
        ]
        lines += [
            f"  angular spread of p1 at r = {mid:.3f}: {spread:.3e} of the pressure range",
            f"  micro network: max |u2| = {interior:.3e}, wall |u2.n| = {wall_flux:.3e} ({ratio:.2%})",
        ]
        logger.info(f"candle: p1 deviation {comparison.l2_rel['p1']:.3e}, wall flux ratio {ratio:.3e}")
        return CaseResult(
            self.name,
            metrics,
            lines,
            [("final", solution, None)],
            tables={"radial.csv": oracle.to_frame(), "comparison.csv": comparison.to_frame()},
        )


def micro_wall_flux(solution: FieldSolution, setup: CaseSetup) -> Tuple[float, float]:
    """Largest |u2.n| on the walls and largest |u2| anywhere, from nodal values."""
    dofmap = solution.dofmap
    u2 = solution.nodal("u2")
    interior = float(np.max(np.linalg.norm(u2, axis=1)))
    wall = 0.0
    for tag in ("inner", "outer"):
        nodes = dofmap.nodes_with_tag(tag)
        if nodes.size == 0:
            continue
        x = dofmap.node_coords[nodes]
        normal = x / np.linalg.norm(x, axis=1, keepdims=True)
        wall = max(wall, float(np.max(np.abs(np.einsum("nd,nd->n", u2[nodes], normal)))))
    return wall, interior


class HollowSphereCase:
    """Hollow sphere under internal pressure, solved by the radial reference solvers only."""

    name = "sphere_oracle"
    description = "hollow sphere: pressure-driven spherical shell with a sealed micro network"

    def defaults(self) -> RawConfig:
        return {
            "case": {"name": self.name},
            "mesh": {"inner_radius": 0.3, "outer_radius": 1.0},
            "material": dict(FILTER_MATERIAL),
            "problem": dict(FILTER_PROBLEM),
        }

    def build(self, config: RunConfig) -> CaseSetup:
        raise ConfigError("sphere_oracle is solved in radial form and has no finite element mesh")

    def run(self, config: RunConfig) -> CaseResult:
        problem = radial_problem(config, "spherical")
        n_points = int(config.problem.get("n_points", 400))
        collocation = solve_radial(problem, n_points, "collocation")
        finite_difference = solve_radial(problem, n_points, "finite_difference")

        gap = {
            name: float(np.max(np.abs(collocation.values(name) - finite_difference.values(name))))
            for name in ("u1", "u2", "p1", "p2")
        }
        interior = float(np.max(np.abs(collocation.u2)))
        ends = max(abs(float(collocation.u2[0])), abs(float(collocation.u2[-1])))
        metrics: Dict[str, object] = {
            "n_points": n_points,
            "conservation_residual": collocation.conservation_residual(),
            "max_u2": interior,
            "wall_u2": ends,
            "p2_inner": float(collocation.p2[0]),
            "p2_outer": float(collocation.p2[-1]),
        }
        metrics.update({f"method_gap_{name}": value for name, value in gap.items()})
        metrics.update({f"residual_{k}": v for k, v in collocation.residuals.items()})
        lines = [f"hollow sphere, a = {problem.a}, {n_points} radii"]
        lines += [f"  collocation vs finite differences, max |{k}| gap: {v:.3e}" for k, v in gap.items()]
        lines += [
            f"  conservation residual: {metrics['conservation_residual']:.3e}",
            f"  micro network: max |u2| = {interior:.3e}, wall |u2| = {ends:.3e}",
        ]
        return CaseResult(
            self.name,
            metrics,
            lines,
            tables={
                "radial_collocation.csv": collocation.to_frame(),
                "radial_finite_difference.csv": finite_difference.to_frame(),
            },
        )


register_case(CandleFilterCase())
register_case(HollowSphereCase())
