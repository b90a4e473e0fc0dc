"""Miscible displacement in a Hele-Shaw-like cell: coupled flow and transport."""

import logging
from typing import Dict

from ..drivers import solve_coupled, total_mass, transverse_variance
from ..fespace.geometry import ElementGeometry
from ..models.types import BoundarySpec, MaterialData, NetworkBoundary, TransportBoundary, TransportData
from ..problem import perturbed_permeability, random_initial_concentration
from .base import CaseResult, CaseSetup, box_mesh, register_case, tensor, vector
from .runconfig import RawConfig, RunConfig

logger = logging.getLogger(__name__)

GROWTH_THRESHOLD = 10.0


class FingeringCase:
    """Less viscous fluid injected from the left into a more viscous one.

    The macro network receives the injection rate, the micro network is sealed
    at the inlet. Both networks exit at atmospheric pressure on the right. The
    macro permeability and the initial concentration carry seeded perturbations.
    """

    name = "fingering"
    description = "coupled flow and transport: viscous fingering"

    def defaults(self) -> RawConfig:
        return {
            "case": {"name": self.name, "seed": 0},
            "mesh": {"lengths": [1.0, 0.4], "cells": [128, 64]},
            "discretization": {"order": 1, "formulation": "stabilized"},
            "material": {"beta": 1.0, "k1": [1.0, 0.5], "k2": [0.05, 0.01], "gamma_b": [0.0, 0.0]},
            "transport": {
                "dt": 0.5,
                "T": 150.0,
                "mu0": 0.001,
                "Rc": 3.0,
                "D": 2e-6,
                "c0": 0.0,
                "c0_amplitude": 0.01,
                "c_inj": 1.0,
                "u_inj": 0.004,
                "p_atm": 1.0,
                "k_perturbation": 0.1,
            },
        }

    def material(self, config: RunConfig) -> MaterialData:
        m, t = config.material, config.transport
        K1 = tensor(m.k1, 2)
        if t.k_perturbation > 0:
            K1 = perturbed_permeability(K1, t.k_perturbation, config.case.seed, config.mesh.lengths)
        return MaterialData(mu=t.mu0, beta=m.beta, gamma_b=vector(m.gamma_b, 2), K1=K1, K2=tensor(m.k2, 2))

    def build(self, config: RunConfig) -> CaseSetup:
        t = config.transport
        spec = BoundarySpec(
            macro=NetworkBoundary(
                pressure={"right": t.p_atm}, velocity={"left": -t.u_inj, "bottom": 0.0, "top": 0.0}
            ),
            micro=NetworkBoundary(
                pressure={"right": t.p_atm}, velocity={"left": 0.0, "bottom": 0.0, "top": 0.0}
            ),
        )
        return CaseSetup(box_mesh(config), self.material(config), spec)

    def transport_data(self, config: RunConfig) -> TransportData:
        t = config.transport
        seed = config.case.seed
        return TransportData(
            mu0=t.mu0,
            Rc=t.Rc,
            D=t.D,
            c_bc=t.c_inj,
            c0=random_initial_concentration(t.c0, t.c0_amplitude, seed) if t.c0_amplitude > 0 else t.c0,
            boundary={
                "left": TransportBoundary("dirichlet", t.c_inj),
                "right": TransportBoundary("outflow"),
                "bottom": TransportBoundary("flux", 0.0),
                "top": TransportBoundary("flux", 0.0),
            },
            velocity_mode=t.velocity_mode,
            seed=seed,
            c0_amplitude=t.c0_amplitude,
        )

    def run(self, config: RunConfig) -> CaseResult:
        setup = self.build(config)
        t = config.transport
        series = solve_coupled(
            setup.mesh,
            config.discretization.order,
            setup.material,
            self.transport_data(config),
            t.dt,
            t.T,
            setup.spec,
            keep_every=t.keep_every,
        )
        series.seed = config.case.seed
        dofmap = series.final.flow.dofmap
        early, late = series.at(t.early_time), series.final
        var_early = transverse_variance(dofmap, early.concentration, t.sample_x)
        var_late = transverse_variance(dofmap, late.concentration, t.sample_x)
        growth = var_late / var_early if var_early > 0 else float("inf")
        geometry = ElementGeometry.build(setup.mesh, config.discretization.order)
        c = late.concentration

        metrics: Dict[str, object] = {
            "seed": config.case.seed,
            "h": setup.mesh.h_max,
            "order": config.discretization.order,
            "dofs": dofmap.n_dofs,
            "c_min": float(c.min()),
            "c_max": float(c.max()),
            "out_of_range_steps": series.out_of_range_steps,
            "variance_early": var_early,
            "variance_late": var_late,
            "variance_growth": growth,
            "mass": total_mass(geometry, dofmap, c),
        }
        fingers = growth >= GROWTH_THRESHOLD
        lines = [
            f"fingering, seed {config.case.seed}, {setup.mesh.n_elements} elements, "
            f"{len(series) - 1} stored snapshots to T = {t.T:g}",
            f"  concentration range [{c.min():.4f}, {c.max():.4f}], "
            f"{series.out_of_range_steps} steps outside [-0.1, 1.1]",
            f"  transverse variance at x = {t.sample_x}: t = {early.time:g}: {var_early:.3e}, "
            f"t = {late.time:g}: {var_late:.3e} (growth {growth:.3g})",
            f"FINGERING: {'PRESENT' if fingers else 'ABSENT'} (growth threshold {GROWTH_THRESHOLD:g})",
        ]
        every = config.output.vtk_every
        if every:
            fields = [(f"{k:05d}", s.flow, s.concentration) for k, s in enumerate(list(series)[::every])]
        else:
            fields = [("final", late.flow, c)]
        logger.info(f"fingering: variance growth {growth:.3g}, c in [{c.min():.3f}, {c.max():.3f}]")
        return CaseResult(self.name, metrics, lines, fields, tables={"history.csv": series.to_frame()})


register_case(FingeringCase())
