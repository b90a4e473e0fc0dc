"""Transient flow past two obstacles, driven by an oscillating inlet pressure."""

import logging
from typing import Dict, List, Optional

import numpy as np

from ..drivers import settle_time, solve_transient
from ..drivers.solution import TimeSeries
from ..models.types import BoundarySpec, NetworkBoundary, TransientData
from .base import CaseResult, CaseSetup, box_mesh, material_from, param, register_case
from .runconfig import RawConfig, RunConfig

logger = logging.getLogger(__name__)

WALLS = ("bottom", "top")
ORDER_CHECK_STEPS = 20


def inlet_pressure(amplitude: float, wavenumber: float, speed: float):  # type: ignore[no-untyped-def]
    """p(x, t) = amplitude * sin(wavenumber * (y + speed * t))."""

    def value(x: np.ndarray, t: float) -> np.ndarray:
        return amplitude * np.sin(wavenumber * (np.asarray(x, dtype=float)[..., 1] + speed * t))

    return value


class TransientFlowCase:
    """Channel with two square holes; both networks start at rest.

    The macro network sees the inlet pressure on the left, the micro network is
    sealed there. Both networks have the outlet pressure on the right and are
    sealed on the walls and holes.
    """

    name = "transient2d"
    description = "transient flow in a channel with two square holes"

    def defaults(self) -> RawConfig:
        return {
            "case": {"name": self.name},
            "mesh": {
                "lengths": [10.0, 1.0],
                "cells": [100, 10],
                "hole_centers": [3.0, 0.5, 7.0, 0.5],
                "hole_size": 0.4,
            },
            "discretization": {"order": 1, "formulation": "stabilized"},
            "material": {"mu": 1.0, "beta": 1.0, "k1": 10000.0, "k2": 1.0, "gamma_b": [0.0, 0.0]},
            "transient": {"dt": 5e-11, "T": 6e-8, "phi1": 0.3, "phi2": 0.2, "gamma": 1e-12},
            "problem": {"inlet_amplitude": 10.0, "inlet_wavenumber": 0.4, "inlet_speed": 2.0, "p_outlet": 10.0},
        }

    def build(self, config: RunConfig) -> CaseSetup:
        mesh = box_mesh(config)
        holes = [tag for tag in mesh.boundary_tags() if tag.startswith("hole_")]
        sealed = {tag: 0.0 for tag in (*WALLS, *holes)}
        inlet = inlet_pressure(
            param(config, "inlet_amplitude"), param(config, "inlet_wavenumber"), param(config, "inlet_speed")
        )
        outlet = param(config, "p_outlet")
        spec = BoundarySpec(
            macro=NetworkBoundary(pressure={"left": inlet, "right": outlet}, velocity=dict(sealed)),
            micro=NetworkBoundary(pressure={"right": outlet}, velocity={"left": 0.0, **sealed}),
        )
        return CaseSetup(mesh, material_from(config, 2), spec)

    def transient_data(
        self, config: RunConfig, dt: Optional[float] = None, T: Optional[float] = None
    ) -> TransientData:
        t = config.transient
        return TransientData.from_fractions(
            t.phi1, t.phi2, t.gamma, dt or t.dt, T or t.T, u01=0.0, u02=0.0
        )

    def march(
        self, config: RunConfig, setup: CaseSetup, dt: Optional[float] = None, T: Optional[float] = None
    ) -> TimeSeries:
        data = self.transient_data(config, dt, T)
        return solve_transient(setup.mesh, config.discretization.order, setup.material, data, setup.spec)

    def run(self, config: RunConfig) -> CaseResult:
        setup = self.build(config)
        series = self.march(config, setup)
        tolerance = config.transient.settle_tolerance
        t1, t2 = settle_time(series, 1, tolerance), settle_time(series, 2, tolerance)
        passed = t2 < t1
        final = series.final.flow
        metrics: Dict[str, object] = {
            "h": setup.mesh.h_max,
            "order": config.discretization.order,
            "dofs": final.dofmap.n_dofs,
            "steps": len(series) - 1,
            "settle_time_u1": t1,
            "settle_time_u2": t2,
        }
        lines = [
            f"transient flow, {setup.mesh.n_elements} elements, {len(series) - 1} steps of {config.transient.dt:g}",
            f"  settle time (tolerance {tolerance:g}): u1 {t1:.6e}, u2 {t2:.6e}",
            f"SETTLE ORDER: {'PASS' if passed else 'FAIL'} (micro network settles "
            f"{'before' if passed else 'no earlier than'} the macro network)",
        ]

        if config.transient.self_convergence:
            order = self.time_order(config, setup, series)
            metrics["time_order"] = order
            lines.append(f"  backward Euler order under step halving: {order:.3f}")

        every = config.output.vtk_every
        if every:
            fields = [(f"{k:05d}", s.flow, None) for k, s in enumerate(list(series)[::every])]
        else:
            fields = [("final", final, None)]
        logger.info(f"transient2d: settle times u1 {t1:.3e}, u2 {t2:.3e}")
        return CaseResult(self.name, metrics, lines, fields, tables={"history.csv": series.to_frame()}, passed=passed)

    def time_order(self, config: RunConfig, setup: CaseSetup, coarse: TimeSeries) -> float:
        """Observed order from the states at dt, dt/2 and dt/4, early in the run.

        The comparison time is 20 coarse steps, while the flow is still far from
        steady.
        """
        dt = config.transient.dt
        t_check = min(config.transient.T, ORDER_CHECK_STEPS * dt)
        states: List[np.ndarray] = [coarse.at(t_check).flow.coefficients]
        for factor in (2, 4):
            fine = self.march(config, setup, dt / factor, t_check)
            states.append(fine.final.flow.coefficients)
        ratio = np.linalg.norm(states[0] - states[1]) / np.linalg.norm(states[1] - states[2])
        return float(np.log2(ratio))


register_case(TransientFlowCase())
