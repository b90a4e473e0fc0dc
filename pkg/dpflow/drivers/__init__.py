"""Steady, transient and coupled solve drivers."""

from .coupled import front_positions, solve_coupled, total_mass, transport_velocity, transverse_variance
from .solution import FieldSolution, Snapshot, TimeSeries, evaluate_nodal
from .steady import solve_steady
from .transient import settle_time, solve_transient

__all__ = [
    "FieldSolution",
    "Snapshot",
    "TimeSeries",
    "evaluate_nodal",
    "front_positions",
    "settle_time",
    "solve_coupled",
    "solve_steady",
    "solve_transient",
    "total_mass",
    "transport_velocity",
    "transverse_variance",
]
