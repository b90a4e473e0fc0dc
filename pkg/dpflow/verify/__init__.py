"""Error norms, mechanics-based a-posteriori measures and convergence fits."""

from .analytical import AnalyticalSolution1D, AnalyticalSolution2D, ExactSolution
from .convergence import PLATEAU_FLOOR, SlopeFit, convergence_slopes
from .mechanics import (
    DataSet,
    dissipation,
    is_monotone_decreasing,
    kinematic_admissibility_residual,
    minimum_dissipation_check,
    reciprocal_error,
    reciprocal_gap,
    reciprocal_sides,
)
from .norms import ERROR_COLUMNS, clamp_degree, error_norms, max_nodal_deviation, stab_norm
from .report import VerificationReport, reports_to_frame

__all__ = [
    "ERROR_COLUMNS",
    "PLATEAU_FLOOR",
    "AnalyticalSolution1D",
    "AnalyticalSolution2D",
    "DataSet",
    "ExactSolution",
    "SlopeFit",
    "VerificationReport",
    "clamp_degree",
    "convergence_slopes",
    "dissipation",
    "error_norms",
    "is_monotone_decreasing",
    "kinematic_admissibility_residual",
    "max_nodal_deviation",
    "minimum_dissipation_check",
    "reciprocal_error",
    "reciprocal_gap",
    "reciprocal_sides",
    "reports_to_frame",
    "stab_norm",
]
