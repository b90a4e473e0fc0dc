"""dpflow: stabilized mixed finite elements for double porosity/permeability flow."""

__version__ = "0.1.0"
__author__ = "dpflow developers"
__description__ = "Stabilized mixed finite element solvers for flow in double porosity/permeability media"

import os

from .config import settings

# BLAS pools must be sized before numpy is first imported.
for _variable in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_variable, str(settings.num_threads))

from .cases import Case, CaseResult, RunConfig, get_case, list_cases, register_case, resolve_config  # noqa: E402
from .drivers import FieldSolution, TimeSeries, solve_coupled, solve_steady, solve_transient  # noqa: E402
from .errors import (  # noqa: E402
    ConfigError,
    DPFlowError,
    InsufficientDataError,
    InvalidArgumentError,
    OracleFailure,
    SingularMatrixError,
    SolverFailure,
)
from .mesh import Mesh, generate_annulus, generate_box, generate_interval, read_mesh, write_mesh  # noqa: E402
from .models import BoundarySpec, MaterialData, NetworkBoundary, TransientData, TransportData  # noqa: E402
from .radial import compare_fem_to_oracle, solve_radial  # noqa: E402

__all__ = [
    "BoundarySpec",
    "Case",
    "CaseResult",
    "ConfigError",
    "DPFlowError",
    "FieldSolution",
    "InsufficientDataError",
    "InvalidArgumentError",
    "MaterialData",
    "Mesh",
    "NetworkBoundary",
    "OracleFailure",
    "RunConfig",
    "SingularMatrixError",
    "SolverFailure",
    "TimeSeries",
    "TransientData",
    "TransportData",
    "compare_fem_to_oracle",
    "generate_annulus",
    "generate_box",
    "generate_interval",
    "get_case",
    "list_cases",
    "read_mesh",
    "register_case",
    "resolve_config",
    "solve_coupled",
    "solve_radial",
    "solve_steady",
    "solve_transient",
    "settings",
    "write_mesh",
]
