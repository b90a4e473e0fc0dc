"""Case protocol, result container and registry."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Protocol, Sequence, Tuple

import numpy as np
import pandas as pd

from ..drivers.solution import FieldSolution
from ..drivers.steady import solve_steady
from ..errors import ConfigError
from ..mesh.base import Mesh
from ..mesh.generators import generate_box
from ..models.types import BoundarySpec, MaterialData
from .runconfig import RawConfig, RunConfig, merge, parse_ini, parse_overrides, validate

logger = logging.getLogger(__name__)


@dataclass
class CaseSetup:
    """Mesh and data of one steady flow problem."""
    mesh: Mesh
    material: MaterialData
    spec: BoundarySpec
    weak_tags: Tuple[str, ...] = ()


@dataclass
class CaseResult:
    """Outcome of one case run: a summary row, report lines and artefacts."""
    case: str
    metrics: Dict[str, Any]
    lines: List[str] = field(default_factory=list)
    fields: List[Tuple[str, FieldSolution, Optional[np.ndarray]]] = field(default_factory=list)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    passed: Optional[bool] = None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{"case": self.case, **self.metrics}])


class Case(Protocol):
    """Protocol for built-in problem definitions."""
    name: str
    description: str

    def defaults(self) -> RawConfig:
        """Default configuration values of the case."""
        ...

    def build(self, config: RunConfig) -> CaseSetup:
        """Mesh, material and boundary data for `config`."""
        ...

    def run(self, config: RunConfig) -> CaseResult:
        """Solve and measure."""
        ...


# Simple registry for runtime selection
_REGISTRY: Dict[str, Case] = {}


def register_case(case: Case) -> None:
    """Register a case in the global registry."""
    _REGISTRY[case.name] = case


def get_case(name: str) -> Case:
    """Get a registered case by name."""
    if name not in _REGISTRY:
        raise KeyError(f"Unknown case: {name}")
    return _REGISTRY[name]


def list_cases() -> List[str]:
    """List all registered case names."""
    return sorted(_REGISTRY.keys())


def tensor(values: List[float], dim: int) -> Any:
    """Scalar, diagonal (d values) or full (d*d values) permeability."""
    array = np.asarray(values, dtype=float)
    if array.size == 1:
        return float(array[0])
    if array.size == dim:
        return np.diag(array)
    if array.size == dim * dim:
        return array.reshape(dim, dim)
    raise ConfigError(f"permeability needs 1, {dim} or {dim * dim} values, got {array.size}")


def vector(values: List[float], dim: int) -> Any:
    array = np.asarray(values, dtype=float)
    if array.size == 1:
        return float(array[0])
    if array.size == dim:
        return array
    raise ConfigError(f"body force needs 1 or {dim} values, got {array.size}")


def material_from(config: RunConfig, dim: int) -> MaterialData:
    m = config.material
    return MaterialData(
        mu=m.mu,
        beta=m.beta,
        gamma_b=vector(m.gamma_b, dim),
        K1=tensor(m.k1, dim),
        K2=tensor(m.k2, dim),
    )


def box_mesh(config: RunConfig, grid_lines: Optional[Sequence[Sequence[float]]] = None) -> Mesh:
    """Structured box from `[mesh]`; one cell count applies to every axis."""
    lengths = config.mesh.lengths
    cells = config.mesh.cells
    if len(cells) == 1:
        cells = cells * len(lengths)
    if len(cells) != len(lengths):
        raise ConfigError(f"mesh.cells has {len(cells)} entries for {len(lengths)} lengths")
    holes = config.mesh.holes() if config.mesh.hole_centers else None
    return generate_box(lengths, cells, holes, grid_lines)


def solve_setup(setup: CaseSetup, config: RunConfig) -> FieldSolution:
    """Steady solve with the discretization and Nitsche choices of `config`."""
    return solve_steady(
        setup.mesh,
        config.discretization.order,
        setup.material,
        setup.spec,
        formulation=config.discretization.formulation,
        weak_bc_tags=setup.weak_tags,
        eta=config.nitsche.eta,
        h=config.nitsche.h,
    )


def param(config: RunConfig, key: str) -> float:
    """A case-specific value from the `[problem]` section."""
    if key not in config.problem:
        raise ConfigError(f"problem.{key} is required by case {config.case.name}")
    return float(config.problem[key])


def resolve_config(text: str, overrides: Iterable[str] = ()) -> RunConfig:
    """Case defaults, then the INI document, then `section.key=value` overrides.

    Raises KeyError for an unknown case and ConfigError for anything invalid.
    """
    document = parse_ini(text)
    extra = parse_overrides(overrides)
    name = extra.get("case", {}).get("name") or document.get("case", {}).get("name")
    if not name:
        raise ConfigError("config names no case; set [case] name = <case>")
    case = get_case(str(name).strip())
    config = validate(merge(case.defaults(), document, extra))
    logger.info(f"resolved config for case {case.name} (seed {config.case.seed})")
    return config
