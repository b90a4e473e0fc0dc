"""Per-run configuration: INI documents validated into a pydantic model."""

import configparser
import copy
import logging
from typing import Any, Dict, Iterable, List, Literal, Mapping, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..errors import ConfigError

logger = logging.getLogger(__name__)

RawConfig = Dict[str, Dict[str, Any]]


def _split(value: Any) -> Any:
    """Lists arrive from INI files as "1 2 3" or "1, 2, 3"."""
    if isinstance(value, str):
        return [token for token in value.replace(",", " ").split() if token]
    if isinstance(value, (int, float)):
        return [value]
    return value


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CaseSection(_Section):
    name: str
    seed: int = Field(default=0, ge=0, description="Seed for every random perturbation")


class MeshSection(_Section):
    cells: List[int] = Field(default_factory=lambda: [10])
    lengths: List[float] = Field(default_factory=lambda: [1.0])
    inner_radius: float = Field(default=0.3, gt=0, description="Annulus inner radius")
    outer_radius: float = Field(default=1.0, gt=0, description="Annulus outer radius")
    hole_centers: List[float] = Field(default_factory=list, description="Flattened hole centres")
    hole_size: float = Field(default=0.4, gt=0, description="Edge length of square holes")

    split_lists = field_validator("cells", "lengths", "hole_centers", mode="before")(_split)

    @field_validator("cells")
    @classmethod
    def _positive_cells(cls, value: List[int]) -> List[int]:
        if not value or any(n < 1 for n in value):
            raise ValueError("cell counts must be positive")
        return value

    @field_validator("lengths")
    @classmethod
    def _positive_lengths(cls, value: List[float]) -> List[float]:
        if not value or any(x <= 0 for x in value):
            raise ValueError("lengths must be positive")
        return value

    def holes(self) -> List[tuple]:
        """Square holes as (lower corner, upper corner) boxes."""
        dim = len(self.lengths)
        if len(self.hole_centers) % dim:
            raise ConfigError(f"hole_centers needs {dim} coordinates per hole")
        half = self.hole_size / 2
        centers = np.asarray(self.hole_centers, dtype=float).reshape(-1, dim)
        return [(tuple(c - half), tuple(c + half)) for c in centers]


class DiscretizationSection(_Section):
    order: int = Field(default=1, ge=1, le=14)
    formulation: Literal["stabilized", "galerkin"] = "stabilized"


class MaterialSection(_Section):
    mu: float = Field(default=1.0, gt=0)
    beta: float = Field(default=1.0, ge=0)
    k1: List[float] = Field(default_factory=lambda: [1.0], description="Scalar, diagonal or full K1")
    k2: List[float] = Field(default_factory=lambda: [1.0], description="Scalar, diagonal or full K2")
    gamma_b: List[float] = Field(default_factory=lambda: [0.0], description="Body force per unit volume")

    split_lists = field_validator("k1", "k2", "gamma_b", mode="before")(_split)


class NitscheSection(_Section):
    eta: float = Field(default=10.0, ge=0)
    h: Optional[float] = Field(default=None, gt=0, description="Penalty length; max edge when unset")
    tags: List[str] = Field(default_factory=list, description="Velocity tags imposed weakly")

    split_lists = field_validator("tags", mode="before")(_split)


class TransientSection(_Section):
    dt: float = Field(default=1.0, gt=0)
    T: float = Field(default=1.0, gt=0)
    phi1: float = Field(default=0.3, ge=0, le=1)
    phi2: float = Field(default=0.2, ge=0, le=1)
    gamma: float = Field(default=1.0, ge=0, description="Specific weight; rho_i = phi_i * gamma")
    settle_tolerance: float = Field(default=0.01, gt=0)
    self_convergence: bool = Field(default=False, description="Also run dt/2 and dt/4")


class TransportSection(_Section):
    dt: float = Field(default=0.5, gt=0)
    T: float = Field(default=150.0, gt=0)
    mu0: float = Field(default=0.001, gt=0)
    Rc: float = 3.0
    D: float = Field(default=2e-6, ge=0)
    c0: float = 0.0
    c0_amplitude: float = Field(default=0.01, ge=0)
    c_inj: float = 1.0
    u_inj: float = 0.004
    p_atm: float = 1.0
    k_perturbation: float = Field(default=0.1, ge=0, lt=1)
    velocity_mode: Literal["sum", "macro"] = "sum"
    sample_x: float = Field(default=0.5, description="Abscissa of the variance sampling line")
    early_time: float = Field(default=25.0, ge=0)
    keep_every: int = Field(default=10, ge=1)


class OutputSection(_Section):
    directory: Optional[str] = None
    vtk: bool = True
    vtk_every: int = Field(default=0, ge=0, description="Snapshot stride for VTK; 0 writes the last")


class RunConfig(_Section):
    """Everything one case run needs besides the process-wide settings."""

    case: CaseSection
    mesh: MeshSection = Field(default_factory=MeshSection)
    discretization: DiscretizationSection = Field(default_factory=DiscretizationSection)
    material: MaterialSection = Field(default_factory=MaterialSection)
    nitsche: NitscheSection = Field(default_factory=NitscheSection)
    transient: TransientSection = Field(default_factory=TransientSection)
    transport: TransportSection = Field(default_factory=TransportSection)
    problem: Dict[str, float] = Field(default_factory=dict, description="Case-specific boundary data")
    output: OutputSection = Field(default_factory=OutputSection)

    def to_ini(self) -> str:
        """The resolved configuration as an INI document."""
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str  # type: ignore[assignment,method-assign]
        for section, values in self.model_dump().items():
            parser.add_section(section)
            for key, value in values.items():
                if value is None:
                    continue
                if isinstance(value, list):
                    value = " ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
                elif isinstance(value, float):
                    value = repr(value)
                parser.set(section, key, str(value))
        lines: List[str] = []
        for section in parser.sections():
            lines.append(f"[{section}]")
            lines.extend(f"{key} = {value}" for key, value in parser.items(section))
            lines.append("")
        return "\n".join(lines)


def parse_ini(text: str) -> RawConfig:
    """Sections of an INI document as nested dicts of strings."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from e
    return {section: dict(parser.items(section)) for section in parser.sections()}


def parse_overrides(items: Iterable[str]) -> RawConfig:
    """`section.key=value` strings as a nested dict."""
    raw: RawConfig = {}
    for item in items:
        target, sep, value = item.partition("=")
        section, dot, key = target.strip().partition(".")
        if not sep or not dot or not section or not key:
            raise ConfigError(f"override '{item}' is not of the form section.key=value")
        raw.setdefault(section, {})[key] = value.strip()
    return raw


def merge(*layers: Mapping[str, Mapping[str, Any]]) -> RawConfig:
    """Later layers override earlier ones key by key."""
    merged: RawConfig = {}
    for layer in layers:
        for section, values in layer.items():
            merged.setdefault(section, {}).update(copy.deepcopy(dict(values)))
    return merged


def validate(raw: Mapping[str, Mapping[str, Any]]) -> RunConfig:
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"invalid config: {problems}") from e
