"""Configuration management using Pydantic settings."""

from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(
        env_prefix="DPFLOW_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    # Discretization
    quadrature_boost: int = Field(
        default=2, description="Extra quadrature degree for error norms (2p+1+boost)"
    )
    nitsche_penalty: float = Field(default=10.0, description="Nitsche penalty eta")
    nitsche_per_facet_h: bool = Field(
        default=False, description="Use per-facet h in the Nitsche penalty"
    )

    # Linear solver
    solver_method: Literal["direct", "gmres"] = Field(
        default="direct", description="Linear solver used by the drivers"
    )
    singular_pivot_tol: float = Field(
        default=1e-13, description="Relative LU pivot size treated as singular"
    )
    residual_tol: float = Field(
        default=1e-9, description="Relative residual above which an AccuracyWarning is raised"
    )
    gmres_tol: float = Field(default=1e-12, description="GMRES relative tolerance")
    num_threads: int = Field(default=1, description="Threads for internal parallelism")

    # Output
    output_dir: str = Field(default="dpflow_output", description="Default output directory")
    vtk_timestamp: bool = Field(default=False, description="Write a timestamp in VTK headers")
    log_level: str = Field(default="INFO", description="Root log level for the CLI")

    # Cache settings
    cache_enabled: bool = Field(default=True, description="Memoise oracle solutions on disk")
    cache_dir: str = Field(default=".dpflow_cache", description="Cache directory")


# Global settings instance
settings = Settings()
