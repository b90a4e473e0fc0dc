"""Built-in cases and their run configuration."""

from .base import (
    Case,
    CaseResult,
    CaseSetup,
    get_case,
    list_cases,
    register_case,
    resolve_config,
)
from .runconfig import RunConfig

# importing the case modules registers them
from . import analytical, fingering, oracle, pipebend, transient  # noqa: E402,F401  isort:skip

__all__ = [
    "Case",
    "CaseResult",
    "CaseSetup",
    "RunConfig",
    "get_case",
    "list_cases",
    "register_case",
    "resolve_config",
]
