"""Domain models and types."""

from .types import (
    BoundarySpec,
    Coefficients,
    MaterialData,
    NetworkBoundary,
    QuadratureField,
    TransientData,
    TransportBoundary,
    TransportData,
)

__all__ = [
    "BoundarySpec",
    "Coefficients",
    "MaterialData",
    "NetworkBoundary",
    "QuadratureField",
    "TransientData",
    "TransportBoundary",
    "TransportData",
]
