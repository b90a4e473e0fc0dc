"""Weak-form assembly of the flow and transport systems."""

from .flow import (
    STABILIZATION,
    FlowAssembler,
    assemble_galerkin,
    assemble_stab_norm_weights,
    assemble_stabilized,
    assemble_transient_step,
    field_at_quadrature,
    project_trace,
    strong_velocity_rows,
)
from .nitsche import assemble_nitsche_boundary, nitsche_terms
from .system import AssembledSystem, DatumConstraint, StabNormWeights
from .transport import assemble_transport_step, supg_parameter

__all__ = [
    "STABILIZATION",
    "AssembledSystem",
    "DatumConstraint",
    "FlowAssembler",
    "StabNormWeights",
    "assemble_galerkin",
    "assemble_nitsche_boundary",
    "assemble_stab_norm_weights",
    "assemble_stabilized",
    "assemble_transient_step",
    "assemble_transport_step",
    "field_at_quadrature",
    "nitsche_terms",
    "project_trace",
    "strong_velocity_rows",
    "supg_parameter",
]
