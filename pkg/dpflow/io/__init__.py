"""Output files: legacy VTK snapshots, CSV tables and text reports."""

from .reports import CSV_FLOAT_FORMAT, frame_to_csv, write_csv, write_text
from .vtk import VTK_CELL_TYPES, vtk_document, write_vtk

__all__ = [
    "CSV_FLOAT_FORMAT",
    "VTK_CELL_TYPES",
    "frame_to_csv",
    "vtk_document",
    "write_csv",
    "write_text",
    "write_vtk",
]
