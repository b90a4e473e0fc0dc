"""Meshes, generators and the text mesh format."""

from .base import Mesh, MeshStats
from .cells import CellType, get_cell
from .generators import axis_coordinates, generate_annulus, generate_box, generate_interval
from .io import read_mesh, write_mesh

__all__ = [
    "CellType",
    "Mesh",
    "MeshStats",
    "axis_coordinates",
    "generate_annulus",
    "generate_box",
    "generate_interval",
    "get_cell",
    "read_mesh",
    "write_mesh",
]
