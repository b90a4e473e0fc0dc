"""Legacy ASCII VTK output of solutions."""

import logging
import os
from datetime import datetime, timezone
from typing import Dict, List, Optional

import numpy as np

from ..config import settings
from ..drivers.solution import FieldSolution

logger = logging.getLogger(__name__)

VTK_CELL_TYPES = {"segment": 3, "triangle": 5, "quadrilateral": 9, "hexahedron": 12}


def _pad3(values: np.ndarray) -> np.ndarray:
    out = np.zeros((values.shape[0], 3))
    out[:, : values.shape[1]] = values
    return out


def _rows(values: np.ndarray) -> List[str]:
    return [" ".join(repr(float(v)) for v in row) for row in np.atleast_2d(values)]


def vtk_document(
    solution: FieldSolution,
    concentration: Optional[np.ndarray] = None,
    title: str = "dpflow",
    timestamp: Optional[bool] = None,
) -> str:
    """Unstructured-grid document with point data at the mesh vertices.

    Velocities are written as VECTORS (padded to three components), pressures
    and the optional concentration as SCALARS.
    """
    mesh = solution.dofmap.mesh
    vertex_nodes = solution.dofmap.vertex_scalar_nodes()
    stamp = settings.vtk_timestamp if timestamp is None else timestamp
    header = title if solution.time is None else f"{title} t={solution.time!r}"
    if stamp:
        header += f" written {datetime.now(timezone.utc).isoformat(timespec='seconds')}"

    n_vertices = mesh.elements.shape[1]
    lines = ["# vtk DataFile Version 3.0", header.replace("\n", " ")[:255], "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {mesh.n_nodes} double")
    lines += _rows(_pad3(mesh.nodes))
    lines.append(f"CELLS {mesh.n_elements} {mesh.n_elements * (n_vertices + 1)}")
    lines += [f"{n_vertices} " + " ".join(str(int(v)) for v in cell) for cell in mesh.elements]
    lines.append(f"CELL_TYPES {mesh.n_elements}")
    lines += [str(VTK_CELL_TYPES[mesh.kind])] * mesh.n_elements

    lines.append(f"POINT_DATA {mesh.n_nodes}")
    vectors: Dict[str, np.ndarray] = {n: solution.nodal(n)[vertex_nodes] for n in ("u1", "u2")}
    scalars: Dict[str, np.ndarray] = {n: solution.nodal(n)[vertex_nodes] for n in ("p1", "p2")}
    if concentration is not None:
        scalars["c"] = np.asarray(concentration, dtype=float)[vertex_nodes]
    for name, values in vectors.items():
        lines.append(f"VECTORS {name} double")
        lines += _rows(_pad3(values))
    for name, values in scalars.items():
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines += [repr(float(v)) for v in values]
    return "\n".join(lines) + "\n"


def write_vtk(
    path: str,
    solution: FieldSolution,
    concentration: Optional[np.ndarray] = None,
    title: str = "dpflow",
) -> str:
    """Write one snapshot; returns the path written."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(vtk_document(solution, concentration, title))
    logger.debug(f"wrote {path}")
    return path
