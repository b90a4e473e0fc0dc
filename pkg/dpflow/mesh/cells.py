"""Reference cell descriptions shared by meshes and finite element spaces."""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..errors import UnsupportedError


@dataclass(frozen=True)
class CellType:
    """Topology and reference geometry of one element kind.

    Reference cells are [-1, 1]^d for segments, quadrilaterals and hexahedra and
    the unit simplex for triangles. Facets list local vertex indices in an order
    that parametrizes the facet by its own reference cell.
    """

    name: str
    dim: int
    vertices: Tuple[Tuple[float, ...], ...]
    facets: Tuple[Tuple[int, ...], ...]
    edges: Tuple[Tuple[int, int], ...]
    facet_kind: Optional[str]
    measure: float
    tensor: bool

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def reference_vertices(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float).reshape(self.n_vertices, self.dim)

    def contains(self, xi: np.ndarray, tol: float = 1e-10) -> np.ndarray:
        """Mask of reference points lying inside the cell (with tolerance)."""
        xi = np.atleast_2d(xi)
        if self.tensor:
            return np.all(np.abs(xi) <= 1.0 + tol, axis=-1)
        return (xi[..., 0] >= -tol) & (xi[..., 1] >= -tol) & (xi.sum(axis=-1) <= 1.0 + tol)


SEGMENT = CellType(
    name="segment",
    dim=1,
    vertices=((-1.0,), (1.0,)),
    facets=((0,), (1,)),
    edges=((0, 1),),
    facet_kind="point",
    measure=2.0,
    tensor=True,
)

QUADRILATERAL = CellType(
    name="quadrilateral",
    dim=2,
    vertices=((-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)),
    facets=((0, 1), (1, 2), (2, 3), (3, 0)),
    edges=((0, 1), (1, 2), (2, 3), (3, 0)),
    facet_kind="segment",
    measure=4.0,
    tensor=True,
)

TRIANGLE = CellType(
    name="triangle",
    dim=2,
    vertices=((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)),
    facets=((0, 1), (1, 2), (2, 0)),
    edges=((0, 1), (1, 2), (2, 0)),
    facet_kind="segment",
    measure=0.5,
    tensor=False,
)

HEXAHEDRON = CellType(
    name="hexahedron",
    dim=3,
    vertices=(
        (-1.0, -1.0, -1.0),
        (1.0, -1.0, -1.0),
        (1.0, 1.0, -1.0),
        (-1.0, 1.0, -1.0),
        (-1.0, -1.0, 1.0),
        (1.0, -1.0, 1.0),
        (1.0, 1.0, 1.0),
        (-1.0, 1.0, 1.0),
    ),
    facets=(
        (0, 3, 2, 1),
        (4, 5, 6, 7),
        (0, 1, 5, 4),
        (1, 2, 6, 5),
        (2, 3, 7, 6),
        (3, 0, 4, 7),
    ),
    edges=(
        (0, 1), (1, 2), (2, 3), (3, 0),
        (4, 5), (5, 6), (6, 7), (7, 4),
        (0, 4), (1, 5), (2, 6), (3, 7),
    ),
    facet_kind="quadrilateral",
    measure=8.0,
    tensor=True,
)

POINT = CellType(
    name="point",
    dim=0,
    vertices=((),),
    facets=(),
    edges=(),
    facet_kind=None,
    measure=1.0,
    tensor=True,
)

CELL_TYPES: Dict[str, CellType] = {
    cell.name: cell for cell in (POINT, SEGMENT, QUADRILATERAL, TRIANGLE, HEXAHEDRON)
}


def get_cell(kind: str) -> CellType:
    """Look up a cell type by name."""
    if kind not in CELL_TYPES:
        raise UnsupportedError(f"Unknown element kind: {kind}")
    return CELL_TYPES[kind]


def facet_cell(kind: str) -> CellType:
    """Cell type of the facets of `kind`."""
    facet_kind = get_cell(kind).facet_kind
    if facet_kind is None:
        raise UnsupportedError(f"{kind} has no facets")
    return get_cell(facet_kind)
