"""Degree-of-freedom numbering for the equal-order four-field space."""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..mesh.base import Mesh
from ..mesh.cells import get_cell
from ..models.types import Coefficient, evaluate_field
from .basis import ReferenceBasis, facet_layout_nodes, geometry_basis, lagrange_basis

logger = logging.getLogger(__name__)

FIELDS = ("u1", "u2", "p1", "p2")


@dataclass(frozen=True, eq=False)
class DofMap:
    """Scalar node numbering shared by all fields plus the block layout.

    Global vector layout: the d components of u1, the d components of u2, p1
    and p2, each a contiguous block of `n_scalar` entries.
    """

    mesh: Mesh
    order: int
    basis: ReferenceBasis
    cell_nodes: np.ndarray   # (n_el, n_basis) scalar node ids
    node_coords: np.ndarray  # (n_scalar, d)

    @property
    def dim(self) -> int:
        return self.mesh.dim

    @property
    def n_scalar(self) -> int:
        return int(self.node_coords.shape[0])

    @property
    def n_blocks(self) -> int:
        return 2 * self.dim + 2

    @property
    def n_dofs(self) -> int:
        return self.n_blocks * self.n_scalar

    @property
    def offsets(self) -> Dict[str, int]:
        d, n = self.dim, self.n_scalar
        return {"u1": 0, "u2": d * n, "p1": 2 * d * n, "p2": (2 * d + 1) * n}

    def block(self, field: str, component: int = 0) -> int:
        """Block index of a scalar field or velocity component."""
        if field in ("p1", "p2"):
            return 2 * self.dim + (0 if field == "p1" else 1)
        return (0 if field == "u1" else self.dim) + component

    def field_dofs(self, field: str, component: Optional[int] = None) -> np.ndarray:
        """Global dofs of a field (all components) or of one velocity component."""
        n = self.n_scalar
        if field in ("p1", "p2") or component is not None:
            start = self.block(field, component or 0) * n
            return np.arange(start, start + n)
        start = self.offsets[field]
        return np.arange(start, start + self.dim * n)

    def element_dofs(self) -> np.ndarray:
        """(n_el, n_blocks * n_basis) global dofs, block-major within an element."""
        return np.concatenate(
            [self.cell_nodes + b * self.n_scalar for b in range(self.n_blocks)], axis=1
        )

    def facet_scalar_nodes(self, facet: int) -> np.ndarray:
        """Scalar nodes lying on boundary facet `facet`."""
        owner = int(self.mesh.facet_owner[facet])
        local = facet_layout_nodes(self.basis, int(self.mesh.facet_local[facet]))
        return self.cell_nodes[owner, local]

    def vertex_scalar_nodes(self) -> np.ndarray:
        """Scalar node id of every mesh vertex, (n_nodes,)."""
        reference = get_cell(self.mesh.kind).reference_vertices()
        gaps = np.linalg.norm(self.basis.nodes[None, :, :] - reference[:, None, :], axis=-1)
        local = np.argmin(gaps, axis=1)
        out = np.full(self.mesh.n_nodes, -1, dtype=np.int64)
        out[self.mesh.elements] = self.cell_nodes[:, local]
        return out

    def nodes_with_tag(self, tag: str) -> np.ndarray:
        facets = self.mesh.facets_with_tag(tag)
        if facets.size == 0:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate([self.facet_scalar_nodes(f) for f in facets]))


def build_dofmap(mesh: Mesh, order: int) -> DofMap:
    """Number the scalar layout nodes of an order-`order` space on `mesh`.

    Layout nodes of neighbouring elements are merged by physical position,
    which gives a C0 space; nodes are numbered lexicographically by coordinate.
    """
    basis = lagrange_basis(mesh.kind, order)
    shape, _ = geometry_basis(mesh.kind).tabulate(basis.nodes)
    coords = np.einsum("bv,evd->ebd", shape, mesh.nodes[mesh.elements])
    flat = coords.reshape(-1, mesh.dim)

    lower, upper = mesh.bounding_box()
    scale = float(np.max(upper - lower)) or 1.0
    keys = np.round((flat - lower) / scale, 9) + 0.0
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    dofmap = DofMap(
        mesh=mesh,
        order=int(order),
        basis=basis,
        cell_nodes=inverse.reshape(mesh.n_elements, basis.n_basis),
        node_coords=flat[first],
    )
    logger.debug(
        f"dofmap: order {order}, {dofmap.n_scalar} scalar nodes, {dofmap.n_dofs} dofs"
    )
    return dofmap


def interpolate(
    dofmap: DofMap,
    u1: Optional[Coefficient] = None,
    u2: Optional[Coefficient] = None,
    p1: Optional[Coefficient] = None,
    p2: Optional[Coefficient] = None,
) -> np.ndarray:
    """Nodal interpolant of the given fields; omitted fields are zero."""
    x = dofmap.node_coords
    n, d = dofmap.n_scalar, dofmap.dim
    vector = np.zeros(dofmap.n_dofs)
    for name, value in (("u1", u1), ("u2", u2)):
        if value is not None:
            nodal = evaluate_field(value, x, (d,))
            vector[dofmap.field_dofs(name)] = nodal.T.reshape(-1)
    for name, value in (("p1", p1), ("p2", p2)):
        if value is not None:
            vector[dofmap.field_dofs(name)] = evaluate_field(value, x)
    return vector


def interpolate_scalar(dofmap: DofMap, value: Coefficient) -> np.ndarray:
    """Nodal interpolant of one scalar field on the scalar node set."""
    return evaluate_field(value, dofmap.node_coords).copy()
