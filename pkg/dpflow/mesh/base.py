"""Mesh data types."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import InvalidArgumentError
from .cells import CellType, get_cell

logger = logging.getLogger(__name__)

Box = Tuple[Tuple[float, ...], Tuple[float, ...]]


@dataclass(frozen=True)
class MeshStats:
    """Size summary of a mesh."""
    h_max: float
    h_min: float
    n_elements: int
    n_nodes: int


@dataclass(frozen=True, eq=False)
class Mesh:
    """An immutable single-kind mesh with tagged boundary facets.

    `facet_nodes[f]` lists the vertex indices of boundary facet `f`,
    `facet_owner[f]` its element and `facet_tags[f]` its boundary tag.
    """

    dim: int
    kind: str
    nodes: np.ndarray
    elements: np.ndarray
    facet_nodes: np.ndarray
    facet_owner: np.ndarray
    facet_tags: np.ndarray
    holes: Tuple[Box, ...] = ()
    facet_local: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        nodes = np.ascontiguousarray(self.nodes, dtype=float).reshape(-1, self.dim)
        elements = np.ascontiguousarray(self.elements, dtype=np.int64)
        cell = get_cell(self.kind)
        elements = elements.reshape(-1, cell.n_vertices)
        n_fv = len(cell.facets[0]) if cell.facets else 0
        facet_nodes = np.ascontiguousarray(self.facet_nodes, dtype=np.int64).reshape(-1, n_fv)
        facet_owner = np.ascontiguousarray(self.facet_owner, dtype=np.int64).reshape(-1)
        facet_tags = np.asarray(self.facet_tags, dtype=object).reshape(-1)
        for name, value in (
            ("nodes", nodes),
            ("elements", elements),
            ("facet_nodes", facet_nodes),
            ("facet_owner", facet_owner),
            ("facet_tags", facet_tags),
        ):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "facet_local", self._match_local_facets())

    @property
    def cell(self) -> CellType:
        return get_cell(self.kind)

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def n_elements(self) -> int:
        return int(self.elements.shape[0])

    @property
    def n_facets(self) -> int:
        return int(self.facet_owner.shape[0])

    def _match_local_facets(self) -> np.ndarray:
        """Local facet index of every boundary facet within its owner."""
        cell = self.cell
        local = np.full(self.n_facets, -1, dtype=np.int64)
        if self.n_facets and (
            self.facet_owner.min() < 0 or self.facet_owner.max() >= self.n_elements
        ):
            raise InvalidArgumentError("boundary facet refers to a missing element")
        for f in range(self.n_facets):
            owner_nodes = self.elements[self.facet_owner[f]]
            target = set(self.facet_nodes[f].tolist())
            for k, local_vertices in enumerate(cell.facets):
                if {int(owner_nodes[v]) for v in local_vertices} == target:
                    local[f] = k
                    break
            else:
                raise InvalidArgumentError(
                    f"facet {f} is not a facet of its owner element {self.facet_owner[f]}"
                )
        local.setflags(write=False)
        return local

    def boundary_tags(self) -> List[str]:
        """Sorted list of distinct boundary tags."""
        return sorted({str(t) for t in self.facet_tags})

    def facets_with_tag(self, tag: str) -> np.ndarray:
        """Indices of boundary facets carrying `tag`."""
        return np.flatnonzero(self.facet_tags == tag)

    def edge_lengths(self) -> np.ndarray:
        """Edge lengths per element, shape (n_elements, n_edges)."""
        edges = np.asarray(self.cell.edges, dtype=np.int64)
        a = self.nodes[self.elements[:, edges[:, 0]]]
        b = self.nodes[self.elements[:, edges[:, 1]]]
        return np.linalg.norm(b - a, axis=-1)

    def element_diameters(self) -> np.ndarray:
        """Maximum edge length of each element."""
        return self.edge_lengths().max(axis=1)

    def stats(self) -> MeshStats:
        lengths = self.edge_lengths()
        return MeshStats(
            h_max=float(lengths.max()),
            h_min=float(lengths.min()),
            n_elements=self.n_elements,
            n_nodes=self.n_nodes,
        )

    @property
    def h_max(self) -> float:
        return self.stats().h_max

    def element_measures(self) -> np.ndarray:
        """Measure (length/area/volume) of every element."""
        from ..fespace.geometry import element_jacobians
        from ..fespace.quadrature import gauss_rule

        rule = gauss_rule(self.kind, 3)
        _, det = element_jacobians(self, rule.points)
        return (det * rule.weights[None, :]).sum(axis=1)

    def topological_boundary(self) -> Dict[Tuple[int, ...], int]:
        """Facets (as sorted vertex tuples) that belong to exactly one element."""
        counts: Dict[Tuple[int, ...], int] = {}
        owners: Dict[Tuple[int, ...], int] = {}
        for e, element in enumerate(self.elements):
            for local_vertices in self.cell.facets:
                key = tuple(sorted(int(element[v]) for v in local_vertices))
                counts[key] = counts.get(key, 0) + 1
                owners[key] = e
        return {key: owners[key] for key, count in counts.items() if count == 1}

    def validate(self) -> None:
        """Check the structural mesh invariants; raise InvalidArgumentError on failure."""
        from ..fespace.geometry import element_jacobians
        from ..fespace.quadrature import gauss_rule

        if self.n_nodes == 0 or self.n_elements == 0:
            raise InvalidArgumentError("mesh has no nodes or no elements")
        if self.elements.min() < 0 or self.elements.max() >= self.n_nodes:
            raise InvalidArgumentError("element refers to a missing node")
        for e, element in enumerate(self.elements):
            if len(set(element.tolist())) != len(element):
                raise InvalidArgumentError(f"element {e} repeats a node")

        boundary = self.topological_boundary()
        seen: Dict[Tuple[int, ...], int] = {}
        for f in range(self.n_facets):
            key = tuple(sorted(self.facet_nodes[f].tolist()))
            if key in seen:
                raise InvalidArgumentError(f"facet {f} duplicates facet {seen[key]}")
            if key not in boundary:
                raise InvalidArgumentError(f"facet {f} is not on the boundary")
            if boundary[key] != self.facet_owner[f]:
                raise InvalidArgumentError(f"facet {f} has the wrong owner element")
            seen[key] = f
        if len(seen) != len(boundary):
            raise InvalidArgumentError(
                f"{len(boundary) - len(seen)} boundary facets carry no tag"
            )

        # element_jacobians raises DegenerateElementError on det J <= 0
        element_jacobians(self, gauss_rule(self.kind, 3).points, check=True)

    def same_as(self, other: Mesh) -> bool:
        """Exact equality of geometry, connectivity and tags."""
        return (
            self.dim == other.dim
            and self.kind == other.kind
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.elements, other.elements)
            and np.array_equal(self.facet_nodes, other.facet_nodes)
            and np.array_equal(self.facet_owner, other.facet_owner)
            and list(self.facet_tags) == list(other.facet_tags)
        )

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.nodes.min(axis=0), self.nodes.max(axis=0)

    def describe(self) -> str:
        s = self.stats()
        tags: Dict[str, int] = {}
        for t in self.facet_tags:
            tags[str(t)] = tags.get(str(t), 0) + 1
        return (
            f"{self.kind} mesh, dim={self.dim}, {s.n_elements} elements, "
            f"{s.n_nodes} nodes, h_max={s.h_max:.4g}, tags={tags}"
        )


def with_holes(mesh: Mesh, holes: Optional[Tuple[Box, ...]]) -> Mesh:
    """Copy of `mesh` recording snapped hole rectangles."""
    return Mesh(
        dim=mesh.dim,
        kind=mesh.kind,
        nodes=mesh.nodes,
        elements=mesh.elements,
        facet_nodes=mesh.facet_nodes,
        facet_owner=mesh.facet_owner,
        facet_tags=mesh.facet_tags,
        holes=tuple(holes or ()),
    )
