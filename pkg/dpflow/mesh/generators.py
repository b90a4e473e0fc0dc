"""Structured mesh generators for the built-in cases."""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidArgumentError
from .base import Box, Mesh
from .cells import get_cell

logger = logging.getLogger(__name__)

# Neighbour offset and outer-boundary tag of each local facet
_QUAD_FACETS = (
    ((0, -1), "bottom"),
    ((1, 0), "right"),
    ((0, 1), "top"),
    ((-1, 0), "left"),
)
_HEX_FACETS = (
    ((0, 0, -1), "back"),
    ((0, 0, 1), "front"),
    ((0, -1, 0), "bottom"),
    ((1, 0, 0), "right"),
    ((0, 1, 0), "top"),
    ((-1, 0, 0), "left"),
)


def generate_interval(length: float, n_cells: int) -> Mesh:
    """Uniform partition of [0, length] tagged "left" and "right"."""
    if not length > 0:
        raise InvalidArgumentError(f"length must be positive, got {length}")
    if int(n_cells) < 1:
        raise InvalidArgumentError(f"n_cells must be at least 1, got {n_cells}")
    n_cells = int(n_cells)

    nodes = np.linspace(0.0, float(length), n_cells + 1).reshape(-1, 1)
    elements = np.column_stack([np.arange(n_cells), np.arange(1, n_cells + 1)])
    return Mesh(
        dim=1,
        kind="segment",
        nodes=nodes,
        elements=elements,
        facet_nodes=np.array([[0], [n_cells]]),
        facet_owner=np.array([0, n_cells - 1]),
        facet_tags=np.array(["left", "right"], dtype=object),
    )


def _apportion(n_cells: int, fractions: np.ndarray) -> np.ndarray:
    """Split `n_cells` over segments in proportion to `fractions`, at least one each.

    Even counts are halved first, so doubling `n_cells` doubles every share and
    the refined partition nests in the coarse one.
    """
    k = fractions.size
    if n_cells % 2 == 0 and n_cells // 2 >= k:
        return 2 * _apportion(n_cells // 2, fractions)
    shares = (n_cells - k) * fractions
    counts = np.floor(shares).astype(int)
    remainder = n_cells - k - int(counts.sum())
    counts[np.argsort(counts - shares, kind="stable")[:remainder]] += 1
    return counts + 1


def axis_coordinates(length: float, n_cells: int, lines: Sequence[float] = ()) -> np.ndarray:
    """Grid-line coordinates of one axis: uniform, or piecewise uniform through `lines`."""
    inner = np.unique(np.asarray(lines, dtype=float).reshape(-1))
    if np.any(inner <= 0) or np.any(inner >= length):
        raise InvalidArgumentError(f"grid lines must lie strictly inside (0, {length}), got {tuple(inner)}")
    if inner.size == 0:
        return np.linspace(0.0, length, n_cells + 1)
    breaks = np.concatenate([[0.0], inner, [length]])
    if n_cells < breaks.size - 1:
        raise InvalidArgumentError(f"{n_cells} cells cannot resolve {inner.size} grid lines")
    counts = _apportion(n_cells, np.diff(breaks) / length)
    pieces = [np.linspace(a, b, c + 1)[:-1] for a, b, c in zip(breaks[:-1], breaks[1:], counts)]
    return np.concatenate(pieces + [[length]])


def _snap_holes(
    holes: Sequence[Box], axes: Sequence[np.ndarray]
) -> Tuple[List[Tuple[np.ndarray, np.ndarray]], List[Box]]:
    """Snap hole corners to grid lines; return index ranges and snapped boxes."""
    dim = len(axes)
    lengths = np.array([axis[-1] for axis in axes])
    cells = np.array([axis.size - 1 for axis in axes])

    def nearest(point: np.ndarray) -> np.ndarray:
        return np.array([int(np.argmin(np.abs(axes[a] - point[a]))) for a in range(dim)])

    ranges: List[Tuple[np.ndarray, np.ndarray]] = []
    snapped: List[Box] = []
    for k, hole in enumerate(holes, start=1):
        lower = np.asarray(hole[0], dtype=float).reshape(-1)
        upper = np.asarray(hole[1], dtype=float).reshape(-1)
        if lower.size != dim or upper.size != dim:
            raise InvalidArgumentError(f"hole_{k} must have {dim} coordinates per corner")
        if np.any(lower < 0) or np.any(upper > lengths) or np.any(lower >= upper):
            raise InvalidArgumentError(f"hole_{k} lies outside the domain or is empty")

        lo, hi = nearest(lower), nearest(upper)
        if np.any(lo <= 0) or np.any(hi >= cells) or np.any(lo >= hi):
            raise InvalidArgumentError(
                f"hole_{k} does not lie strictly inside the domain after snapping to the grid"
            )
        box = (
            tuple(float(axes[a][lo[a]]) for a in range(dim)),
            tuple(float(axes[a][hi[a]]) for a in range(dim)),
        )
        if not (np.allclose(box[0], lower, atol=1e-12) and np.allclose(box[1], upper, atol=1e-12)):
            logger.warning(f"hole_{k} snapped from {tuple(lower)}-{tuple(upper)} to {box}")
        ranges.append((lo, hi))
        snapped.append(box)

    for a in range(len(ranges)):
        for b in range(a + 1, len(ranges)):
            (lo_a, hi_a), (lo_b, hi_b) = ranges[a], ranges[b]
            if np.all(lo_a <= hi_b) and np.all(lo_b <= hi_a):
                raise InvalidArgumentError(f"hole_{a + 1} and hole_{b + 1} overlap or touch")
    return ranges, snapped


def generate_box(
    lengths: Sequence[float],
    cells: Sequence[int],
    holes: Optional[Sequence[Box]] = None,
    grid_lines: Optional[Sequence[Sequence[float]]] = None,
) -> Mesh:
    """Structured quadrilateral (2D) or hexahedral (3D) mesh of [0, L1] x ... .

    Holes are axis-aligned boxes given as (lower corner, upper corner). They are
    snapped to grid lines, the enclosed cells are removed and the new boundary
    is tagged ``hole_1``, ``hole_2``, ... in the given order. `grid_lines` lists,
    per axis, coordinates that must be grid lines; such an axis is uniform
    between consecutive lines.
    """
    lengths_arr = np.asarray(lengths, dtype=float).reshape(-1)
    cells_arr = np.asarray(cells).reshape(-1).astype(int)
    dim = lengths_arr.size
    if cells_arr.size != dim:
        raise InvalidArgumentError("lengths and cells must have the same number of axes")
    if dim == 1:
        if holes or any(len(line) for line in grid_lines or ()):
            raise InvalidArgumentError("holes and grid lines are not supported in 1D")
        return generate_interval(float(lengths_arr[0]), int(cells_arr[0]))
    if dim not in (2, 3):
        raise InvalidArgumentError(f"unsupported dimension {dim}")
    if np.any(lengths_arr <= 0):
        raise InvalidArgumentError(f"lengths must be positive, got {tuple(lengths_arr)}")
    if np.any(cells_arr < 1):
        raise InvalidArgumentError(f"cell counts must be at least 1, got {tuple(cells_arr)}")

    lines = list(grid_lines) if grid_lines is not None else [()] * dim
    if len(lines) != dim:
        raise InvalidArgumentError(f"grid_lines needs one entry per axis, got {len(lines)}")
    axes = [axis_coordinates(float(lengths_arr[a]), int(cells_arr[a]), lines[a]) for a in range(dim)]
    ranges, snapped = _snap_holes(holes or (), axes)

    # lexicographic node and cell numbering, x fastest
    grid = np.meshgrid(*axes, indexing="ij")
    all_nodes = np.column_stack([g.ravel(order="F") for g in grid])
    node_shape = tuple(cells_arr + 1)
    cell_shape = tuple(cells_arr)

    cell_index = np.column_stack([ix.ravel(order="F") for ix in np.indices(cell_shape)])
    hole_of_cell = np.zeros(len(cell_index), dtype=int)
    for k, (lo, hi) in enumerate(ranges, start=1):
        inside = np.all((cell_index >= lo) & (cell_index < hi), axis=1)
        hole_of_cell[inside] = k

    if dim == 2:
        corner_offsets = [(0, 0), (1, 0), (1, 1), (0, 1)]
        facet_table, kind = _QUAD_FACETS, "quadrilateral"
    else:
        corner_offsets = [
            (0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
            (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1),
        ]
        facet_table, kind = _HEX_FACETS, "hexahedron"

    def node_id(index: np.ndarray) -> np.ndarray:
        return np.ravel_multi_index(tuple(index.T), node_shape, order="F")

    connectivity = np.column_stack(
        [node_id(cell_index + np.asarray(offset)) for offset in corner_offsets]
    )

    kept = np.flatnonzero(hole_of_cell == 0)
    used = np.unique(connectivity[kept])
    renumber = np.full(len(all_nodes), -1, dtype=np.int64)
    renumber[used] = np.arange(len(used))
    elements = renumber[connectivity[kept]]
    new_element = np.full(len(cell_index), -1, dtype=np.int64)
    new_element[kept] = np.arange(len(kept))

    cell = get_cell(kind)
    facet_nodes: List[np.ndarray] = []
    facet_owner: List[int] = []
    facet_tags: List[str] = []
    for old in kept:
        index = cell_index[old]
        for local, (offset, outer_tag) in enumerate(facet_table):
            neighbour = index + np.asarray(offset)
            if np.any(neighbour < 0) or np.any(neighbour >= cells_arr):
                tag = outer_tag
            else:
                hole = hole_of_cell[np.ravel_multi_index(tuple(neighbour), cell_shape, order="F")]
                if hole == 0:
                    continue
                tag = f"hole_{hole}"
            owner = int(new_element[old])
            facet_nodes.append(elements[owner, list(cell.facets[local])])
            facet_owner.append(owner)
            facet_tags.append(tag)

    mesh = Mesh(
        dim=dim,
        kind=kind,
        nodes=all_nodes[used],
        elements=elements,
        facet_nodes=np.array(facet_nodes),
        facet_owner=np.array(facet_owner),
        facet_tags=np.array(facet_tags, dtype=object),
        holes=tuple(snapped),
    )
    logger.debug(f"generated {mesh.describe()}")
    return mesh


def generate_annulus(r_inner: float, r_outer: float, n_radial: int, n_angular: int) -> Mesh:
    """Straight-edged quadrilateral mesh of an annulus, tagged "inner" and "outer".

    Node (a, r) sits at angle 2*pi*a/n_angular on ring r; the local first axis of
    every element points radially outward.
    """
    if not 0 < r_inner < r_outer:
        raise InvalidArgumentError(
            f"radii must satisfy 0 < r_inner < r_outer, got {r_inner}, {r_outer}"
        )
    if int(n_radial) < 1 or int(n_angular) < 3:
        raise InvalidArgumentError("need n_radial >= 1 and n_angular >= 3")
    n_radial, n_angular = int(n_radial), int(n_angular)

    radii = np.linspace(r_inner, r_outer, n_radial + 1)
    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    nodes = np.column_stack(
        [np.outer(radii, np.cos(theta)).ravel(), np.outer(radii, np.sin(theta)).ravel()]
    )

    def node_id(a: np.ndarray, r: np.ndarray) -> np.ndarray:
        return (a % n_angular) + n_angular * r

    a, r = np.meshgrid(np.arange(n_angular), np.arange(n_radial))
    a, r = a.ravel(), r.ravel()
    elements = np.column_stack(
        [node_id(a, r), node_id(a, r + 1), node_id(a + 1, r + 1), node_id(a + 1, r)]
    )

    inner = np.flatnonzero(r == 0)
    outer = np.flatnonzero(r == n_radial - 1)
    facet_nodes = np.vstack([elements[inner][:, [3, 0]], elements[outer][:, [1, 2]]])
    facet_owner = np.concatenate([inner, outer])
    facet_tags = np.array(["inner"] * len(inner) + ["outer"] * len(outer), dtype=object)
    return Mesh(
        dim=2,
        kind="quadrilateral",
        nodes=nodes,
        elements=elements,
        facet_nodes=facet_nodes,
        facet_owner=facet_owner,
        facet_tags=facet_tags,
    )
