"""Plain-text mesh format.

    dpp-mesh v1 dim=<d>
    nodes <n>
    <x> [<y> [<z>]]          one line per node
    elements <n>
    <kind> i0 i1 ...         one line per element
    facets <n>
    <tag> <owner> i0 ...     one line per boundary facet

Tokens are whitespace separated and ``#`` starts a comment. Coordinates are
written with ``repr`` so a write/read cycle reproduces them bit for bit.
"""

import re
from typing import Iterator, List, Tuple

import numpy as np

from ..errors import DPFlowError, MeshParseError, UnsupportedError
from .base import Mesh
from .cells import get_cell

HEADER = re.compile(r"^dpp-mesh\s+v1\s+dim=(\d+)$")


def write_mesh(mesh: Mesh) -> str:
    """Serialize a mesh to the text format."""
    lines = [f"dpp-mesh v1 dim={mesh.dim}", f"nodes {mesh.n_nodes}"]
    lines.extend(" ".join(repr(float(x)) for x in node) for node in mesh.nodes)
    lines.append(f"elements {mesh.n_elements}")
    lines.extend(
        f"{mesh.kind} " + " ".join(str(int(i)) for i in element) for element in mesh.elements
    )
    lines.append(f"facets {mesh.n_facets}")
    for nodes, owner, tag in zip(mesh.facet_nodes, mesh.facet_owner, mesh.facet_tags):
        lines.append(f"{tag} {int(owner)} " + " ".join(str(int(i)) for i in nodes))
    return "\n".join(lines) + "\n"


def _content_lines(text: str) -> Iterator[Tuple[int, List[str]]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if tokens:
            yield number, tokens


def _section(lines: Iterator[Tuple[int, List[str]]], name: str, last: int) -> Tuple[int, int]:
    try:
        number, tokens = next(lines)
    except StopIteration:
        raise MeshParseError(f"missing '{name}' section", last + 1) from None
    if len(tokens) != 2 or tokens[0] != name:
        raise MeshParseError(f"expected '{name} <count>'", number)
    try:
        count = int(tokens[1])
    except ValueError:
        raise MeshParseError(f"invalid {name} count '{tokens[1]}'", number) from None
    if count < 0:
        raise MeshParseError(f"negative {name} count", number)
    return number, count


def _take(lines: Iterator[Tuple[int, List[str]]], name: str, last: int) -> Tuple[int, List[str]]:
    try:
        return next(lines)
    except StopIteration:
        raise MeshParseError(f"{name} section ends early", last + 1) from None


def _indices(tokens: List[str], number: int, limit: int, what: str) -> List[int]:
    try:
        values = [int(t) for t in tokens]
    except ValueError:
        raise MeshParseError(f"non-integer {what} index", number) from None
    for v in values:
        if not 0 <= v < limit:
            raise MeshParseError(f"{what} index {v} out of range", number)
    return values


def read_mesh(text: str) -> Mesh:
    """Parse the text format; raise MeshParseError with the offending line number."""
    lines = _content_lines(text)
    try:
        number, tokens = next(lines)
    except StopIteration:
        raise MeshParseError("empty document", 1) from None
    match = HEADER.match(" ".join(tokens))
    if not match:
        raise MeshParseError("expected header 'dpp-mesh v1 dim=<d>'", number)
    dim = int(match.group(1))
    if dim not in (1, 2, 3):
        raise MeshParseError(f"unsupported dimension {dim}", number)

    number, n_nodes = _section(lines, "nodes", number)
    if n_nodes == 0:
        raise MeshParseError("empty node section", number)
    nodes = np.empty((n_nodes, dim))
    for i in range(n_nodes):
        number, tokens = _take(lines, "nodes", number)
        if len(tokens) != dim:
            raise MeshParseError(f"expected {dim} coordinates", number)
        try:
            nodes[i] = [float(t) for t in tokens]
        except ValueError:
            raise MeshParseError("invalid coordinate", number) from None

    number, n_elements = _section(lines, "elements", number)
    if n_elements == 0:
        raise MeshParseError("empty element section", number)
    kind = None
    elements: List[List[int]] = []
    for _ in range(n_elements):
        number, tokens = _take(lines, "elements", number)
        try:
            cell = get_cell(tokens[0])
        except UnsupportedError:
            raise MeshParseError(f"unknown element kind '{tokens[0]}'", number) from None
        if cell.dim != dim:
            raise MeshParseError(f"{cell.name} elements need dim={cell.dim}", number)
        if kind is not None and cell.name != kind:
            raise MeshParseError("mixed element kinds are not supported", number)
        kind = cell.name
        if len(tokens) - 1 != cell.n_vertices:
            raise MeshParseError(f"{cell.name} needs {cell.n_vertices} node indices", number)
        element = _indices(tokens[1:], number, n_nodes, "node")
        if len(set(element)) != len(element):
            raise MeshParseError("element repeats a node", number)
        elements.append(element)

    number, n_facets = _section(lines, "facets", number)
    facet_nodes: List[List[int]] = []
    facet_owner: List[int] = []
    facet_tags: List[str] = []
    facet_lines: List[int] = []
    n_facet_vertices = len(get_cell(kind).facets[0]) if kind else 0
    for _ in range(n_facets):
        number, tokens = _take(lines, "facets", number)
        if len(tokens) != 2 + n_facet_vertices:
            raise MeshParseError(f"expected '<tag> <owner>' and {n_facet_vertices} node indices", number)
        try:
            owner = int(tokens[1])
        except ValueError:
            raise MeshParseError("invalid owner element", number) from None
        if not 0 <= owner < n_elements:
            raise MeshParseError(f"facet references missing element {owner}", number)
        facet_tags.append(tokens[0])
        facet_owner.append(owner)
        facet_nodes.append(_indices(tokens[2:], number, n_nodes, "node"))
        facet_lines.append(number)

    extra = next(lines, None)
    if extra is not None:
        raise MeshParseError("unexpected content after facets section", extra[0])

    try:
        return Mesh(
            dim=dim,
            kind=str(kind),
            nodes=nodes,
            elements=np.array(elements, dtype=np.int64),
            facet_nodes=np.array(facet_nodes, dtype=np.int64).reshape(-1, n_facet_vertices),
            facet_owner=np.array(facet_owner, dtype=np.int64),
            facet_tags=np.array(facet_tags, dtype=object),
        )
    except DPFlowError as e:
        match = re.match(r"facet (\d+)", str(e))
        line = facet_lines[int(match.group(1))] if match else None
        raise MeshParseError(str(e), line) from e
