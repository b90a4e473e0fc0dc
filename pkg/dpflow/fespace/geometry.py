"""Reference-to-physical mapping of elements and boundary facets."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..errors import DegenerateElementError, InvalidArgumentError
from ..mesh.base import Mesh
from ..mesh.cells import facet_cell, get_cell
from .basis import ReferenceBasis, geometry_basis, lagrange_basis
from .quadrature import QuadratureRule, facet_rule, gauss_rule

logger = logging.getLogger(__name__)


def _check_positive(det: np.ndarray, first_element: int = 0) -> None:
    bad = np.flatnonzero(np.any(det <= 0.0, axis=-1))
    if bad.size:
        e = int(bad[0]) + first_element
        raise DegenerateElementError(e, f"det J = {float(det[bad[0]].min()):.3e}")


def element_jacobians(
    mesh: Mesh, points: np.ndarray, check: bool = True
) -> Tuple[np.ndarray, np.ndarray]:
    """Jacobians (n_el, n_q, d, d) and determinants (n_el, n_q) at reference points."""
    _, dshape = geometry_basis(mesh.kind).tabulate(points)
    coords = mesh.nodes[mesh.elements]
    jac = np.einsum("evi,qvj->eqij", coords, dshape)
    det = np.linalg.det(jac)
    if check:
        _check_positive(det)
    return jac, det


def map_gradients(
    coords: np.ndarray,
    kind: str,
    points: np.ndarray,
    ref_grads: np.ndarray,
    weights: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """Push reference gradients forward through the geometry map.

    Args:
        coords: Vertex coordinates, (n_vertices, d) for one element or
            (n_el, n_vertices, d) for many.
        kind: Element kind.
        points: Reference points (n_q, dim).
        ref_grads: Reference gradients (n_q, n_basis, dim).
        weights: Quadrature weights (n_q,).

    Returns:
        Physical gradients (n_el, n_q, n_basis, d) and |det J| * weights (n_el, n_q),
        without the leading axis when a single element was given.
    """
    coords = np.asarray(coords, dtype=float)
    single = coords.ndim == 2
    if single:
        coords = coords[None]
    _, dshape = geometry_basis(kind).tabulate(points)
    jac = np.einsum("evi,qvj->eqij", coords, dshape)
    det = np.linalg.det(jac)
    _check_positive(det)
    inv = np.linalg.inv(jac)
    grads = np.einsum("qnj,eqji->eqni", ref_grads, inv)
    dv = det * np.asarray(weights)[None, :]
    if single:
        return grads[0], dv[0]
    return grads, dv


@dataclass(frozen=True)
class ElementGeometry:
    """Basis data mapped to every element at the quadrature points.

    values: (n_q, n_basis); grads: (n_el, n_q, n_basis, d); dv: (n_el, n_q);
    points: (n_el, n_q, d).
    """

    mesh: Mesh
    basis: ReferenceBasis
    rule: QuadratureRule
    values: np.ndarray
    grads: np.ndarray
    dv: np.ndarray
    points: np.ndarray

    @classmethod
    def build(cls, mesh: Mesh, order: int, degree: Optional[int] = None) -> "ElementGeometry":
        basis = lagrange_basis(mesh.kind, order)
        rule = gauss_rule(mesh.kind, degree if degree is not None else 2 * order + 1)
        values, ref_grads = basis.tabulate(rule.points)
        coords = mesh.nodes[mesh.elements]
        grads, dv = map_gradients(coords, mesh.kind, rule.points, ref_grads, rule.weights)
        shape, _ = geometry_basis(mesh.kind).tabulate(rule.points)
        points = np.einsum("qv,evd->eqd", shape, coords)
        return cls(mesh, basis, rule, values, grads, dv, points)

    @property
    def n_q(self) -> int:
        return self.rule.n_points


@dataclass(frozen=True)
class FacetGeometry:
    """Basis data on a set of boundary facets.

    values: (n_f, n_q, n_basis) owner-element basis values; points, normals:
    (n_f, n_q, d); ds: (n_f, n_q) surface weights; h: (n_f,) owner diameters.
    """

    facets: np.ndarray
    owners: np.ndarray
    values: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    ds: np.ndarray
    h: np.ndarray

    @property
    def n_facets(self) -> int:
        return int(self.facets.size)

    @classmethod
    def build(
        cls, mesh: Mesh, order: int, facets: Sequence[int], degree: Optional[int] = None
    ) -> "FacetGeometry":
        facets = np.asarray(facets, dtype=np.int64).reshape(-1)
        cell = get_cell(mesh.kind)
        fcell = facet_cell(mesh.kind)
        basis = lagrange_basis(mesh.kind, order)
        degree = degree if degree is not None else 2 * order + 1
        n_q = facet_rule(mesh.kind, 0, degree).weights.size
        n_f, d = facets.size, mesh.dim

        values = np.empty((n_f, n_q, basis.n_basis))
        points = np.empty((n_f, n_q, d))
        normals = np.empty((n_f, n_q, d))
        ds = np.empty((n_f, n_q))
        owners = mesh.facet_owner[facets]
        fshape, fdshape = geometry_basis(fcell.name).tabulate(facet_rule(mesh.kind, 0, degree).facet_points)
        diameters = mesh.element_diameters()

        for i, f in enumerate(facets):
            owner, local = int(owners[i]), int(mesh.facet_local[f])
            rule = facet_rule(mesh.kind, local, degree)
            values[i], _ = basis.tabulate(rule.points)
            vertices = mesh.nodes[mesh.elements[owner, list(cell.facets[local])]]
            points[i] = fshape @ vertices
            centroid = mesh.nodes[mesh.elements[owner]].mean(axis=0)
            if d == 1:
                normal = np.sign(points[i] - centroid)
                measure = np.ones(n_q)
            else:
                tangents = np.einsum("kd,qkt->qdt", vertices, fdshape)
                if d == 2:
                    t = tangents[:, :, 0]
                    normal = np.column_stack([t[:, 1], -t[:, 0]])
                else:
                    normal = np.cross(tangents[:, :, 0], tangents[:, :, 1])
                measure = np.linalg.norm(normal, axis=1)
                if np.any(measure <= 0):
                    raise InvalidArgumentError(f"facet {int(f)} has no geometric normal")
                normal = normal / measure[:, None]
            outward = np.einsum("qd,qd->q", normal, points[i] - centroid)
            normal = normal * np.where(outward < 0, -1.0, 1.0)[:, None]
            normals[i] = normal
            ds[i] = measure * rule.weights
        return cls(
            facets=facets,
            owners=owners,
            values=values,
            points=points,
            normals=normals,
            ds=ds,
            h=diameters[owners] if n_f else np.empty(0),
        )


def locate_points(
    mesh: Mesh, points: np.ndarray, tol: float = 1e-10
) -> Tuple[np.ndarray, np.ndarray]:
    """Owning element and reference coordinates of physical points.

    Points outside the mesh get element -1 and NaN reference coordinates.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float)).reshape(-1, mesh.dim)
    cell = get_cell(mesh.kind)
    gbasis = geometry_basis(mesh.kind)
    coords = mesh.nodes[mesh.elements]
    lower, upper = coords.min(axis=1), coords.max(axis=1)
    scale = float(np.max(upper - lower))
    start = cell.reference_vertices().mean(axis=0)

    owners = np.full(points.shape[0], -1, dtype=np.int64)
    xi_out = np.full((points.shape[0], mesh.dim), np.nan)
    for n, x in enumerate(points):
        slack = tol * scale + 1e-14
        candidates = np.flatnonzero(np.all((lower - slack <= x) & (x <= upper + slack), axis=1))
        if candidates.size == 0:
            continue
        xi = np.tile(start, (candidates.size, 1))
        for _ in range(30):
            shape, dshape = gbasis.tabulate(xi)  # (c, v), (c, v, dim)
            mapped = np.einsum("cv,cvd->cd", shape, coords[candidates])
            jac = np.einsum("cvi,cvj->cij", coords[candidates], dshape)
            try:
                step = np.linalg.solve(jac, (mapped - x)[..., None])[..., 0]
            except np.linalg.LinAlgError:
                break
            xi = xi - step
            if np.max(np.abs(step)) < 1e-14:
                break
        inside = np.flatnonzero(cell.contains(xi, tol=max(tol, 1e-10)))
        if inside.size:
            owners[n] = candidates[inside[0]]
            xi_out[n] = xi[inside[0]]
    return owners, xi_out
