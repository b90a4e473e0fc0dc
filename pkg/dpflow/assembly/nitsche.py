"""Weak (Nitsche) enforcement of normal-velocity boundary data."""

import logging
from typing import Iterable, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..config import settings
from ..errors import InvalidArgumentError
from ..fespace.dofmap import DofMap
from ..fespace.geometry import FacetGeometry
from ..mesh.base import Mesh
from ..models.types import BoundarySpec, MaterialData, evaluate_boundary
from .flow import scatter_matrix, scatter_vector
from .system import AssembledSystem

logger = logging.getLogger(__name__)


def nitsche_terms(
    dofmap: DofMap,
    spec: BoundarySpec,
    tags: Iterable[str],
    eta: Optional[float] = None,
    h: Optional[float] = None,
    consistency: bool = True,
    penalty: bool = True,
    t: float = 0.0,
) -> Tuple[sp.csr_matrix, np.ndarray]:
    """Matrix and right-hand side of the Nitsche terms on the velocity tags in `tags`.

    Per network i on its weak velocity boundary:
    (w.n; p) + (q; u.n) + (eta/h)(w.n; u.n) on the matrix and
    (q; u_n) + (eta/h)(w.n; u_n) on the right-hand side.
    """
    mesh, d, n, size = dofmap.mesh, dofmap.dim, dofmap.n_scalar, dofmap.n_dofs
    eta = settings.nitsche_penalty if eta is None else float(eta)
    if eta < 0:
        raise InvalidArgumentError(f"penalty must be non-negative, got {eta}")
    h_global = mesh.h_max if h is None else float(h)
    tags = set(tags)

    matrix = sp.csr_matrix((size, size))
    rhs = np.zeros(size)
    for i, network in enumerate(spec.networks):
        for tag, value in network.velocity.items():
            if tag not in tags:
                continue
            facets = mesh.facets_with_tag(tag)
            if facets.size == 0:
                continue
            fg = FacetGeometry.build(mesh, dofmap.order, facets)
            nodes = dofmap.cell_nodes[fg.owners]  # (n_f, n_b)
            n_f, n_b = nodes.shape
            u_dofs = np.concatenate([nodes + (i * d + c) * n for c in range(d)], axis=1)
            p_dofs = nodes + (2 * d + i) * n
            dofs = np.concatenate([u_dofs, p_dofs], axis=1)
            n_u = d * n_b

            if h is None and settings.nitsche_per_facet_h:
                scale = eta / fg.h[:, None]
            else:
                scale = np.full((n_f, 1), eta / h_global)

            N, nrm, ds = fg.values, fg.normals, fg.ds
            u_n = evaluate_boundary(value, fg.points, t)
            local = np.zeros((n_f, n_u + n_b, n_u + n_b))
            vector = np.zeros((n_f, n_u + n_b))
            if consistency:
                wp = np.einsum("fq,fqa,fqc,fqb->fcab", ds, N, nrm, N).reshape(n_f, n_u, n_b)
                local[:, :n_u, n_u:] += wp
                local[:, n_u:, :n_u] += np.transpose(wp, (0, 2, 1))
                vector[:, n_u:] += np.einsum("fq,fqa->fa", ds * u_n, N)
            if penalty:
                ww = np.einsum("fq,fqa,fqc,fqk,fqb->fcakb", ds * scale, N, nrm, nrm, N)
                local[:, :n_u, :n_u] += ww.reshape(n_f, n_u, n_u)
                vector[:, :n_u] += np.einsum(
                    "fq,fqa,fqc->fca", ds * scale * u_n, N, nrm
                ).reshape(n_f, n_u)
            matrix = matrix + scatter_matrix(dofs, local, size)
            rhs += scatter_vector(dofs, vector, size)
            logger.debug(f"nitsche terms on '{tag}' for network {i + 1}: {n_f} facets")
    return matrix.tocsr(), rhs


def assemble_nitsche_boundary(
    system: AssembledSystem,
    mesh: Mesh,
    dofmap: DofMap,
    material: Optional[MaterialData],
    spec: BoundarySpec,
    eta: Optional[float] = None,
    h: Optional[float] = None,
    tags: Optional[Iterable[str]] = None,
    consistency: bool = True,
    penalty: bool = True,
    t: float = 0.0,
) -> AssembledSystem:
    """Add the Nitsche terms to `system`.

    `tags` defaults to every velocity tag of `spec`; the system must have been
    assembled with the same tags marked weak. `material` is accepted for call
    symmetry with the other assemblers; the terms do not depend on it.
    """
    if dofmap.mesh is not mesh:
        raise InvalidArgumentError("dofmap was built on a different mesh")
    if tags is None:
        tags = {tag for network in spec.networks for tag in network.velocity}
    matrix, rhs = nitsche_terms(dofmap, spec, tags, eta, h, consistency, penalty, t)
    return system.with_terms(matrix, rhs)
