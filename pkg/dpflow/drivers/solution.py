"""Discrete solutions and time series."""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional

import numpy as np
import pandas as pd

from ..errors import InvalidArgumentError
from ..fespace.dofmap import FIELDS, DofMap
from ..fespace.geometry import ElementGeometry, locate_points
from ..linsolve import SolveReport

logger = logging.getLogger(__name__)


def evaluate_nodal(dofmap: DofMap, nodal: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Evaluate a nodal field (n_scalar,) or (n_scalar, k) at physical points.

    Points outside the mesh evaluate to NaN.
    """
    nodal = np.asarray(nodal, dtype=float)
    points = np.atleast_2d(np.asarray(points, dtype=float)).reshape(-1, dofmap.dim)
    owners, xi = locate_points(dofmap.mesh, points)
    out = np.full((points.shape[0],) + nodal.shape[1:], np.nan)
    found = np.flatnonzero(owners >= 0)
    if found.size:
        values, _ = dofmap.basis.tabulate(xi[found])
        local = nodal[dofmap.cell_nodes[owners[found]]]  # (n_p, n_b, ...)
        out[found] = np.einsum("pb,pb...->p...", values, local)
    return out


@dataclass(frozen=True, eq=False)
class FieldSolution:
    """Coefficients of (u1, u2, p1, p2) on the equal-order space."""

    dofmap: DofMap
    coefficients: np.ndarray
    time: Optional[float] = None
    multiplier: Optional[float] = None
    report: Optional[SolveReport] = None

    def __post_init__(self) -> None:
        coefficients = np.asarray(self.coefficients, dtype=float)
        if coefficients.shape != (self.dofmap.n_dofs,):
            raise InvalidArgumentError(
                f"expected {self.dofmap.n_dofs} coefficients, got {coefficients.shape}"
            )
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def from_vector(
        cls,
        dofmap: DofMap,
        x: np.ndarray,
        time: Optional[float] = None,
        report: Optional[SolveReport] = None,
    ) -> "FieldSolution":
        """Split a solver vector, with or without a trailing datum multiplier."""
        n = dofmap.n_dofs
        multiplier = float(x[n]) if x.size > n else None
        return cls(dofmap, np.array(x[:n]), time, multiplier, report)

    def block(self, name: str) -> np.ndarray:
        """Flat coefficients of one field (velocity components are block-major)."""
        return self.coefficients[self.dofmap.field_dofs(name)]

    def nodal(self, name: str) -> np.ndarray:
        """Nodal values: (n_scalar, d) for velocities, (n_scalar,) for pressures."""
        values = self.block(name)
        if name in ("u1", "u2"):
            return values.reshape(self.dofmap.dim, self.dofmap.n_scalar).T
        return values

    def at_quadrature(self, geometry: ElementGeometry, name: str) -> np.ndarray:
        nodal = self.nodal(name)
        return np.einsum("qb,eb...->eq...", geometry.values, nodal[self.dofmap.cell_nodes])

    def gradient_at_quadrature(self, geometry: ElementGeometry, name: str) -> np.ndarray:
        """Pressure gradient (n_el, n_q, d) or velocity divergence (n_el, n_q)."""
        nodal = self.nodal(name)[self.dofmap.cell_nodes]
        if name in ("u1", "u2"):
            return np.einsum("eqbd,ebd->eq", geometry.grads, nodal)
        return np.einsum("eqbd,eb->eqd", geometry.grads, nodal)

    def evaluate(self, points: np.ndarray) -> Dict[str, np.ndarray]:
        """All four fields at physical points (NaN outside the mesh)."""
        return {name: evaluate_nodal(self.dofmap, self.nodal(name), points) for name in FIELDS}

    def with_time(self, time: float) -> "FieldSolution":
        return replace(self, time=time)

    def __sub__(self, other: "FieldSolution") -> "FieldSolution":
        if other.dofmap is not self.dofmap:
            raise InvalidArgumentError("solutions live on different spaces")
        return FieldSolution(self.dofmap, self.coefficients - other.coefficients)


@dataclass(frozen=True, eq=False)
class Snapshot:
    time: float
    flow: FieldSolution
    concentration: Optional[np.ndarray] = None


@dataclass(eq=False)
class TimeSeries:
    """Snapshots in strictly increasing time order."""

    snapshots: List[Snapshot] = field(default_factory=list)
    seed: Optional[int] = None
    out_of_range_steps: int = 0

    def append(
        self, time: float, flow: FieldSolution, concentration: Optional[np.ndarray] = None
    ) -> None:
        if self.snapshots and not time > self.snapshots[-1].time:
            raise InvalidArgumentError(
                f"time {time} does not follow {self.snapshots[-1].time}"
            )
        self.snapshots.append(Snapshot(float(time), flow.with_time(float(time)), concentration))

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def final(self) -> Snapshot:
        if not self.snapshots:
            raise InvalidArgumentError("empty time series")
        return self.snapshots[-1]

    def at(self, time: float) -> Snapshot:
        """Snapshot closest to `time`."""
        return self.snapshots[int(np.argmin(np.abs(self.times - time)))]

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self) -> Iterator[Snapshot]:
        return iter(self.snapshots)

    def to_frame(self) -> pd.DataFrame:
        """One summary row per snapshot."""
        rows = []
        for s in self.snapshots:
            row = {"time": s.time}
            for name in FIELDS:
                values = s.flow.nodal(name)
                magnitude = np.linalg.norm(values, axis=1) if values.ndim == 2 else np.abs(values)
                row[f"max_{name}"] = float(magnitude.max())
            if s.concentration is not None:
                row["min_c"] = float(s.concentration.min())
                row["max_c"] = float(s.concentration.max())
            rows.append(row)
        return pd.DataFrame(rows)
