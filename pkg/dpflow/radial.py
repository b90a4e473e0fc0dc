"""Reference solutions of the radially symmetric candle-filter and hollow-sphere problems.

With every field a function of r alone the four-field problem reduces to

    p_i' = -(mu / k_i) u_i,
    (1 / r^m) (r^m u_1)' = -(beta / mu)(p_1 - p_2),
    (1 / r^m) (r^m u_2)' = +(beta / mu)(p_1 - p_2),

on (a, 1) with m = 1 (polar) or m = 2 (spherical), p_1(a), p_1(1) given and
u_2(a) = u_2(1) = 0.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence

import numpy as np
import pandas as pd
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_bvp
from scipy.interpolate import CubicSpline

from .caching import cached
from .drivers.solution import FieldSolution
from .errors import InvalidArgumentError, OracleFailure

logger = logging.getLogger(__name__)

SELF_CONVERGENCE_TOL = 1e-7
MIN_POINTS = 50
RADIAL_FIELDS = ("u1", "u2", "p1", "p2")


@dataclass(frozen=True)
class RadialProblem:
    """Data of the reduced radial problem; the outer radius is 1."""

    geometry: Literal["polar", "spherical"] = "polar"
    a: float = 0.3
    mu: float = 1.0
    beta: float = 1.0
    k1: float = 1.0
    k2: float = 0.01
    p_inner: float = 1.0
    p_outer: float = 0.0

    def __post_init__(self) -> None:
        if self.geometry not in ("polar", "spherical"):
            raise InvalidArgumentError(f"geometry must be polar or spherical, got {self.geometry!r}")
        if not 0 < self.a < 1:
            raise InvalidArgumentError(f"inner radius must lie in (0, 1), got {self.a}")
        if min(self.mu, self.k1, self.k2) <= 0 or self.beta < 0:
            raise InvalidArgumentError("mu, k1 and k2 must be positive and beta non-negative")

    @property
    def m(self) -> int:
        return 1 if self.geometry == "polar" else 2


@dataclass(frozen=True, eq=False)
class RadialSolution:
    """Fields of the radial problem on a grid of radii."""

    problem: RadialProblem
    r: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    method: str
    residuals: Dict[str, float] = field(default_factory=dict)

    def values(self, name: str) -> np.ndarray:
        if name not in RADIAL_FIELDS:
            raise InvalidArgumentError(f"unknown radial field {name!r}")
        return getattr(self, name)

    def at(self, r: np.ndarray, name: str) -> np.ndarray:
        """Spline interpolation of one field at radii `r`."""
        r = np.asarray(r, dtype=float)
        if np.any((r < self.r[0] - 1e-12) | (r > self.r[-1] + 1e-12)):
            raise InvalidArgumentError("radius outside the solution interval")
        return CubicSpline(self.r, self.values(name))(r)

    def conservation_residual(self) -> float:
        """max |(r^m u1)' + (r^m u2)'| on the grid."""
        flux = self.r ** self.problem.m * (self.u1 + self.u2)
        return float(np.max(np.abs(np.gradient(flux, self.r, edge_order=2))))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"r": self.r, "u1": self.u1, "u2": self.u2, "p1": self.p1, "p2": self.p2})


def _rhs(problem: RadialProblem, r: np.ndarray, y: np.ndarray) -> np.ndarray:
    p1, p2, u1, u2 = y
    exchange = problem.beta / problem.mu * (p1 - p2)
    return np.vstack([
        -problem.mu / problem.k1 * u1,
        -problem.mu / problem.k2 * u2,
        -problem.m / r * u1 - exchange,
        -problem.m / r * u2 + exchange,
    ])


def _collocation(problem: RadialProblem, n_points: int) -> RadialSolution:
    a, pa, pb = problem.a, problem.p_inner, problem.p_outer
    if problem.beta == 0:
        return _decoupled(problem, n_points, "collocation")

    def fun(r: np.ndarray, y: np.ndarray) -> np.ndarray:
        return _rhs(problem, r, y)

    def bc(ya: np.ndarray, yb: np.ndarray) -> np.ndarray:
        return np.array([ya[0] - pa, yb[0] - pb, ya[3], yb[3]])

    def attempt(n: int):  # type: ignore[no-untyped-def]
        r = np.linspace(a, 1.0, n)
        guess = np.zeros((4, n))
        guess[0] = pa + (pb - pa) * (r - a) / (1.0 - a)
        guess[1] = 0.5 * (pa + pb)
        guess[2] = problem.k1 / problem.mu * (pa - pb) / (1.0 - a)
        return solve_bvp(fun, bc, r, guess, tol=1e-10, bc_tol=1e-12, max_nodes=200000)

    grid = np.linspace(a, 1.0, n_points)
    history: List[float] = []
    coarse = attempt(n_points)
    fine = attempt(2 * n_points)
    for result in (coarse, fine):
        if result.status != 0:
            raise OracleFailure(f"collocation did not converge: {result.message}", history)
    change = float(np.max(np.abs(coarse.sol(grid) - fine.sol(grid))))
    history.append(change)
    if not change < SELF_CONVERGENCE_TOL:
        raise OracleFailure(f"doubling the resolution changed the solution by {change:.3e}", history)
    y = fine.sol(grid)
    residuals = {
        "ode": float(np.max(fine.rms_residuals)),
        "bc": float(np.max(np.abs(bc(fine.sol(a), fine.sol(1.0))))),
        "self_convergence": change,
    }
    return RadialSolution(problem, grid, y[2], y[3], y[0], y[1], "collocation", residuals)


def _fd_pressures(problem: RadialProblem, n_intervals: int) -> np.ndarray:
    """Second-order conservative differences for (p1, p2) on a uniform grid."""
    a, m, beta = problem.a, problem.m, problem.beta
    r = np.linspace(a, 1.0, n_intervals + 1)
    h = r[1] - r[0]
    n = r.size
    half = r[:-1] + 0.5 * h
    weight_left = np.concatenate([[(a - 0.5 * h) ** m], half**m])  # r_{i-1/2}^m
    weight_right = np.concatenate([half**m, [(1.0 + 0.5 * h) ** m]])  # r_{i+1/2}^m

    blocks = []
    for k in (problem.k1, problem.k2):
        lower = k * weight_left / (h * h * r**m)
        upper = k * weight_right / (h * h * r**m)
        # ghost nodes p_{-1} = p_1 and p_{n} = p_{n-2} for the zero-flux ends
        up = upper[:-1].copy()
        lo = lower[1:].copy()
        up[0] += lower[0]
        lo[-1] += upper[-1]
        blocks.append(sp.diags([lo, -(lower + upper), up], [-1, 0, 1], shape=(n, n), format="lil"))
    eye = sp.identity(n, format="lil")
    matrix = sp.bmat([[blocks[0] - beta * eye, beta * eye], [beta * eye, blocks[1] - beta * eye]], format="lil")
    rhs = np.zeros(2 * n)
    for row, value in ((0, problem.p_inner), (n - 1, problem.p_outer)):
        matrix.rows[row], matrix.data[row] = [row], [1.0]
        rhs[row] = value
    return spla.spsolve(matrix.tocsc(), rhs).reshape(2, n)


def _finite_difference(problem: RadialProblem, n_points: int) -> RadialSolution:
    if problem.beta == 0:
        return _decoupled(problem, n_points, "finite_difference")
    # the coarsest grid is four times finer than the output grid
    n = 4 * (n_points - 1)
    levels = [_fd_pressures(problem, n * 2**level)[:, :: 4 * 2**level] for level in range(3)]
    # Richardson extrapolation for a second-order scheme
    coarse = (4.0 * levels[1] - levels[0]) / 3.0
    fine = (4.0 * levels[2] - levels[1]) / 3.0
    change = float(np.max(np.abs(fine - coarse)))
    history = [float(np.max(np.abs(levels[i + 1] - levels[i]))) for i in range(2)] + [change]
    if not change < SELF_CONVERGENCE_TOL:
        raise OracleFailure(f"Richardson estimates differ by {change:.3e}", history)
    r = np.linspace(problem.a, 1.0, n_points)
    p1, p2 = fine
    u1 = -problem.k1 / problem.mu * CubicSpline(r, p1)(r, 1)
    u2 = -problem.k2 / problem.mu * CubicSpline(r, p2)(r, 1)
    u2[[0, -1]] = 0.0
    residuals = {
        "bc": float(max(abs(p1[0] - problem.p_inner), abs(p1[-1] - problem.p_outer))),
        "self_convergence": change,
    }
    return RadialSolution(problem, r, u1, u2, p1, p2, "finite_difference", residuals)


def _decoupled(problem: RadialProblem, n_points: int, method: str) -> RadialSolution:
    """beta = 0: radial Darcy flow in network 1, network 2 at rest with p2 = 0."""
    r = np.linspace(problem.a, 1.0, n_points)
    pa, pb, a = problem.p_inner, problem.p_outer, problem.a
    if problem.m == 1:
        shape, slope = np.log(r) / np.log(a), 1.0 / (r * np.log(a))
    else:
        shape, slope = (1.0 / r - 1.0) / (1.0 / a - 1.0), -1.0 / (r * r * (1.0 / a - 1.0))
    p1 = pb + (pa - pb) * shape
    u1 = -problem.k1 / problem.mu * (pa - pb) * slope
    zeros = np.zeros_like(r)
    return RadialSolution(problem, r, u1, zeros, p1, zeros.copy(), method, {"bc": 0.0, "self_convergence": 0.0})


@cached
def solve_radial(
    problem: RadialProblem, n_points: int = 200, method: Literal["collocation", "finite_difference"] = "collocation"
) -> RadialSolution:
    """Solve the radial problem on `n_points` equispaced radii in [a, 1]."""
    if int(n_points) < MIN_POINTS:
        raise InvalidArgumentError(f"n_points must be at least {MIN_POINTS}, got {n_points}")
    solvers = {"collocation": _collocation, "finite_difference": _finite_difference}
    if method not in solvers:
        raise InvalidArgumentError(f"unknown radial method {method!r}")
    solution = solvers[method](problem, int(n_points))
    logger.info(
        f"radial {problem.geometry} oracle ({method}, {n_points} points): "
        f"self-convergence {solution.residuals.get('self_convergence', 0.0):.2e}"
    )
    return solution


@dataclass(frozen=True)
class RadialComparison:
    """Deviation of a finite element solution from the radial reference."""

    max_abs: Dict[str, float]
    max_rel: Dict[str, float]
    l2_rel: Dict[str, float]
    n_samples: int
    skipped: int

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"max_abs": self.max_abs, "max_rel": self.max_rel, "l2_rel": self.l2_rel}
        ).rename_axis("field").reset_index()


def _ray_points(radii: np.ndarray, n_rays: int, center: Sequence[float]) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(n_rays) / n_rays
    rr, aa = np.meshgrid(radii, angles, indexing="ij")
    return np.column_stack([rr.ravel() * np.cos(aa.ravel()), rr.ravel() * np.sin(aa.ravel())]) + np.asarray(center)


def compare_fem_to_oracle(
    solution: FieldSolution,
    oracle: RadialSolution,
    sample_rays: int = 8,
    n_radii: int = 64,
    center: Sequence[float] = (0.0, 0.0),
) -> RadialComparison:
    """Sample the 2D solution along rays and compare with the interpolated oracle.

    Velocities are compared through their radial component. Points the mesh
    does not cover are skipped and counted.
    """
    if solution.dofmap.dim != 2:
        raise InvalidArgumentError("radial comparison needs a two-dimensional solution")
    a = oracle.problem.a
    radii = np.linspace(a, 1.0, n_radii + 2)[1:-1]
    points = _ray_points(radii, sample_rays, center)
    fem = solution.evaluate(points)
    rel = points - np.asarray(center)
    r = np.linalg.norm(rel, axis=1)
    found = np.all(np.isfinite(fem["p1"].reshape(points.shape[0], -1)), axis=1)
    skipped = int(np.count_nonzero(~found))
    if skipped:
        logger.warning(f"{skipped} of {points.shape[0]} sample points lie outside the mesh")
    if not np.any(found):
        raise InvalidArgumentError("no sample point lies inside the mesh")

    radial_dir = rel[found] / r[found, None]
    max_abs, max_rel, l2_rel = {}, {}, {}
    for name in RADIAL_FIELDS:
        values = fem[name][found]
        if values.ndim == 2:
            values = np.einsum("pd,pd->p", values, radial_dir)
        reference = oracle.at(r[found], name)
        diff = values - reference
        scale = float(np.max(np.abs(oracle.values(name))))
        max_abs[name] = float(np.max(np.abs(diff)))
        max_rel[name] = max_abs[name] / scale if scale > 0 else max_abs[name]
        norm = float(np.linalg.norm(reference))
        l2_rel[name] = float(np.linalg.norm(diff)) / norm if norm > 0 else float(np.linalg.norm(diff))
    return RadialComparison(max_abs, max_rel, l2_rel, int(np.count_nonzero(found)), skipped)


def angular_spread(
    solution: FieldSolution, radius: float, name: str = "p1", n_angles: int = 8,
    center: Sequence[float] = (0.0, 0.0),
) -> float:
    """Spread (max - min) of a pressure field over `n_angles` points at one radius."""
    values = solution.evaluate(_ray_points(np.array([radius]), n_angles, center))[name]
    values = values[np.isfinite(values)]
    if values.size == 0:
        raise InvalidArgumentError(f"radius {radius} is outside the mesh")
    return float(values.max() - values.min())


def oracle_problem(
    geometry: Literal["polar", "spherical"] = "polar", overrides: Optional[Dict[str, float]] = None
) -> RadialProblem:
    """Candle-filter (polar) or hollow-sphere (spherical) data with optional overrides."""
    return RadialProblem(geometry=geometry, **(overrides or {}))
