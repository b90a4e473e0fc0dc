"""Physical data of double porosity/permeability problems."""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Literal, Mapping, NamedTuple, Optional, Set, Tuple, Union

import numpy as np

from ..errors import InvalidArgumentError

# A coefficient is a constant (scalar, vector or matrix), a callable of the
# physical points x (..., d), or values already sampled at quadrature points.
Coefficient = Union[float, Tuple[float, ...], np.ndarray, Callable[[np.ndarray], Any], "QuadratureField"]
# Boundary data: a constant or a callable f(x, t).
BoundaryValue = Union[float, Callable[[np.ndarray, float], Any]]


@dataclass(frozen=True, eq=False)
class QuadratureField:
    """Values sampled at the quadrature points of one element geometry."""
    values: np.ndarray

    def at(self, points: np.ndarray) -> np.ndarray:
        values = np.asarray(self.values)
        if values.shape[:2] != points.shape[:-1]:
            raise InvalidArgumentError(
                f"quadrature field of shape {values.shape} evaluated at points {points.shape[:-1]}"
            )
        return values


def evaluate_field(value: Coefficient, points: np.ndarray, shape: Tuple[int, ...] = ()) -> np.ndarray:
    """Evaluate a coefficient at `points` (..., d), broadcast to (...,) + shape."""
    points = np.asarray(points, dtype=float)
    if isinstance(value, QuadratureField):
        raw = value.at(points)
    elif callable(value):
        raw = np.asarray(value(points), dtype=float)
    else:
        raw = np.asarray(value, dtype=float)
    return np.broadcast_to(raw, points.shape[:-1] + shape).astype(float)


def evaluate_tensor(value: Coefficient, points: np.ndarray) -> np.ndarray:
    """Evaluate a tensor coefficient; scalars become multiples of the identity."""
    points = np.asarray(points, dtype=float)
    d = points.shape[-1]
    lead = points.shape[:-1]
    if isinstance(value, QuadratureField) or callable(value):
        raw = value.at(points) if isinstance(value, QuadratureField) else value(points)
        raw = np.asarray(raw, dtype=float)
        is_tensor = raw.ndim == len(lead) + 2
    else:
        raw = np.asarray(value, dtype=float)
        is_tensor = raw.ndim == 2
    if is_tensor:
        if raw.shape[-2:] != (d, d):
            raise InvalidArgumentError(f"tensor of shape {raw.shape[-2:]} in {d} dimensions")
        return np.broadcast_to(raw, lead + (d, d)).astype(float)
    scalar = np.broadcast_to(raw, lead)
    return scalar[..., None, None] * np.eye(d)


def evaluate_boundary(value: BoundaryValue, points: np.ndarray, t: float = 0.0) -> np.ndarray:
    """Evaluate boundary data f(x, t) at `points` (..., d)."""
    points = np.asarray(points, dtype=float)
    raw = value(points, t) if callable(value) else value
    return np.broadcast_to(np.asarray(raw, dtype=float), points.shape[:-1]).astype(float)


def check_spd(tensors: np.ndarray, name: str, semidefinite: bool = False) -> None:
    """Raise unless every (…, d, d) tensor is symmetric positive (semi)definite."""
    tensors = np.asarray(tensors, dtype=float)
    scale = np.max(np.abs(tensors)) if tensors.size else 0.0
    tol = 1e-12 * max(scale, 1e-300)
    if np.max(np.abs(tensors - np.swapaxes(tensors, -1, -2)), initial=0.0) > tol:
        raise InvalidArgumentError(f"{name} is not symmetric")
    eigenvalues = np.linalg.eigvalsh(tensors)
    lowest = float(eigenvalues.min()) if eigenvalues.size else 0.0
    if semidefinite and lowest < -tol:
        raise InvalidArgumentError(f"{name} is not positive semidefinite (eigenvalue {lowest:.3e})")
    if not semidefinite and lowest <= tol:
        raise InvalidArgumentError(f"{name} is not positive definite (eigenvalue {lowest:.3e})")


class Coefficients(NamedTuple):
    """Material data sampled at a set of points."""
    mu: np.ndarray        # (...,)
    beta: np.ndarray      # (...,)
    gamma_b: np.ndarray   # (..., d)
    K1: np.ndarray        # (..., d, d)
    K2: np.ndarray        # (..., d, d)

    def permeability(self, network: int) -> np.ndarray:
        return self.K1 if network == 1 else self.K2


@dataclass(frozen=True, eq=False)
class MaterialData:
    """Viscosity, mass-transfer coefficient, body force and permeabilities.

    Every entry may be a constant, a callable of x or a QuadratureField. Scalar
    permeabilities mean isotropic tensors.
    """
    mu: Coefficient = 1.0
    beta: float = 1.0
    gamma_b: Coefficient = 0.0
    K1: Coefficient = 1.0
    K2: Coefficient = 1.0

    def __post_init__(self) -> None:
        if not callable(self.mu) and not isinstance(self.mu, QuadratureField):
            if not np.all(np.asarray(self.mu, dtype=float) > 0):
                raise InvalidArgumentError(f"mu must be positive, got {self.mu}")
        if isinstance(self.mu, QuadratureField) and not np.all(np.asarray(self.mu.values) > 0):
            raise InvalidArgumentError("mu must be positive")
        if not float(self.beta) >= 0:
            raise InvalidArgumentError(f"beta must be non-negative, got {self.beta}")
        for name in ("K1", "K2"):
            value = getattr(self, name)
            if callable(value) or isinstance(value, QuadratureField):
                continue
            array = np.asarray(value, dtype=float)
            if array.ndim == 0:
                if not array > 0:
                    raise InvalidArgumentError(f"{name} must be positive, got {value}")
            else:
                check_spd(array, name)

    def sample(self, points: np.ndarray) -> Coefficients:
        """Sample every coefficient at `points` (..., d), checking positivity."""
        points = np.asarray(points, dtype=float)
        d = points.shape[-1]
        mu = evaluate_field(self.mu, points)
        if np.any(mu <= 0):
            raise InvalidArgumentError("mu must be positive at every point")
        K1 = evaluate_tensor(self.K1, points)
        K2 = evaluate_tensor(self.K2, points)
        if callable(self.K1) or isinstance(self.K1, QuadratureField):
            check_spd(K1, "K1")
        if callable(self.K2) or isinstance(self.K2, QuadratureField):
            check_spd(K2, "K2")
        return Coefficients(
            mu=mu,
            beta=np.full(points.shape[:-1], float(self.beta)),
            gamma_b=evaluate_field(self.gamma_b, points, (d,)),
            K1=K1,
            K2=K2,
        )

    def with_viscosity(self, mu: Coefficient) -> "MaterialData":
        return MaterialData(mu=mu, beta=self.beta, gamma_b=self.gamma_b, K1=self.K1, K2=self.K2)


@dataclass(frozen=True)
class NetworkBoundary:
    """Boundary data of one pore network: tag -> pressure or normal velocity u.n."""
    pressure: Mapping[str, BoundaryValue] = field(default_factory=dict)
    velocity: Mapping[str, BoundaryValue] = field(default_factory=dict)

    @property
    def tags(self) -> Set[str]:
        return set(self.pressure) | set(self.velocity)


VelocityTrace = Literal["interpolate", "project"]


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary data of both networks (1 = macro, 2 = micro).

    Strong normal-velocity data is sampled at the boundary nodes
    ("interpolate") or L2-projected onto the boundary trace space ("project"),
    which keeps the flux of discontinuous data exact on every mesh.
    """
    macro: NetworkBoundary
    micro: NetworkBoundary
    velocity_trace: VelocityTrace = "interpolate"

    def __post_init__(self) -> None:
        if self.velocity_trace not in ("interpolate", "project"):
            raise InvalidArgumentError(f"unknown velocity trace '{self.velocity_trace}'")

    @property
    def networks(self) -> Tuple[NetworkBoundary, NetworkBoundary]:
        return (self.macro, self.micro)

    def network(self, i: int) -> NetworkBoundary:
        if i not in (1, 2):
            raise InvalidArgumentError(f"network must be 1 or 2, got {i}")
        return self.networks[i - 1]


@dataclass(frozen=True, eq=False)
class TransientData:
    """Densities, volume fractions, time grid and initial velocities."""
    rho1: float
    rho2: float
    phi1: float
    phi2: float
    dt: float
    T: float
    u01: Optional[Coefficient] = None
    u02: Optional[Coefficient] = None
    gamma: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise InvalidArgumentError(f"dt must be positive, got {self.dt}")
        if not self.T >= self.dt * (1 - 1e-12):
            raise InvalidArgumentError(f"T ({self.T}) must be at least dt ({self.dt})")
        if self.rho1 < 0 or self.rho2 < 0:
            raise InvalidArgumentError("densities must be non-negative")
        if self.gamma is not None:
            for rho, phi, name in ((self.rho1, self.phi1, "rho1"), (self.rho2, self.phi2, "rho2")):
                expected = phi * self.gamma
                if abs(rho - expected) > 1e-12 * max(abs(expected), abs(rho), 1e-300):
                    raise InvalidArgumentError(f"{name} = {rho} differs from phi * gamma = {expected}")

    @classmethod
    def from_fractions(
        cls, phi1: float, phi2: float, gamma: float, dt: float, T: float, **kwargs: Any
    ) -> "TransientData":
        return cls(rho1=phi1 * gamma, rho2=phi2 * gamma, phi1=phi1, phi2=phi2,
                   dt=dt, T=T, gamma=gamma, **kwargs)

    def density(self, network: int) -> float:
        return self.rho1 if network == 1 else self.rho2

    def time_grid(self) -> np.ndarray:
        """Step end times; the last one equals T."""
        n_steps = max(1, int(np.ceil(self.T / self.dt - 1e-9)))
        times = np.minimum(self.dt * np.arange(1, n_steps + 1), self.T)
        times[-1] = self.T
        return times

    def step_sizes(self) -> np.ndarray:
        """Length of each step of time_grid(): dt, except a shortened last step."""
        times = self.time_grid()
        sizes = np.full(times.size, float(self.dt))
        last = float(times[-1] - (times[-2] if times.size > 1 else 0.0))
        if abs(last - self.dt) > 1e-9 * self.dt:
            sizes[-1] = last
        return sizes


@dataclass(frozen=True)
class TransportBoundary:
    """Transport condition on one tag: prescribed value, total flux or free outflow."""
    kind: Literal["dirichlet", "flux", "outflow"] = "flux"
    value: BoundaryValue = 0.0


@dataclass(frozen=True, eq=False)
class TransportData:
    """Concentration transport data and the viscosity-concentration law."""
    mu0: float
    Rc: float
    D: Coefficient
    f: Coefficient = 0.0
    c_bc: float = 1.0
    c0: Coefficient = 0.0
    boundary: Dict[str, TransportBoundary] = field(default_factory=dict)
    velocity_mode: Literal["sum", "macro"] = "sum"
    seed: Optional[int] = None
    c0_amplitude: float = 0.0

    def __post_init__(self) -> None:
        if not self.mu0 > 0:
            raise InvalidArgumentError(f"mu0 must be positive, got {self.mu0}")
        if self.velocity_mode not in ("sum", "macro"):
            raise InvalidArgumentError(f"unknown velocity mode {self.velocity_mode}")
        if not callable(self.D) and not isinstance(self.D, QuadratureField):
            array = np.asarray(self.D, dtype=float)
            if array.ndim == 0:
                if array < 0:
                    raise InvalidArgumentError(f"D must be non-negative, got {self.D}")
            else:
                check_spd(array, "D", semidefinite=True)
        for tag, bc in self.boundary.items():
            if bc.kind not in ("dirichlet", "flux", "outflow"):
                raise InvalidArgumentError(f"unknown transport condition {bc.kind} on {tag}")

    def condition(self, tag: str) -> TransportBoundary:
        return self.boundary.get(tag, TransportBoundary())
