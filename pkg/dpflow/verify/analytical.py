"""Closed-form solutions used for convergence studies and patch tests."""

from dataclasses import dataclass
from typing import Iterable, Protocol

import numpy as np

from ..errors import InvalidArgumentError
from ..models.types import BoundarySpec, MaterialData, NetworkBoundary


class ExactSolution(Protocol):
    """Pointwise fields of a reference solution; x has shape (..., d)."""

    def u1(self, x: np.ndarray) -> np.ndarray: ...

    def u2(self, x: np.ndarray) -> np.ndarray: ...

    def p1(self, x: np.ndarray) -> np.ndarray: ...

    def p2(self, x: np.ndarray) -> np.ndarray: ...

    def grad_p1(self, x: np.ndarray) -> np.ndarray: ...

    def grad_p2(self, x: np.ndarray) -> np.ndarray: ...


def _pressure_spec(solution: ExactSolution, tags: Iterable[str]) -> BoundarySpec:
    tags = list(tags)
    macro = NetworkBoundary(pressure={tag: (lambda x, t: solution.p1(x)) for tag in tags})
    micro = NetworkBoundary(pressure={tag: (lambda x, t: solution.p2(x)) for tag in tags})
    return BoundarySpec(macro=macro, micro=micro)


@dataclass(frozen=True)
class AnalyticalSolution2D:
    """Harmonic plus exponential mass-transfer solution on the unit square.

    p_i = (mu/pi) e^{pi x} sin(pi y) -/+ mu/(beta k_i) e^{eta y} with
    eta = sqrt(beta (k1 + k2) / (k1 k2)) and u_i = -(k_i / mu) grad p_i.
    """

    k1: float = 1.0
    k2: float = 0.1
    beta: float = 1.0
    mu: float = 1.0

    def __post_init__(self) -> None:
        if min(self.k1, self.k2, self.beta, self.mu) <= 0:
            raise InvalidArgumentError("k1, k2, beta and mu must be positive")

    @property
    def eta(self) -> float:
        return float(np.sqrt(self.beta * (self.k1 + self.k2) / (self.k1 * self.k2)))

    def _harmonic(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        e = np.exp(np.pi * x[..., 0])
        return np.stack([e * np.sin(np.pi * x[..., 1]), e * np.cos(np.pi * x[..., 1])], axis=-1)

    def _exchange(self, x: np.ndarray) -> np.ndarray:
        return np.exp(self.eta * np.asarray(x, dtype=float)[..., 1])

    def p1(self, x: np.ndarray) -> np.ndarray:
        return self.mu / np.pi * self._harmonic(x)[..., 0] - self.mu / (self.beta * self.k1) * self._exchange(x)

    def p2(self, x: np.ndarray) -> np.ndarray:
        return self.mu / np.pi * self._harmonic(x)[..., 0] + self.mu / (self.beta * self.k2) * self._exchange(x)

    def grad_p1(self, x: np.ndarray) -> np.ndarray:
        out = self.mu * self._harmonic(x)
        out[..., 1] -= self.mu * self.eta / (self.beta * self.k1) * self._exchange(x)
        return out

    def grad_p2(self, x: np.ndarray) -> np.ndarray:
        out = self.mu * self._harmonic(x)
        out[..., 1] += self.mu * self.eta / (self.beta * self.k2) * self._exchange(x)
        return out

    def u1(self, x: np.ndarray) -> np.ndarray:
        return -self.k1 / self.mu * self.grad_p1(x)

    def u2(self, x: np.ndarray) -> np.ndarray:
        return -self.k2 / self.mu * self.grad_p2(x)

    def chi(self, x: np.ndarray) -> np.ndarray:
        """Mass transfer -(beta/mu)(p1 - p2)."""
        return -(self.beta / self.mu) * (self.p1(x) - self.p2(x))

    def material(self) -> MaterialData:
        return MaterialData(mu=self.mu, beta=self.beta, gamma_b=0.0, K1=self.k1, K2=self.k2)

    def boundary_spec(self, tags: Iterable[str] = ("bottom", "right", "top", "left")) -> BoundarySpec:
        """Exact pressures prescribed on every tag of both networks."""
        return _pressure_spec(self, tags)


@dataclass(frozen=True)
class AnalyticalSolution1D:
    """Pressure-driven flow along x on (0, L) with end pressures in both networks.

    k1 p1 + k2 p2 is linear in x and the pressure difference solves
    d'' = eta^2 d, so d is a combination of sinh modes. Equal end pressures in
    both networks give the constant-velocity patch solution.
    """

    k1: float = 1.0
    k2: float = 0.01
    beta: float = 1.0
    mu: float = 1.0
    length: float = 1.0
    p1_left: float = 10.0
    p1_right: float = 1.0
    p2_left: float = 10.0
    p2_right: float = 1.0

    def __post_init__(self) -> None:
        if min(self.k1, self.k2, self.mu, self.length) <= 0 or self.beta < 0:
            raise InvalidArgumentError("k1, k2, mu and length must be positive and beta >= 0")

    @property
    def eta(self) -> float:
        return float(np.sqrt(self.beta * (self.k1 + self.k2) / (self.k1 * self.k2)))

    def _parts(self, x: np.ndarray):  # type: ignore[no-untyped-def]
        s = np.asarray(x, dtype=float)[..., 0]
        L, k1, k2 = self.length, self.k1, self.k2
        m0 = k1 * self.p1_left + k2 * self.p2_left
        mL = k1 * self.p1_right + k2 * self.p2_right
        m, dm = m0 + (mL - m0) * s / L, np.full_like(s, (mL - m0) / L)
        d0, dL = self.p1_left - self.p2_left, self.p1_right - self.p2_right
        eta = self.eta
        if eta * L < 1e-12:
            d, dd = d0 + (dL - d0) * s / L, np.full_like(s, (dL - d0) / L)
        else:
            scale = np.sinh(eta * L)
            d = (d0 * np.sinh(eta * (L - s)) + dL * np.sinh(eta * s)) / scale
            dd = eta * (-d0 * np.cosh(eta * (L - s)) + dL * np.cosh(eta * s)) / scale
        return m, dm, d, dd

    def p1(self, x: np.ndarray) -> np.ndarray:
        m, _, d, _ = self._parts(x)
        return (m + self.k2 * d) / (self.k1 + self.k2)

    def p2(self, x: np.ndarray) -> np.ndarray:
        m, _, d, _ = self._parts(x)
        return (m - self.k1 * d) / (self.k1 + self.k2)

    def _along_x(self, x: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Embed an x-derivative in the full gradient; other components vanish."""
        out = np.zeros(np.shape(x), dtype=float)
        out[..., 0] = values
        return out

    def grad_p1(self, x: np.ndarray) -> np.ndarray:
        _, dm, _, dd = self._parts(x)
        return self._along_x(x, (dm + self.k2 * dd) / (self.k1 + self.k2))

    def grad_p2(self, x: np.ndarray) -> np.ndarray:
        _, dm, _, dd = self._parts(x)
        return self._along_x(x, (dm - self.k1 * dd) / (self.k1 + self.k2))

    def u1(self, x: np.ndarray) -> np.ndarray:
        return -self.k1 / self.mu * self.grad_p1(x)

    def u2(self, x: np.ndarray) -> np.ndarray:
        return -self.k2 / self.mu * self.grad_p2(x)

    def material(self) -> MaterialData:
        return MaterialData(mu=self.mu, beta=self.beta, gamma_b=0.0, K1=self.k1, K2=self.k2)

    def boundary_spec(self, tags: Iterable[str] = ("left", "right")) -> BoundarySpec:
        return _pressure_spec(self, tags)
