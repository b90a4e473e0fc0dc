"""Problem data helpers: mass transfer, viscosity law, boundary checks, seeding."""

import logging
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError
from .mesh.base import Mesh
from .models.types import (
    BoundarySpec,
    MaterialData,
    NetworkBoundary,
    QuadratureField,
    TransientData,
    TransportBoundary,
    TransportData,
    evaluate_tensor,
)

logger = logging.getLogger(__name__)

__all__ = [
    "BoundarySpec",
    "MaterialData",
    "NetworkBoundary",
    "QuadratureField",
    "TransientData",
    "TransportBoundary",
    "TransportData",
    "mass_transfer",
    "needs_datum_constraint",
    "perturbed_permeability",
    "random_initial_concentration",
    "validate_boundary_spec",
    "viscosity_of_concentration",
]


def mass_transfer(p1, p2, beta, mu):  # type: ignore[no-untyped-def]
    """Inter-network mass transfer chi = -(beta/mu)(p1 - p2); works on arrays."""
    if np.any(np.asarray(mu) <= 0):
        raise InvalidArgumentError(f"mu must be positive, got {mu}")
    return -(np.asarray(beta) / np.asarray(mu)) * (np.asarray(p1) - np.asarray(p2)) + 0.0


def viscosity_of_concentration(c, mu0: float, Rc: float):  # type: ignore[no-untyped-def]
    """mu(c) = mu0 * exp(Rc * (1 - c)); works on arrays."""
    if not mu0 > 0:
        raise InvalidArgumentError(f"mu0 must be positive, got {mu0}")
    return mu0 * np.exp(Rc * (1.0 - np.asarray(c, dtype=float)))


def needs_datum_constraint(spec: BoundarySpec, mesh: Optional[Mesh] = None) -> bool:
    """True when no network prescribes pressure on a boundary part of nonzero measure."""
    for network in spec.networks:
        for tag in network.pressure:
            if mesh is None or mesh.facets_with_tag(tag).size > 0:
                return False
    return True


def validate_boundary_spec(spec: BoundarySpec, tags: Iterable[str]) -> None:
    """Check that each network splits the boundary tags into pressure and velocity parts."""
    tags = set(tags)
    for i, network in enumerate(spec.networks, start=1):
        both = set(network.pressure) & set(network.velocity)
        if both:
            raise InvalidArgumentError(
                f"network {i}: tags {sorted(both)} carry both pressure and velocity data"
            )
        unknown = network.tags - tags
        if unknown:
            raise InvalidArgumentError(f"network {i}: unknown boundary tags {sorted(unknown)}")
        missing = tags - network.tags
        if missing:
            raise InvalidArgumentError(f"network {i}: no boundary data for tags {sorted(missing)}")


def perturbed_permeability(
    K,  # type: ignore[no-untyped-def]
    amplitude: float,
    seed: int,
    lengths: Sequence[float],
    n_modes: int = 8,
) -> Callable[[np.ndarray], np.ndarray]:
    """Smooth seeded multiplicative perturbation K(x) = K * (1 + amplitude * g(x)).

    g is a normalised sum of random Fourier modes with wavelengths between a
    quarter and the whole of each domain length, so |g| <= 1.
    """
    if not 0 <= amplitude < 1:
        raise InvalidArgumentError(f"amplitude must lie in [0, 1), got {amplitude}")
    lengths_arr = np.asarray(lengths, dtype=float)
    rng = np.random.default_rng(seed)
    cycles = rng.integers(1, 5, size=(n_modes, lengths_arr.size))
    signs = rng.choice([-1.0, 1.0], size=(n_modes, lengths_arr.size))
    wavevectors = 2.0 * np.pi * signs * cycles / lengths_arr
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_modes)

    def field(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g = np.cos(x @ wavevectors.T + phases).sum(axis=-1) / n_modes
        base = evaluate_tensor(K, x)
        return base * (1.0 + amplitude * g)[..., None, None]

    return field


def random_initial_concentration(
    base: float, amplitude: float, seed: int
) -> Callable[[np.ndarray], np.ndarray]:
    """Seeded uniform perturbation c0(x) = base + amplitude * U(-1, 1) per point."""

    def field(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        rng = np.random.default_rng(seed)
        return base + amplitude * rng.uniform(-1.0, 1.0, size=x.shape[:-1])

    return field
