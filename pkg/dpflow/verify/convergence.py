"""Convergence-rate fitting."""

import logging
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from ..errors import InsufficientDataError, InvalidArgumentError

logger = logging.getLogger(__name__)

PLATEAU_FLOOR = 1e-13


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares rate of one error series.

    For h-ladders `slope` is d log(error) / d log(h); for p-ladders it is
    d log(error) / d p, so exponential convergence shows up as a negative slope.
    """
    slope: float
    intercept: float
    kind: str
    n_points: int
    plateau: bool


def convergence_slopes(
    sizes: Sequence[float],
    errors: Sequence[float],
    kind: Literal["h", "p"] = "h",
    floor: float = PLATEAU_FLOOR,
) -> SlopeFit:
    """Fit error against mesh size (log-log) or polynomial order (log-linear).

    Points with non-positive or non-finite errors are dropped; at least three
    must remain. `plateau` flags errors that reached `floor`.
    """
    if kind not in ("h", "p"):
        raise InvalidArgumentError(f"kind must be 'h' or 'p', got {kind!r}")
    x = np.asarray(sizes, dtype=float)
    e = np.asarray(errors, dtype=float)
    if x.shape != e.shape:
        raise InvalidArgumentError("sizes and errors differ in length")
    usable = np.isfinite(e) & (e > 0) & np.isfinite(x)
    if kind == "h":
        usable &= x > 0
    if int(usable.sum()) < 3:
        raise InsufficientDataError(f"need at least 3 usable points, got {int(usable.sum())}")
    x, e = x[usable], e[usable]
    abscissa = np.log(x) if kind == "h" else x
    slope, intercept = np.polyfit(abscissa, np.log(e), 1)
    plateau = bool(np.any(e < floor))
    if plateau:
        logger.info(f"error series reaches the {floor:g} floor; the fitted rate is not meaningful there")
    return SlopeFit(float(slope) + 0.0, float(intercept), kind, int(x.size), plateau)
