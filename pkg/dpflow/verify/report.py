"""Verification report container and its serialisations."""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

from ..errors import InvalidArgumentError
from .convergence import SlopeFit


@dataclass
class VerificationReport:
    """Verification measures of one solve (one mesh and order)."""

    label: str = ""
    h: Optional[float] = None
    order: Optional[int] = None
    n_dofs: Optional[int] = None
    l2_errors: Dict[str, float] = field(default_factory=dict)
    h1_errors: Dict[str, float] = field(default_factory=dict)
    stab_norm_error: Optional[float] = None
    dissipation: Optional[float] = None
    reciprocal_error: Optional[float] = None
    admissibility_residual: Optional[float] = None
    slopes: Dict[str, SlopeFit] = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = list(self.l2_errors.values()) + list(self.h1_errors.values())
        values += [v for v in (self.stab_norm_error, self.reciprocal_error, self.admissibility_residual) if v is not None]
        if any(v < 0 for v in values if not np.isnan(v)):
            raise InvalidArgumentError("norms must be non-negative")

    @classmethod
    def from_errors(cls, errors: Dict[str, float], **kwargs) -> "VerificationReport":  # type: ignore[no-untyped-def]
        """Split an `error_norms` result into L2 and H1 parts."""
        l2 = {k[3:]: v for k, v in errors.items() if k.startswith("l2_")}
        h1 = {k[3:]: v for k, v in errors.items() if k.startswith("h1_")}
        return cls(l2_errors=l2, h1_errors=h1, **kwargs)

    def row(self) -> Dict[str, object]:
        row: Dict[str, object] = {"label": self.label, "h": self.h, "order": self.order, "dofs": self.n_dofs}
        row.update({f"l2_{k}": v for k, v in self.l2_errors.items()})
        row.update({f"h1_{k}": v for k, v in self.h1_errors.items()})
        for name in ("stab_norm_error", "dissipation", "reciprocal_error", "admissibility_residual"):
            value = getattr(self, name)
            if value is not None:
                row[name] = value
        return row

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([self.row()])

    def to_text(self) -> str:
        lines = [f"Verification report {self.label}".rstrip()]
        if self.h is not None or self.order is not None:
            lines.append(f"  h = {self.h}, order = {self.order}, dofs = {self.n_dofs}")
        for name, value in self.l2_errors.items():
            lines.append(f"  L2 {name}: {value:.6e}")
        for name, value in self.h1_errors.items():
            lines.append(f"  H1 {name}: {value:.6e}")
        for label, value in (
            ("stability norm error", self.stab_norm_error),
            ("dissipation", self.dissipation),
            ("reciprocal error", self.reciprocal_error),
            ("div u1 + div u2 (L2)", self.admissibility_residual),
        ):
            if value is not None:
                lines.append(f"  {label}: {value:.6e}")
        for name, fit in self.slopes.items():
            flag = " (plateau)" if fit.plateau else ""
            lines.append(f"  slope {name} [{fit.kind}, {fit.n_points} points]: {fit.slope:.4f}{flag}")
        return "\n".join(lines) + "\n"


def reports_to_frame(reports: Iterable[VerificationReport]) -> pd.DataFrame:
    """One row per report, columns in first-seen order."""
    rows: List[Dict[str, object]] = [r.row() for r in reports]
    return pd.DataFrame(rows)
