# gamma_calculus/domain.py
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True, eq=False)
class GammaNormResult:
    """
    Norma γ al cuadrado de un operador de convolución diagonal.

    value_sq es la suma compensada (k ascendente) de per_mode; tail_sq es la
    cota de truncamiento, None si no es estimable.
    """
    value_sq: float
    tail_sq: Optional[float]
    per_mode: Optional[np.ndarray] = None

    @classmethod
    def from_modes(cls, per_mode: np.ndarray, tail_sq: Optional[float], *, keep_modes: bool = True):
        per_mode = np.asarray(per_mode, dtype=float)
        return cls(
            value_sq=math.fsum(per_mode.tolist()),
            tail_sq=tail_sq,
            per_mode=per_mode if keep_modes else None,
        )

    @property
    def value(self) -> float:
        return math.sqrt(self.value_sq)


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12)


@dataclass(frozen=True)
class IdentityCheck:
    lhs_sq: float
    rhs_sq: float

    @property
    def relative_gap(self) -> float:
        scale = max(abs(self.lhs_sq), abs(self.rhs_sq))
        return 0.0 if scale == 0 else abs(self.lhs_sq - self.rhs_sq) / scale


@dataclass(frozen=True)
class EnvelopeCheck:
    """Constante C ajustada en el n más grueso y peor cociente error/envolvente."""
    theta: float
    constant: float
    worst_ratio: float


@dataclass(frozen=True)
class StepFunction:
    """g constante a trozos en (breaks[i], breaks[i+1]] con valor values[i]."""
    breaks: tuple
    values: tuple

    def __post_init__(self):
        if len(self.breaks) != len(self.values) + 1:
            raise ValueError("breaks debe tener un elemento más que values.")
        if any(b >= a for a, b in zip(self.breaks[1:], self.breaks[:-1])):
            raise ValueError("breaks debe ser estrictamente creciente.")

    def __call__(self, t):
        idx = np.searchsorted(np.asarray(self.breaks), t, side="left") - 1
        vals = np.asarray(self.values, dtype=float)
        inside = (idx >= 0) & (idx < len(self.values))
        return np.where(inside, vals[np.clip(idx, 0, len(self.values) - 1)], 0.0)
