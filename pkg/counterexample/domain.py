# counterexample/domain.py
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from splitflow.exceptions import ConstraintViolation


@dataclass(frozen=True)
class DyadicProfile:
    """
    f(t) = Σ_k Σ_j 2^{−rk/p}·1_{I_{k,j}}(t)·e_{2^{k−1}+j},
    I_{k,j} = ((2j+1)2^{−k}, (2j+1)2^{−k} + 2^{−uk}], k = 1..k_max.
    """
    p: float = 1.0
    u: float = 3.0
    r: float = 0.25
    k_max: int = 8

    def __post_init__(self):
        if not (1 <= self.p < 2):
            raise ConstraintViolation(f"p={self.p} fuera de [1, 2).", constraint="1≤p<2")
        if not self.u > 2 / self.p:
            raise ConstraintViolation(f"u={self.u} no es > 2/p.", constraint="u>2/p")
        if not (0 < self.r < 1 - self.p / 2):
            raise ConstraintViolation(f"r={self.r} fuera de (0, 1−p/2).", constraint="r<1-p/2")
        if self.k_max < 1:
            raise ConstraintViolation("k_max debe ser ≥ 1.", constraint="k_max≥1")

    def scale(self, k: int) -> float:
        return 2.0 ** (-self.r * k / self.p)

    def window(self, k: int) -> float:
        return 2.0 ** (-self.u * k)

    @staticmethod
    def coordinate(k: int, j):
        return 2 ** (k - 1) + j


@dataclass(frozen=True)
class SparseVec:
    """Elemento de ℓ^p como pares (índice, valor) ordenados por índice."""
    indices: Tuple[int, ...] = ()
    values: Tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices y values deben tener la misma longitud.")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("Los índices deben ser distintos y crecientes.")

    def __len__(self):
        return len(self.indices)

    def norm(self, p: float) -> float:
        if not self.values:
            return 0.0
        return float(np.sum(np.abs(self.values) ** p) ** (1.0 / p))

    def as_dict(self):
        return dict(zip(self.indices, self.values))


@dataclass(frozen=True)
class ExactMoment:
    value: float
    tail_bound: float


@dataclass(frozen=True, eq=False)
class SGrid:
    points: np.ndarray
    weights: np.ndarray

    def index_of(self, s: float) -> int:
        i = int(np.searchsorted(self.points, s))
        if i >= self.points.size or not np.isclose(self.points[i], s, rtol=0, atol=1e-15):
            raise ValueError(f"s={s} no pertenece a la malla.")
        return i


@dataclass(frozen=True, eq=False)
class LevelOperator:
    """Filas = pares (s, j) alcanzados en el nivel k; hits es (filas × N)."""
    level: int
    scale: float
    hits: object
    row_s: np.ndarray
    row_j: np.ndarray
    gather: object


@dataclass(frozen=True, eq=False)
class FieldOperator:
    N: int
    points: np.ndarray
    profile: DyadicProfile
    levels: List[LevelOperator] = field(default_factory=list)

    @property
    def rows(self) -> int:
        return sum(lv.row_s.size for lv in self.levels)


@dataclass(frozen=True)
class DivergenceRow:
    n: int
    mc_estimate: float
    ci_low: float
    ci_high: float
    subwindow_quantity: float
    lower_bound: float
    exact_moment: float
    subwindow_exact: float
    subwindow_ci_low: float = 0.0
    subwindow_ci_high: float = 0.0


@dataclass(frozen=True)
class DivergenceTable:
    p: float
    u: float
    r: float
    q: float
    threshold: float
    rows: List[DivergenceRow] = field(default_factory=list)
