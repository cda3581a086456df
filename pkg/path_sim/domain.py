# path_sim/domain.py
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GRID_FINE = "fine"
GRID_COARSE = "coarse"


@dataclass(frozen=True, eq=False)
class FinePath:
    """
    Camino fino compartido: por modo k y paso fino i, el par gaussiano
    acoplado (Δβ_i, η_i) con η_i = ∫ e^{λ_k(t_i−s)} dβ_k(s) sobre la celda.

    increments y convolutions tienen forma (K, m). (seed, sample) es la
    procedencia: con ellos el camino se regenera bit a bit.
    """
    seed: int
    sample: int
    T: float
    eigenvalues: np.ndarray
    increments: np.ndarray
    convolutions: np.ndarray

    @property
    def K(self) -> int:
        return int(self.increments.shape[0])

    @property
    def m(self) -> int:
        return int(self.increments.shape[1])

    @property
    def delta(self) -> float:
        return self.T / self.m

    def coarse_increments(self, n: int) -> np.ndarray:
        """ΔB_j⁽ⁿ⁾: suma de los R = m/n incrementos finos de cada celda gruesa."""
        return self.increments.reshape(self.K, n, self.m // n).sum(axis=2)


@dataclass(frozen=True, eq=False)
class CoefficientPath:
    """Coeficientes espectrales (K, L+1) en los tiempos de la malla indicada."""
    values: np.ndarray
    times: np.ndarray
    grid: str = GRID_FINE

    def __post_init__(self):
        if self.values.shape[-1] != self.times.size:
            raise ValueError("La longitud del camino no coincide con la malla.")

    def __sub__(self, other: "CoefficientPath") -> "CoefficientPath":
        return CoefficientPath(self.values - other.values, self.times, self.grid)

    def at(self, index: int) -> np.ndarray:
        return self.values[:, index]
