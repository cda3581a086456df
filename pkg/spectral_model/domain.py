# spectral_model/domain.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from splitflow.exceptions import ConstraintViolation
from .constants import (
    IOTA_CHOICES, IOTA_CUSTOM, IOTA_ONES, IOTA_POWER,
    SPECTRUM_CUSTOM,
)


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GeneratorSpectrum:
    """
    Espectro del generador diagonal A: autovalores λ_k (k = 1..K) y el
    desplazamiento w que define E_σ = D((w−A)^σ).
    """
    eigenvalues: np.ndarray
    w: float = 0.0
    kind: str = SPECTRUM_CUSTOM

    def __post_init__(self):
        lam = _frozen_array(self.eigenvalues)
        if lam.ndim != 1 or lam.size == 0:
            raise ConstraintViolation("El espectro necesita al menos un modo.", constraint="K≥1")
        if not np.all(np.isfinite(lam)):
            raise ConstraintViolation("Autovalores no finitos.", constraint="λ_k finito")
        if self.w < 0:
            raise ConstraintViolation("El desplazamiento w debe ser ≥ 0.", constraint="w≥0")
        if np.any(lam >= self.w):
            raise ConstraintViolation(
                f"Se requiere λ_k < w (w={self.w}, max λ={lam.max()}).", constraint="λ_k<w"
            )
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def K(self) -> int:
        return int(self.eigenvalues.size)

    def truncate(self, K: int) -> "GeneratorSpectrum":
        if K < 1 or K > self.K:
            raise ConstraintViolation(f"K={K} fuera de 1..{self.K}.", constraint="K≤spec.K")
        return GeneratorSpectrum(self.eigenvalues[:K], w=self.w, kind=self.kind)


# Exponente tipo Sobolev σ de E_σ; σ < 0 codifica espacios de extrapolación.
SpaceIndex = float


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """
    Ruido W: movimiento browniano en E_β con pesos de inclusión ι_k.

    - iota="ones": ι_k = 1 (ruido blanco espacio-tiempo).
    - iota="power": ι_k = k^{-iota_power}.
    - iota="custom": pesos explícitos en iota_values (la cola queda "desconocida").
    """
    sigma_E: SpaceIndex = -0.3
    beta: float = 0.0
    iota: str = IOTA_ONES
    iota_power: float = 0.0
    iota_values: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.iota not in IOTA_CHOICES:
            raise ConstraintViolation(f"Regla ι inválida: {self.iota}", constraint="ι∈{ones,power,custom}")
        if self.beta < 0:
            raise ConstraintViolation("β debe ser ≥ 0.", constraint="β≥0")
        if self.iota == IOTA_CUSTOM:
            if not self.iota_values:
                raise ConstraintViolation("iota_values es requerido para ι custom.", constraint="ι custom")
            if any(v < 0 for v in self.iota_values):
                raise ConstraintViolation("Los pesos ι_k deben ser ≥ 0.", constraint="ι_k≥0")
            object.__setattr__(self, "iota_values", tuple(float(v) for v in self.iota_values))

    @property
    def has_power_law(self) -> bool:
        return self.iota in (IOTA_ONES, IOTA_POWER)

    @property
    def decay(self) -> float:
        # exponente a de ι_k = k^{-a}
        return self.iota_power if self.iota == IOTA_POWER else 0.0

    def weights(self, K: int) -> np.ndarray:
        if self.iota == IOTA_ONES:
            return np.ones(K)
        if self.iota == IOTA_POWER:
            return np.arange(1, K + 1, dtype=float) ** (-self.iota_power)
        vals = np.asarray(self.iota_values, dtype=float)
        if vals.size < K:
            raise ConstraintViolation(
                f"Se dieron {vals.size} pesos ι para K={K} modos.", constraint="len(ι)≥K"
            )
        return vals[:K]


@dataclass(frozen=True)
class GridSpec:
    """Malla gruesa t_j = jT/n anidada en la malla fina t_i = iT/m (n | m)."""
    T: float
    n: int
    m: int

    def __post_init__(self):
        if not self.T > 0:
            raise ConstraintViolation("T debe ser > 0.", constraint="T>0")
        if self.n < 1 or self.m < 1:
            raise ConstraintViolation("n y m deben ser ≥ 1.", constraint="n,m≥1")
        if self.m % self.n:
            raise ConstraintViolation(f"n={self.n} no divide m={self.m}.", constraint="n|m")

    @property
    def R(self) -> int:
        return self.m // self.n

    @property
    def delta(self) -> float:
        return self.T / self.m

    @property
    def dt(self) -> float:
        return self.T / self.n

    @property
    def coarse_times(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.dt

    @property
    def fine_times(self) -> np.ndarray:
        return np.arange(self.m + 1) * self.delta

    def with_n(self, n: int) -> "GridSpec":
        return GridSpec(self.T, n, self.m)


@dataclass(frozen=True)
class AdmissibilityReport:
    finite: bool
    partial_sum: float
    tail_estimate: Optional[float]  # None = cola desconocida (ι custom o espectro no Dirichlet)
    exponent: Optional[float] = None  # e en Σ k^{-e}; converge si e > 1


@dataclass(frozen=True)
class AnalyticBound:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12)
