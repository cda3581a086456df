# rate_lab/domain.py
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from norms_stats.domain import POLICY_CHOICES, POLICY_DYADIC
from spectral_model.domain import GeneratorSpectrum, GridSpec, NoiseModel
from splitflow.conf import _cfg
from splitflow.exceptions import ConstraintViolation

NORM_SPECTRAL = "spectral"
NORM_SPATIAL = "spatial"
NORM_CHOICES = (NORM_SPECTRAL, NORM_SPATIAL)


@dataclass(frozen=True, eq=False)
class SweepConfig:
    """
    Configuración de un barrido de tasas.

    m = None toma m = R·max(n_grid) con R = REFINEMENT. theta es el θ de
    prueba (heat_demo / as_rate_check); None deja solo el θ_max teórico.
    """
    spec: GeneratorSpectrum
    noise: NoiseModel
    n_grid: Tuple[int, ...]
    T: float = 1.0
    alpha: float = 0.0
    gamma: float = 0.0
    p: float = 2.0
    m: Optional[int] = None
    M: int = 200
    seed: int = 20240601
    norm_mode: str = NORM_SPECTRAL
    delta_space: float = 0.0
    policy: str = POLICY_DYADIC
    threads: int = 1
    P: int = 512
    theta: Optional[float] = None
    sup_in_time: bool = False
    bootstrap: int = 0

    def __post_init__(self):
        grid = tuple(sorted(int(n) for n in self.n_grid))
        if not grid or grid[0] < 1:
            raise ConstraintViolation("La malla de n no puede estar vacía.", constraint="n≥1")
        object.__setattr__(self, "n_grid", grid)
        if self.m is None:
            object.__setattr__(self, "m", int(_cfg("REFINEMENT")) * grid[-1])
        for n in grid:
            if self.m % n:
                raise ConstraintViolation(f"n={n} no divide m={self.m}.", constraint="n|m")
        if self.norm_mode not in NORM_CHOICES:
            raise ConstraintViolation(f"Modo de norma inválido: {self.norm_mode}", constraint="norm∈{spectral,spatial}")
        if self.policy not in POLICY_CHOICES:
            raise ConstraintViolation(f"Política inválida: {self.policy}", constraint="policy")
        if self.M < 1:
            raise ConstraintViolation("M debe ser ≥ 1.", constraint="M≥1")
        if self.p < 1:
            raise ConstraintViolation("p debe ser ≥ 1.", constraint="p≥1")

    @property
    def beta(self) -> float:
        return self.noise.beta

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.T, self.n_grid[0], self.m)


@dataclass(frozen=True)
class ErrorRow:
    n: int
    error: float
    ci_low: float
    ci_high: float
    bound_theta1: float
    bound_theta2: float


@dataclass(frozen=True)
class ErrorTable:
    experiment: str
    theta_max: float
    thetas: Tuple[float, float]
    rows: List[ErrorRow] = field(default_factory=list)

    def points(self) -> List[Tuple[int, float]]:
        return [(r.n, r.error) for r in self.rows]


@dataclass(frozen=True)
class RateFit:
    """log err = −slope·log n + intercept."""
    slope: float
    intercept: float
    r2: float
    residuals: Tuple[float, ...]
    stderr: float = 0.0


@dataclass(frozen=True)
class HeatDemoResult:
    table: ErrorTable
    fit: RateFit
    theta_max: float


@dataclass(frozen=True)
class AsRateStatistic:
    """sup_n n^θ·(error pathwise de una sola semilla)."""
    seed: int
    theta: float
    statistic: float
    scaled: Tuple[float, ...]
    n_grid: Sequence[int]
