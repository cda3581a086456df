# norms_stats/domain.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

POLICY_ALL_PAIRS = "all-pairs"
POLICY_DYADIC = "dyadic-gaps"
POLICY_CHOICES = (POLICY_ALL_PAIRS, POLICY_DYADIC)


@dataclass(frozen=True)
class HolderSpec:
    gamma: float = 0.0
    policy: str = POLICY_DYADIC

    def __post_init__(self):
        if not (0 <= self.gamma < 1):
            raise ValueError("γ debe estar en [0, 1).")
        if self.policy not in POLICY_CHOICES:
            raise ValueError(f"Política de pares inválida: {self.policy}")


@dataclass(frozen=True)
class MomentEstimate:
    """(E s^p)^{1/p} estimado con M muestras; error estándar por método delta."""
    p: float
    value: float
    std_error: float
    M: int
    bootstrap_ci: Optional[Tuple[float, float]] = None

    def ci(self, z: float = 1.96) -> Tuple[float, float]:
        if self.bootstrap_ci is not None:
            return self.bootstrap_ci
        return max(self.value - z * self.std_error, 0.0), self.value + z * self.std_error
