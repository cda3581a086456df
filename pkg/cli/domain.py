# cli/domain.py
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional


@dataclass
class ExperimentOutcome:
    """Resultado de un experimento listo para serializar (CSV opcional + resumen JSON)."""
    experiment: str
    theta_max: Optional[float]
    slope: Optional[float]
    r2: Optional[float]
    passed: bool
    write_table: Optional[Callable[[Path], Path]] = None
    extra: dict = field(default_factory=dict)

    def summary(self, runtime_s: float, timestamp: str) -> dict:
        data = {
            "experiment": self.experiment,
            "theta_max": self.theta_max,
            "slope": self.slope,
            "r2": self.r2,
            "pass": bool(self.passed),
            "runtime_s": runtime_s,
            "timestamp": timestamp,
        }
        data.update(self.extra)
        return data
