# splitflow/exceptions.py
from __future__ import annotations

from django.core.exceptions import ValidationError


class ConstraintViolation(ValidationError):
    """
    Parámetros fuera de dominio: precondiciones, admisibilidad del ruido,
    factibilidad de exponentes. `constraint` nombra la desigualdad violada.
    El CLI lo traduce al código de salida 2.
    """

    def __init__(self, message: str, *, constraint: str = ""):
        super().__init__(message, code=constraint or "invalid")
        self.constraint = constraint


class NumericalFailure(Exception):
    """Cuadratura que no converge o valores no finitos (código de salida 3)."""
    pass
