# splitflow/conf.py
from django.conf import settings

# valores por defecto si settings.SPLITFLOW no los define
DEFAULTS = {
    "MS_SLOPE_TOL": 0.05,
    "MC_SLOPE_TOL": 0.10,
    "SPATIAL_GRID": 512,
    "REFINEMENT": 4,
    "SMALL_EXPONENT": 0.5,
    "QUAD_LIMIT": 200,
    "FIELD_BLOCK": 4_000_000,
    "HEAT_SLOPE_TOL": 0.10,
    "FIT_MIN_R2": 0.9,
    "CSV_SCHEMA": "splitflow-v1",
}


def _cfg(key, default=None):
    data = getattr(settings, "SPLITFLOW", {})
    return data.get(key, DEFAULTS.get(key, default))
