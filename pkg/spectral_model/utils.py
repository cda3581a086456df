# spectral_model/utils.py
from __future__ import annotations

import numpy as np

from .constants import GRID_SNAP


def cell_index(t, n: int, T: float):
    """
    ⌈nt/T⌉ tolerante al redondeo: si nt/T está a GRID_SNAP (relativo) de un
    entero, se toma ese entero (t_j = jT/n cae en su propia celda).
    """
    x = np.asarray(t, dtype=float) * n / T
    j = np.rint(x)
    snap = np.abs(x - j) <= GRID_SNAP * np.maximum(1.0, np.abs(x))
    return np.where(snap, j, np.ceil(x)).astype(np.int64)


def full_cells(t, n: int, T: float):
    """(número de celdas completas, largo de la celda parcial final) hasta t."""
    h = T / n
    x = np.asarray(t, dtype=float) / h
    j = np.rint(x)
    snap = np.abs(x - j) <= GRID_SNAP * np.maximum(1.0, np.abs(x))
    J = np.where(snap, j, np.floor(x)).astype(np.int64)
    rest = np.where(snap, 0.0, np.asarray(t, dtype=float) - J * h)
    return J, np.maximum(rest, 0.0)
