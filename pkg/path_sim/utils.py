# path_sim/utils.py
"""
Volcado binario de FinePath para auditorías de reproducibilidad.

Layout (little-endian):
    cabecera  "<4sHQqdII": magic, versión, seed, sample, T, K, m
    λ_1..λ_K  float64
    por modo k: Δβ_k[0..m) float64, luego η_k[0..m) float64
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from .constants import DUMP_MAGIC, DUMP_VERSION
from .domain import FinePath

_HEADER = struct.Struct("<4sHQqdII")


def dump_fine_path(path: FinePath, target: Union[str, Path]) -> Path:
    target = Path(target)
    with target.open("wb") as fh:
        fh.write(_HEADER.pack(DUMP_MAGIC, DUMP_VERSION, path.seed, path.sample, path.T, path.K, path.m))
        fh.write(np.asarray(path.eigenvalues, dtype="<f8").tobytes())
        for k in range(path.K):
            fh.write(np.asarray(path.increments[k], dtype="<f8").tobytes())
            fh.write(np.asarray(path.convolutions[k], dtype="<f8").tobytes())
    return target


def load_fine_path(source: Union[str, Path]) -> FinePath:
    raw = Path(source).read_bytes()
    magic, version, seed, sample, T, K, m = _HEADER.unpack_from(raw, 0)
    if magic != DUMP_MAGIC or version != DUMP_VERSION:
        raise ValueError(f"Archivo FinePath no reconocido: {magic!r} v{version}")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != K + 2 * K * m:
        raise ValueError("Archivo FinePath truncado.")
    lam = body[:K].astype(float)
    modes = body[K:].reshape(K, 2, m).astype(float)
    return FinePath(
        seed=seed, sample=sample, T=T, eigenvalues=lam,
        increments=modes[:, 0, :], convolutions=modes[:, 1, :],
    )
