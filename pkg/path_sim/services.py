# path_sim/services.py
from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from gamma_calculus.utils import expm1_ratio
from spectral_model.domain import GeneratorSpectrum, GridSpec, NoiseModel
from .constants import SCHUR_SLACK, STEPS_PER_BLOCK, TWO_POW_M53, WORDS_PER_STEP
from .domain import GRID_COARSE, GRID_FINE, CoefficientPath, FinePath

logger = logging.getLogger(__name__)


# ======================================================
# Flujos aleatorios con contador (seed, modo, paso)
# ======================================================

def path_seed(seed: int, sample: int) -> int:
    """Semilla derivada para la muestra `sample` de un barrido Monte Carlo."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(sample),))
    return int(seq.generate_state(1, np.uint64)[0])


def _stream_key(seed: int, mode: int) -> np.ndarray:
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(mode),))
    return seq.generate_state(2, np.uint64)


def normal_block(seed: int, mode: int, start: int, count: int) -> np.ndarray:
    """
    Normales estándar de los pasos start..start+count−1 del modo `mode`,
    forma (count, 2).

    Philox4x64 con clave derivada de (seed, modo); el paso s consume las
    palabras 2s y 2s+1 del flujo, así que la salida depende solo de
    (seed, modo, paso) y no del orden de generación. Box-Muller sobre
    uniformes de 53 bits (u1 ∈ (0,1], u2 ∈ [0,1)).
    """
    if count <= 0:
        return np.empty((0, 2))
    skip = start % STEPS_PER_BLOCK
    bitgen = np.random.Philox(key=_stream_key(seed, mode), counter=start // STEPS_PER_BLOCK)
    words = bitgen.random_raw(WORDS_PER_STEP * (count + skip))[WORDS_PER_STEP * skip:]
    words = (words >> np.uint64(11)).astype(np.float64).reshape(count, WORDS_PER_STEP)
    u1 = (words[:, 0] + 1.0) * TWO_POW_M53
    u2 = words[:, 1] * TWO_POW_M53
    r = np.sqrt(-2.0 * np.log(u1))
    ang = 2.0 * np.pi * u2
    return np.column_stack((r * np.cos(ang), r * np.sin(ang)))


def rng_stream(seed: int, mode: int, step: int) -> Tuple[float, float]:
    """Par de normales estándar independientes para (seed, modo, paso)."""
    z = normal_block(seed, mode, step, 1)[0]
    return float(z[0]), float(z[1])


# ======================================================
# Camino fino acoplado
# ======================================================

def coupled_step_cov(lam: float, delta: float) -> np.ndarray:
    """
    Covarianza de (Δβ, η) en un paso fino: [[δ, c], [c, v]] con
    c = (e^{λδ}−1)/λ y v = (e^{2λδ}−1)/(2λ).
    """
    if not delta > 0:
        raise ValueError("δ debe ser > 0.")
    c = float(expm1_ratio(lam, delta))
    v = float(expm1_ratio(2.0 * lam, delta))
    return np.array([[delta, c], [c, v]])


def sample_fine_path(spec: GeneratorSpectrum, grid: GridSpec, seed: int,
                     *, noise: Optional[NoiseModel] = None, sample: Optional[int] = None) -> FinePath:
    """
    Muestrea el par acoplado por modo y paso fino:

        Δβ = √δ·z₁,   η = (c/δ)·Δβ + √(v − c²/δ)·z₂

    (raíz de Cholesky de coupled_step_cov). Con λ = 0 se fija η = Δβ.
    Con `noise`, la fila k de ambos se escala por ι_k (W = Σ ι_k β_k e_k).
    Si se da `sample`, los flujos usan path_seed(seed, sample).
    """
    lam = spec.eigenvalues
    delta = grid.delta
    stream = int(seed) if sample is None else path_seed(seed, sample)

    c = expm1_ratio(lam, delta)
    v = expm1_ratio(2.0 * lam, delta)
    schur = v - c ** 2 / delta
    bad = schur < -SCHUR_SLACK * np.abs(v)
    if np.any(bad):
        logger.warning("Complemento de Schur negativo en %d modos; se trunca a 0.", int(bad.sum()))
    schur = np.maximum(schur, 0.0)

    z = np.stack([normal_block(stream, k, 0, grid.m) for k in range(spec.K)])
    increments = np.sqrt(delta) * z[:, :, 0]
    coupled = (c / delta)[:, None] * increments + np.sqrt(schur)[:, None] * z[:, :, 1]
    convolutions = np.where((lam == 0)[:, None], increments, coupled)
    if noise is not None:
        iota = noise.weights(spec.K)[:, None]
        increments = iota * increments
        convolutions = iota * convolutions
    return FinePath(
        seed=int(seed),
        sample=-1 if sample is None else int(sample),
        T=grid.T,
        eigenvalues=lam,
        increments=increments,
        convolutions=convolutions,
    )


# ======================================================
# Solución exacta, esquema de splitting y proceso interpolado
# ======================================================

def _check_modes(path: FinePath, spec: Optional[GeneratorSpectrum]):
    if spec is not None and spec.K != path.K:
        raise ValueError(f"El camino tiene {path.K} modos y el espectro {spec.K}.")


def _initial(x, K: int) -> Optional[np.ndarray]:
    if x is None:
        return None
    x = np.asarray(x, dtype=float)
    if x.shape != (K,):
        raise ValueError("El valor inicial debe tener un coeficiente por modo.")
    return x


def exact_path(path: FinePath, spec: Optional[GeneratorSpectrum] = None, *, x=None) -> CoefficientPath:
    """u_0 = x, u_i = e^{λδ}·u_{i−1} + η_i en la malla fina."""
    _check_modes(path, spec)
    lam = path.eigenvalues
    a = np.exp(lam * path.delta)
    u = np.zeros((path.K, path.m + 1))
    for i in range(1, path.m + 1):
        u[:, i] = a * u[:, i - 1] + path.convolutions[:, i - 1]
    times = np.arange(path.m + 1) * path.delta
    x = _initial(x, path.K)
    if x is not None:
        u += x[:, None] * np.exp(lam[:, None] * times[None, :])
    return CoefficientPath(u, times, GRID_FINE)


def splitting_path(path: FinePath, spec: Optional[GeneratorSpectrum], n: int, *, x=None) -> CoefficientPath:
    """
    Esquema de Lie-Trotter en la malla gruesa:
    v_0 = x, v_j = e^{λΔt}(v_{j−1} + ΔB_j).
    """
    _check_modes(path, spec)
    grid = GridSpec(path.T, n, path.m)
    lam = path.eigenvalues
    a = np.exp(lam * grid.dt)
    dB = path.coarse_increments(n)
    v = np.zeros((path.K, n + 1))
    x = _initial(x, path.K)
    if x is not None:
        v[:, 0] = x
    for j in range(1, n + 1):
        v[:, j] = a * (v[:, j - 1] + dB[:, j - 1])
    return CoefficientPath(v, grid.coarse_times, GRID_COARSE)


def discretized_path(path: FinePath, spec: Optional[GeneratorSpectrum], n: int, *, x=None) -> CoefficientPath:
    """
    U⁽ⁿ⁾(iδ) = Σ_{q<i} K(q)·Δβ_{i−q}, K(q) = e^{λΔt(⌊q/R⌋+1)}, por recursión
    en bloques gruesos:

        U_i = e^{λΔt}·(Σ_{q<R} Δβ_{i−q} + U_{i−R})

    Cada bloque de R pasos se calcula vectorizado a partir del anterior.
    """
    _check_modes(path, spec)
    grid = GridSpec(path.T, n, path.m)
    R, K, m = grid.R, path.K, path.m
    a = np.exp(path.eigenvalues * grid.dt)[:, None]

    padded = np.concatenate([np.zeros((K, R - 1)), path.increments], axis=1)
    window = np.lib.stride_tricks.sliding_window_view(padded, R, axis=1).sum(axis=-1)

    u = np.zeros((K, m + 1))
    u[:, 1:R + 1] = a * window[:, 0:R]
    for b in range(1, n):
        lo = b * R + 1
        u[:, lo:lo + R] = a * (window[:, lo - 1:lo - 1 + R] + u[:, lo - R:lo])

    times = grid.fine_times
    x = _initial(x, K)
    if x is not None:
        steps = np.ceil(np.arange(m + 1) / R)
        u += x[:, None] * np.exp(path.eigenvalues[:, None] * grid.dt * steps[None, :])
    return CoefficientPath(u, times, GRID_FINE)


def discretized_path_direct(path: FinePath, spec: Optional[GeneratorSpectrum], n: int) -> CoefficientPath:
    """Suma directa O(m²) del núcleo K(q); referencia para discretized_path."""
    _check_modes(path, spec)
    grid = GridSpec(path.T, n, path.m)
    q = np.arange(path.m)
    kernel = np.exp(path.eigenvalues[:, None] * grid.dt * (q // grid.R + 1)[None, :])
    u = np.zeros((path.K, path.m + 1))
    for i in range(1, path.m + 1):
        u[:, i] = np.sum(kernel[:, :i] * path.increments[:, i - 1::-1], axis=1)
    return CoefficientPath(u, grid.fine_times, GRID_FINE)
