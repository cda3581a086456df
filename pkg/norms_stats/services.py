# norms_stats/services.py
from __future__ import annotations

from typing import Callable, Dict, Iterable, Optional

import numpy as np
from scipy import fft

from spectral_model.domain import GeneratorSpectrum, SpaceIndex
from spectral_model.services import fractional_weight
from .domain import POLICY_ALL_PAIRS, POLICY_CHOICES, MomentEstimate

Norm = Callable[[np.ndarray], np.ndarray]


# ======================================================
# Normas de estado
# ======================================================

def sobolev_norm(u, spec: GeneratorSpectrum, sigma: SpaceIndex):
    """(Σ_k (w−λ_k)^{2σ} u_k²)^{1/2} sobre el último eje (los modos)."""
    weights = fractional_weight(spec.eigenvalues, spec.w, sigma)
    out = np.sqrt(np.sum((np.asarray(u, dtype=float) * weights) ** 2, axis=-1))
    return float(out) if np.ndim(out) == 0 else out


def euclidean_norm(u):
    out = np.sqrt(np.sum(np.asarray(u, dtype=float) ** 2, axis=-1))
    return float(out) if np.ndim(out) == 0 else out


def sobolev(spec: GeneratorSpectrum, sigma: SpaceIndex) -> Norm:
    """Norma de E_σ como callable para holder_seminorm / c_gamma_norm."""
    return lambda u: sobolev_norm(u, spec, sigma)


def _default_norm(values: np.ndarray) -> Norm:
    if values.ndim == 1:
        return np.abs
    return lambda d: np.sqrt(np.sum(d.reshape(d.shape[0], -1) ** 2, axis=1))


def _gaps(L: int, policy: str):
    if policy not in POLICY_CHOICES:
        raise ValueError(f"Política de pares inválida: {policy}")
    if policy == POLICY_ALL_PAIRS:
        return range(1, L)
    gaps, g = [], 1
    while g < L:
        gaps.append(g)
        g *= 2
    return gaps


# ======================================================
# Normas de Hölder en el tiempo
# ======================================================

def holder_seminorm(values, times, gamma: float, norm: Optional[Norm] = None,
                    policy: str = POLICY_ALL_PAIRS) -> float:
    """
    max sobre pares (i<j) seleccionados de norm(v_j − v_i)/(t_j − t_i)^γ.

    values tiene el tiempo en el primer eje. "dyadic-gaps" usa solo saltos
    1, 2, 4, ... (en pasos de la malla) y acota por debajo a "all-pairs".
    """
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    if values.shape[0] < 2:
        raise ValueError("Se necesitan al menos dos tiempos.")
    if values.shape[0] != times.size:
        raise ValueError("values y times deben tener la misma longitud.")
    if gamma < 0:
        raise ValueError("γ debe ser ≥ 0.")
    norm = norm or _default_norm(values)
    best = 0.0
    for g in _gaps(values.shape[0], policy):
        inc = np.asarray(norm(values[g:] - values[:-g]), dtype=float)
        dt = times[g:] - times[:-g]
        best = max(best, float(np.max(inc / dt ** gamma)))
    return best


def c_gamma_norm(values, times, gamma: float, norm: Optional[Norm] = None,
                 policy: str = POLICY_ALL_PAIRS) -> float:
    """sup_i norm(v_i) + seminorma γ-Hölder."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 1:
        raise ValueError("Camino vacío.")
    norm = norm or _default_norm(values)
    sup = float(np.max(norm(values)))
    return sup + holder_seminorm(values, times, gamma, norm, policy)


# ======================================================
# Campo espacial y normas de Hölder en x
# ======================================================

def spatial_field(u, P: int) -> np.ndarray:
    """
    u(x_i) = Σ_k u_k·√2·sin(kπx_i) en x_i = i/P, i = 0..P (extremos en 0).

    Acepta u de forma (K,) o (K, L). Con K ≤ P−1 usa la DST tipo I; si no,
    evaluación directa.
    """
    u = np.asarray(u, dtype=float)
    K = u.shape[0]
    out = np.zeros((P + 1,) + u.shape[1:])
    if K <= P - 1:
        padded = np.zeros((P - 1,) + u.shape[1:])
        padded[:K] = u
        out[1:P] = (np.sqrt(2.0) / 2.0) * fft.dst(padded, type=1, axis=0)
    else:
        i = np.arange(1, P)
        k = np.arange(1, K + 1)
        basis = np.sqrt(2.0) * np.sin(np.pi * np.outer(i, k) / P)
        out[1:P] = np.tensordot(basis, u, axes=(1, 0))
    return out


def space_holder_norm(values, exponent: float, policy: str = POLICY_ALL_PAIRS):
    """
    Norma de C_0^{2δ}[0,1] sobre la malla x_i = i/P:
    sup_i |v_i| + max |v_j − v_i|/|x_j − x_i|^{2δ}.

    Con exponente 0 se usa solo la norma del supremo (C_0 con su norma usual).
    values de forma (P+1,) o (P+1, B); devuelve escalar o arreglo (B,).
    """
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 1:
        raise ValueError("Malla espacial vacía.")
    if not (0 <= exponent < 1):
        raise ValueError("El exponente espacial debe estar en [0, 1).")
    out = np.max(np.abs(values), axis=0)
    if exponent > 0 and values.shape[0] > 1:
        P = values.shape[0] - 1
        semi = np.zeros_like(out)
        for g in _gaps(values.shape[0], policy):
            inc = np.max(np.abs(values[g:] - values[:-g]), axis=0)
            semi = np.maximum(semi, inc / (g / P) ** exponent)
        out = out + semi
    return float(out) if np.ndim(out) == 0 else out


# ======================================================
# Momentos Monte Carlo
# ======================================================

def p_moment(samples: Iterable[float], p: float, *, bootstrap: int = 0, seed: int = 0) -> MomentEstimate:
    """
    (media de s^p)^{1/p} con error estándar por TCL sobre s^p propagado por
    el método delta a través de la raíz p-ésima.

    bootstrap=B > 0 agrega un intervalo percentil 95% con B remuestreos.
    """
    s = np.asarray(list(samples), dtype=float)
    M = s.size
    if M < 2:
        raise ValueError("Se necesitan al menos 2 muestras.")
    if p < 1:
        raise ValueError("p debe ser ≥ 1.")
    if np.any(s < 0):
        raise ValueError("Las muestras deben ser ≥ 0.")
    sp = s ** p
    mean = float(np.mean(sp))
    if mean == 0.0:
        return MomentEstimate(p=p, value=0.0, std_error=0.0, M=M)
    se_mean = float(np.std(sp, ddof=1)) / np.sqrt(M)
    value = mean ** (1.0 / p)
    std_error = (1.0 / p) * mean ** (1.0 / p - 1.0) * se_mean

    ci = None
    if bootstrap:
        rng = np.random.Generator(np.random.Philox(seed))
        idx = rng.integers(0, M, size=(int(bootstrap), M))
        boot = np.mean(sp[idx], axis=1) ** (1.0 / p)
        lo, hi = np.percentile(boot, [2.5, 97.5])
        ci = (float(lo), float(hi))
    return MomentEstimate(p=p, value=value, std_error=float(std_error), M=M, bootstrap_ci=ci)


def moment_ratios(samples: Iterable[float], ps=(1, 2, 4)) -> Dict[float, float]:
    """p_moment(p)/p_moment(2) para cada orden; banda de Kahane-Khintchine."""
    s = np.asarray(list(samples), dtype=float)
    base = p_moment(s, 2).value
    if base == 0:
        return {p: 0.0 for p in ps}
    return {p: p_moment(s, p).value / base for p in ps}
