# spectral_model/services.py
from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from splitflow.exceptions import ConstraintViolation
from .constants import PI2, SPECTRUM_DIRICHLET
from .domain import AdmissibilityReport, AnalyticBound, GeneratorSpectrum, NoiseModel, SpaceIndex
from .utils import cell_index

logger = logging.getLogger(__name__)


# ======================================================
# Espectro y factores escalares del semigrupo
# ======================================================

def dirichlet_spectrum(K: int) -> GeneratorSpectrum:
    """
    Laplaciano de Dirichlet en (0,1): λ_k = −π²k², w = 0,
    autofunciones e_k(x) = √2·sin(kπx).
    """
    if K is None or int(K) < 1:
        raise ConstraintViolation("K debe ser ≥ 1.", constraint="K≥1")
    k = np.arange(1, int(K) + 1, dtype=float)
    return GeneratorSpectrum(-PI2 * k ** 2, w=0.0, kind=SPECTRUM_DIRICHLET)


def semigroup_factor(lam, t):
    """Factor escalar de S(t) sobre el modo con autovalor λ: e^{λt}."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ConstraintViolation("t debe ser ≥ 0.", constraint="t≥0")
    out = np.exp(np.multiply(lam, t))
    return float(out) if np.ndim(out) == 0 else out


def discretized_semigroup_factor(lam, t, n: int, T: float):
    """
    Escalera S^{(n)}(t) = S((T/n)·⌈nt/T⌉); en t = 0 vale 1 (la celda I_0 = {0}).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ConstraintViolation("t debe ser ≥ 0.", constraint="t≥0")
    if np.any(t > T * (1 + 1e-12)):
        raise ConstraintViolation(f"t={t.max()} supera T={T}.", constraint="t≤T")
    j = cell_index(t, n, T)
    out = np.exp(np.multiply(lam, j * (T / n)))
    return float(out) if np.ndim(out) == 0 else out


def fractional_weight(lam, w: float, sigma: SpaceIndex):
    """(w−λ)^σ: peso del modo en la norma de E_σ."""
    gap = np.subtract(w, lam)
    if np.any(gap <= 0):
        raise ConstraintViolation("Se requiere w − λ > 0.", constraint="λ<w")
    out = np.power(gap, sigma)
    return float(out) if np.ndim(out) == 0 else out


def mode_weights_sq(spec: GeneratorSpectrum, noise: NoiseModel, sigma: SpaceIndex) -> np.ndarray:
    """ι_k²·(w−λ_k)^{2σ} para todos los modos del espectro."""
    iota = noise.weights(spec.K)
    return iota ** 2 * fractional_weight(spec.eigenvalues, spec.w, 2.0 * sigma)


# ======================================================
# Admisibilidad del ruido y cotas de cola
# ======================================================

def power_tail(spec: GeneratorSpectrum, noise: NoiseModel, sigma: SpaceIndex, K: int,
               *, extra_decay: float = 0.0, extra_const: float = 1.0):
    """
    Cota por comparación integral de Σ_{k>K} ι_k²(w−λ_k)^{2σ}·c'k^{-extra_decay}.

    Solo para el espectro de Dirichlet con ι potencia: el sumando está acotado
    por c·k^{4σ−2a}, con c = π^{4σ} si σ < 0 y c = (π²+w)^{2σ} si no.

    Returns:
        (exponente e, cota); cota None si la cola no es estimable,
        inf si la serie diverge (e ≤ 1).
    """
    if spec.kind != SPECTRUM_DIRICHLET or not noise.has_power_law:
        return None, None
    e = 2.0 * noise.decay - 4.0 * sigma + extra_decay
    if e <= 1.0:
        return e, float("inf")
    c = np.pi ** (4.0 * sigma) if sigma < 0 else (PI2 + spec.w) ** (2.0 * sigma)
    return e, float(extra_const * c * K ** (1.0 - e) / (e - 1.0))


def check_noise_admissible(spec: GeneratorSpectrum, noise: NoiseModel,
                           K: Optional[int] = None) -> AdmissibilityReport:
    """
    Suma de admisibilidad Σ_{k≤K} ι_k²(w−λ_k)^{2(σ_E+β)} con veredicto de
    convergencia y cota de cola.

    Para ι custom o espectros no Dirichlet la cola se reporta como desconocida
    (None) y el veredicto se limita a la suma truncada.
    """
    K = spec.K if K is None else int(K)
    if K > spec.K:
        raise ConstraintViolation(f"K={K} supera spec.K={spec.K}.", constraint="K≤spec.K")
    sigma = noise.sigma_E + noise.beta
    terms = mode_weights_sq(spec.truncate(K), noise, sigma)
    partial = float(np.sum(terms))
    exponent, tail = power_tail(spec, noise, sigma, K)
    if tail is None:
        logger.warning("Cola de admisibilidad desconocida (ι=%s, espectro=%s); K=%d queda a cargo del usuario.",
                       noise.iota, spec.kind, K)
        finite = bool(np.isfinite(partial))
    else:
        finite = bool(np.isfinite(tail))
    return AdmissibilityReport(finite=finite, partial_sum=partial, tail_estimate=tail, exponent=exponent)


def require_admissible(spec: GeneratorSpectrum, noise: NoiseModel, sigma: SpaceIndex, *, label: str = "σ"):
    """Lanza ConstraintViolation si Σ ι²(w−λ)^{2σ}J(λ,·) diverge (exponente ≤ 1)."""
    exponent, tail = power_tail(spec, noise, sigma, spec.K, extra_decay=2.0)
    if tail is not None and not np.isfinite(tail):
        raise ConstraintViolation(
            f"Norma γ divergente: exponente {exponent:.4g} ≤ 1 para {label}={sigma:.4g}.",
            constraint="Σk^{-e}<∞ (e>1)",
        )


# ======================================================
# Cota analítica de suavizado
# ======================================================

def analytic_bound(spec: GeneratorSpectrum, theta: float, t: float, T: float) -> AnalyticBound:
    """
    Los dos lados de t^θ·sup_k (w−λ_k)^θ e^{λ_k t} ≤ (wT)^θ + (θ/e)^θ,
    válido para θ ≥ 0 y t ∈ (0, T].
    """
    if theta < 0:
        raise ConstraintViolation("θ debe ser ≥ 0.", constraint="θ≥0")
    if not (0 < t <= T):
        raise ConstraintViolation("t fuera de (0, T].", constraint="0<t≤T")
    lam = spec.eigenvalues
    lhs = t ** theta * float(np.max(fractional_weight(lam, spec.w, theta) * np.exp(lam * t)))
    rhs = (spec.w * T) ** theta + (theta / np.e) ** theta
    return AnalyticBound(lhs=lhs, rhs=float(rhs))
