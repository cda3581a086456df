# gamma_calculus/services.py
from __future__ import annotations

import logging
import math
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from scipy import integrate

from spectral_model.domain import GeneratorSpectrum, NoiseModel
from spectral_model.services import fractional_weight, mode_weights_sq, power_tail, require_admissible
from splitflow.conf import _cfg
from splitflow.exceptions import ConstraintViolation, NumericalFailure
from .domain import BoundCheck, EnvelopeCheck, GammaNormResult, IdentityCheck, StepFunction
from .utils import _GL_W, _GL_X, cross_kernel, discretized_kernel, error_kernel, j_kernel

logger = logging.getLogger(__name__)


def _check_time(t: float, T: Optional[float]) -> float:
    T = t if T is None else T
    if not (0 < t <= T * (1 + 1e-12)):
        raise ConstraintViolation(f"t={t} fuera de (0, T={T}].", constraint="0<t≤T")
    return T


def _weights(spec: GeneratorSpectrum, noise: NoiseModel, alpha: float) -> np.ndarray:
    sigma = noise.sigma_E + alpha
    require_admissible(spec, noise, sigma, label="σ_E+α")
    return mode_weights_sq(spec, noise, sigma)


def _exact_tail(spec: GeneratorSpectrum, noise: NoiseModel, alpha: float) -> Optional[float]:
    # J(λ_k,t) ≤ 1/(2π²k²) en el espectro de Dirichlet
    _, tail = power_tail(
        spec, noise, noise.sigma_E + alpha, spec.K, extra_decay=2.0, extra_const=1.0 / (2.0 * np.pi ** 2)
    )
    if tail is None:
        logger.warning("Cola de truncamiento desconocida para K=%d; se reporta None.", spec.K)
    return tail


def operator_gamma_norm_sq(spec: GeneratorSpectrum, noise: NoiseModel, alpha: float = 0.0) -> float:
    """‖i‖²_{γ(H, E_{σ_E+α})} = Σ_k ι_k²(w−λ_k)^{2(σ_E+α)} (truncado en K)."""
    return math.fsum(mode_weights_sq(spec, noise, noise.sigma_E + alpha).tolist())


# ======================================================
# Normas γ de R_Φ, R_Φ⁽ⁿ⁾ y de su diferencia
# ======================================================

def exact_gamma_norm_sq(spec: GeneratorSpectrum, noise: NoiseModel, t: float, alpha: float,
                        *, T: Optional[float] = None) -> GammaNormResult:
    """
    E‖U(t)‖²_{E_{σ_E+α}} = Σ_k ι_k²(w−λ_k)^{2(σ_E+α)}·J(λ_k, t),
    con J(λ,t) = (e^{2λt}−1)/(2λ) y J(0,t) = t.
    """
    _check_time(t, T)
    per_mode = _weights(spec, noise, alpha) * j_kernel(spec.eigenvalues, t)
    return GammaNormResult.from_modes(per_mode, _exact_tail(spec, noise, alpha))


def discretized_gamma_norm_sq(spec: GeneratorSpectrum, noise: NoiseModel, n: int, t: float, alpha: float,
                              *, T: Optional[float] = None) -> GammaNormResult:
    """
    E‖U⁽ⁿ⁾(t)‖²: por modo, Σ sobre celdas gruesas (completas de largo T/n más
    una parcial final) de |celda|·e^{2λ t_j}.
    """
    T = _check_time(t, T)
    per_mode = _weights(spec, noise, alpha) * discretized_kernel(spec.eigenvalues, n, t, T)
    return GammaNormResult.from_modes(per_mode, _exact_tail(spec, noise, alpha))


def error_gamma_norm_sq(spec: GeneratorSpectrum, noise: NoiseModel, n: int, t: float, alpha: float,
                        *, T: Optional[float] = None, keep_modes: bool = True) -> GammaNormResult:
    """
    ‖R_{Φ⁽ⁿ⁾} − R_Φ‖²_γ = E‖U⁽ⁿ⁾(t) − U(t)‖²_{E_{σ_E+α}}.

    Por celda (a, b] con ancla t_j: ∫_a^b (e^{λt_j} − e^{λr})² dr, evaluado en
    forma cerrada estable (ver gamma_calculus.utils.cell_profile). Los modos
    con λ = 0 aportan exactamente 0.
    """
    T = _check_time(t, T)
    per_mode = _weights(spec, noise, alpha) * error_kernel(spec.eigenvalues, n, t, T)
    if not np.all(np.isfinite(per_mode)):
        raise NumericalFailure("Contribuciones no finitas en la norma γ del error.")
    tail = _exact_tail(spec, noise, alpha)
    # error ≤ 2·exacta + 2·discretizada ≤ 4·exacta
    return GammaNormResult.from_modes(per_mode, None if tail is None else 4.0 * tail, keep_modes=keep_modes)


def cross_gamma_term(spec: GeneratorSpectrum, noise: NoiseModel, n: int, t: float, alpha: float,
                     *, T: Optional[float] = None) -> GammaNormResult:
    """E⟨U⁽ⁿ⁾(t), U(t)⟩: por modo Σ_j e^{λt_j}(e^{λb}−e^{λa})/λ."""
    T = _check_time(t, T)
    per_mode = _weights(spec, noise, alpha) * cross_kernel(spec.eigenvalues, n, t, T)
    return GammaNormResult.from_modes(per_mode, None)


# ======================================================
# Desigualdades y su verificación
# ======================================================

def _quad(func, a, b, **kwargs) -> float:
    out = integrate.quad(func, a, b, full_output=1, limit=_cfg("QUAD_LIMIT"), **kwargs)
    if len(out) > 3:
        raise NumericalFailure(f"quad no convergió en ({a}, {b}): {out[3]}")
    return float(out[0])


def c1_bound_check(lam, iota, interval, sigma_E: float, alpha: float, *, w: float = 0.0) -> BoundCheck:
    """
    Cota para Φ de clase C¹ en (a, b):

        lhs = ‖R_Φ‖_{γ(L²(a,b;H),E)}
        rhs = (b−a)^{1/2}‖Φ(b)‖_γ + ∫_a^b (s−a)^{1/2}‖Φ′(s)‖_γ ds

    con Φ(s) = S(s)i en las coordenadas espectrales. Acepta un modo o varios.
    """
    a, b = map(float, interval)
    if not (0 <= a < b):
        raise ConstraintViolation("Intervalo inválido: se requiere 0 ≤ a < b.", constraint="0≤a<b")
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    iota = np.broadcast_to(np.atleast_1d(np.asarray(iota, dtype=float)), lam.shape)
    wt2 = iota ** 2 * fractional_weight(lam, w, 2.0 * (sigma_E + alpha))

    lhs = math.sqrt(math.fsum((wt2 * np.exp(2.0 * lam * a) * j_kernel(lam, b - a)).tolist()))

    def phi(s):
        return math.sqrt(float(np.sum(wt2 * np.exp(2.0 * lam * s))))

    def dphi(s):
        return math.sqrt(float(np.sum(wt2 * lam ** 2 * np.exp(2.0 * lam * s))))

    # peso algebraico (s−a)^{1/2}(b−s)^0 integrado por QAWS
    integral = _quad(dphi, a, b, weight="alg", wvar=(0.5, 0.0))
    rhs = math.sqrt(b - a) * phi(b) + integral
    return BoundCheck(lhs=lhs, rhs=rhs)


def scalar_multiplier_identity(g: Union[StepFunction, Callable], R_norm_sq: float, *, T: float = 1.0,
                               g_norm_sq: Optional[float] = None, cells: int = 256) -> IdentityCheck:
    """
    ‖t ↦ g(t)R‖²_γ frente a ‖g‖²_{L²(0,T)}·‖R‖²_γ.

    lhs usa la maquinaria de celdas: exacta para g constante a trozos,
    Gauss-Legendre compuesto (8 nodos por celda) para g general.
    rhs usa g_norm_sq si se da; si no, quad adaptativa de g².
    """
    if isinstance(g, StepFunction):
        br = np.clip(np.asarray(g.breaks, dtype=float), 0.0, T)
        lengths = np.diff(br)
        lhs_g = math.fsum((lengths * np.asarray(g.values, dtype=float) ** 2).tolist())
        points = [b for b in g.breaks[1:-1] if 0 < b < T]
    else:
        edges = np.linspace(0.0, T, cells + 1)
        h = np.diff(edges)
        nodes = edges[:-1, None] + h[:, None] * _GL_X[None, :]
        vals = np.asarray(g(nodes), dtype=float) ** 2
        lhs_g = math.fsum((h * (vals @ _GL_W)).tolist())
        points = None

    if g_norm_sq is None:
        g_norm_sq = _quad(lambda s: float(g(s)) ** 2, 0.0, T, points=points)
    return IdentityCheck(lhs_sq=lhs_g * R_norm_sq, rhs_sq=g_norm_sq * R_norm_sq)


# ======================================================
# Errores uniformes en el tiempo y envolventes de tasa
# ======================================================

def uniform_ms_error(spec: GeneratorSpectrum, noise: NoiseModel, n: int, alpha: float,
                     times: Iterable[float], *, T: float = 1.0) -> float:
    """sup_t (E‖U⁽ⁿ⁾(t) − U(t)‖²)^{1/2} sobre la malla de tiempos dada."""
    return max(
        error_gamma_norm_sq(spec, noise, n, t, alpha, T=T, keep_modes=False).value
        for t in times
    )


def rate_envelope_check(spec: GeneratorSpectrum, noise: NoiseModel, alpha: float, theta: float,
                        n_grid: Sequence[int], t_grid: Sequence[float], *, T: float = 1.0) -> EnvelopeCheck:
    """
    Ajusta C en el n más grueso con la envolvente C·n^{−θ}·t^{1/2−(α−β+θ)⁺} y
    reporta el peor cociente error/envolvente en toda la malla (n, t).
    """
    if not n_grid or not t_grid:
        raise ConstraintViolation("Mallas n y t no pueden estar vacías.", constraint="mallas no vacías")
    expo = 0.5 - max(alpha - noise.beta + theta, 0.0)
    n_sorted = sorted(int(n) for n in n_grid)

    def ratio(n, t):
        err = error_gamma_norm_sq(spec, noise, n, t, alpha, T=T, keep_modes=False).value
        return err / (n ** (-theta) * t ** expo)

    constant = max(ratio(n_sorted[0], t) for t in t_grid)
    if constant == 0:
        return EnvelopeCheck(theta=theta, constant=0.0, worst_ratio=0.0)
    worst = max(ratio(n, t) / constant for n in n_sorted for t in t_grid)
    return EnvelopeCheck(theta=theta, constant=constant, worst_ratio=worst)
