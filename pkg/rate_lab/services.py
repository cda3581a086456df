# rate_lab/services.py
from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from gamma_calculus.services import error_gamma_norm_sq
from norms_stats.services import c_gamma_norm, p_moment, sobolev, space_holder_norm, spatial_field
from path_sim.services import discretized_path, exact_path, sample_fine_path
from spectral_model.constants import SPECTRUM_DIRICHLET
from spectral_model.services import check_noise_admissible
from splitflow.exceptions import ConstraintViolation, NumericalFailure
from .domain import (
    NORM_SPATIAL, AsRateStatistic, ErrorRow, ErrorTable, HeatDemoResult, RateFit, SweepConfig,
)

logger = logging.getLogger(__name__)


# ======================================================
# Exponentes teóricos y ajuste log-log
# ======================================================

def theta_max(alpha: float, beta: float, gamma: float) -> float:
    """
    Supremo de los θ admisibles: θ + γ < 1 y (α−β+θ)⁺ + γ < 1/2,
    es decir min(1−γ, 1/2−γ−(α−β)).
    """
    if min(alpha, beta, gamma) < 0:
        raise ConstraintViolation("α, β y γ deben ser ≥ 0.", constraint="α,β,γ≥0")
    if gamma >= 0.5:
        raise ConstraintViolation(f"γ={gamma} ≥ 1/2.", constraint="γ<1/2")
    value = min(1.0 - gamma, 0.5 - gamma - (alpha - beta))
    if value <= 0:
        raise ConstraintViolation(
            f"Sin θ admisible para α={alpha}, β={beta}, γ={gamma}.", constraint="(α−β+θ)⁺+γ<1/2"
        )
    return float(value)


def fit_loglog(points: Sequence[Tuple[float, float]]) -> RateFit:
    """Mínimos cuadrados de log err = −slope·log n + intercept."""
    pts = [(float(n), float(e)) for n, e in points]
    if len(pts) < 3:
        raise ConstraintViolation("Se necesitan al menos 3 puntos para ajustar.", constraint="≥3 puntos")
    if any(e <= 0 or n <= 0 for n, e in pts):
        raise ConstraintViolation("Los errores y n deben ser > 0.", constraint="err>0")
    x = np.log([n for n, _ in pts])
    y = np.log([e for _, e in pts])
    res = stats.linregress(x, y)
    residuals = y - (res.intercept + res.slope * x)
    r2 = float(np.clip(res.rvalue ** 2, 0.0, 1.0))
    return RateFit(
        slope=float(-res.slope),
        intercept=float(res.intercept),
        r2=r2,
        residuals=tuple(float(r) for r in residuals),
        stderr=float(res.stderr),
    )


def _envelopes(ns: Sequence[int], errors: Sequence[float], thetas: Tuple[float, float]):
    # C ajustada en el n más grueso
    n0, e0 = ns[0], errors[0]
    return [[e0 * (n0 / n) ** th for th in thetas] for n in ns]


def _table(experiment, tmax, ns, errors, cis) -> ErrorTable:
    thetas = (0.5 * tmax, 0.9 * tmax)
    bounds = _envelopes(ns, errors, thetas)
    rows = [
        ErrorRow(n=int(n), error=float(e), ci_low=float(lo), ci_high=float(hi),
                 bound_theta1=float(b[0]), bound_theta2=float(b[1]))
        for n, e, (lo, hi), b in zip(ns, errors, cis, bounds)
    ]
    return ErrorTable(experiment=experiment, theta_max=tmax, thetas=thetas, rows=rows)


# ======================================================
# Barrido determinista en media cuadrática
# ======================================================

def ms_error_sweep(config: SweepConfig) -> ErrorTable:
    """
    Filas (n, ‖R_{Φ⁽ⁿ⁾} − R_Φ‖_γ en t = T, envolventes para θ_max/2 y 0.9·θ_max).
    Sin aleatoriedad: vía isometría de Itô.
    """
    tmax = theta_max(config.alpha, config.beta, 0.0)
    errors = []
    for n in config.n_grid:
        res = error_gamma_norm_sq(config.spec, config.noise, n, config.T, config.alpha, T=config.T, keep_modes=False)
        errors.append(res.value)
        logger.info("ms-sweep n=%d error=%.6e", n, res.value)
    return _table("ms-sweep", tmax, config.n_grid, errors, [(e, e) for e in errors])


# ======================================================
# Barridos Monte Carlo por trayectorias
# ======================================================

def _state_norm(config: SweepConfig):
    if config.norm_mode == NORM_SPATIAL:
        exponent = 2.0 * config.delta_space
        P = config.P

        def norm(coeffs):
            # coeffs: (lotes, K) → campo (P+1, lotes)
            field = spatial_field(np.asarray(coeffs).T, P)
            return space_holder_norm(field, exponent, config.policy)
        return norm
    return sobolev(config.spec, config.noise.sigma_E + config.alpha)


def _time_norm(config: SweepConfig, values: np.ndarray, times: np.ndarray, norm) -> float:
    if config.sup_in_time:
        return float(np.max(norm(values)))
    return c_gamma_norm(values, times, config.gamma, norm, config.policy)


def _path_errors(config: SweepConfig, *, sample: Optional[int]) -> List[float]:
    """Norma C^γ en el tiempo del error U⁽ⁿ⁾ − U para cada n, sobre un camino compartido."""
    path = sample_fine_path(config.spec, config.grid, config.seed, noise=config.noise, sample=sample)
    exact = exact_path(path, config.spec)
    norm = _state_norm(config)
    out = []
    for n in config.n_grid:
        diff = discretized_path(path, config.spec, n) - exact
        value = _time_norm(config, diff.values.T, diff.times, norm)
        if not np.isfinite(value):
            raise NumericalFailure(f"Error no finito en la muestra {sample}, n={n}.")
        out.append(value)
    return out


def _require_admissible(config: SweepConfig):
    report = check_noise_admissible(config.spec, config.noise)
    if not report.finite:
        raise ConstraintViolation(
            f"Ruido no admisible: Σ ι²(w−λ)^{{2(σ_E+β)}} diverge (exponente {report.exponent}).",
            constraint="Σι_k²(w−λ_k)^{2(σ_E+β)}<∞",
        )


def _run_pathwise(config: SweepConfig, tmax: float, experiment: str) -> ErrorTable:
    def work(sample):
        return _path_errors(config, sample=sample)

    with ThreadPoolExecutor(max_workers=max(1, int(config.threads))) as pool:
        per_sample = np.array(list(pool.map(work, range(config.M))))

    errors, cis = [], []
    for col, n in enumerate(config.n_grid):
        if config.M < 2:
            value = float(per_sample[0, col])
            errors.append(value)
            cis.append((value, value))
        else:
            est = p_moment(per_sample[:, col], config.p, bootstrap=config.bootstrap, seed=config.seed)
            errors.append(est.value)
            cis.append(est.ci())
        logger.info("%s n=%d error=%.6e", experiment, n, errors[-1])
    return _table(experiment, tmax, config.n_grid, errors, cis)


def pathwise_error_sweep(config: SweepConfig) -> ErrorTable:
    """
    Para cada n: M muestras de camino compartido, error U⁽ⁿ⁾ − U en la malla
    fina, norma C^γ([0,T]; E_{σ_E+α}) (o espacial C^{2δ}) y momento p-ésimo
    con intervalo de confianza. Las muestras se reparten en `threads` hilos y
    se agregan en orden de muestra.
    """
    tmax = theta_max(config.alpha, config.beta, config.gamma)
    if config.theta is not None and config.theta + config.gamma >= 1:
        raise ConstraintViolation("θ + γ debe ser < 1.", constraint="θ+γ<1")
    _require_admissible(config)
    return _run_pathwise(config, tmax, "path-sweep")


def as_rate_check(config: SweepConfig, theta: float) -> AsRateStatistic:
    """
    sup_n n^θ·‖U⁽ⁿ⁾ − U‖_{C^γ} para una sola semilla (config.seed).
    Finita y sin tendencia creciente si θ < θ_max.
    """
    tmax = theta_max(config.alpha, config.beta, config.gamma)
    if not (0 <= theta < tmax):
        raise ConstraintViolation(f"θ={theta} fuera de [0, θ_max={tmax}).", constraint="θ<θ_max")
    errs = _path_errors(config, sample=None)
    scaled = tuple(float(n ** theta * e) for n, e in zip(config.n_grid, errs))
    return AsRateStatistic(
        seed=config.seed, theta=theta, statistic=max(scaled), scaled=scaled, n_grid=config.n_grid
    )


# ======================================================
# Ecuación del calor en C^γ([0,T]; C_0^{2δ}[0,1])
# ======================================================

def heat_encoding(sigma_E: float, delta_space: float) -> Tuple[float, float]:
    """
    (α, β) tales que theta_max(α, β, γ) = 1/4 − γ − δ: α = δ − σ_E
    (E_{σ_E+α} = E_δ ↪ C_0^{2δ} en el ínfimo) y β = −1/4 − σ_E.
    """
    return delta_space - sigma_E, -0.25 - sigma_E


def heat_theta_max(config: SweepConfig) -> float:
    """Valida el modelo del calor y devuelve θ_max = 1/4 − γ − δ."""
    if config.spec.kind != SPECTRUM_DIRICHLET:
        raise ConstraintViolation("heat-demo requiere el espectro de Dirichlet.", constraint="spectrum=dirichlet")
    if not config.noise.sigma_E < -0.25:
        raise ConstraintViolation(f"σ_E={config.noise.sigma_E} no es < −1/4.", constraint="σ_E<-1/4")
    theta = config.theta or 0.0
    if config.gamma + config.delta_space + theta >= 0.25:
        raise ConstraintViolation(
            f"γ+δ+θ = {config.gamma + config.delta_space + theta:.4g} ≥ 1/4.", constraint="γ+δ+θ<1/4"
        )
    alpha_enc, beta_enc = heat_encoding(config.noise.sigma_E, config.delta_space)
    return theta_max(alpha_enc, beta_enc, config.gamma)


def heat_demo(config: SweepConfig) -> HeatDemoResult:
    """
    Barrido pathwise con norma C^γ en el tiempo de la norma C^{2δ}[0,1] del
    campo reconstruido; pendiente ajustada frente a θ_max = 1/4 − γ − δ.
    """
    tmax = heat_theta_max(config)
    spatial = dataclasses.replace(config, norm_mode=NORM_SPATIAL, sup_in_time=config.gamma == 0)
    _require_admissible(spatial)
    table = _run_pathwise(spatial, tmax, "heat-demo")
    return HeatDemoResult(table=table, fit=fit_loglog(table.points()), theta_max=tmax)
