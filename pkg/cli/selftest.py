# cli/selftest.py
"""Chequeos rápidos de forma cerrada; `splitflow selftest` los corre sin el test runner."""
from __future__ import annotations

import logging
import math
from typing import Callable, List, Tuple

import numpy as np

from counterexample.domain import DyadicProfile
from counterexample.services import (
    divergence_threshold,
    exact_integral_moment,
    gaussian_abs_moment,
    lower_bound,
)
from gamma_calculus.services import c1_bound_check, error_gamma_norm_sq
from norms_stats.services import holder_seminorm, p_moment
from path_sim.services import coupled_step_cov, normal_block, rng_stream
from rate_lab.services import fit_loglog, heat_encoding, theta_max
from spectral_model.domain import GeneratorSpectrum, NoiseModel
from spectral_model.services import dirichlet_spectrum, discretized_semigroup_factor, semigroup_factor

logger = logging.getLogger(__name__)

CHECKS: List[Tuple[str, Callable[[], bool]]] = []


def check(name: str):
    def register(func):
        CHECKS.append((name, func))
        return func
    return register


@check("λ_1 de Dirichlet = −π²")
def _dirichlet():
    return math.isclose(dirichlet_spectrum(1).eigenvalues[0], -math.pi ** 2, rel_tol=1e-14)


@check("factores del semigrupo")
def _semigroup():
    return (
        math.isclose(float(semigroup_factor(-1.0, 1.0)), math.exp(-1.0), rel_tol=1e-14)
        and math.isclose(float(discretized_semigroup_factor(-1.0, 0.3, 4, 1.0)), math.exp(-0.5), rel_tol=1e-14)
    )


@check("error de una celda")
def _single_cell():
    res = error_gamma_norm_sq(GeneratorSpectrum([-1.0]), NoiseModel(sigma_E=0.0), 1, 1.0, 0.0)
    return abs(res.value_sq - 0.1025793) < 1e-7


@check("modo λ=0 sin error")
def _zero_mode():
    res = error_gamma_norm_sq(GeneratorSpectrum([0.0], w=1.0), NoiseModel(sigma_E=0.0), 4, 1.0, 0.0)
    return res.value_sq == 0.0


@check("cota de la derivada C¹ (λ=−1)")
def _c1_bound():
    res = c1_bound_check(-1.0, 1.0, (0.0, 1.0), 0.0, 0.0)
    return res.holds and abs(res.lhs - 0.6575199) < 1e-6


@check("θ_max")
def _theta_max():
    return (
        math.isclose(theta_max(0.0, 0.0, 0.0), 0.5)
        and math.isclose(theta_max(*heat_encoding(-0.3, 0.0), 0.0), 0.25)
    )


@check("ajuste log-log exacto")
def _fit():
    fit = fit_loglog([(n, 3.0 * n ** -0.5) for n in (4, 8, 16, 32, 64)])
    return abs(fit.slope - 0.5) < 1e-12 and abs(fit.r2 - 1.0) < 1e-12


@check("covarianza del paso acoplado con λ=0")
def _coupled_cov():
    return bool(np.allclose(coupled_step_cov(0.0, 0.1), np.full((2, 2), 0.1), rtol=1e-14))


@check("flujo aleatorio por contador")
def _rng():
    block = normal_block(7, 0, 0, 10)
    return rng_stream(7, 0, 5) == (float(block[5, 0]), float(block[5, 1]))


@check("normas de caminos constantes")
def _norms():
    times = np.linspace(0.0, 1.0, 5)
    return (
        holder_seminorm(np.ones((5, 3)), times, 0.3) == 0.0
        and math.isclose(p_moment([2.0, 2.0, 2.0], 2).value, 2.0)
    )


@check("contraejemplo: umbral, cota y momento")
def _counterexample():
    return (
        math.isclose(divergence_threshold(1.0, 3.0, 0.25), 12.0)
        and math.isclose(lower_bound(4, 1.0, 3.0, 0.25, 16.0), 8.0 * gaussian_abs_moment(1.0) ** 16, rel_tol=1e-12)
        and abs(exact_integral_moment(DyadicProfile(k_max=1)).value - 0.2372) < 1e-4
        and math.isclose(gaussian_abs_moment(2.0), 1.0, rel_tol=1e-12)
    )


def run_selftest() -> List[Tuple[str, bool]]:
    results = []
    for name, func in CHECKS:
        try:
            ok = bool(func())
        except Exception:
            logger.exception("selftest: %s lanzó una excepción", name)
            ok = False
        if not ok:
            logger.error("selftest: falló %s", name)
        results.append((name, ok))
    return results
