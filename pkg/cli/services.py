# cli/services.py
from __future__ import annotations

import copy
import json
import logging
from pathlib import Path
from typing import Optional, Sequence

from django.conf import settings

from counterexample.domain import DyadicProfile
from counterexample.services import divergence_passes, divergence_threshold, mc_divergence_estimate
from counterexample.utils import write_divergence_table
from rate_lab.domain import NORM_SPATIAL, NORM_SPECTRAL, SweepConfig
from rate_lab.services import (
    fit_loglog,
    heat_demo,
    heat_theta_max,
    ms_error_sweep,
    pathwise_error_sweep,
    theta_max,
)
from rate_lab.utils import fit_summary, read_fit_points, write_error_table, write_json
from spectral_model.constants import SPECTRUM_DIRICHLET
from spectral_model.domain import GeneratorSpectrum, NoiseModel
from spectral_model.services import dirichlet_spectrum
from splitflow.conf import _cfg
from splitflow.exceptions import ConstraintViolation
from .constants import (
    EXPERIMENT_COUNTEREXAMPLE,
    EXPERIMENT_FIT,
    EXPERIMENT_HEAT,
    EXPERIMENT_MS,
    EXPERIMENT_PATH,
    EXPERIMENT_SELFTEST,
    SWEEP_EXPERIMENTS,
)
from .domain import ExperimentOutcome

logger = logging.getLogger(__name__)


# ======================================================
# Lectura y precedencia de la configuración
# ======================================================

def load_config(path) -> dict:
    """Documento JSON de configuración; errores de lectura → ConstraintViolation."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConstraintViolation(f"No se pudo leer {path}: {exc}", constraint="config legible")
    except json.JSONDecodeError as exc:
        raise ConstraintViolation(f"JSON inválido en {path}: {exc}", constraint="config JSON")
    if not isinstance(data, dict):
        raise ConstraintViolation("La configuración debe ser un objeto JSON.", constraint="config JSON")
    return data


def merge_overrides(data: dict, *, experiment: str, seed: Optional[int] = None,
                    threads: Optional[int] = None, out: Optional[str] = None,
                    input_path: Optional[str] = None) -> dict:
    """
    Aplica flags > entorno (SPLITFLOW_SEED) > archivo. Lo que falte lo
    completan los valores por defecto del serializer.
    """
    merged = copy.deepcopy(data)
    merged["experiment"] = experiment
    for block in ("mc", "output"):
        if not isinstance(merged.get(block, {}), dict):
            raise ConstraintViolation(f"El bloque '{block}' debe ser un objeto.", constraint="config JSON")
        merged.setdefault(block, {})

    env_seed = getattr(settings, "SPLITFLOW_SEED", None)
    if env_seed not in (None, ""):
        try:
            merged["mc"]["seed"] = int(env_seed)
        except (TypeError, ValueError):
            raise ConstraintViolation(f"SPLITFLOW_SEED={env_seed!r} no es entero.", constraint="seed entero")
    if seed is not None:
        merged["mc"]["seed"] = seed
    if threads is not None:
        merged["mc"]["threads"] = threads
    if out is not None:
        merged["output"]["dir"] = out
    if input_path is not None:
        merged["output"]["input"] = input_path
    return merged


# ======================================================
# Objetos de dominio desde la configuración validada
# ======================================================

def build_model(model: dict):
    if model["spectrum"] == SPECTRUM_DIRICHLET:
        spec = dirichlet_spectrum(model["K"])
    else:
        spec = GeneratorSpectrum(model["eigenvalues"], w=model["w"])
    noise = NoiseModel(
        sigma_E=model["sigma_E"],
        beta=model["beta"],
        iota=model["iota"],
        iota_power=model["iota_power"],
        iota_values=tuple(model["iota_values"]) if model.get("iota_values") else None,
    )
    return spec, noise


def build_sweep_config(data: dict) -> SweepConfig:
    spec, noise = build_model(data["model"])
    grid, norm, mc = data["grid"], data["norm"], data["mc"]
    return SweepConfig(
        spec=spec,
        noise=noise,
        n_grid=tuple(grid["n"]),
        T=grid["T"],
        alpha=norm["alpha"],
        gamma=norm["gamma"],
        p=norm["p"],
        m=grid["m"],
        M=mc["M"],
        seed=mc["seed"],
        norm_mode=NORM_SPATIAL if norm["spatial"] else NORM_SPECTRAL,
        delta_space=norm["delta_space"],
        policy=norm["policy"],
        threads=mc["threads"],
        P=norm["P"],
        theta=norm["theta"],
        sup_in_time=norm["sup_in_time"],
        bootstrap=mc["bootstrap"],
    )


def check_feasible(data: dict) -> None:
    """Levanta ConstraintViolation con la desigualdad violada por la configuración."""
    experiment = data["experiment"]
    if experiment in SWEEP_EXPERIMENTS:
        config = build_sweep_config(data)
        if experiment == EXPERIMENT_HEAT:
            heat_theta_max(config)
        else:
            gamma = 0.0 if experiment == EXPERIMENT_MS else config.gamma
            theta_max(config.alpha, config.beta, gamma)
    elif experiment == EXPERIMENT_COUNTEREXAMPLE:
        cx = data["counterexample"]
        DyadicProfile(p=cx["p"], u=cx["u"], r=cx["r"])
        divergence_threshold(cx["p"], cx["u"], cx["r"])
    elif experiment == EXPERIMENT_FIT and not data["output"].get("input"):
        raise ConstraintViolation("fit necesita --input con un CSV.", constraint="--input")


# ======================================================
# Despacho de experimentos
# ======================================================

def _sweep_outcome(experiment, table, fit, tmax, passed) -> ExperimentOutcome:
    return ExperimentOutcome(
        experiment=experiment,
        theta_max=tmax,
        slope=fit.slope,
        r2=fit.r2,
        passed=passed,
        write_table=lambda target: write_error_table(table, target),
    )


def run_ms_sweep(data: dict) -> ExperimentOutcome:
    table = ms_error_sweep(build_sweep_config(data))
    fit = fit_loglog(table.points())
    passed = abs(fit.slope - table.theta_max) <= float(_cfg("MS_SLOPE_TOL"))
    return _sweep_outcome(EXPERIMENT_MS, table, fit, table.theta_max, passed)


def run_path_sweep(data: dict) -> ExperimentOutcome:
    table = pathwise_error_sweep(build_sweep_config(data))
    fit = fit_loglog(table.points())
    passed = fit.slope >= table.theta_max - float(_cfg("MC_SLOPE_TOL"))
    return _sweep_outcome(EXPERIMENT_PATH, table, fit, table.theta_max, passed)


def run_heat_demo(data: dict) -> ExperimentOutcome:
    result = heat_demo(build_sweep_config(data))
    passed = abs(result.fit.slope - result.theta_max) <= float(_cfg("HEAT_SLOPE_TOL"))
    return _sweep_outcome(EXPERIMENT_HEAT, result.table, result.fit, result.theta_max, passed)


def run_counterexample(data: dict) -> ExperimentOutcome:
    cx, mc = data["counterexample"], data["mc"]
    table = mc_divergence_estimate(
        p=cx["p"], u=cx["u"], r=cx["r"], q=cx["q"], n_list=cx["n"], M=cx["M"],
        resolution=cx["resolution"], seed=mc["seed"], threads=mc["threads"],
    )
    fit = fit_loglog([(row.n, row.mc_estimate) for row in table.rows]) if len(table.rows) >= 3 else None
    return ExperimentOutcome(
        experiment=EXPERIMENT_COUNTEREXAMPLE,
        theta_max=None,
        slope=fit.slope if fit else None,
        r2=fit.r2 if fit else None,
        passed=divergence_passes(table),
        write_table=lambda target: write_divergence_table(table, target),
        extra={"threshold": table.threshold, "q": table.q},
    )


def run_fit(data: dict) -> ExperimentOutcome:
    source = data["output"]["input"]
    try:
        points = read_fit_points(source)
    except OSError as exc:
        raise ConstraintViolation(f"No se pudo leer {source}: {exc}", constraint="--input legible")
    except ValueError as exc:
        raise ConstraintViolation(str(exc), constraint="CSV n,error")
    fit = fit_loglog(points)
    return ExperimentOutcome(
        experiment=EXPERIMENT_FIT,
        theta_max=None,
        slope=fit.slope,
        r2=fit.r2,
        passed=fit.r2 >= float(_cfg("FIT_MIN_R2")),
        extra={"fit": fit_summary(fit), "input": str(source)},
    )


def run_selftest_experiment(data: dict) -> ExperimentOutcome:
    from .selftest import run_selftest

    results = run_selftest()
    failed = [name for name, ok in results if not ok]
    return ExperimentOutcome(
        experiment=EXPERIMENT_SELFTEST,
        theta_max=None,
        slope=None,
        r2=None,
        passed=not failed,
        extra={"checks": len(results), "failed": failed},
    )


RUNNERS = {
    EXPERIMENT_MS: run_ms_sweep,
    EXPERIMENT_PATH: run_path_sweep,
    EXPERIMENT_HEAT: run_heat_demo,
    EXPERIMENT_COUNTEREXAMPLE: run_counterexample,
    EXPERIMENT_FIT: run_fit,
    EXPERIMENT_SELFTEST: run_selftest_experiment,
}


def run_experiment(data: dict) -> ExperimentOutcome:
    logger.info("Ejecutando %s", data["experiment"])
    return RUNNERS[data["experiment"]](data)


def write_outputs(outcome: ExperimentOutcome, data: dict, *, runtime_s: float, timestamp: str) -> dict:
    """CSV (si el experimento tiene tabla) y resumen JSON en output.dir."""
    out_dir = Path(data["output"]["dir"])
    stem = data["output"]["stem"] or outcome.experiment
    written = {}
    if outcome.write_table is not None:
        written["csv"] = outcome.write_table(out_dir / f"{stem}.csv")
    summary = outcome.summary(runtime_s, timestamp)
    summary["seed"] = data["mc"]["seed"]
    written["json"] = write_json(out_dir / f"{stem}.json", summary)
    return written


# ======================================================
# Entrada programática
# ======================================================

def run(argv: Sequence[str]) -> int:
    """
    Ejecuta `splitflow <experimento> [flags]` y devuelve el código de salida:
    0 éxito, 1 selftest fallido, 2 restricción violada o configuración
    inválida, 3 falla numérica.
    """
    from .management.commands.splitflow import Command

    try:
        Command().run_from_argv(["manage.py", "splitflow", *argv])
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0
