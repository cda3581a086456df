# counterexample/services.py
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence

import numpy as np
from scipy import sparse
from scipy.special import gamma as gamma_fn

from norms_stats.services import p_moment
from path_sim.services import normal_block, path_seed
from splitflow.conf import _cfg
from splitflow.exceptions import ConstraintViolation
from .constants import EXACT_LEVELS, EXTRA_LEVELS, REFINE_BITS
from .domain import (
    DivergenceRow, DivergenceTable, DyadicProfile, ExactMoment, FieldOperator,
    LevelOperator, SGrid, SparseVec,
)

logger = logging.getLogger(__name__)


# ======================================================
# Perfil diádico y momentos exactos
# ======================================================

def _level_index(t, k: int, profile: DyadicProfile):
    """(j, válido) del nivel k para t escalar o arreglo."""
    t = np.asarray(t, dtype=float)
    half = 2 ** (k - 1)
    j = np.ceil((t * 2.0 ** k - 1.0) / 2.0).astype(np.int64) - 1
    valid = (j >= 0) & (j < half)
    valid &= t <= (2 * j + 1) * 2.0 ** (-k) + profile.window(k)
    return j, valid


def eval_profile(t: float, profile: DyadicProfile) -> SparseVec:
    """f(t) como vector disperso; a lo sumo una entrada por nivel."""
    if not 0.0 < t < 1.0:
        return SparseVec()
    indices, values = [], []
    for k in range(1, profile.k_max + 1):
        j, valid = _level_index(t, k, profile)
        if valid:
            indices.append(int(profile.coordinate(k, int(j))))
            values.append(profile.scale(k))
    return SparseVec(indices=tuple(indices), values=tuple(values))


def gaussian_abs_moment(p: float) -> float:
    """E|γ|^p = 2^{p/2} Γ((p+1)/2)/√π para γ ~ N(0,1)."""
    return float(2.0 ** (p / 2.0) * gamma_fn((p + 1.0) / 2.0) / math.sqrt(math.pi))


def exact_integral_moment(profile: DyadicProfile) -> ExactMoment:
    """
    E‖∫₀¹ f dW‖_{ℓ^p}^p = Σ_k 2^{k−1}·2^{−rk}·2^{−ukp/2}·E|γ|^p.

    Los términos forman una serie geométrica de razón ρ = 2^{1−r−up/2} < 1;
    tail_bound acota lo que falta desde k_max + 1.
    """
    p, u, r = profile.p, profile.u, profile.r
    E = gaussian_abs_moment(p)
    ks = np.arange(1, profile.k_max + 1, dtype=float)
    terms = 2.0 ** (ks - 1.0 - r * ks - u * ks * p / 2.0) * E
    rho = 2.0 ** (1.0 - r - u * p / 2.0)
    return ExactMoment(value=math.fsum(terms), tail_bound=float(terms[-1] * rho / (1.0 - rho)))


# ======================================================
# Malla en s y operador del campo discretizado
# ======================================================

def build_s_grid(n: int, resolution: int, profile: DyadicProfile, *, refine_bits: int = REFINE_BITS) -> SGrid:
    """
    Malla en [−1, 1]: uniforme con `resolution` celdas más, para cada
    desplazamiento i/N, los puntos i/N + 2^{−un−G}, i/N + 2^{−uℓ} e
    i/N + 2^{−uℓ}(1 + 2^{−G}) (ℓ = 1..n) donde el campo salta.
    Pesos trapezoidales.
    """
    if n < 1 or resolution < 1:
        raise ValueError("n y resolution deben ser ≥ 1.")
    N = 2 ** n
    u = profile.u
    shifts = np.arange(-N, N) / N
    offsets = [2.0 ** (-u * n - refine_bits)]
    for ell in range(1, n + 1):
        w = 2.0 ** (-u * ell)
        offsets += [w, w * (1.0 + 2.0 ** (-refine_bits))]
    pts = np.concatenate([
        np.linspace(-1.0, 1.0, resolution + 1),
        shifts,
        (shifts[:, None] + np.asarray(offsets)[None, :]).ravel(),
    ])
    pts = np.unique(pts[(pts >= -1.0) & (pts <= 1.0)])
    gaps = np.diff(pts)
    weights = np.zeros_like(pts)
    weights[:-1] += gaps / 2.0
    weights[1:] += gaps / 2.0
    return SGrid(points=pts, weights=weights)


def field_operator(N: int, points, profile: DyadicProfile) -> FieldOperator:
    """
    X_N(s) = Σ_{k=1}^{N} f(k/N + s)·Δw_k como operador lineal por nivel:
    filas = pares (s, j) alcanzados, columna k−1 = incremento Δw_k.
    """
    points = np.asarray(points, dtype=float)
    S = points.size
    ks = np.arange(1, N + 1) / N
    chunk = max(1, int(_cfg("FIELD_BLOCK")) // N)
    levels = []
    for level in range(1, profile.k_max + 1):
        half = 2 ** (level - 1)
        s_idx, k_idx, j_idx = [], [], []
        for lo in range(0, S, chunk):
            t = points[lo:lo + chunk, None] + ks[None, :]
            j, valid = _level_index(t, level, profile)
            rows, cols = np.nonzero(valid)
            s_idx.append(rows + lo)
            k_idx.append(cols)
            j_idx.append(j[rows, cols])
        s_idx = np.concatenate(s_idx)
        if s_idx.size == 0:
            continue
        keys = s_idx.astype(np.int64) * half + np.concatenate(j_idx)
        ukeys, inverse = np.unique(keys, return_inverse=True)
        R = ukeys.size
        hits = sparse.csr_matrix(
            (np.ones(keys.size), (inverse, np.concatenate(k_idx))), shape=(R, N))
        row_s = ukeys // half
        gather = sparse.csr_matrix((np.ones(R), (row_s, np.arange(R))), shape=(S, R))
        levels.append(LevelOperator(
            level=level, scale=profile.scale(level), hits=hits,
            row_s=row_s, row_j=ukeys % half, gather=gather,
        ))
    return FieldOperator(N=N, points=points, profile=profile, levels=levels)


def field_lp_pow(operator: FieldOperator, dw: np.ndarray) -> np.ndarray:
    """‖X_N(s)‖_p^p en cada punto; dw de forma (N,) o (N, B)."""
    dw = np.asarray(dw, dtype=float)
    flat = dw.ndim == 1
    block = dw[:, None] if flat else dw
    if block.shape[0] != operator.N:
        raise ValueError(f"Se esperaban {operator.N} incrementos.")
    p = operator.profile.p
    out = np.zeros((operator.points.size, block.shape[1]))
    for lv in operator.levels:
        vals = lv.hits @ block
        out += (lv.gather @ np.abs(vals) ** p) * lv.scale ** p
    return out[:, 0] if flat else out


def expected_lp_pow(operator: FieldOperator) -> np.ndarray:
    """E‖X_N(s)‖_p^p exacto: cada fila es N(0, hits/N) escalada."""
    p = operator.profile.p
    E = gaussian_abs_moment(p)
    out = np.zeros(operator.points.size)
    for lv in operator.levels:
        counts = np.diff(lv.hits.indptr).astype(float)
        out += lv.gather @ ((counts / operator.N) ** (p / 2.0)) * lv.scale ** p * E
    return out


def simulate_discretized_field(dw: Sequence[float], points, profile: DyadicProfile) -> List[SparseVec]:
    """
    X_N(s) = Σ_{k=1}^{N} f(k/N + s)·Δw_k para cada s, como vectores dispersos
    (se omiten coordenadas nulas). Recorre filas en Python: pensado para
    mallas pequeñas.
    """
    dw = np.asarray(dw, dtype=float)
    operator = field_operator(dw.size, points, profile)
    entries = [dict() for _ in range(operator.points.size)]
    for lv in operator.levels:
        vals = (lv.hits @ dw) * lv.scale
        coords = profile.coordinate(lv.level, lv.row_j)
        for s, c, v in zip(lv.row_s, coords, vals):
            if v != 0.0:
                entries[int(s)][int(c)] = float(v)
    return [
        SparseVec(indices=tuple(sorted(e)), values=tuple(e[i] for i in sorted(e)))
        for e in entries
    ]


def lq_lp_norm(field, weights, p: float, q: float) -> float:
    """
    (Σ_s w_s ‖X(s)‖_p^q)^{1/q}. `field` es una secuencia de SparseVec o un
    arreglo de normas ℓ^p ya calculadas.
    """
    if len(field) == 0:
        raise ValueError("Campo vacío.")
    if len(field) and isinstance(field[0], SparseVec):
        norms = np.array([v.norm(p) for v in field])
    else:
        norms = np.asarray(field, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if norms.shape != weights.shape:
        raise ValueError("field y weights deben tener la misma longitud.")
    return float(np.sum(weights * norms ** q) ** (1.0 / q))


# ======================================================
# Cotas cerradas
# ======================================================

def divergence_threshold(p: float, u: float, r: float) -> float:
    """q a partir del cual la cota inferior deja de decaer en n: up/(1−r−p/2)."""
    denom = 1.0 - r - p / 2.0
    if denom <= 0:
        raise ConstraintViolation(f"1−r−p/2 = {denom} ≤ 0.", constraint="r<1-p/2")
    return u * p / denom


def lower_bound(n: int, p: float, u: float, r: float, q: float) -> float:
    """2^{−un−1}·2^{n(1−r−p/2)q/p}·(E|γ|^p)^{q/p}."""
    E = gaussian_abs_moment(p)
    return 2.0 ** (-u * n - 1.0 + n * (1.0 - r - p / 2.0) * q / p) * E ** (q / p)


def subwindow_exact(n: int, profile: DyadicProfile, q: float) -> float:
    """
    2^{−un}·(Σ_{ℓ≤n} 2^{ℓ−1−rℓ}·2^{−np/2}·E|γ|^p)^{q/p}.

    Cuenta un solo incremento por ventana del nivel ℓ en s = 2^{−un−G}: es
    2^{−un}·(E‖X_N(s)‖_p^p)^{q/p} mientras 2^{−n} > 2^{−u}, y cota inferior
    cuando alguna ventana abarca dos incrementos.
    """
    p, r = profile.p, profile.r
    E = gaussian_abs_moment(p)
    inner = math.fsum(2.0 ** (ell - 1 - r * ell - n * p / 2.0) for ell in range(1, n + 1)) * E
    return 2.0 ** (-profile.u * n) * inner ** (q / p)


# ======================================================
# Estimación Monte Carlo de la divergencia
# ======================================================

def _fine_increments(seed: int, M: int, N: int, threads: int) -> np.ndarray:
    """Incrementos N(0, 1/N) de M caminos, forma (N, M); un flujo por muestra."""
    def work(sample):
        return normal_block(path_seed(seed, sample), 0, 0, N // 2).ravel() / math.sqrt(N)

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        return np.column_stack(list(pool.map(work, range(M))))


def _lp_pow_paths(operator: FieldOperator, dw: np.ndarray, threads: int) -> np.ndarray:
    M = dw.shape[1]
    batch = max(1, min(M, int(_cfg("FIELD_BLOCK")) // max(1, operator.rows)))
    starts = range(0, M, batch)
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        parts = list(pool.map(lambda lo: field_lp_pow(operator, dw[:, lo:lo + batch]), starts))
    return np.hstack(parts)


def mc_divergence_estimate(p: float, u: float, r: float, q: float, n_list: Sequence[int],
                           M: int, resolution: int, seed: int, *, threads: int = 1,
                           refine_bits: int = REFINE_BITS) -> DivergenceTable:
    """
    Para cada n: estimación de E‖X_N‖^p_{L^q(−1,1;ℓ^p)} con IC 95%, la
    cantidad de la subventana (0, 2^{−un}] y las cotas cerradas.

    Números aleatorios comunes: los incrementos se muestrean a la resolución
    del mayor n y se agregan para los demás.
    """
    n_list = sorted({int(n) for n in n_list})
    if not n_list or n_list[0] < 1:
        raise ConstraintViolation("n debe ser ≥ 1.", constraint="n≥1")
    if M < 2:
        raise ConstraintViolation("Se necesitan al menos 2 caminos.", constraint="M≥2")
    DyadicProfile(p=p, u=u, r=r)  # valida p, u, r
    threshold = divergence_threshold(p, u, r)
    if q <= threshold:
        logger.info("q=%.4g ≤ umbral %.4g: la cota inferior no diverge.", q, threshold)

    exact = exact_integral_moment(DyadicProfile(p=p, u=u, r=r, k_max=EXACT_LEVELS)).value
    N_max = 2 ** n_list[-1]
    fine = _fine_increments(seed, M, N_max, threads)

    rows = []
    for n in n_list:
        N = 2 ** n
        profile = DyadicProfile(p=p, u=u, r=r, k_max=n + EXTRA_LEVELS)
        dw = fine.reshape(N, N_max // N, M).sum(axis=1)
        grid = build_s_grid(n, resolution, profile, refine_bits=refine_bits)
        operator = field_operator(N, grid.points, profile)
        lp_pow = _lp_pow_paths(operator, dw, threads)

        per_path = (grid.weights @ lp_pow ** (q / p)) ** (p / q)
        est = p_moment(per_path, 1.0)
        lo, hi = est.ci()

        star = grid.index_of(2.0 ** (-u * n - refine_bits))
        window = 2.0 ** (-u * n)
        sub = p_moment(lp_pow[star] ** (1.0 / p), p)
        quantity = window * sub.value ** q
        spread = 1.96 * window * q * sub.value ** (q - 1.0) * sub.std_error

        rows.append(DivergenceRow(
            n=n, mc_estimate=est.value, ci_low=lo, ci_high=hi,
            subwindow_quantity=quantity, lower_bound=lower_bound(n, p, u, r, q),
            exact_moment=exact, subwindow_exact=subwindow_exact(n, profile, q),
            subwindow_ci_low=max(quantity - spread, 0.0), subwindow_ci_high=quantity + spread,
        ))
        logger.info("counterexample n=%d estimate=%.6e subwindow=%.6e", n, est.value, quantity)
    return DivergenceTable(p=p, u=u, r=r, q=q, threshold=threshold, rows=rows)


def divergence_passes(table: DivergenceTable) -> bool:
    """Estimación creciente en n y subventana ≥ cota inferior dentro del IC."""
    est = [row.mc_estimate for row in table.rows]
    increasing = all(b > a for a, b in zip(est, est[1:]))
    covered = all(row.subwindow_ci_high >= row.lower_bound for row in table.rows)
    return increasing and covered
