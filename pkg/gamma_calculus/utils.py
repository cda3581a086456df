# gamma_calculus/utils.py
"""
Núcleos escalares por modo, en la variable r = t − s (tiempo restante).

Las celdas de la escalera son (jh, (j+1)h] con ancla t_j = (j+1)h; la última
celda puede ser parcial, de largo hp, y conserva su ancla (J+1)h.
"""
from __future__ import annotations

import numpy as np

from spectral_model.utils import full_cells
from splitflow.conf import _cfg

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W

_SERIES = 1e-8


def expm1_ratio(lam, h):
    """(e^{λh} − 1)/λ, con límite h en λ = 0."""
    lam = np.asarray(lam, dtype=float)
    x = lam * h
    small = np.abs(x) < _SERIES
    safe = np.where(small, 1.0, lam)
    return np.where(small, h * (1.0 + 0.5 * x), np.expm1(x) / safe)


def j_kernel(lam, t):
    """J(λ,t) = ∫₀ᵗ e^{2λs} ds."""
    return expm1_ratio(2.0 * np.asarray(lam, dtype=float), t)


def geometric_sum(lam, h, J):
    """Σ_{j=0}^{J−1} e^{2λhj}."""
    lam = np.asarray(lam, dtype=float)
    x = 2.0 * lam * h
    small = np.abs(x) < _SERIES
    den = np.where(small, 1.0, np.expm1(x))
    return np.where(small, J * (1.0 + 0.5 * x * (J - 1)), np.expm1(x * J) / den)


def cell_profile(y, Y):
    """
    G(y, Y) = ∫₀¹ (e^{−Y} − e^{−yξ})² dξ.

    Forma cerrada si |Y| ≥ SMALL_EXPONENT; si no, Gauss-Legendre de 8 nodos
    sobre la diferencia de expm1 (sin cancelación).
    """
    y = np.asarray(y, dtype=float)
    Y = np.broadcast_to(np.asarray(Y, dtype=float), y.shape)
    out = np.empty(y.shape)
    small = np.abs(Y) < _cfg("SMALL_EXPONENT")

    if np.any(small):
        ys, Ys = y[small], Y[small]
        diff = np.expm1(-Ys)[:, None] - np.expm1(-ys[:, None] * _GL_X[None, :])
        out[small] = (diff ** 2) @ _GL_W

    big = ~small
    if np.any(big):
        yb, Yb = y[big], Y[big]
        ysafe = np.where(yb == 0, 1.0, yb)
        a1 = np.where(yb == 0, 1.0, -np.expm1(-yb) / ysafe)
        a2 = np.where(yb == 0, 1.0, -np.expm1(-2.0 * yb) / (2.0 * ysafe))
        out[big] = a2 - 2.0 * np.exp(-Yb) * a1 + np.exp(-2.0 * Yb)
    return out


def discretized_kernel(lam, n: int, t: float, T: float):
    """∫₀ᵗ (e^{λ t_j(r)})² dr por modo."""
    lam = np.asarray(lam, dtype=float)
    h = T / n
    J, hp = full_cells(t, n, T)
    full = h * np.exp(2.0 * lam * h) * geometric_sum(lam, h, J)
    part = hp * np.exp(2.0 * lam * (J + 1) * h) if hp > 0 else 0.0
    return full + part


def error_kernel(lam, n: int, t: float, T: float):
    """∫₀ᵗ (e^{λ t_j(r)} − e^{λr})² dr por modo; exactamente 0 en λ = 0."""
    lam = np.asarray(lam, dtype=float)
    mu = -lam
    h = T / n
    J, hp = full_cells(t, n, T)
    full = h * cell_profile(mu * h, mu * h) * geometric_sum(lam, h, J)
    if hp > 0:
        full = full + hp * cell_profile(mu * hp, mu * h) * np.exp(2.0 * lam * J * h)
    return full


def cross_kernel(lam, n: int, t: float, T: float):
    """∫₀ᵗ e^{λ t_j(r)}·e^{λr} dr por modo."""
    lam = np.asarray(lam, dtype=float)
    h = T / n
    J, hp = full_cells(t, n, T)
    full = np.exp(lam * h) * expm1_ratio(lam, h) * geometric_sum(lam, h, J)
    if hp > 0:
        full = full + np.exp(lam * (2 * J + 1) * h) * expm1_ratio(lam, hp)
    return full
