"""Ensemble intensity correlation g(tau) via quantum regression.

The normalized reset of the steady state is propagated under the full
Liouvillian and the emission density ``I(tau) = tr R(rho(tau))`` is divided
by the steady-state rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dicke_duo import integrate
from dicke_duo.errors import UndefinedCorrelationError
from dicke_duo.hilbert import SystemParams, reset_apply, reset_normalized
from dicke_duo.master import build_liouvillian, steady_state_numeric, unvec, vec

I_SS_FLOOR = 1e-14


@dataclass(frozen=True)
class CorrelationCurve:
    tau_grid: np.ndarray
    g_values: np.ndarray
    i_ss: float
    params: SystemParams


def _emission_functional(p: SystemParams) -> np.ndarray:
    """Row vector w with ``w @ vec(rho) == tr R(rho)``."""
    w = np.empty(16, dtype=complex)
    for k in range(16):
        basis = np.zeros(16, dtype=complex)
        basis[k] = 1.0
        w[k] = np.trace(reset_apply(p, unvec(basis)))
    return w


def _regression(p: SystemParams, grid: np.ndarray, dt: float | None, efficiency: float):
    ss = steady_state_numeric(p)
    if ss.i_ss < I_SS_FLOOR * p.A:
        raise UndefinedCorrelationError(
            f"steady-state emission rate {ss.i_ss:.3g} vanishes; g(tau) undefined"
        )
    L = build_liouvillian(p)
    if dt is None:
        dt = integrate.default_dt(L.matrix, p.A)
    w = _emission_functional(p)
    x = vec(reset_normalized(p, ss.rho_ss))
    spacing = grid[1] - grid[0] if len(grid) > 1 else 0.0
    steps = max(1, math.ceil(spacing / dt - 1e-9))
    h = spacing / steps
    step_map = None
    if spacing > 0:
        M = integrate.rk4_map(L.matrix, h)
        integrate.check_stable(M, h)
        step_map = np.linalg.matrix_power(M, steps)
    intensity = np.empty(len(grid))
    for i in range(len(grid)):
        if i > 0:
            x = step_map @ x
        intensity[i] = (w @ x).real
    g = (efficiency * intensity) / (efficiency * ss.i_ss)
    return g, ss.i_ss


def g_tau(
    p: SystemParams,
    tau_max: float,
    n_points: int,
    dt: float | None = None,
    detector_efficiency: float = 1.0,
) -> CorrelationCurve:
    """g(tau) on a uniform grid of ``n_points`` over ``[0, tau_max]``.

    ``detector_efficiency`` scales both the delayed emission density and the
    steady-state rate, so it cancels.
    """
    if tau_max <= 0:
        raise ValueError(f"tau_max must be positive, got {tau_max!r}")
    if n_points < 2:
        raise ValueError(f"n_points must be at least 2, got {n_points!r}")
    if not 0 < detector_efficiency <= 1:
        raise ValueError("detector_efficiency must lie in (0, 1]")
    grid = np.linspace(0.0, tau_max, n_points)
    g, i_ss = _regression(p, grid, dt, detector_efficiency)
    return CorrelationCurve(grid, g, i_ss, p)


def g_tau_binned(
    p: SystemParams, bin_edges: np.ndarray, subdivisions: int = 10, dt: float | None = None
) -> np.ndarray:
    """Bin averages of g(tau) over uniform ``bin_edges`` (trapezoid rule).

    This is what a pair-time histogram estimates, as opposed to point values.
    """
    edges = np.asarray(bin_edges, dtype=float)
    n_bins = len(edges) - 1
    width = np.diff(edges)
    if n_bins < 1 or np.any(width <= 0) or not np.allclose(width, width[0], rtol=1e-9):
        raise ValueError("bin_edges must be increasing and uniform")
    grid = np.linspace(edges[0], edges[-1], n_bins * subdivisions + 1)
    if edges[0] != 0.0:
        raise ValueError("bin_edges must start at tau = 0")
    g, _ = _regression(p, grid, dt, 1.0)
    out = np.empty(n_bins)
    for b in range(n_bins):
        chunk = g[b * subdivisions : (b + 1) * subdivisions + 1]
        out[b] = np.trapezoid(chunk) / subdivisions
    return out
