"""Bloch-equation engine and the closed-form steady-state results.

The master equation is ``rho' = -i(H_cond rho - rho H_cond^dag) + R(rho)``.
Density matrices are column-stacked into 16-vectors, ``vec(rho)[i + 4j] =
rho[i, j]``, so the Liouvillian is a dense 16x16 complex matrix.

The ``*_analytic`` functions cover parallel dipoles, in-phase real Rabi
frequency and zero detuning only. They take (A, Omega, C) with ``Omega``
and ``C`` in the same absolute units as ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dicke_duo import integrate
from dicke_duo.errors import (
    DegenerateSteadyStateError,
    OutOfRangeError,
    UndefinedCorrelationError,
)
from dicke_duo.hilbert import (
    S1,
    S2,
    SystemParams,
    conditional_hamiltonian,
    dicke_diagonals,
    emission_rate,
)

_I4 = np.eye(4, dtype=complex)
_TRACE_IDX = (0, 5, 10, 15)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    return np.asarray(v).reshape(4, 4, order="F")


def _sandwich(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> left @ rho @ right`` on column-stacked rho."""
    return np.kron(right.T, left)


@dataclass(frozen=True)
class Liouvillian:
    matrix: np.ndarray
    params: SystemParams

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho))


def build_liouvillian(p: SystemParams) -> Liouvillian:
    H = conditional_hamiltonian(p)
    Hd = H.conj().T
    coherent = -1j * (_sandwich(H, _I4) - _sandwich(_I4, Hd))
    c12, c21 = p.coupling.c12, p.coupling.c21
    S1p, S2p = S1.conj().T, S2.conj().T
    reset = (
        0.5 * (np.conj(c12) + c21) * _sandwich(S1, S2p)
        + 0.5 * (c12 + np.conj(c21)) * _sandwich(S2, S1p)
        + p.A * (_sandwich(S1, S1p) + _sandwich(S2, S2p))
    )
    return Liouvillian(coherent + reset, p)


def propagate(L: Liouvillian, rho0: np.ndarray, t: float, dt: float | None = None) -> np.ndarray:
    """rho(t) by fixed-step RK4; ``dt`` defaults to ``1e-3/A`` (finer if stiff)."""
    if dt is None:
        dt = integrate.default_dt(L.matrix, L.params.A)
    return unvec(integrate.propagate_linear(L.matrix, vec(rho0), t, dt))


def propagation_convergence(
    L: Liouvillian, rho0: np.ndarray, t: float, dt: float | None = None
) -> float:
    """Max-entry change of rho(t) when the step is halved."""
    if dt is None:
        dt = integrate.default_dt(L.matrix, L.params.A)
    full = propagate(L, rho0, t, dt)
    half = propagate(L, rho0, t, dt / 2)
    return float(np.max(np.abs(full - half)))


@dataclass(frozen=True)
class SteadyStateReport:
    rho_ss: np.ndarray
    i_ss: float
    residual: float
    dicke_diagonals: np.ndarray


def _solve_with_trace_row(M: np.ndarray, row: int) -> np.ndarray:
    system = M.copy()
    system[row, :] = 0.0
    system[row, list(_TRACE_IDX)] = 1.0
    rhs = np.zeros(16, dtype=complex)
    rhs[row] = 1.0
    try:
        return np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSteadyStateError(
            "Liouvillian kernel is not one-dimensional (singular system)"
        ) from exc


def steady_state_numeric(p: SystemParams) -> SteadyStateReport:
    """Solve L[rho] = 0, tr rho = 1 by trace-row replacement and dense LU.

    A second solve with a different replaced row detects a degenerate kernel.
    """
    L = build_liouvillian(p)
    M = L.matrix
    x = _solve_with_trace_row(M, _TRACE_IDX[0])
    y = _solve_with_trace_row(M, _TRACE_IDX[-1])
    scale = max(1.0, float(np.max(np.abs(x))))
    if not np.all(np.isfinite(x)) or np.max(np.abs(x - y)) > 1e-8 * scale:
        raise DegenerateSteadyStateError(
            "steady state depends on the replaced row: kernel dimension > 1"
        )
    rho = unvec(x)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    residual = float(np.linalg.norm(M @ vec(rho)))
    return SteadyStateReport(
        rho_ss=rho,
        i_ss=emission_rate(p, rho),
        residual=residual,
        dicke_diagonals=dicke_diagonals(rho),
    )


def _check_regime(A: float, Omega: float) -> None:
    if A <= 0:
        raise ValueError(f"A must be positive, got {A!r}")
    if Omega < 0:
        raise OutOfRangeError(f"Omega must be real and nonnegative, got {Omega!r}")


def steady_state_analytic(A: float, Omega: float, C: complex):
    """Steady-state Dicke populations (gg, ss, aa, ee) and their normalizer N."""
    _check_regime(A, Omega)
    re, im = C.real, C.imag
    coupling_term = A**2 * re * (2 * A + re) + A**2 * im**2
    om2 = Omega**2
    N = (A**2 + 2 * om2) ** 2 + coupling_term
    gg = ((A**2 + om2) ** 2 + coupling_term) / N
    ss = om2 * (2 * A**2 + om2) / N
    ee = om2**2 / N
    return gg, ss, ee, ee, N


def i_ss_analytic(A: float, Omega: float, C: complex) -> float:
    _, ss, aa, ee, _ = steady_state_analytic(A, Omega, C)
    return (A + C.real) * ss + (A - C.real) * aa + 2 * A * ee


def reset_diagonals_analytic(A: float, Omega: float, C: complex):
    """Dicke populations (g, s, a, e) of the normalized post-emission state."""
    _, ss, aa, ee, _ = steady_state_analytic(A, Omega, C)
    i_ss = (A + C.real) * ss + (A - C.real) * aa + 2 * A * ee
    if i_ss <= 0:
        raise UndefinedCorrelationError("no steady-state emission (Omega = 0): reset undefined")
    g = ((A + C.real) * ss + (A - C.real) * aa) / i_ss
    s = (A + C.real) * ee / i_ss
    a = (A - C.real) * ee / i_ss
    return g, s, a, 0.0


def i0_after_reset_analytic(A: float, Omega: float, C: complex) -> float:
    """Emission density right after a steady-state emission."""
    _, _, _, ee, _ = steady_state_analytic(A, Omega, C)
    i_ss = i_ss_analytic(A, Omega, C)
    if i_ss <= 0:
        raise UndefinedCorrelationError("no steady-state emission (Omega = 0)")
    return 2 * (A**2 + C.real**2) * ee / i_ss


def g0_analytic(A: float, Omega: float, C: complex) -> float:
    """Closed-form zero-delay photon correlation g(0)."""
    _check_regime(A, Omega)
    if Omega == 0:
        raise UndefinedCorrelationError("g(0) needs Omega > 0")
    re, im = C.real, C.imag
    prefactor = (A**2 + re**2) / (2 * A**2)
    denom = (2 * Omega**2 + A**2 + A * re) ** 2
    return prefactor * (1 + (A**2 * im**2 - 4 * Omega**2 * A * re) / denom)


def analytic_args(p: SystemParams):
    """(A, Omega, C) for params in the closed-form regime."""
    return p.A, p.omega, p.c
