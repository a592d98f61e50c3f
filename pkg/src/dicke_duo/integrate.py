"""Fixed-step classical RK4 for constant linear generators ``x' = K x``.

For a constant generator one RK4 step of size h is the matrix polynomial
``I + hK + (hK)^2/2 + (hK)^3/6 + (hK)^4/24``. Building that map once lets
us take ``n`` steps as a matrix power, so long horizons cost O(log n)
products while still being exactly the RK4 trajectory.
"""

from __future__ import annotations

import math

import numpy as np

from dicke_duo.errors import IntegrationError

DEFAULT_DT = 1e-3
# Keeps |h * lambda| small enough that RK4 phase/amplitude errors stay
# below ~1e-13 per step for strongly shifted (small k0r) generators.
MAX_STEP_NORM = 1e-2


def default_dt(K: np.ndarray, A: float = 1.0) -> float:
    """``1e-3/A`` unless the generator is stiff enough to need a finer step."""
    norm = np.linalg.norm(K, 2)
    dt = DEFAULT_DT / A
    if norm > 0:
        dt = min(dt, MAX_STEP_NORM / norm)
    return dt


def rk4_map(K: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step of size ``h`` as a matrix."""
    hk = h * K
    eye = np.eye(K.shape[0], dtype=complex)
    return eye + hk @ (eye + hk @ (eye / 2 + hk @ (eye / 6 + hk / 24)))


def check_stable(M: np.ndarray, h: float) -> None:
    radius = np.max(np.abs(np.linalg.eigvals(M)))
    if not np.isfinite(radius) or radius > 1.0 + 1e-10:
        raise IntegrationError(
            f"RK4 step dt={h:g} is unstable (amplification {radius:.6g}); "
            f"try dt <= {h / 4:g}"
        )


def n_steps(t: float, dt: float) -> int:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t!r}")
    return max(1, math.ceil(t / dt - 1e-9)) if t > 0 else 0


def propagate_linear(K: np.ndarray, x0: np.ndarray, t: float, dt: float) -> np.ndarray:
    """Integrate ``x' = K x`` to time ``t`` with steps of at most ``dt``.

    The step is shrunk to ``t / ceil(t/dt)`` so the final time is hit exactly.
    """
    n = n_steps(t, dt)
    if n == 0:
        return np.array(x0, dtype=complex, copy=True)
    h = t / n
    M = rk4_map(K, h)
    check_stable(M, h)
    x = np.linalg.matrix_power(M, n) @ x0
    if not np.all(np.isfinite(x)):
        raise IntegrationError(f"RK4 propagation blew up at dt={h:g}; try dt <= {h / 4:g}")
    return x
