"""Two-atom state space and the quantum-jump building blocks.

Everything is expressed in the product basis ``[|11>, |12>, |21>, |22>]``
where ``|ab>`` has atom 1 in level ``a`` and atom 2 in level ``b``
(1 = ground, 2 = excited). Pure states are complex 4-vectors, density
matrices complex 4x4 arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from dicke_duo.coupling import (
    CouplingConstants,
    DipoleGeometry,
    coupling_constants,
    coupling_equal_dipoles,
)
from dicke_duo.errors import OutOfRangeError

SQRT2 = np.sqrt(2.0)

# Roundoff band inside which a negative subradiant rate is clamped to zero.
RATE_CLAMP_TOL = 1e-12

_SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |1><2| in (1, 2) order
_ID2 = np.eye(2, dtype=complex)


def lowering_operator(atom: int) -> np.ndarray:
    """S_i^- = |1>_i <2|_i acting on the two-atom space."""
    if atom == 1:
        return np.kron(_SIGMA_MINUS, _ID2)
    if atom == 2:
        return np.kron(_ID2, _SIGMA_MINUS)
    raise ValueError(f"atom must be 1 or 2, got {atom!r}")


S1 = lowering_operator(1)
S2 = lowering_operator(2)


def dicke_transform() -> np.ndarray:
    """Unitary whose rows are <g|, <s|, <a|, <e| in the product basis.

    ``dicke_transform() @ psi`` gives Dicke amplitudes of ``psi``;
    ``U @ rho @ U.conj().T`` gives a density matrix in the Dicke basis.
    """
    h = 1.0 / SQRT2
    return np.array(
        [
            [1, 0, 0, 0],
            [0, h, h, 0],
            [0, h, -h, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )


def to_dicke(rho: np.ndarray) -> np.ndarray:
    U = dicke_transform()
    return U @ rho @ U.conj().T


def dicke_diagonals(rho: np.ndarray) -> np.ndarray:
    """Populations (gg, ss, aa, ee) of a density matrix."""
    return np.real(np.diag(to_dicke(rho))).copy()


def dicke_state(label: str) -> np.ndarray:
    """One of the Dicke states ``'g'``, ``'s'``, ``'a'``, ``'e'`` in the product basis."""
    idx = "gsae".index(label)
    return dicke_transform().conj().T[:, idx].copy()


@dataclass(frozen=True)
class SystemParams:
    """Physical configuration: Einstein coefficient, Rabi frequencies, couplings.

    ``omega1``/``omega2`` and the couplings are in the same absolute rate units
    as ``A``. Use :meth:`equal_dipoles` for the in-phase, parallel-dipole setup
    where the closed-form results apply.
    """

    A: float
    omega1: complex
    omega2: complex
    coupling: CouplingConstants
    theta: float | None = field(default=None, compare=False)
    k0r: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.A) and self.A > 0):
            raise ValueError(f"A must be positive, got {self.A!r}")
        object.__setattr__(self, "omega1", complex(self.omega1))
        object.__setattr__(self, "omega2", complex(self.omega2))

    @classmethod
    def equal_dipoles(
        cls, omega: float, theta: float, k0r: float, A: float = 1.0
    ) -> "SystemParams":
        """Parallel dipoles, in-phase real Rabi frequency ``omega`` (units of A)."""
        if omega < 0:
            raise ValueError(f"omega must be nonnegative, got {omega!r}")
        c = coupling_equal_dipoles(theta, k0r, A)
        return cls(
            A, omega * A, omega * A, CouplingConstants.symmetric(c), theta=theta, k0r=k0r
        )

    @classmethod
    def from_geometry(
        cls, geom: DipoleGeometry, omega1: complex, omega2: complex, A: float = 1.0
    ) -> "SystemParams":
        return cls(A, omega1, omega2, coupling_constants(geom, A), k0r=geom.k0r)

    @property
    def is_equal_dipole(self) -> bool:
        c = self.coupling
        return (
            c.c12 == c.c21
            and self.omega1 == self.omega2
            and self.omega1.imag == 0
            and self.omega1.real >= 0
        )

    @property
    def omega(self) -> float:
        """Common real Rabi frequency; only meaningful for equal-dipole params."""
        if not self.is_equal_dipole:
            raise OutOfRangeError("closed forms need equal dipoles and an in-phase real Rabi frequency")
        return self.omega1.real

    @property
    def c(self) -> complex:
        if self.coupling.c12 != self.coupling.c21:
            raise OutOfRangeError("C12 != C21; no single coupling constant")
        return self.coupling.c12

    def as_dict(self) -> dict:
        return {
            "A": self.A,
            "omega1": [self.omega1.real, self.omega1.imag],
            "omega2": [self.omega2.real, self.omega2.imag],
            "c12": [self.coupling.c12.real, self.coupling.c12.imag],
            "c21": [self.coupling.c21.real, self.coupling.c21.imag],
            "theta": self.theta,
            "k0r": self.k0r,
        }


def conditional_hamiltonian(p: SystemParams) -> np.ndarray:
    """Non-hermitian generator of the no-emission evolution (hbar = 1).

    H_cond = (1/2i)[A(S1+S1- + S2+S2-) + C12 S1+S2- + C21 S2+S1-] + H_L,
    H_L = (1/2) sum_i (Omega_i S_i+ + conj(Omega_i) S_i-).
    """
    S1p, S2p = S1.conj().T, S2.conj().T
    damping = (
        p.A * (S1p @ S1 + S2p @ S2)
        + p.coupling.c12 * (S1p @ S2)
        + p.coupling.c21 * (S2p @ S1)
    )
    laser = 0.5 * (
        p.omega1 * S1p + np.conj(p.omega1) * S1 + p.omega2 * S2p + np.conj(p.omega2) * S2
    )
    return damping / 2j + laser


def reset_apply(p: SystemParams, rho: np.ndarray) -> np.ndarray:
    """Non-normalized post-emission state R(rho); its trace is the emission rate."""
    c12, c21 = p.coupling.c12, p.coupling.c21
    S1p, S2p = S1.conj().T, S2.conj().T
    return (
        0.5 * (np.conj(c12) + c21) * (S1 @ rho @ S2p)
        + 0.5 * (c12 + np.conj(c21)) * (S2 @ rho @ S1p)
        + p.A * (S1 @ rho @ S1p + S2 @ rho @ S2p)
    )


def reset_normalized(p: SystemParams, rho: np.ndarray) -> np.ndarray:
    r = reset_apply(p, rho)
    tr = np.trace(r).real
    if tr <= 0:
        raise OutOfRangeError("state cannot emit; normalized reset is undefined")
    return r / tr


def emission_rate(p: SystemParams, rho: np.ndarray) -> float:
    """Instantaneous photon emission probability density tr R(rho)."""
    return float(np.trace(reset_apply(p, rho)).real)


@dataclass(frozen=True)
class JumpChannels:
    """Collapse operators R+/R- with their rates A +/- |C12 + conj(C21)|/2."""

    r_plus: np.ndarray
    r_minus: np.ndarray
    rate_plus: float
    rate_minus: float
    phi: float

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Two-channel form of the reset superoperator."""
        rp, rm = self.r_plus, self.r_minus
        return self.rate_plus * (rp @ rho @ rp.conj().T) + self.rate_minus * (
            rm @ rho @ rm.conj().T
        )


def jump_channels(p: SystemParams) -> JumpChannels:
    """Decompose the reset into two pure-state channels for trajectory work.

    The relative phase is ``phi = arg(C12 + conj(C21))``.
    """
    collective = p.coupling.collective
    half = 0.5 * abs(collective)
    phi = float(np.angle(collective)) if collective != 0 else 0.0
    rate_minus = p.A - half
    if rate_minus < 0:
        if rate_minus < -RATE_CLAMP_TOL * p.A:
            raise OutOfRangeError(
                f"subradiant rate {rate_minus!r} is negative: unphysical couplings"
            )
        rate_minus = 0.0
    phase = np.exp(1j * phi)
    return JumpChannels(
        r_plus=(S1 + phase * S2) / SQRT2,
        r_minus=(S1 - phase * S2) / SQRT2,
        rate_plus=p.A + half,
        rate_minus=rate_minus,
        phi=phi,
    )
