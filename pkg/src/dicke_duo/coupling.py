"""Retarded dipole-dipole coupling constants C_ij.

The coupling between the two atoms is the complex rate

    C_ij = (3A/2) e^{ix} [ (1/(ix)) (d_i.d_j - (d_i.r)(r.d_j))
                         + (1/x^2 - 1/(i x^3)) (d_i.d_j - 3 (d_i.r)(r.d_j)) ]

with ``x = k0 r``. Its real part shifts the collective decay rates
(A +/- Re C) and its imaginary part is a level shift of the symmetric and
antisymmetric Dicke states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dicke_duo.errors import OutOfRangeError

#: Smallest accepted k0 r; the near-zone term diverges like (k0 r)^-3.
K0R_MIN = 1e-3

_UNIT_TOL = 1e-12


def _unit(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    if abs(np.linalg.norm(arr) - 1.0) > _UNIT_TOL:
        raise ValueError(f"{name} must have unit norm, got {np.linalg.norm(arr)!r}")
    return arr


def _check_k0r(k0r: float) -> float:
    k0r = float(k0r)
    if not np.isfinite(k0r) or k0r <= 0:
        raise OutOfRangeError(f"k0r must be positive, got {k0r!r}")
    if k0r < K0R_MIN:
        raise OutOfRangeError(
            f"k0r={k0r!r} is below the validated cutoff {K0R_MIN} "
            "(static near-zone regime)"
        )
    return k0r


@dataclass(frozen=True)
class DipoleGeometry:
    """Dipole orientations of both atoms and the interatomic axis.

    All three vectors are unit vectors; ``k0r`` is the atomic distance times
    the transition wave number.
    """

    d1_hat: np.ndarray
    d2_hat: np.ndarray
    r_hat: np.ndarray
    k0r: float

    def __post_init__(self):
        object.__setattr__(self, "d1_hat", _unit(self.d1_hat, "d1_hat"))
        object.__setattr__(self, "d2_hat", _unit(self.d2_hat, "d2_hat"))
        object.__setattr__(self, "r_hat", _unit(self.r_hat, "r_hat"))
        k0r = float(self.k0r)
        if not np.isfinite(k0r) or k0r <= 0:
            raise OutOfRangeError(f"k0r must be positive, got {k0r!r}")
        object.__setattr__(self, "k0r", k0r)

    @classmethod
    def equal_dipoles(cls, theta: float, k0r: float) -> "DipoleGeometry":
        """Parallel dipoles at angle ``theta`` to the interatomic axis (z)."""
        d = np.array([np.sin(theta), 0.0, np.cos(theta)])
        d /= np.linalg.norm(d)
        return cls(d, d.copy(), np.array([0.0, 0.0, 1.0]), k0r)


@dataclass(frozen=True)
class CouplingConstants:
    """The pair (C12, C21) in absolute rate units (same units as A)."""

    c12: complex
    c21: complex

    @classmethod
    def symmetric(cls, c: complex) -> "CouplingConstants":
        return cls(complex(c), complex(c))

    @property
    def collective(self) -> complex:
        """``C12 + conj(C21)``, whose modulus splits the two jump channels."""
        return self.c12 + np.conj(self.c21)


def _bracket(k0r: float, dd: float, dr_rd: float) -> complex:
    # (1/(ix)) a + (1/x^2 - 1/(i x^3)) b, grouped to keep each power separate
    x = k0r
    transverse = dd - dr_rd
    static = dd - 3.0 * dr_rd
    far = transverse / (1j * x)
    near = (1.0 / x**2 + 1j / x**3) * static
    return far + near


def coupling_constant(geom: DipoleGeometry, which=(1, 2), A: float = 1.0) -> complex:
    """Coupling constant C_ij for the atom pair ``which`` = (i, j).

    Raises :class:`OutOfRangeError` for ``k0r < 1e-3``.
    """
    if A <= 0:
        raise ValueError(f"A must be positive, got {A!r}")
    k0r = _check_k0r(geom.k0r)
    which = tuple(which)
    if which == (1, 2):
        di, dj = geom.d1_hat, geom.d2_hat
    elif which == (2, 1):
        di, dj = geom.d2_hat, geom.d1_hat
    else:
        raise ValueError(f"which must be (1, 2) or (2, 1), got {which!r}")
    dd = float(di @ dj)
    dr_rd = float((di @ geom.r_hat) * (geom.r_hat @ dj))
    return complex(1.5 * A * np.exp(1j * k0r) * _bracket(k0r, dd, dr_rd))


def coupling_constants(geom: DipoleGeometry, A: float = 1.0) -> CouplingConstants:
    return CouplingConstants(
        coupling_constant(geom, (1, 2), A), coupling_constant(geom, (2, 1), A)
    )


def coupling_equal_dipoles(theta: float, k0r: float, A: float = 1.0) -> complex:
    """C = C12 = C21 for parallel dipoles at angle ``theta`` to the axis."""
    if A <= 0:
        raise ValueError(f"A must be positive, got {A!r}")
    k0r = _check_k0r(k0r)
    cos2 = np.cos(theta) ** 2
    return complex(1.5 * A * np.exp(1j * k0r) * _bracket(k0r, 1.0, cos2))
