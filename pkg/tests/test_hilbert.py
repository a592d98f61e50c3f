import numpy as np
import pytest
from scipy.linalg import expm

from dicke_duo.coupling import CouplingConstants, DipoleGeometry
from dicke_duo.errors import OutOfRangeError
from dicke_duo.hilbert import (
    SystemParams,
    conditional_hamiltonian,
    dicke_diagonals,
    dicke_state,
    dicke_transform,
    emission_rate,
    jump_channels,
    lowering_operator,
    reset_apply,
)
from dicke_duo.master import steady_state_numeric
from oracles import dicke_rows, random_hermitian, random_state, random_unit

KET = {name: np.eye(4, dtype=complex)[i] for i, name in enumerate(["11", "12", "21", "22"])}


def _random_params(rng):
    geom = DipoleGeometry(
        random_unit(rng), random_unit(rng), random_unit(rng), 10 ** rng.uniform(-2, 1.5)
    )
    om = rng.normal(size=2) + 1j * rng.normal(size=2)
    return SystemParams.from_geometry(geom, om[0], om[1])


def _no_coupling(omega=0.0):
    return SystemParams(1.0, omega, omega, CouplingConstants(0.0, 0.0))


class TestOperators:
    def test_lowering_examples(self):
        S1, S2 = lowering_operator(1), lowering_operator(2)
        assert np.allclose(S1 @ KET["21"], KET["11"])
        assert np.allclose(S1 @ KET["11"], 0)
        assert np.allclose(S2 @ KET["22"], KET["21"])
        assert np.allclose(S1 @ S2 @ KET["22"], KET["11"])
        assert np.allclose(S1 @ S1, 0) and np.allclose(S2 @ S2, 0)

    def test_bad_atom_index(self):
        with pytest.raises(ValueError):
            lowering_operator(3)

    def test_dicke_transform(self):
        U = dicke_transform()
        assert np.allclose(U, dicke_rows(), atol=1e-15)
        assert np.max(np.abs(U @ U.conj().T - np.eye(4))) < 1e-14
        assert np.allclose(U @ KET["11"], [1, 0, 0, 0])
        s = (KET["12"] + KET["21"]) / np.sqrt(2)
        assert np.allclose(U @ s, [0, 1, 0, 0])
        assert np.allclose(dicke_state("a"), (KET["12"] - KET["21"]) / np.sqrt(2))


class TestConditionalHamiltonian:
    def test_independent_undriven_atoms(self):
        H = conditional_hamiltonian(_no_coupling())
        expected = np.diag([0, 1, 1, 2]) / 2j
        assert np.allclose(H, expected, atol=1e-15)
        U = dicke_transform()
        assert np.allclose(U @ H @ U.conj().T, expected, atol=1e-15)

    @pytest.mark.parametrize("theta,k0r", [(np.pi / 2, 1.0), (0.0, 0.4), (np.pi / 4, 3.0)])
    def test_dicke_diagonal_without_laser(self, theta, k0r):
        p = SystemParams.equal_dipoles(0.0, theta, k0r)
        U = dicke_transform()
        Hd = U @ conditional_hamiltonian(p) @ U.conj().T
        off = Hd - np.diag(np.diag(Hd))
        assert np.max(np.abs(off)) < 1e-12
        damping = -2 * np.diag(Hd).imag
        c = p.c
        assert np.allclose(damping, [0, 1 + c.real, 1 - c.real, 2], atol=1e-12)
        shifts = np.diag(Hd).real
        assert np.allclose(shifts, [0, c.imag / 2, -c.imag / 2, 0], atol=1e-12)

    def test_superradiant_norm_decay(self):
        p = SystemParams.equal_dipoles(0.0, np.pi / 2, 1.0)
        s = dicke_state("s")
        for t in (0.1, 0.7, 2.0):
            psi = expm(-1j * conditional_hamiltonian(p) * t) @ s
            assert np.vdot(psi, psi).real == pytest.approx(np.exp(-(1 + p.c.real) * t), rel=1e-12)

    def test_short_distance_limit(self):
        p = SystemParams.equal_dipoles(0.0, np.pi / 2, 1e-3)
        U = dicke_transform()
        damping = -2 * np.diag(U @ conditional_hamiltonian(p) @ U.conj().T).imag
        assert damping[2] < 1e-5
        assert damping[1] == pytest.approx(2.0, abs=1e-5)

    def test_laser_part_is_hermitian(self):
        rng = np.random.default_rng(0)
        p = _random_params(rng)
        H = conditional_hamiltonian(p)
        laser = H - conditional_hamiltonian(SystemParams(p.A, 0, 0, p.coupling))
        assert np.allclose(laser, laser.conj().T)


class TestReset:
    def test_ground_state_cannot_emit(self):
        p = SystemParams.equal_dipoles(0.5, 0.3, 1.0)
        g = np.outer(dicke_state("g"), dicke_state("g").conj())
        assert np.allclose(reset_apply(p, g), 0)
        assert emission_rate(p, g) == 0

    def test_doubly_excited_reset(self):
        p = SystemParams.equal_dipoles(0.5, np.pi / 2, 1.0)
        e = np.outer(dicke_state("e"), dicke_state("e").conj())
        U = dicke_transform()
        Rd = U @ reset_apply(p, e) @ U.conj().T
        c = p.c.real
        assert np.allclose(Rd, np.diag([0, 1 + c, 1 - c, 0]), atol=1e-14)
        assert emission_rate(p, e) == pytest.approx(2.0, abs=1e-14)

    def test_symmetric_state_rate(self):
        p = SystemParams.equal_dipoles(0.5, np.pi / 3, 0.8)
        s = np.outer(dicke_state("s"), dicke_state("s").conj())
        assert emission_rate(p, s) == pytest.approx(1 + p.c.real, abs=1e-14)

    def test_steady_state_reset_diagonals(self):
        p = SystemParams.equal_dipoles(0.4, np.pi / 2, 1.3)
        rho = steady_state_numeric(p).rho_ss
        pops = dicke_diagonals(rho)
        got = dicke_diagonals(reset_apply(p, rho))
        c = p.c.real
        expected = [(1 + c) * pops[1] + (1 - c) * pops[2], (1 + c) * pops[3], (1 - c) * pops[3], 0]
        assert np.allclose(got, expected, atol=1e-14)

    def test_hermitian_and_never_doubly_excited(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            p = _random_params(rng)
            rho = random_hermitian(rng)
            R = reset_apply(p, rho)
            assert np.allclose(R, R.conj().T, atol=1e-12)
            e = dicke_state("e")
            assert abs(np.vdot(e, R @ e)) < 1e-14

    def test_emission_rate_in_dicke_components(self):
        rng = np.random.default_rng(2)
        p = SystemParams.equal_dipoles(0.7, 0.9, 0.6)
        for _ in range(50):
            psi = random_state(rng)
            rho = np.outer(psi, psi.conj())
            gg, ss, aa, ee = dicke_diagonals(rho)
            c = p.c.real
            assert emission_rate(p, rho) == pytest.approx(
                (1 + c) * ss + (1 - c) * aa + 2 * ee, abs=1e-12
            )


class TestJumpChannels:
    def test_reconstructs_reset(self):
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(1000):
            p = _random_params(rng)
            rho = random_hermitian(rng)
            ch = jump_channels(p)
            worst = max(worst, np.max(np.abs(ch.apply(rho) - reset_apply(p, rho))))
            assert ch.rate_plus + ch.rate_minus == pytest.approx(2 * p.A, abs=1e-12)
            assert ch.rate_minus >= 0
        assert worst < 1e-12

    def test_trace_identity_for_pure_states(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            p = _random_params(rng)
            psi = random_state(rng)
            ch = jump_channels(p)
            via_channels = ch.rate_plus * np.linalg.norm(ch.r_plus @ psi) ** 2 + ch.rate_minus * np.linalg.norm(
                ch.r_minus @ psi
            ) ** 2
            assert via_channels == pytest.approx(emission_rate(p, np.outer(psi, psi.conj())), abs=1e-12)

    def test_single_channel_keeps_purity(self):
        rng = np.random.default_rng(5)
        p = _random_params(rng)
        ch = jump_channels(p)
        psi = random_state(rng)
        for r in (ch.r_plus, ch.r_minus):
            out = r @ np.outer(psi, psi.conj()) @ r.conj().T
            out /= np.trace(out)
            assert np.trace(out @ out).real == pytest.approx(1.0, abs=1e-12)

    def test_at_most_two_emissions_without_driving(self):
        ch = jump_channels(_random_params(np.random.default_rng(6)))
        ops = (ch.r_plus, ch.r_minus)
        # R+^2 = e^{i phi} S1- S2- maps |e> to |g>, so only triple products vanish
        assert not np.allclose(ch.r_plus @ ch.r_plus, 0)
        for a in ops:
            for b in ops:
                for c in ops:
                    assert np.allclose(a @ b @ c, 0, atol=1e-15)

    def test_equal_dipoles_collapse_to_dicke_states(self):
        p = SystemParams.equal_dipoles(0.3, np.pi / 2, 1.0)
        ch = jump_channels(p)
        assert ch.phi == 0.0
        assert np.allclose(ch.r_plus @ dicke_state("e"), dicke_state("s"))
        assert np.allclose(ch.r_minus @ dicke_state("e"), dicke_state("a"))

    def test_independent_atoms_share_rates(self):
        ch = jump_channels(_no_coupling(0.5))
        assert ch.rate_plus == ch.rate_minus == 1.0

    def test_subradiant_channel_closes(self):
        ch = jump_channels(SystemParams.equal_dipoles(0.0, 0.0, 1e-3))
        assert ch.rate_minus < 1e-2

    def test_roundoff_clamp_and_rejection(self):
        barely = SystemParams(1.0, 0, 0, CouplingConstants.symmetric(1.0 + 5e-13))
        assert jump_channels(barely).rate_minus == 0.0
        with pytest.raises(OutOfRangeError):
            jump_channels(SystemParams(1.0, 0, 0, CouplingConstants.symmetric(1.1)))
