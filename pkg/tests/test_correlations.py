import numpy as np
import pytest

from dicke_duo.coupling import CouplingConstants
from dicke_duo.correlations import g_tau, g_tau_binned
from dicke_duo.errors import UndefinedCorrelationError
from dicke_duo.hilbert import SystemParams
from dicke_duo.master import g0_analytic, i0_after_reset_analytic
from oracles import one_atom_g

STRONG = SystemParams.equal_dipoles(0.9, np.pi / 2, 1.0)


@pytest.fixture(scope="module")
def strong_curve():
    return g_tau(STRONG, 50.0, 501)


def test_zero_delay_matches_closed_form(strong_curve):
    assert strong_curve.g_values[0] == pytest.approx(g0_analytic(1.0, 0.9, STRONG.c), abs=1e-8)


def test_zero_delay_emission_density(strong_curve):
    i0 = strong_curve.g_values[0] * strong_curve.i_ss
    assert i0 == pytest.approx(i0_after_reset_analytic(1.0, 0.9, STRONG.c), abs=1e-8)


def test_regression_to_one(strong_curve):
    assert strong_curve.tau_grid[-1] == 50.0
    assert abs(strong_curve.g_values[-1] - 1) < 1e-3
    at_30 = np.searchsorted(strong_curve.tau_grid, 30.0)
    assert abs(strong_curve.g_values[at_30] - 1) < 1e-3


def test_values_finite_and_nonnegative(strong_curve):
    assert np.all(np.isfinite(strong_curve.g_values))
    assert np.all(strong_curve.g_values >= 0)


@pytest.mark.parametrize("theta,k0r", [(np.pi / 2, 0.6), (0.0, 2.0)])
def test_zero_delay_in_other_regimes(theta, k0r):
    p = SystemParams.equal_dipoles(0.3, theta, k0r)
    curve = g_tau(p, 1.0, 3)
    assert curve.g_values[0] == pytest.approx(g0_analytic(1.0, 0.3, p.c), rel=1e-8)


def test_independent_atoms_follow_single_atom_curve():
    p = SystemParams(1.0, 1.0, 1.0, CouplingConstants(0.0, 0.0))
    curve = g_tau(p, 10.0, 201)
    single = one_atom_g(1.0, 1.0, curve.tau_grid)
    assert np.max(np.abs(curve.g_values - (1 + single) / 2)) < 1e-8
    assert curve.g_values[0] == pytest.approx(0.5, abs=1e-12)


def test_detector_efficiency_cancels():
    full = g_tau(STRONG, 5.0, 51)
    dim = g_tau(STRONG, 5.0, 51, detector_efficiency=0.137)
    assert np.allclose(full.g_values, dim.g_values, rtol=1e-14, atol=0)


def test_grid_refinement():
    coarse = g_tau(STRONG, 10.0, 101)
    fine = g_tau(STRONG, 10.0, 201)
    assert np.max(np.abs(fine.g_values[::2] - coarse.g_values)) < 1e-8


def test_undriven_system_has_no_correlation():
    with pytest.raises(UndefinedCorrelationError):
        g_tau(SystemParams.equal_dipoles(0.0, 0.0, 1.0), 1.0, 5)


@pytest.mark.parametrize("kwargs", [dict(tau_max=0.0, n_points=10), dict(tau_max=1.0, n_points=1)])
def test_argument_validation(kwargs):
    with pytest.raises(ValueError):
        g_tau(STRONG, **kwargs)


def test_bin_averages_match_fine_quadrature():
    edges = np.linspace(0.0, 2.0, 41)
    binned = g_tau_binned(STRONG, edges)
    fine = g_tau(STRONG, 2.0, 4001)
    ref = np.array(
        [np.trapezoid(fine.g_values[i * 100 : (i + 1) * 100 + 1], dx=0.0005) / 0.05 for i in range(40)]
    )
    assert np.max(np.abs(binned - ref)) < 1e-6
    with pytest.raises(ValueError):
        g_tau_binned(STRONG, [0.0, 0.1, 0.3])
