"""Resonance fluorescence of two dipole-dipole interacting two-level atoms.

Coupling constants, Bloch-equation steady states, photon correlations g(tau)
and quantum-jump trajectories. All rates are in units of the Einstein
coefficient ``A`` unless passed explicitly, and hbar = 1.
"""

__version__ = "0.1.0"

from dicke_duo.coupling import (
    CouplingConstants,
    DipoleGeometry,
    coupling_constant,
    coupling_constants,
    coupling_equal_dipoles,
)
from dicke_duo.hilbert import (
    JumpChannels,
    SystemParams,
    conditional_hamiltonian,
    dicke_transform,
    emission_rate,
    jump_channels,
    lowering_operator,
    reset_apply,
)
from dicke_duo.master import (
    Liouvillian,
    SteadyStateReport,
    build_liouvillian,
    g0_analytic,
    i0_after_reset_analytic,
    i_ss_analytic,
    propagate,
    reset_diagonals_analytic,
    steady_state_analytic,
    steady_state_numeric,
)
from dicke_duo.correlations import CorrelationCurve, g_tau, g_tau_binned
from dicke_duo.trajectories import (
    EmissionRecord,
    TrajectoryEstimate,
    g_traj_estimate,
    simulate_ensemble,
    simulate_trajectory,
)


__all__ = [
    "CorrelationCurve",
    "CouplingConstants",
    "DipoleGeometry",
    "EmissionRecord",
    "JumpChannels",
    "Liouvillian",
    "SteadyStateReport",
    "SystemParams",
    "TrajectoryEstimate",
    "build_liouvillian",
    "conditional_hamiltonian",
    "coupling_constant",
    "coupling_constants",
    "coupling_equal_dipoles",
    "dicke_transform",
    "emission_rate",
    "g0_analytic",
    "g_tau",
    "g_tau_binned",
    "g_traj_estimate",
    "i0_after_reset_analytic",
    "i_ss_analytic",
    "jump_channels",
    "lowering_operator",
    "propagate",
    "reset_apply",
    "reset_diagonals_analytic",
    "simulate_ensemble",
    "simulate_trajectory",
    "steady_state_analytic",
    "steady_state_numeric",
]
