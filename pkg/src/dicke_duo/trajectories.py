"""Quantum-jump Monte Carlo trajectories and the single-trajectory g(tau).

Between emissions a pure state evolves under ``-i H_cond``; its squared norm
is the no-photon probability. A waiting time is drawn by finding where the
norm crosses a uniform variate ``u``: the fixed-step RK4 grid brackets the
crossing (binary search over step counts using precomputed powers of the
step map), then a bisection over a single partial RK4 step from the bracket
start pins it down. After the emission the state collapses through R+ or R-.
"""

from __future__ import annotations

import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from dicke_duo import integrate
from dicke_duo.errors import InsufficientStatisticsError, OutOfRangeError
from dicke_duo.hilbert import (
    JumpChannels,
    SystemParams,
    conditional_hamiltonian,
    dicke_state,
    jump_channels,
    reset_apply,
)

log = logging.getLogger(__name__)

TRANSIENT = 20.0
TIME_TOL = 1e-10
MIN_EMISSIONS = 100


class ConditionalPropagator:
    """Fixed-step RK4 propagation under ``-i H_cond`` for one parameter set."""

    def __init__(self, p: SystemParams, dt: float | None = None):
        self.params = p
        self.K = -1j * conditional_hamiltonian(p)
        self.dt = integrate.default_dt(self.K, p.A) if dt is None else float(dt)
        self.step = integrate.rk4_map(self.K, self.dt)
        integrate.check_stable(self.step, self.dt)
        self._powers = [self.step]  # step^(2^j)
        K2 = self.K @ self.K
        self._taylor = [self.K, K2 / 2, self.K @ K2 / 6, K2 @ K2 / 24]

    def _power(self, j: int) -> np.ndarray:
        while len(self._powers) <= j:
            last = self._powers[-1]
            self._powers.append(last @ last)
        return self._powers[j]

    def propagate(self, psi: np.ndarray, t: float) -> np.ndarray:
        """Non-normalized conditional state after time ``t``."""
        n = int(math.floor(t / self.dt + 1e-9))
        x = np.array(psi, dtype=complex)
        j = 0
        while n:
            if n & 1:
                x = self._power(j) @ x
            n >>= 1
            j += 1
        rest = t - math.floor(t / self.dt + 1e-9) * self.dt
        if rest > 0:
            x = integrate.rk4_map(self.K, rest) @ x
        return x

    def _partial(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        """One RK4 step of size ``s`` (per row) from states ``x`` (N, 4)."""
        out = x.copy()
        sk = np.ones_like(s)
        for coeff in self._taylor:
            sk = sk * s
            out += sk[:, None] * (x @ coeff.T)
        return out

    def sample(self, psi: np.ndarray, u: np.ndarray, horizon: float):
        """Batch waiting-time sampling.

        ``psi`` is (N, 4) or (4,), ``u`` the matching uniform draws. Returns
        ``(times, states, emitted)``; rows with ``emitted == False`` still
        had squared norm above ``u`` at the horizon.
        """
        x = np.atleast_2d(np.asarray(psi, dtype=complex)).copy()
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any((u <= 0) | (u >= 1)):
            raise ValueError("uniform draws must lie in (0, 1)")
        dt = self.dt
        n_max = int(math.floor(horizon / dt + 1e-9))
        n = np.zeros(len(u), dtype=np.int64)
        top = max(n_max.bit_length() - 1, 0)
        for j in range(top, -1, -1):
            cand = x @ self._power(j).T
            ok = (np.sum(np.abs(cand) ** 2, axis=1) > u) & (n + (1 << j) <= n_max)
            x[ok] = cand[ok]
            n[ok] += 1 << j
        bracket = np.full(len(u), dt)
        at_end = n >= n_max
        bracket[at_end] = max(horizon - n_max * dt, 0.0)
        end_states = self._partial(x, bracket)
        emitted = np.sum(np.abs(end_states) ** 2, axis=1) <= u
        lo = np.zeros(len(u))
        hi = bracket.copy()
        while np.any(hi[emitted] - lo[emitted] > TIME_TOL):
            mid = 0.5 * (lo + hi)
            above = np.sum(np.abs(self._partial(x, mid)) ** 2, axis=1) > u
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        sub = np.where(emitted, hi, bracket)
        times = n * dt + sub
        states = self._partial(x, sub)
        return times, states, emitted


def no_photon_probability(p: SystemParams, psi: np.ndarray, t: float, dt: float | None = None) -> float:
    """P0(t) = ||U_cond(t) psi||^2."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t!r}")
    x = ConditionalPropagator(p, dt).propagate(psi, t)
    return float(np.vdot(x, x).real)


def first_photon_density(p: SystemParams, psi: np.ndarray, t: float, dt: float | None = None) -> float:
    """w1(t) = -dP0/dt, evaluated as tr R(|psi~(t)><psi~(t)|)."""
    x = ConditionalPropagator(p, dt).propagate(psi, t)
    return float(np.trace(reset_apply(p, np.outer(x, x.conj()))).real)


def sample_waiting_time(
    p: SystemParams,
    psi: np.ndarray,
    u: float,
    t_horizon: float,
    propagator: ConditionalPropagator | None = None,
):
    """First time the conditional squared norm drops to ``u``.

    Returns ``(t, state)`` with the non-normalized state at ``t``, or
    ``(None, state_at_horizon)`` when no emission happens by ``t_horizon``.
    """
    prop = propagator or ConditionalPropagator(p)
    times, states, emitted = prop.sample(psi, np.array([u]), t_horizon)
    if not emitted[0]:
        return None, states[0]
    return float(times[0]), states[0]


def jump_sample(
    p: SystemParams, psi: np.ndarray, v: float, channels: JumpChannels | None = None
):
    """Collapse ``psi`` through R+ or R-; returns (normalized state, '+' or '-')."""
    ch = channels or jump_channels(p)
    plus = ch.r_plus @ psi
    minus = ch.r_minus @ psi
    w_plus = ch.rate_plus * np.vdot(plus, plus).real
    w_minus = ch.rate_minus * np.vdot(minus, minus).real
    total = w_plus + w_minus
    if total <= 0:
        raise OutOfRangeError("no jump channel is open for this state")
    if v < w_plus / total:
        return plus / np.linalg.norm(plus), "+"
    return minus / np.linalg.norm(minus), "-"


@dataclass(frozen=True)
class EmissionRecord:
    """Emission times of one trajectory, measured from the end of the transient."""

    times: np.ndarray
    horizon: float
    seed: int
    channel_tags: str = ""

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size and (np.any(np.diff(t) <= 0) or t[0] < 0 or t[-1] > self.horizon):
            raise ValueError("emission times must be strictly increasing within [0, horizon]")
        object.__setattr__(self, "times", t)

    @property
    def rate(self) -> float:
        return len(self.times) / self.horizon

    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"# seed={self.seed}\n")
        buf.write(f"# horizon={self.horizon!r}\n")
        if self.channel_tags:
            buf.write(f"# channels={self.channel_tags}\n")
        for t in self.times:
            buf.write(f"{t:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "EmissionRecord":
        header = {}
        times = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                header[key.strip()] = value.strip()
            else:
                times.append(float(line))
        return cls(
            np.array(times),
            float(header["horizon"]),
            int(header["seed"]),
            header.get("channels", ""),
        )


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def derive_seed(master_seed: int, k: int) -> int:
    """64-bit seed of ensemble member ``k``; independent of scheduling."""
    words = np.random.SeedSequence([int(master_seed), int(k)]).generate_state(2, np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


def _open_uniform(rng: np.random.Generator) -> float:
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return u


def simulate_trajectory(
    p: SystemParams,
    T: float,
    seed: int,
    transient: float = TRANSIENT,
    dt: float | None = None,
) -> EmissionRecord:
    """Run one trajectory from |g> and record emissions in the window of length T
    that follows the initial transient."""
    if T <= 0:
        raise ValueError(f"T must be positive, got {T!r}")
    rng = make_rng(seed)
    prop = ConditionalPropagator(p, dt)
    channels = jump_channels(p)
    psi = dicke_state("g")
    end = transient + T
    t = 0.0
    times, tags = [], []
    while True:
        wait, state = sample_waiting_time(p, psi, _open_uniform(rng), end - t, prop)
        if wait is None:
            break
        t += wait
        if t > end:
            break
        psi, tag = jump_sample(p, state, rng.random(), channels)
        if t >= transient:
            times.append(t - transient)
            tags.append(tag)
    log.debug("seed %d: %d emissions in %g", seed, len(times), T)
    return EmissionRecord(np.array(times), float(T), int(seed), "".join(tags))


def _run_member(args):
    p, T, seed, transient, dt = args
    return simulate_trajectory(p, T, seed, transient, dt)


def simulate_ensemble(
    p: SystemParams,
    T: float,
    master_seed: int,
    n: int,
    jobs: int = 1,
    transient: float = TRANSIENT,
    dt: float | None = None,
) -> list[EmissionRecord]:
    """``n`` independent trajectories, ordered by member index."""
    tasks = [(p, T, derive_seed(master_seed, k), transient, dt) for k in range(n)]
    if jobs <= 1 or n <= 1:
        return [_run_member(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_member, tasks))


@dataclass(frozen=True)
class TrajectoryEstimate:
    tau_bins: np.ndarray
    g_traj: np.ndarray
    stderr: np.ndarray
    mean_rate: float
    rate_stderr: float = 0.0
    bin_edges: np.ndarray = field(repr=False, default=None)


def _pair_counts(times: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Per-emission histogram of delays to all later emissions, shape (N, bins)."""
    n_bins = len(edges) - 1
    counts = np.zeros((len(times), n_bins))
    tau_max = edges[-1]
    width = edges[1] - edges[0]
    k = 1
    while k < len(times):
        gaps = times[k:] - times[:-k]
        inside = gaps < tau_max
        if not np.any(inside):
            break
        idx = np.nonzero(inside)[0]
        b = np.minimum((gaps[idx] / width).astype(np.int64), n_bins - 1)
        np.add.at(counts, (idx, b), 1.0)
        k += 1
    return counts


def g_traj_estimate(
    records,
    bin_width: float,
    tau_max: float,
    n_blocks: int = 20,
    n_boot: int = 200,
    seed: int = 0,
) -> TrajectoryEstimate:
    """Time-averaged pair correlation g(tau) from emission records.

    All ordered pairs with delay below ``tau_max`` are histogrammed. Each
    record is cut into ``n_blocks`` equal time blocks (pairs belong to the
    block of their earlier photon); the standard error is a bootstrap over
    blocks.
    """
    if isinstance(records, EmissionRecord):
        records = [records]
    if bin_width <= 0 or tau_max <= 0:
        raise ValueError("bin_width and tau_max must be positive")
    n_bins = int(round(tau_max / bin_width))
    if n_bins < 1:
        raise ValueError("tau_max must cover at least one bin")
    edges = np.arange(n_bins + 1) * bin_width
    centers = 0.5 * (edges[:-1] + edges[1:])
    total = sum(len(r.times) for r in records)
    if total < MIN_EMISSIONS:
        raise InsufficientStatisticsError(
            f"{total} emissions recorded; at least {MIN_EMISSIONS} are needed"
        )

    blk_counts, blk_emissions, blk_duration, blk_exposure = [], [], [], []
    for rec in records:
        per_photon = _pair_counts(rec.times, edges)
        bounds = np.linspace(0.0, rec.horizon, n_blocks + 1)
        which = np.clip(np.searchsorted(bounds, rec.times, side="right") - 1, 0, n_blocks - 1)
        for b in range(n_blocks):
            mask = which == b
            duration = bounds[b + 1] - bounds[b]
            blk_counts.append(per_photon[mask].sum(axis=0))
            blk_emissions.append(mask.sum())
            blk_duration.append(duration)
            # photons closer than tau to the record end have truncated partners
            if b == n_blocks - 1:
                blk_exposure.append(np.clip(duration - centers, 0.0, None))
            else:
                blk_exposure.append(np.full(n_bins, duration))
    counts = np.array(blk_counts)
    emissions = np.array(blk_emissions, dtype=float)
    duration = np.array(blk_duration)
    exposure = np.array(blk_exposure)

    def estimate(weights):
        rate = (weights @ emissions) / (weights @ duration)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (weights @ counts) / ((weights @ exposure) * bin_width * rate**2), rate

    n_all = len(emissions)
    g, mean_rate = estimate(np.ones(n_all))
    rng = np.random.default_rng(seed)
    boots = np.empty((n_boot, n_bins))
    boot_rates = np.empty(n_boot)
    for i in range(n_boot):
        w = np.bincount(rng.integers(0, n_all, n_all), minlength=n_all).astype(float)
        boots[i], boot_rates[i] = estimate(w)
    stderr = np.std(boots, axis=0, ddof=1)
    return TrajectoryEstimate(
        centers, g, stderr, float(mean_rate), float(np.std(boot_rates, ddof=1)), edges
    )
