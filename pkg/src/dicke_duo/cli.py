"""Command-line front end; every command writes CSV.

Exit codes: 0 success, 1 usage error, 2 numeric or consistency failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import bisect

from dicke_duo import __version__
from dicke_duo.coupling import K0R_MIN, coupling_equal_dipoles
from dicke_duo.correlations import g_tau, g_tau_binned
from dicke_duo.errors import DickeDuoError
from dicke_duo.hilbert import SystemParams
from dicke_duo.master import g0_analytic
from dicke_duo.trajectories import g_traj_estimate, simulate_ensemble

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def parse_range(text: str) -> np.ndarray:
    """``min:max:steps`` with inclusive endpoints."""
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise UsageError(f"range must look like min:max:steps, got {text!r}") from None
    if steps < 1 or hi < lo or (steps == 1 and hi != lo):
        raise UsageError(f"empty or inconsistent range {text!r}")
    return np.linspace(lo, hi, steps)


def parse_list(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(v) for v in text]
    try:
        values = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not values:
        raise UsageError("empty list")
    return values


def _check_k0r(values) -> None:
    bad = [k for k in np.atleast_1d(values) if not k >= K0R_MIN]
    if bad:
        raise UsageError(f"k0r values must be >= {K0R_MIN}, got {float(bad[0])!r}")


def _header(command: str, params: dict) -> str:
    canonical = json.dumps({"command": command, **params}, sort_keys=True, separators=(",", ":"))
    return f"# dicke-duo {__version__} params: {canonical}\n"


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"missing required option(s): {flags}")


def cmd_coupling(args) -> int:
    _require(args, "theta", "k0r", "out")
    thetas = parse_list(args.theta)
    grid = parse_range(args.k0r)
    _check_k0r(grid)
    if args.A <= 0:
        raise UsageError("A must be positive")
    lines = [
        _header("coupling", {"A": args.A, "k0r": args.k0r, "theta": thetas}),
        "k0r,theta,re_c_over_A,im_c_over_A\n",
    ]
    for theta in thetas:
        for k in grid:
            c = coupling_equal_dipoles(theta, k, args.A) / args.A
            lines.append(f"{_fmt(k)},{_fmt(theta)},{_fmt(c.real)},{_fmt(c.imag)}\n")
    _write(args.out, "".join(lines))
    return EXIT_OK


def _g0(omega: float, theta: float, k0r: float) -> float:
    return g0_analytic(1.0, omega, coupling_equal_dipoles(theta, k0r))


def find_crossings(omega: float, theta: float, grid: np.ndarray) -> list[float]:
    """k0r values where g(0) = 1, bracketed on ``grid`` and refined by bisection."""
    values = np.array([_g0(omega, theta, k) - 1.0 for k in grid])
    out = []
    for i in range(len(grid) - 1):
        if values[i] == 0.0:
            out.append(float(grid[i]))
        elif values[i] * values[i + 1] < 0:
            root = bisect(lambda k: _g0(omega, theta, k) - 1.0, grid[i], grid[i + 1], xtol=1e-12)
            out.append(float(root))
    if len(grid) and values[-1] == 0.0:
        out.append(float(grid[-1]))
    return out


def cmd_g0_scan(args) -> int:
    _require(args, "omega", "theta", "k0r", "out")
    omegas = parse_list(args.omega)
    thetas = parse_list(args.theta)
    grid = parse_range(args.k0r)
    _check_k0r(grid)
    if any(o <= 0 for o in omegas):
        raise UsageError("omega must be positive: g(0) is undefined without driving")
    lines = [
        _header("g0-scan", {"k0r": args.k0r, "omega": omegas, "theta": thetas}),
        "k0r,theta,omega_over_A,g0\n",
    ]
    for omega in omegas:
        for theta in thetas:
            for k in grid:
                lines.append(f"{_fmt(k)},{_fmt(theta)},{_fmt(omega)},{_fmt(_g0(omega, theta, k))}\n")
            crossings = find_crossings(omega, theta, grid)
            shown = ",".join(_fmt(c) for c in crossings) if crossings else "none"
            print(f"omega_over_A={_fmt(omega)} theta={_fmt(theta)} crossing_k0r={shown}")
    _write(args.out, "".join(lines))
    return EXIT_OK


def _single_params(args) -> SystemParams:
    _require(args, "omega", "theta", "k0r")
    if args.omega <= 0:
        raise UsageError("omega must be positive: the correlation is undefined without driving")
    _check_k0r(args.k0r)
    return SystemParams.equal_dipoles(args.omega, args.theta, args.k0r)


def cmd_gtau(args) -> int:
    p = _single_params(args)
    _require(args, "tau_max", "points", "out")
    if args.tau_max <= 0 or args.points < 2:
        raise UsageError("need tau-max > 0 and at least 2 points")
    curve = g_tau(p, args.tau_max, args.points)
    params = {k: getattr(args, k) for k in ("omega", "theta", "k0r", "tau_max", "points")}
    lines = [_header("gtau", params), "tau_A,g_tau\n"]
    lines += [f"{_fmt(t)},{_fmt(g)}\n" for t, g in zip(curve.tau_grid, curve.g_values)]
    _write(args.out, "".join(lines))
    return EXIT_OK


def record_path(out: str, k: int) -> Path:
    path = Path(out)
    return path.with_name(f"{path.stem}.traj{k}.txt")


def cmd_trajectory(args) -> int:
    p = _single_params(args)
    _require(args, "horizon", "seed", "bin", "tau_max", "out")
    if args.horizon < 100:
        raise UsageError("horizon must be at least 100/A")
    if args.bin <= 0 or args.tau_max <= 0 or args.ensemble < 1:
        raise UsageError("bin, tau-max and ensemble must be positive")
    if not 0 <= args.seed < 2**64:
        raise UsageError("seed must be an unsigned 64-bit integer")
    records = simulate_ensemble(p, args.horizon, args.seed, args.ensemble, jobs=args.jobs)
    for k, rec in enumerate(records):
        _write(str(record_path(args.out, k)), rec.to_text())
    est = g_traj_estimate(records, args.bin, args.tau_max)
    g_master = g_tau_binned(p, est.bin_edges)
    tol = np.maximum(0.1 * np.abs(g_master), 5 * est.stderr)
    consistent = bool(np.all(np.abs(est.g_traj - g_master) <= tol))
    params = {
        k: getattr(args, k)
        for k in ("omega", "theta", "k0r", "horizon", "seed", "ensemble", "bin", "tau_max")
    }
    lines = [_header("trajectory", params), "tau_A,g_traj,stderr,g_master\n"]
    lines += [
        f"{_fmt(t)},{_fmt(g)},{_fmt(s)},{_fmt(m)}\n"
        for t, g, s, m in zip(est.tau_bins, est.g_traj, est.stderr, g_master)
    ]
    _write(args.out, "".join(lines))
    print(f"emissions={sum(len(r.times) for r in records)} mean_rate={_fmt(est.mean_rate)} "
          f"consistent={'yes' if consistent else 'no'}")
    if not consistent:
        worst = int(np.argmax(np.abs(est.g_traj - g_master) / tol))
        print(
            f"ergodic consistency failed at tau={_fmt(est.tau_bins[worst])}: "
            f"g_traj={_fmt(est.g_traj[worst])} g_master={_fmt(g_master[worst])}",
            file=sys.stderr,
        )
        return EXIT_NUMERIC
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dicke-duo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dicke-duo {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    parser.subcommands = sub.choices

    def common(p):
        p.add_argument("--config", help="flat JSON object with the same parameters; flags win")
        p.add_argument("--out", help="output CSV path")
        return p

    p = common(sub.add_parser("coupling", help="C(k0r) for parallel dipoles"))
    p.add_argument("--theta", help="comma-separated angles (radians)")
    p.add_argument("--k0r", help="min:max:steps")
    p.add_argument("--A", type=float, default=None)
    p.set_defaults(func=cmd_coupling, A=1.0)

    p = common(sub.add_parser("g0-scan", help="closed-form g(0) over k0r"))
    p.add_argument("--omega", help="comma-separated Rabi frequencies (units of A)")
    p.add_argument("--theta", help="comma-separated angles (radians)")
    p.add_argument("--k0r", help="min:max:steps")
    p.set_defaults(func=cmd_g0_scan)

    p = common(sub.add_parser("gtau", help="master-equation g(tau)"))
    p.add_argument("--omega", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--k0r", type=float)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--points", type=int)
    p.set_defaults(func=cmd_gtau)

    p = common(sub.add_parser("trajectory", help="quantum-jump g(tau) against the master equation"))
    p.add_argument("--omega", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--k0r", type=float)
    p.add_argument("--horizon", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--ensemble", type=int)
    p.add_argument("--bin", type=float)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--jobs", type=int, help="worker processes for ensemble members")
    p.set_defaults(func=cmd_trajectory, ensemble=1, jobs=1)
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(config, dict) or any(isinstance(v, dict) for v in config.values()):
        raise UsageError("config must be a flat JSON object")
    return {key.replace("-", "_"): value for key, value in config.items()}


def _parse(argv) -> argparse.Namespace:
    """Parse flags; values from ``--config`` become defaults so flags override them."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args
    config = _load_config(args.config)
    sub = parser.subcommands[args.command]
    known = {a.dest for a in sub._actions} - {"help", "config"}
    unknown = sorted(set(config) - known)
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    sub.set_defaults(**config)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"dicke-duo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dicke-duo {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DickeDuoError as exc:
        print(f"dicke-duo {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
