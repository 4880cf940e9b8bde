"""Command-line harness for the shadowing experiments.

Four subcommands, all writing CSV tables (and SVG plots where noted) into an
output directory:

    shadowlab sensitivity   derivative estimates over a parameter sweep
    shadowlab ensemble      standard deviation of the estimate across seeds
    shadowlab envelope      norm of the tangent field along one trajectory
    shadowlab windows       table and overlay plot of the built-in windows

Options come from a flat ``key=value`` config file (``--config``), overridden
by command-line flags.  Runs are deterministic: member ``k`` of an ensemble
uses seed ``seed + k`` for its initial condition, so the same config and seed
reproduce byte-identical CSV output regardless of worker count.

Exit codes: 0 on success, 1 for configuration errors, 2 if any row failed.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np
from scipy.stats import chi2

from .adjoint import adjoint_sensitivity, solve_adjoint
from .errors import ConfigError, ShadowlabError
from .integrate import integrate_trajectory
from .svgplot import line_plot
from .system import DynamicalSystem, linear_test_system, lorenz_system
from .tangent import solve_tangent, tangent_sensitivity, write_envelope_csv
from .window import WINDOW_NAMES, make_window

__all__ = [
    "ExperimentConfig",
    "MemberSpec",
    "MemberResult",
    "run_member",
    "run_members",
    "ensemble_stats",
    "cmd_sensitivity",
    "cmd_ensemble",
    "cmd_envelope",
    "cmd_windows",
    "main",
]

SYSTEMS = ("lorenz", "linear")
METHODS = ("tangent", "adjoint", "both")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment parameters shared by all subcommands.

    ``rho_values`` is the parameter sweep; for the linear fixture the swept
    value plays the role of the set point ``s``.
    """

    system: str = "lorenz"
    rho_values: tuple[float, ...] = (28.0,)
    T: float = 50.0
    dt: float = 0.02
    burn_in: float = 10.0
    windows: tuple[str, ...] = ("sine2",)
    method: str = "tangent"
    ensemble_size: int = 1
    seed: int = 12345
    linear_rate: float = 1.0
    output_dir: str = "out"
    jobs: int = 0

    def validate(self, command: str) -> None:
        if self.system not in SYSTEMS:
            raise ConfigError(f"unknown system {self.system!r}")
        if not self.rho_values:
            raise ConfigError("parameter sweep is empty")
        if not all(np.isfinite(self.rho_values)):
            raise ConfigError("parameter sweep contains non-finite values")
        if self.T <= 0 or self.dt <= 0:
            raise ConfigError("T and dt must be positive")
        if self.burn_in < 0:
            raise ConfigError("burn_in must be nonnegative")
        ratio = self.T / self.dt
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError(f"T/dt = {ratio!r} is not an integer")
        unknown = [w for w in self.windows if w not in WINDOW_NAMES]
        if unknown:
            raise ConfigError(f"unknown windows: {', '.join(unknown)}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {', '.join(METHODS)}")
        min_members = 2 if command == "ensemble" else 1
        if self.ensemble_size < min_members:
            raise ConfigError(
                f"{command} needs ensemble_size >= {min_members}, "
                f"got {self.ensemble_size}"
            )
        if self.jobs < 0:
            raise ConfigError("jobs must be nonnegative")
        if self.linear_rate <= 0:
            raise ConfigError("linear_rate must be positive")
        if command == "envelope" and len(self.rho_values) != 1:
            raise ConfigError("envelope runs at a single parameter value")


def parse_sweep(text: str) -> tuple[float, ...]:
    """Parse ``value`` or ``start:stop:step`` (inclusive stop)."""
    parts = text.split(":")
    if len(parts) == 1:
        return (float(parts[0]),)
    if len(parts) != 3:
        raise ConfigError(f"sweep must be 'start:stop:step', got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0:
        raise ConfigError(f"sweep step must be positive, got {step}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ConfigError(f"sweep {text!r} is empty")
    return tuple(start + k * step for k in range(count))


def parse_window_list(text: str) -> tuple[str, ...]:
    if text.strip() == "all":
        return WINDOW_NAMES
    return tuple(w.strip() for w in text.split(",") if w.strip())


def read_config_file(path) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                key, val = (part.strip() for part in line.split("=", 1))
                values[key] = val
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from err
    return values


_CONFIG_KEYS = {
    "system": str,
    "rho": parse_sweep,
    "T": float,
    "dt": float,
    "burn_in": float,
    "window": parse_window_list,
    "method": str,
    "ensemble_size": int,
    "seed": int,
    "linear_rate": float,
    "out": str,
    "jobs": int,
}

_KEY_TO_FIELD = {"rho": "rho_values", "window": "windows", "out": "output_dir"}


def build_config(args: argparse.Namespace, command: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if command == "ensemble":
        cfg = replace(cfg, ensemble_size=100, windows=WINDOW_NAMES)

    overrides = {}
    if args.config:
        for key, raw in read_config_file(args.config).items():
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                overrides[_KEY_TO_FIELD.get(key, key)] = _CONFIG_KEYS[key](raw)
            except ValueError as err:
                raise ConfigError(f"bad value for {key}: {err}") from err
    for key in _CONFIG_KEYS:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            parse = _CONFIG_KEYS[key]
            overrides[_KEY_TO_FIELD.get(key, key)] = (
                parse(flag_val) if isinstance(flag_val, str) else flag_val
            )
    known = {f.name for f in fields(ExperimentConfig)}
    assert set(overrides) <= known
    cfg = replace(cfg, **overrides)
    cfg.validate(command)
    return cfg


def build_system(name: str, linear_rate: float = 1.0) -> DynamicalSystem:
    if name == "lorenz":
        return lorenz_system()
    if name == "linear":
        return linear_test_system(linear_rate)
    raise ConfigError(f"unknown system {name!r}")


def sample_u0(name: str, rng: np.random.Generator) -> np.ndarray:
    """Initial condition sampling: a fixed box per system, seeded by caller."""
    if name == "lorenz":
        return rng.uniform(-10.0, 10.0, 3)
    if name == "linear":
        return rng.uniform(-5.0, 5.0, 1)
    raise ConfigError(f"unknown system {name!r}")


@dataclass(frozen=True)
class MemberSpec:
    """Everything one worker needs to compute one ensemble member."""

    system: str
    linear_rate: float
    param: float
    T: float
    dt: float
    burn_in: float
    seed: int
    windows: tuple[str, ...]
    method: str


@dataclass(frozen=True)
class MemberResult:
    spec: MemberSpec
    status: str                      # "ok" or "failed"
    error: str = ""
    # (window, method) -> (derivative, argmin_location)
    estimates: dict | None = None


def run_member(spec: MemberSpec) -> MemberResult:
    """Integrate one trajectory and evaluate all requested estimates."""
    try:
        system = build_system(spec.system, spec.linear_rate)
        rng = np.random.default_rng(spec.seed)
        u0 = sample_u0(spec.system, rng)
        traj = integrate_trajectory(system, spec.param, u0, spec.burn_in,
                                    spec.T, spec.dt)
        methods = ("tangent", "adjoint") if spec.method == "both" else (spec.method,)
        estimates = {}
        if "tangent" in methods:
            sol = solve_tangent(traj, system)
            for name in spec.windows:
                rep = tangent_sensitivity(traj, system, sol, make_window(name))
                estimates[(name, "tangent")] = (rep.derivative, rep.argmin_location)
        if "adjoint" in methods:
            for name in spec.windows:
                adj = solve_adjoint(traj, system, make_window(name))
                rep = adjoint_sensitivity(traj, system, adj)
                estimates[(name, "adjoint")] = (rep.derivative, rep.argmin_location)
        return MemberResult(spec=spec, status="ok", estimates=estimates)
    except (ShadowlabError, ValueError, np.linalg.LinAlgError) as err:
        return MemberResult(spec=spec, status="failed", error=str(err),
                            estimates={})


def run_members(specs: list[MemberSpec], jobs: int = 0) -> list[MemberResult]:
    """Run members in a process pool, collecting results in spec order."""
    if not specs:
        return []
    workers = jobs if jobs > 0 else (os.cpu_count() or 1)
    workers = min(workers, len(specs))
    if workers == 1:
        return [run_member(s) for s in specs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_member, specs, chunksize=1))


def _member_specs(cfg: ExperimentConfig) -> list[MemberSpec]:
    return [
        MemberSpec(
            system=cfg.system,
            linear_rate=cfg.linear_rate,
            param=rho,
            T=cfg.T,
            dt=cfg.dt,
            burn_in=cfg.burn_in,
            seed=cfg.seed + k,
            windows=cfg.windows,
            method=cfg.method,
        )
        for rho in cfg.rho_values
        for k in range(cfg.ensemble_size)
    ]


def cmd_sensitivity(cfg: ExperimentConfig) -> int:
    """One CSV row per (parameter, member, window, method)."""
    os.makedirs(cfg.output_dir, exist_ok=True)
    results = run_members(_member_specs(cfg), cfg.jobs)
    methods = ("tangent", "adjoint") if cfg.method == "both" else (cfg.method,)
    any_failed = False
    path = os.path.join(cfg.output_dir, "sensitivity.csv")
    with open(path, "w", newline="") as fh:
        fh.write("rho,window,method,T,dt,seed,derivative,argmin_location,status\n")
        for res in results:
            for window in cfg.windows:
                for method in methods:
                    base = (f"{_fmt(res.spec.param)},{window},{method},"
                            f"{_fmt(cfg.T)},{_fmt(cfg.dt)},{res.spec.seed}")
                    if res.status == "ok":
                        deriv, argmin = res.estimates[(window, method)]
                        fh.write(f"{base},{_fmt(deriv)},{_fmt(argmin)},ok\n")
                    else:
                        any_failed = True
                        fh.write(f"{base},,,failed\n")
    print(path)
    return 2 if any_failed else 0


def ensemble_stats(values: np.ndarray) -> tuple[float, float, float]:
    """Sample std of the estimates with a chi-squared 95% interval."""
    n = len(values)
    std = float(np.std(values, ddof=1))
    dof = n - 1
    ci_low = std * np.sqrt(dof / chi2.ppf(0.975, dof))
    ci_high = std * np.sqrt(dof / chi2.ppf(0.025, dof))
    return std, float(ci_low), float(ci_high)


def cmd_ensemble(cfg: ExperimentConfig) -> int:
    """Standard-deviation table per (parameter, window) over seeded members."""
    os.makedirs(cfg.output_dir, exist_ok=True)
    results = run_members(_member_specs(cfg), cfg.jobs)
    method = "tangent" if cfg.method == "both" else cfg.method
    any_failed = any(r.status == "failed" for r in results)
    by_rho = {rho: [] for rho in cfg.rho_values}
    for res in results:
        by_rho[res.spec.param].append(res)

    path = os.path.join(cfg.output_dir, "ensemble.csv")
    with open(path, "w", newline="") as fh:
        fh.write("window,T,rho,n,std,ci_low,ci_high\n")
        for rho in cfg.rho_values:
            ok = [r for r in by_rho[rho] if r.status == "ok"]
            for window in cfg.windows:
                vals = np.array([r.estimates[(window, method)][0] for r in ok])
                if len(vals) >= 2:
                    std, lo, hi = ensemble_stats(vals)
                    fh.write(f"{window},{_fmt(cfg.T)},{_fmt(rho)},{len(vals)},"
                             f"{_fmt(std)},{_fmt(lo)},{_fmt(hi)}\n")
                else:
                    fh.write(f"{window},{_fmt(cfg.T)},{_fmt(rho)},{len(vals)},,,\n")
    print(path)
    return 2 if any_failed else 0


def cmd_envelope(cfg: ExperimentConfig) -> int:
    """Tangent-field norm along a single seeded trajectory, CSV plus SVG."""
    os.makedirs(cfg.output_dir, exist_ok=True)
    rho = cfg.rho_values[0]
    system = build_system(cfg.system, cfg.linear_rate)
    rng = np.random.default_rng(cfg.seed)
    u0 = sample_u0(cfg.system, rng)
    try:
        traj = integrate_trajectory(system, rho, u0, cfg.burn_in, cfg.T, cfg.dt)
        sol = solve_tangent(traj, system)
        rep = tangent_sensitivity(traj, system, sol, make_window(cfg.windows[0]))
    except (ShadowlabError, ValueError) as err:
        print(f"envelope run failed: {err}", file=sys.stderr)
        return 2
    csv_path = os.path.join(cfg.output_dir, "envelope.csv")
    write_envelope_csv(rep, csv_path)
    svg_path = os.path.join(cfg.output_dir, "envelope.svg")
    line_plot(
        svg_path,
        [(rep.envelope[:, 0], rep.envelope[:, 1], "")],
        title=f"{cfg.system} rho={rho:g} T={cfg.T:g}",
        xlabel="t",
        ylabel="norm of tangent field",
    )
    print(csv_path)
    print(svg_path)
    print(f"argmin_location={_fmt(rep.argmin_location)} "
          f"argmin_time={_fmt(rep.argmin_location * cfg.T)}")
    return 0


def cmd_windows(cfg: ExperimentConfig) -> int:
    """Tabulate the five normalized windows on 201 points, with overlay plot."""
    os.makedirs(cfg.output_dir, exist_ok=True)
    grid = np.linspace(0.0, 1.0, 201)
    path = os.path.join(cfg.output_dir, "windows.csv")
    series = []
    with open(path, "w", newline="") as fh:
        fh.write("window,mean," + ",".join(f"s{s:.3f}" for s in grid) + "\n")
        for name in WINDOW_NAMES:
            w = make_window(name)
            vals = w.eval(grid)
            fh.write(f"{name},{_fmt(w.mean)},"
                     + ",".join(_fmt(v) for v in vals) + "\n")
            series.append((grid, vals, name))
    svg_path = os.path.join(cfg.output_dir, "windows.svg")
    line_plot(svg_path, series, title="window functions", xlabel="s",
              ylabel="w(s)")
    print(path)
    print(svg_path)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="shadowlab",
                     description="windowed shadowing sensitivity experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in ("sensitivity", "ensemble", "envelope", "windows"):
        p = sub.add_parser(command)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--system", choices=SYSTEMS)
        p.add_argument("--rho", help="value or start:stop:step sweep")
        p.add_argument("--T", type=float)
        p.add_argument("--dt", type=float)
        p.add_argument("--burn-in", dest="burn_in", type=float)
        p.add_argument("--window", help="comma-separated names or 'all'")
        p.add_argument("--method", choices=METHODS)
        p.add_argument("--ensemble-size", dest="ensemble_size", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--linear-rate", dest="linear_rate", type=float)
        p.add_argument("--out", help="output directory")
        p.add_argument("--jobs", type=int, help="worker processes (0 = all cores)")
    return parser


_COMMANDS = {
    "sensitivity": cmd_sensitivity,
    "ensemble": cmd_ensemble,
    "envelope": cmd_envelope,
    "windows": cmd_windows,
}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        cfg = build_config(args, args.command)
        return _COMMANDS[args.command](cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
