"""Time integration of the nonlinear ODE and stored trajectories.

The integrator is the implicit trapezoidal rule,

    u_{i+1} = u_i + dt/2 * (f(u_i) + f(u_{i+1})),

solved per step by a Newton iteration started from an explicit midpoint
predictor.  The rule is second order, and its exact linearization in the
state and in the parameter is the trapezoidal constraint used by the
shadowing solvers, so the discrete tangent and adjoint problems are the
exact derivatives of the discrete trajectory map.  Pairing the trajectory
scheme with an inconsistent constraint discretization visibly corrupts the
computed sensitivities at practical step sizes, which is why the pairing is
fixed here rather than left as two independent choices.

A burn-in phase runs first with the same scheme and step, and its states are
discarded so the stored trajectory starts on the attractor.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, NonFiniteState
from .system import DynamicalSystem

__all__ = [
    "Trajectory",
    "trapezoidal_step",
    "integrate_trajectory",
    "time_average",
    "truncate_trajectory",
    "one_step_residuals",
    "write_trajectory_csv",
    "read_trajectory_csv",
]

_NEWTON_TOL = 1e-12
_NEWTON_MAX_ITER = 12


@dataclass(frozen=True)
class Trajectory:
    """Uniform-grid solution ``u(t_i)``, ``t_i = i*dt`` for ``i = 0..n_steps``.

    ``states`` has shape ``(n_steps + 1, dim)`` and is frozen read-only;
    a stored trajectory is never edited after integration.
    """

    dt: float
    n_steps: int
    states: np.ndarray
    param: float
    horizon: float

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2:
            raise ValueError("states must be a 2-D array of shape (n_steps+1, dim)")
        if len(states) != self.n_steps + 1:
            raise ValueError(
                f"states has {len(states)} rows, expected n_steps+1 = {self.n_steps + 1}"
            )
        if not np.isclose(self.horizon, self.n_steps * self.dt, rtol=1e-12, atol=0.0):
            raise ValueError("horizon does not equal n_steps * dt")
        states = states.copy()
        states.flags.writeable = False
        object.__setattr__(self, "states", states)

    @classmethod
    def from_states(cls, dt: float, states: np.ndarray, param: float) -> "Trajectory":
        states = np.asarray(states, dtype=float)
        n_steps = len(states) - 1
        return cls(dt=dt, n_steps=n_steps, states=states, param=param,
                   horizon=n_steps * dt)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    @property
    def dim(self) -> int:
        return self.states.shape[1]


def _steps_for(duration: float, dt: float, what: str) -> int:
    ratio = duration / dt
    n = round(ratio)
    if abs(ratio - n) > 1e-9:
        raise GridMismatch(f"{what}/dt = {ratio!r} is not an integer")
    return n


def trapezoidal_step(sys: DynamicalSystem, u: np.ndarray, s: float, dt: float) -> np.ndarray:
    """One implicit trapezoidal step, Newton-solved to near machine accuracy."""
    u = np.asarray(u, dtype=float)
    f0 = sys.eval_f(u, s)
    # explicit midpoint predictor
    x = u + dt * sys.eval_f(u + 0.5 * dt * f0, s)
    eye = np.eye(len(u))
    scale = 1.0 + np.abs(u).max()
    for _ in range(_NEWTON_MAX_ITER):
        g = x - u - 0.5 * dt * (f0 + sys.eval_f(x, s))
        if not np.all(np.isfinite(g)):
            raise NonFiniteState("state became non-finite during a step")
        if np.abs(g).max() <= _NEWTON_TOL * scale:
            return x
        jac = eye - 0.5 * dt * sys.eval_fu(x, s)
        x = x - np.linalg.solve(jac, g)
    raise NonFiniteState(
        f"implicit step did not converge in {_NEWTON_MAX_ITER} iterations "
        f"(dt = {dt} too large for this system?)"
    )


def integrate_trajectory(
    sys: DynamicalSystem,
    s: float,
    u0: np.ndarray,
    burn_in: float,
    T: float,
    dt: float,
) -> Trajectory:
    """Integrate through ``burn_in`` time units, then store ``T/dt + 1`` states.

    Raises :class:`GridMismatch` if ``T/dt`` is not an integer (tolerance
    1e-9) and :class:`NonFiniteState` if the state blows up.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be nonnegative, got {burn_in}")
    n_steps = _steps_for(T, dt, "T")
    n_burn = _steps_for(burn_in, dt, "burn_in") if burn_in else 0

    u = np.asarray(u0, dtype=float).copy()
    if u.shape != (sys.dim,):
        raise ValueError(f"u0 has shape {u.shape}, expected ({sys.dim},)")
    for _ in range(n_burn):
        u = trapezoidal_step(sys, u, s, dt)

    states = np.empty((n_steps + 1, sys.dim))
    states[0] = u
    for i in range(n_steps):
        u = trapezoidal_step(sys, u, s, dt)
        states[i + 1] = u
    if not np.all(np.isfinite(states)):
        raise NonFiniteState("trajectory contains non-finite states")
    return Trajectory.from_states(dt=dt, states=states, param=s)


def time_average(traj: Trajectory, sys: DynamicalSystem) -> float:
    """Trapezoidal-rule average of the output along the trajectory."""
    vals = np.array([sys.eval_J(u, traj.param) for u in traj.states], dtype=float)
    return float(np.trapezoid(vals, dx=traj.dt) / traj.horizon)


def truncate_trajectory(traj: Trajectory, T: float) -> Trajectory:
    """Prefix of ``traj`` covering ``[0, T]``; grid and states are shared."""
    n = _steps_for(T, traj.dt, "T")
    if n > traj.n_steps:
        raise ValueError(f"T = {T} exceeds the trajectory horizon {traj.horizon}")
    return Trajectory.from_states(dt=traj.dt, states=traj.states[: n + 1],
                                  param=traj.param)


def one_step_residuals(traj: Trajectory, sys: DynamicalSystem) -> np.ndarray:
    """Max-norm residual of the trapezoidal step equation on each interval.

    Stored states satisfy the step equation to the Newton tolerance, so this
    is a cheap integrity check that a trajectory was not post-edited.
    """
    f = np.array([sys.eval_f(u, traj.param) for u in traj.states])
    res = (traj.states[1:] - traj.states[:-1]
           - 0.5 * traj.dt * (f[:-1] + f[1:]))
    return np.abs(res).max(axis=1)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Write ``t,u0,u1,...`` rows at full double precision."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(["t"] + [f"u{i}" for i in range(traj.dim)]) + "\n")
        for t, u in zip(traj.times, traj.states):
            fh.write(",".join([_fmt(t)] + [_fmt(x) for x in u]) + "\n")


def read_trajectory_csv(path, param: float) -> Trajectory:
    """Read a trajectory written by :func:`write_trajectory_csv`.

    The file stores no parameter value, so the caller supplies it.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "t":
            raise ValueError(f"unexpected trajectory CSV header: {header!r}")
        rows = [[float(x) for x in row] for row in reader]
    data = np.asarray(rows)
    if len(data) < 2:
        raise ValueError("trajectory CSV must contain at least two rows")
    times, states = data[:, 0], data[:, 1:]
    dt = times[1] - times[0]
    if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=1e-12):
        raise GridMismatch("trajectory CSV grid is not uniform")
    return Trajectory.from_states(dt=dt, states=states, param=param)
