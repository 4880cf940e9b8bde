"""Dynamical-system definitions: right-hand side, Jacobians, and scalar output.

A :class:`DynamicalSystem` bundles everything downstream solvers need about
``du/dt = f(u, s)``: the vector field, its state and parameter Jacobians, and
a scalar output ``J(u, s)`` with its partial derivatives.  Two systems ship
with the package: the classical Lorenz-63 equations (sensitivity parameter is
the third coefficient, called ``rho``) and a contracting one-dimensional
linear system whose long-time output sensitivity is exactly 1, used as a
validation fixture.

All evaluation functions are pure; the built-ins accept a single state of
shape ``(dim,)`` or a batch with the state on the trailing axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "DynamicalSystem",
    "LorenzParams",
    "lorenz_f",
    "lorenz_fu",
    "lorenz_fs",
    "lorenz_output",
    "lorenz_output_grad",
    "lorenz_output_param_grad",
    "lorenz_system",
    "linear_test_system",
]

ArrayFn = Callable[[np.ndarray, float], np.ndarray]
ScalarFn = Callable[[np.ndarray, float], float]


@dataclass(frozen=True)
class DynamicalSystem:
    """Problem definition for sensitivity analysis of ``du/dt = f(u, s)``.

    ``eval_f`` maps ``(u, s)`` to the time derivative, ``eval_fu`` to the
    ``dim x dim`` state Jacobian and ``eval_fs`` to the parameter derivative.
    ``eval_J`` is the instantaneous scalar output whose long-time average is
    the quantity of interest; ``eval_Ju``/``eval_Js`` are its partials.
    """

    dim: int
    param_dim: int
    eval_f: ArrayFn
    eval_fu: ArrayFn
    eval_fs: ArrayFn
    eval_J: ScalarFn
    eval_Ju: ArrayFn
    eval_Js: ScalarFn
    name: str = "custom"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if self.param_dim < 1:
            raise ValueError(f"param_dim must be positive, got {self.param_dim}")


@dataclass(frozen=True)
class LorenzParams:
    """Coefficients of the Lorenz-63 equations; ``rho`` is the one we vary."""

    sigma: float = 10.0
    beta: float = 8.0 / 3.0
    rho: float = 28.0

    def __post_init__(self):
        if not (self.sigma > 0 and self.beta > 0 and self.rho > 0):
            raise ValueError(
                f"LorenzParams must be positive, got sigma={self.sigma}, "
                f"beta={self.beta}, rho={self.rho}"
            )


def lorenz_f(u: np.ndarray, p: LorenzParams) -> np.ndarray:
    """Lorenz-63 vector field (sigma*(y-x), x*(rho-z)-y, x*y-beta*z)."""
    u = np.asarray(u, dtype=float)
    x, y, z = u[..., 0], u[..., 1], u[..., 2]
    return np.stack(
        [p.sigma * (y - x), x * (p.rho - z) - y, x * y - p.beta * z], axis=-1
    )


def lorenz_fu(u: np.ndarray, p: LorenzParams) -> np.ndarray:
    """State Jacobian of :func:`lorenz_f`."""
    u = np.asarray(u, dtype=float)
    x, y, z = u[..., 0], u[..., 1], u[..., 2]
    J = np.zeros(u.shape[:-1] + (3, 3))
    J[..., 0, 0] = -p.sigma
    J[..., 0, 1] = p.sigma
    J[..., 1, 0] = p.rho - z
    J[..., 1, 1] = -1.0
    J[..., 1, 2] = -x
    J[..., 2, 0] = y
    J[..., 2, 1] = x
    J[..., 2, 2] = -p.beta
    return J


def lorenz_fs(u: np.ndarray, p: LorenzParams) -> np.ndarray:
    """Derivative of :func:`lorenz_f` with respect to ``rho``: (0, x, 0)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    out[..., 1] = u[..., 0]
    return out


def lorenz_output(u: np.ndarray, p: LorenzParams) -> float:
    """Instantaneous output: the z component."""
    u = np.asarray(u, dtype=float)
    return u[..., 2]


def lorenz_output_grad(u: np.ndarray, p: LorenzParams) -> np.ndarray:
    """Gradient of the output with respect to the state: (0, 0, 1)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    out[..., 2] = 1.0
    return out


def lorenz_output_param_grad(u: np.ndarray, p: LorenzParams) -> float:
    """The output does not depend on ``rho`` directly."""
    return 0.0


def lorenz_system(sigma: float = 10.0, beta: float = 8.0 / 3.0) -> DynamicalSystem:
    """Lorenz-63 as a :class:`DynamicalSystem` with ``rho`` as the parameter."""

    def params(rho: float) -> LorenzParams:
        return LorenzParams(sigma=sigma, beta=beta, rho=rho)

    return DynamicalSystem(
        dim=3,
        param_dim=1,
        eval_f=lambda u, s: lorenz_f(u, params(s)),
        eval_fu=lambda u, s: lorenz_fu(u, params(s)),
        eval_fs=lambda u, s: lorenz_fs(u, params(s)),
        eval_J=lambda u, s: lorenz_output(u, params(s)),
        eval_Ju=lambda u, s: lorenz_output_grad(u, params(s)),
        eval_Js=lambda u, s: lorenz_output_param_grad(u, params(s)),
        name="lorenz",
    )


def linear_test_system(a: float = 1.0) -> DynamicalSystem:
    """Contracting 1-D fixture ``du/dt = a*(s - u)`` with output ``J = u``.

    The trajectory relaxes to ``u = s`` at rate ``a``, so the ergodic average
    of the output is ``s`` and its derivative with respect to ``s`` is exactly
    1 for any ``a > 0``.  That known value makes the fixture the reference
    problem for convergence tests.
    """
    if not a > 0:
        raise ValueError(f"contraction rate a must be positive, got {a}")

    return DynamicalSystem(
        dim=1,
        param_dim=1,
        eval_f=lambda u, s: a * (s - np.asarray(u, dtype=float)),
        eval_fu=lambda u, s: np.full(np.shape(u)[:-1] + (1, 1), -a)
        if np.ndim(u) > 1
        else np.array([[-a]]),
        eval_fs=lambda u, s: np.full_like(np.asarray(u, dtype=float), a),
        eval_J=lambda u, s: np.asarray(u, dtype=float)[..., 0],
        eval_Ju=lambda u, s: np.ones_like(np.asarray(u, dtype=float)),
        eval_Js=lambda u, s: 0.0,
        name="linear",
    )
