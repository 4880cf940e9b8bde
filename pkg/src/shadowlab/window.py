"""Window functions for tapered time averaging.

A window is a scalar weight ``w(s)`` on ``[0, 1]``, normalized to unit mean.
Admissible windows are continuously differentiable and vanish at both
endpoints; tapering the average with one suppresses the contribution of the
trajectory ends, where the computed shadowing direction is largest.  The
square window (constant 1) is kept as the no-window baseline but flagged
inadmissible.

Built-in windows, each scaled so its integral over [0, 1] is 1:

    square : 1
    sine   : (pi/2) sin(pi s)
    sine2  : 1 - cos(2 pi s)
    sine4  : (8/3) sin(pi s)^4
    bump   : exp(-1/(s - s^2)) / Z

``Z`` is computed once by adaptive quadrature.  The faster a window decays at
the endpoints, the more robust the resulting estimate: sine vanishes like s,
sine2 like s^2, sine4 like s^4 and bump faster than any power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import UnknownWindow

__all__ = ["WindowFunction", "WINDOW_NAMES", "make_window", "windowed_average"]

WINDOW_NAMES = ("square", "sine", "sine2", "sine4", "bump")

# below this value of s*(1-s) the bump underflows to exactly 0 in float64
_BUMP_CUTOFF = 1e-3


@dataclass(frozen=True)
class WindowFunction:
    """Normalized window ``w`` with its derivative and admissibility flag."""

    name: str
    eval: Callable[[np.ndarray], np.ndarray]
    eval_deriv: Callable[[np.ndarray], np.ndarray]
    mean: float
    admissible: bool


def _square(s):
    return np.ones_like(np.asarray(s, dtype=float))


def _square_deriv(s):
    return np.zeros_like(np.asarray(s, dtype=float))


def _sine(s):
    return 0.5 * np.pi * np.sin(np.pi * np.asarray(s, dtype=float))


def _sine_deriv(s):
    return 0.5 * np.pi**2 * np.cos(np.pi * np.asarray(s, dtype=float))


def _sine2(s):
    return 1.0 - np.cos(2.0 * np.pi * np.asarray(s, dtype=float))


def _sine2_deriv(s):
    return 2.0 * np.pi * np.sin(2.0 * np.pi * np.asarray(s, dtype=float))


def _sine4(s):
    return (8.0 / 3.0) * np.sin(np.pi * np.asarray(s, dtype=float)) ** 4


def _sine4_deriv(s):
    s = np.asarray(s, dtype=float)
    return (32.0 / 3.0) * np.pi * np.sin(np.pi * s) ** 3 * np.cos(np.pi * s)


@lru_cache(maxsize=1)
def _bump_norm() -> float:
    val, _ = quad(lambda t: math.exp(-1.0 / (t - t * t)), 0.0, 1.0,
                  epsabs=0.0, epsrel=1e-12)
    return val


def _bump(s):
    s = np.asarray(s, dtype=float)
    t = s * (1.0 - s)
    out = np.zeros_like(t)
    inside = t > _BUMP_CUTOFF
    out[inside] = np.exp(-1.0 / t[inside]) / _bump_norm()
    return out


def _bump_deriv(s):
    s = np.asarray(s, dtype=float)
    t = s * (1.0 - s)
    out = np.zeros_like(t)
    inside = t > _BUMP_CUTOFF
    ti, si = t[inside], s[inside]
    out[inside] = np.exp(-1.0 / ti) / _bump_norm() * (1.0 - 2.0 * si) / ti**2
    return out


_WINDOWS = {
    "square": (_square, _square_deriv, False),
    "sine": (_sine, _sine_deriv, True),
    "sine2": (_sine2, _sine2_deriv, True),
    "sine4": (_sine4, _sine4_deriv, True),
    "bump": (_bump, _bump_deriv, True),
}


def make_window(name: str) -> WindowFunction:
    """Build one of the named windows, normalized to unit mean."""
    try:
        fn, dfn, admissible = _WINDOWS[name]
    except KeyError:
        raise UnknownWindow(
            f"unknown window {name!r}; choose from {', '.join(WINDOW_NAMES)}"
        ) from None
    if name == "bump":
        # quadrature of the normalized profile; analytic windows are exact
        mean, _ = quad(lambda t: float(fn(t)), 0.0, 1.0, epsabs=0.0, epsrel=1e-12)
    else:
        mean = 1.0
    return WindowFunction(name=name, eval=fn, eval_deriv=dfn, mean=mean,
                          admissible=admissible)


def windowed_average(signal: np.ndarray, dt: float, w: WindowFunction) -> float:
    """Trapezoidal approximation of ``(1/T) * integral of w(t/T) x(t)``.

    The quadrature weights here are the same ones the shadowing solvers use,
    so derivative estimates and plain windowed averages are consistent.
    """
    signal = np.asarray(signal, dtype=float)
    if signal.ndim != 1 or len(signal) < 2:
        raise ValueError("signal must be a 1-D sequence with at least two samples")
    n = len(signal) - 1
    horizon = n * dt
    weights = np.full(n + 1, dt)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    taper = w.eval(np.arange(n + 1) / n)
    return float(np.sum(weights * taper * signal) / horizon)
