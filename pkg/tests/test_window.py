import numpy as np
import pytest
from scipy.integrate import quad

from shadowlab.errors import UnknownWindow
from shadowlab.integrate import integrate_trajectory, time_average
from shadowlab.system import lorenz_system
from shadowlab.window import WINDOW_NAMES, make_window, windowed_average

# adaptive-quadrature oracle for the bump normalization, frozen value checked
BUMP_NORM_ORACLE = quad(lambda t: np.exp(-1.0 / (t - t * t)), 0.0, 1.0,
                        epsabs=0.0, epsrel=1e-12)[0]
BUMP_NORM_FROZEN = 0.00702985840660969


def test_window_names_and_unknown():
    assert set(WINDOW_NAMES) == {"square", "sine", "sine2", "sine4", "bump"}
    with pytest.raises(UnknownWindow):
        make_window("hann")


def test_admissibility_flags():
    assert not make_window("square").admissible
    for name in ("sine", "sine2", "sine4", "bump"):
        assert make_window(name).admissible


def test_admissible_windows_vanish_at_endpoints():
    for name in ("sine", "sine2", "sine4", "bump"):
        w = make_window(name)
        assert abs(w.eval(0.0)) <= 1e-12
        assert abs(w.eval(1.0)) <= 1e-12
    assert make_window("square").eval(0.0) == 1.0


def test_sine2_value():
    w = make_window("sine2")
    assert w.eval(0.25) == pytest.approx(1.0, abs=1e-15)
    assert w.eval(0.5) == pytest.approx(2.0, abs=1e-15)


def test_sine_normalization():
    w = make_window("sine")
    assert w.eval(0.5) == pytest.approx(np.pi / 2, rel=1e-15)


def test_sine4_peak():
    w = make_window("sine4")
    assert w.eval(0.5) == pytest.approx(8.0 / 3.0, rel=1e-15)


def test_bump_normalization_against_quadrature_oracle():
    assert BUMP_NORM_ORACLE == pytest.approx(BUMP_NORM_FROZEN, rel=1e-10)
    w = make_window("bump")
    assert w.eval(0.5) == pytest.approx(np.exp(-4.0) / BUMP_NORM_ORACLE, rel=1e-10)


@pytest.mark.parametrize("name", WINDOW_NAMES)
def test_unit_mean(name):
    w = make_window(name)
    assert abs(w.mean - 1.0) <= 1e-10
    # independent quadrature of the normalized profile
    num_mean = quad(lambda s: float(w.eval(s)), 0.0, 1.0, epsabs=0.0,
                    epsrel=1e-12, limit=200)[0]
    assert abs(num_mean - 1.0) <= 1e-10


@pytest.mark.parametrize("name", WINDOW_NAMES)
def test_derivative_matches_finite_difference(name):
    w = make_window(name)
    s = np.linspace(0.05, 0.95, 61)
    h = 1e-6
    fd = (w.eval(s + h) - w.eval(s - h)) / (2 * h)
    d = w.eval_deriv(s)
    assert np.abs(d - fd).max() <= 1e-6 * (1.0 + np.abs(d).max())


def test_endpoint_decay_orders():
    # w(2 eps) / w(eps) ~ 2^k reveals the leading power at the endpoint
    eps = 1e-3
    for name, order in (("sine", 1), ("sine2", 2), ("sine4", 4)):
        w = make_window(name)
        ratio = w.eval(2 * eps) / w.eval(eps)
        assert ratio == pytest.approx(2.0**order, rel=0.02)
    assert make_window("bump").eval(eps) < eps**8


def test_windowed_average_of_constant_recovers_constant():
    c = 3.7
    signal = np.full(20001, c)
    for name in WINDOW_NAMES:
        w = make_window(name)
        assert windowed_average(signal, 0.01, w) == pytest.approx(c, abs=1e-8)


def test_square_window_equals_plain_average():
    rng = np.random.default_rng(7)
    signal = rng.normal(size=501)
    w = make_window("square")
    plain = np.trapezoid(signal, dx=0.1) / 50.0
    assert windowed_average(signal, 0.1, w) == pytest.approx(plain, rel=1e-14)


def test_windowed_average_input_validation():
    w = make_window("sine2")
    with pytest.raises(ValueError):
        windowed_average(np.array([1.0]), 0.1, w)
    with pytest.raises(ValueError):
        windowed_average(np.ones((3, 2)), 0.1, w)


def test_lorenz_windowed_average_close_to_plain():
    sys = lorenz_system()
    traj = integrate_trajectory(sys, 28.0, np.array([3.0, -4.0, 15.0]), 10.0,
                                100.0, 0.02)
    z = traj.states[:, 2]
    w = make_window("sine2")
    gap = abs(windowed_average(z, traj.dt, w) - time_average(traj, sys))
    assert gap < 0.5


def test_tapered_average_converges_to_plain_average():
    # averaged over trajectories, the taper-vs-plain gap shrinks as the
    # horizon quadruples; the full horizon sweep runs in the acceptance suite
    sys = lorenz_system()
    w = make_window("sine2")
    gaps = {50.0: [], 200.0: []}
    rng = np.random.default_rng(300)
    for _ in range(10):
        traj = integrate_trajectory(sys, 28.0, rng.uniform(-10, 10, 3), 10.0,
                                    200.0, 0.02)
        for T in gaps:
            n = round(T / traj.dt)
            z = traj.states[: n + 1, 2]
            plain = np.trapezoid(z, dx=traj.dt) / T
            gaps[T].append(abs(windowed_average(z, traj.dt, w) - plain))
    assert np.mean(gaps[200.0]) < np.mean(gaps[50.0])
