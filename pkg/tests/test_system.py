import numpy as np
import pytest

from shadowlab.system import (
    DynamicalSystem,
    LorenzParams,
    linear_test_system,
    lorenz_f,
    lorenz_fs,
    lorenz_fu,
    lorenz_output,
    lorenz_output_grad,
    lorenz_output_param_grad,
    lorenz_system,
)

P28 = LorenzParams()


def central_diff_jacobian(f, u, eps=1e-5):
    """Finite-difference oracle: column i is (f(u+eps e_i) - f(u-eps e_i)) / 2eps."""
    u = np.asarray(u, dtype=float)
    cols = []
    for i in range(len(u)):
        up, um = u.copy(), u.copy()
        up[i] += eps
        um[i] -= eps
        cols.append((np.atleast_1d(f(up)) - np.atleast_1d(f(um))) / (2 * eps))
    return np.column_stack(cols)


def test_lorenz_f_values():
    assert np.allclose(lorenz_f(np.array([1.0, 1.0, 1.0]), P28), [0.0, 26.0, -5.0 / 3.0])
    assert np.allclose(lorenz_f(np.array([1.0, 2.0, 3.0]), P28), [10.0, 23.0, -6.0])


@pytest.mark.parametrize("rho", [5.0, 28.0, 50.0])
def test_lorenz_origin_is_fixed_point(rho):
    p = LorenzParams(rho=rho)
    assert np.all(lorenz_f(np.zeros(3), p) == 0.0)


def test_lorenz_fu_values():
    J = lorenz_fu(np.array([1.0, 1.0, 1.0]), P28)
    assert np.allclose(J, [[-10, 10, 0], [27, -1, -1], [1, 1, -8.0 / 3.0]])
    J0 = lorenz_fu(np.zeros(3), P28)
    assert np.allclose(J0, [[-10, 10, 0], [28, -1, 0], [0, 0, -8.0 / 3.0]])


def test_lorenz_fs_values():
    assert np.allclose(lorenz_fs(np.array([1.0, 1.0, 1.0]), P28), [0, 1, 0])
    assert np.all(lorenz_fs(np.array([0.0, 5.0, 9.0]), P28) == 0.0)


def test_lorenz_output():
    assert lorenz_output(np.array([1.0, 2.0, 3.0]), P28) == 3.0
    assert lorenz_output(np.zeros(3), P28) == 0.0
    assert np.allclose(lorenz_output_grad(np.ones(3), P28), [0, 0, 1])
    assert lorenz_output_param_grad(np.ones(3), P28) == 0.0


def test_lorenz_fu_matches_finite_differences():
    rng = np.random.default_rng(101)
    for _ in range(100):
        u = rng.uniform(-20, 20, 3)
        fd = central_diff_jacobian(lambda x: lorenz_f(x, P28), u)
        J = lorenz_fu(u, P28)
        err = np.abs(J - fd).max() / (1.0 + np.abs(J).max())
        assert err < 1e-6


def test_lorenz_fs_matches_finite_differences():
    rng = np.random.default_rng(102)
    eps = 1e-5
    for _ in range(100):
        u = rng.uniform(-20, 20, 3)
        fd = (lorenz_f(u, LorenzParams(rho=28 + eps))
              - lorenz_f(u, LorenzParams(rho=28 - eps))) / (2 * eps)
        assert np.abs(lorenz_fs(u, P28) - fd).max() < 1e-8


def test_lorenz_output_gradients_match_finite_differences():
    rng = np.random.default_rng(103)
    eps = 1e-5
    for _ in range(100):
        u = rng.uniform(-20, 20, 3)
        fd = central_diff_jacobian(lambda x: lorenz_output(x, P28), u)[0]
        assert np.abs(lorenz_output_grad(u, P28) - fd).max() < 1e-10
        fd_s = (lorenz_output(u, LorenzParams(rho=28 + eps))
                - lorenz_output(u, LorenzParams(rho=28 - eps))) / (2 * eps)
        assert abs(lorenz_output_param_grad(u, P28) - fd_s) < 1e-10


@pytest.mark.parametrize(
    "kwargs", [dict(sigma=-1.0), dict(beta=0.0), dict(rho=-3.0)]
)
def test_lorenz_params_validation(kwargs):
    with pytest.raises(ValueError):
        LorenzParams(**kwargs)


def test_lorenz_system_wires_rho():
    sys = lorenz_system()
    u = np.array([1.0, 2.0, 3.0])
    assert np.allclose(sys.eval_f(u, 28.0), lorenz_f(u, P28))
    assert np.allclose(sys.eval_fu(u, 28.0), lorenz_fu(u, P28))
    assert sys.eval_J(u, 28.0) == 3.0
    assert sys.dim == 3 and sys.param_dim == 1


def test_lorenz_batched_evaluation():
    sys = lorenz_system()
    rng = np.random.default_rng(104)
    us = rng.uniform(-10, 10, (7, 3))
    batch = sys.eval_fu(us, 28.0)
    assert batch.shape == (7, 3, 3)
    for i in range(7):
        assert np.allclose(batch[i], sys.eval_fu(us[i], 28.0))


def test_linear_system_values():
    sys = linear_test_system(1.0)
    assert sys.eval_f(np.array([3.0]), 3.0) == 0.0
    sys2 = linear_test_system(2.0)
    assert sys2.eval_f(np.array([1.0]), 0.0) == -2.0
    assert sys2.eval_fu(np.array([1.0]), 0.0)[0, 0] == -2.0
    assert sys2.eval_fs(np.array([1.0]), 0.0)[0] == 2.0
    assert sys2.eval_J(np.array([1.5]), 0.0) == 1.5
    assert sys2.eval_Ju(np.array([1.5]), 0.0)[0] == 1.0
    assert sys2.eval_Js(np.array([1.5]), 0.0) == 0.0


@pytest.mark.parametrize("a", [0.0, -1.0])
def test_linear_system_rejects_nonpositive_rate(a):
    with pytest.raises(ValueError):
        linear_test_system(a)


def test_linear_system_matches_finite_differences():
    sys = linear_test_system(1.7)
    rng = np.random.default_rng(105)
    for _ in range(100):
        u = rng.uniform(-5, 5, 1)
        fd = central_diff_jacobian(lambda x: sys.eval_f(x, 0.4), u)
        assert np.abs(sys.eval_fu(u, 0.4) - fd).max() < 1e-6


def test_dynamical_system_validation():
    kwargs = dict(
        eval_f=lambda u, s: u,
        eval_fu=lambda u, s: np.eye(1),
        eval_fs=lambda u, s: u,
        eval_J=lambda u, s: 0.0,
        eval_Ju=lambda u, s: u,
        eval_Js=lambda u, s: 0.0,
    )
    with pytest.raises(ValueError):
        DynamicalSystem(dim=0, param_dim=1, **kwargs)
    with pytest.raises(ValueError):
        DynamicalSystem(dim=1, param_dim=0, **kwargs)
