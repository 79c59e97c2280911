"""Adam, clipping, and soft target updates."""

import numpy as np
import pytest

from cradol import tensor as T
from cradol.optim import Adam, clip_grad_norm, grad_global_norm, soft_update


def make_param(vals):
    return T.parameter(np.array(vals, dtype=np.float64))


def test_zero_gradient_leaves_params_unchanged():
    p = make_param([1.0, -2.0])
    opt = Adam([p], lr=0.1)
    p.grad = np.zeros(2)
    opt.step()
    np.testing.assert_array_equal(p.data, [1.0, -2.0])


def test_zero_gradient_decays_existing_moments():
    p = make_param([1.0, -2.0])
    opt = Adam([p], lr=0.1)
    opt.m[0][:] = 1.0
    opt.v[0][:] = 1.0
    p.grad = np.zeros(2)
    opt.step()
    np.testing.assert_allclose(opt.m[0], 0.9)
    np.testing.assert_allclose(opt.v[0], 0.999)


def test_constant_gradient_moves_param_against_gradient():
    p = make_param([0.0])
    opt = Adam([p], lr=0.01)
    for _ in range(50):
        p.grad = np.array([2.5])
        opt.step()
    assert p.data[0] < -0.1  # monotone descent against a positive gradient


def test_single_step_hand_computed():
    # from zero moments with g=1: bias-corrected step is lr * g/(|g| + eps)
    p = make_param([0.0])
    opt = Adam([p], lr=0.1)
    p.grad = np.array([1.0])
    opt.step()
    np.testing.assert_allclose(p.data, [-0.1], atol=1e-6)
    assert opt.step_count == 1
    assert p.grad is None  # consumed


def test_missing_grad_rejected():
    p = make_param([1.0])
    opt = Adam([p])
    with pytest.raises(ValueError):
        opt.step()


def test_step_count_strictly_increases():
    p = make_param([0.0])
    opt = Adam([p])
    for k in range(1, 4):
        p.grad = np.array([1.0])
        opt.step()
        assert opt.step_count == k


def test_clip_global_norm():
    p1, p2 = make_param([3.0]), make_param([4.0])
    p1.grad, p2.grad = np.array([3.0]), np.array([4.0])
    norm = clip_grad_norm([p1, p2], 1.0)
    assert norm == pytest.approx(5.0)
    assert grad_global_norm([p1, p2]) == pytest.approx(1.0)
    # below the cap: untouched
    p1.grad, p2.grad = np.array([0.3]), np.array([0.4])
    clip_grad_norm([p1, p2], 1.0)
    np.testing.assert_allclose(p1.grad, [0.3])


def test_soft_update_tau_one_is_exact_copy():
    t, o = make_param([1.0, 2.0]), make_param([-3.5, 7.25])
    soft_update([t], [o], 1.0)
    assert t.data.tobytes() == o.data.tobytes()


def test_soft_update_tau_zero_is_noop():
    t, o = make_param([1.0, 2.0]), make_param([9.0, 9.0])
    soft_update([t], [o], 0.0)
    np.testing.assert_array_equal(t.data, [1.0, 2.0])


def test_soft_update_midpoint():
    t, o = make_param([0.0]), make_param([2.0])
    soft_update([t], [o], 0.5)
    np.testing.assert_allclose(t.data, [1.0])


def test_soft_update_rejects_bad_tau_and_shapes():
    t, o = make_param([0.0]), make_param([2.0])
    with pytest.raises(ValueError):
        soft_update([t], [o], 1.5)
    with pytest.raises(ValueError):
        soft_update([t], [make_param([1.0, 2.0])], 0.5)


def test_soft_update_contracts_toward_online():
    rng = np.random.default_rng(0)
    for tau in (0.01, 0.3, 0.7, 1.0):
        t = make_param(rng.standard_normal(5))
        o = make_param(rng.standard_normal(5))
        before = np.abs(t.data - o.data)
        soft_update([t], [o], tau)
        after = np.abs(t.data - o.data)
        assert (after <= before + 1e-12).all()
        if tau > 0:
            assert after.sum() < before.sum()


def test_target_equals_ema_of_online_history():
    # two-parameter toy: target tracks the exponential moving average exactly
    rng = np.random.default_rng(1)
    tau = 0.25
    t = make_param([0.0, 0.0])
    expected = np.zeros(2)
    for _ in range(20):
        online_vals = rng.standard_normal(2)
        o = make_param(online_vals)
        soft_update([t], [o], tau)
        expected = tau * online_vals + (1 - tau) * expected
        np.testing.assert_allclose(t.data, expected, rtol=1e-12)
