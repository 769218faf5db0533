import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from gmmcramer.gmm1d import Gmm1, c2_squared_grad
from gmmcramer.optim import (
    LionState, ParamGroups, lion_step, sgd_step, sigma_penalty, softmax_backprop, softmax_weights,
)
from gmmcramer.oracle import finite_diff_grad

logits = arrays(float, st.integers(1, 6), elements=st.floats(-20, 20))


def _params(theta, lr):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    return ParamGroups(np.zeros(1), theta, np.ones(1), {"weight_logits": 0.0, "means": lr, "scales": 0.0})


def _grads(g):
    return {"weight_logits": np.zeros(1), "means": np.atleast_1d(float(g)), "scales": np.zeros(1)}


def test_softmax_uniform():
    np.testing.assert_allclose(softmax_weights(np.zeros(4)), [0.25] * 4)


@given(logits)
def test_softmax_is_a_distribution(x):
    p = softmax_weights(x)
    assert np.all(p >= 0) and abs(p.sum() - 1) < 1e-12


@given(logits)
def test_backprop_sums_to_zero(x):
    p = softmax_weights(x)
    d = np.random.default_rng(0).normal(size=p.size)
    assert abs(softmax_backprop(p, d).sum()) <= 1e-12


def test_backprop_of_constant_is_zero():
    p = softmax_weights([0.1, -2.0, 3.0])
    np.testing.assert_allclose(softmax_backprop(p, np.full(3, 7.0)), 0.0, atol=1e-15)


def test_backprop_matches_finite_differences(rng):
    x = rng.normal(size=5)
    c = rng.normal(size=5)
    fd = finite_diff_grad(lambda v: softmax_weights(v) @ c, x, h=1e-6)
    np.testing.assert_allclose(softmax_backprop(softmax_weights(x), c), fd, rtol=1e-6, atol=1e-10)


def test_sigma_penalty():
    assert sigma_penalty([-0.1, 0.2])[0] == pytest.approx(1.0)
    val, grad = sigma_penalty([0.5, 1.0])
    assert val == 0 and np.all(grad == 0)
    val, grad = sigma_penalty([-1.0, -1.0])
    assert val == 20
    np.testing.assert_array_equal(grad, [-10, -10])


def test_lion_first_step():
    p, st_ = _params(0.0, 0.1), LionState()
    lion_step(st_, p, _grads(1.0))
    assert p.means[0] == pytest.approx(-0.1)
    assert st_.momentum["means"][0] == pytest.approx(1 - 0.99)


def test_lion_zero_gradient_is_a_no_op():
    p, st_ = _params(3.0, 0.1), LionState()
    lion_step(st_, p, _grads(0.0))
    assert p.means[0] == 3.0


def test_lion_two_steps():
    p, st_ = _params(0.0, 0.1), LionState()
    lion_step(st_, p, _grads(2.0))
    lion_step(st_, p, _grads(2.0))
    assert p.means[0] == pytest.approx(-0.2)


@given(arrays(float, 8, elements=st.floats(-1e6, 1e6)), st.floats(1e-6, 1.0))
def test_lion_step_size_is_exactly_lr_or_zero(g, lr):
    p = ParamGroups(np.zeros(1), np.zeros(8), np.ones(1), {"weight_logits": 0, "means": lr, "scales": 0})
    st_ = LionState()
    for _ in range(3):
        before = p.means.copy()
        lion_step(st_, p, {"weight_logits": np.zeros(1), "means": g, "scales": np.zeros(1)})
        moved = np.abs(p.means - before)
        assert np.all(np.isclose(moved, lr, rtol=1e-9) | (moved == 0))


def test_lion_rejects_shape_mismatch():
    p = _params(0.0, 0.1)
    with pytest.raises(ValueError):
        lion_step(LionState(), p, {"weight_logits": np.zeros(1), "means": np.zeros(2), "scales": np.zeros(1)})


def test_sgd_reference_step():
    p = _params(1.0, 0.0)
    sgd_step(p, _grads(2.0), 0.25)
    assert p.means[0] == 0.5


def test_penalty_keeps_sigma_near_zero():
    # fitting a point mass drives sigma to zero; the penalty must keep it there
    lr_s = 0.05
    target = Gmm1.delta(0.0)
    p = ParamGroups(np.zeros(1), np.zeros(1), np.ones(1), {"weight_logits": 0.0, "means": 0.0, "scales": lr_s})
    st_ = LionState()
    lowest = np.inf
    for _ in range(400):
        _, g = c2_squared_grad(Gmm1.unchecked([1.0], p.means, p.scales), target)
        _, pen = sigma_penalty(p.scales)
        lion_step(st_, p, {"weight_logits": np.zeros(1), "means": g.d_means, "scales": g.d_stds + pen})
        lowest = min(lowest, p.scales[0])
    assert lowest >= -10 * lr_s
    assert abs(p.scales[0]) <= 10 * lr_s
