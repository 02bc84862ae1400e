import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from barfi.errors import DimensionError
from barfi.reward import AlignmentReward, LearnedDiscount, gamma_grad, reward_eval, reward_grad, sigmoid


def test_pass_through_reproduces_primary_and_naive():
    x = np.array([1.0, 0.3, -0.2])
    unit = np.array([1.0, 0.0, 0.0])
    assert reward_eval(AlignmentReward.pass_through(3, unit), x, 2.0, 5.0) == 2.0
    assert reward_eval(AlignmentReward.pass_through(3, unit, 1.0), x, 2.0, 5.0) == 7.0


@settings(max_examples=40, deadline=None)
@given(phi=arrays(np.float64, 6, elements=st.floats(-3, 3)), x=arrays(np.float64, 2, elements=st.floats(-2, 2)),
       rp=st.floats(-5, 5), ra=st.floats(-5, 5))
def test_reward_is_linear_in_phi(phi, x, rp, ra):
    m = AlignmentReward(2, phi)
    assert abs(m.value(x, rp, ra) - reward_grad(m, x, rp, ra) @ phi) <= 1e-9 * (1 + abs(m.value(x, rp, ra)))


def test_batch_value():
    m = AlignmentReward(2, np.arange(6.0))
    X = np.array([[1.0, 0.0], [0.5, 2.0]])
    rp, ra = np.array([1.0, 2.0]), np.array([0.0, -1.0])
    np.testing.assert_allclose(m.value(X, rp, ra), [m.value(X[i], rp[i], ra[i]) for i in range(2)])


def test_dimension_errors():
    with pytest.raises(DimensionError):
        AlignmentReward(2, np.zeros(5))
    with pytest.raises(DimensionError):
        AlignmentReward(2).value(np.zeros(3), 0.0, 0.0)


def test_discount_init_and_derivative():
    d = LearnedDiscount()
    assert abs(d.gamma - 0.99) < 1e-3
    eps = 1e-6
    fd = (sigmoid(4.6 + eps) - sigmoid(4.6 - eps)) / (2 * eps)
    assert abs(gamma_grad(d) - fd) < 1e-9


def test_discount_stays_strictly_inside_unit_interval():
    assert 0.0 < LearnedDiscount(-1000).gamma
    assert LearnedDiscount(1000).gamma < 1.0
    assert LearnedDiscount(0.0).gamma == 0.5
