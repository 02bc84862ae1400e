import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from barfi.errors import DimensionError
from barfi.policy import SoftmaxLinearPolicy, log_softmax

vec = arrays(np.float64, 6, elements=st.floats(-5, 5))


@settings(max_examples=40, deadline=None)
@given(theta=vec, x=arrays(np.float64, 2, elements=st.floats(-3, 3)))
def test_probabilities_normalized(theta, x):
    pol = SoftmaxLinearPolicy(2, 3, theta)
    p = pol.action_probs(x)
    assert np.all(p > 0) and abs(p.sum() - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(theta=vec, x=arrays(np.float64, 2, elements=st.floats(-3, 3)), a=st.integers(0, 2))
def test_score_matches_finite_difference(theta, x, a):
    pol = SoftmaxLinearPolicy(2, 3, theta)
    eps = 1e-6
    fd = np.array([
        (pol.log_probs(x, theta + eps * e)[a] - pol.log_probs(x, theta - eps * e)[a]) / (2 * eps)
        for e in np.eye(6)
    ])
    np.testing.assert_allclose(pol.score(x, a), fd, atol=1e-7)


@settings(max_examples=40, deadline=None)
@given(theta=vec, x=arrays(np.float64, 2, elements=st.floats(-3, 3)))
def test_expected_score_is_zero(theta, x):
    pol = SoftmaxLinearPolicy(2, 3, theta)
    p = pol.action_probs(x)
    mean = sum(p[a] * pol.score(x, a) for a in range(3))
    np.testing.assert_allclose(mean, 0.0, atol=1e-12)


def test_zero_theta_is_uniform_and_max_entropy():
    pol = SoftmaxLinearPolicy(4, 3)
    np.testing.assert_allclose(pol.action_probs(np.ones(4)), 1 / 3)
    assert abs(pol.entropy(np.ones(4)) - np.log(3)) < 1e-12


def test_sampling_frequencies(rng):
    pol = SoftmaxLinearPolicy(1, 3, np.log([0.2, 0.3, 0.5]))
    counts = np.bincount([pol.sample_action(np.ones(1), rng) for _ in range(20000)], minlength=3)
    np.testing.assert_allclose(counts / 20000, [0.2, 0.3, 0.5], atol=0.015)


def test_log_softmax_is_stable():
    out = log_softmax(np.array([1000.0, 0.0]))
    assert np.all(np.isfinite(out)) and abs(out[0]) < 1e-12


def test_errors():
    with pytest.raises(DimensionError):
        SoftmaxLinearPolicy(2, 3, np.zeros(5))
    pol = SoftmaxLinearPolicy(2, 3)
    with pytest.raises(DimensionError):
        pol.action_probs(np.zeros(3))
    with pytest.raises(IndexError):
        pol.score(np.zeros(2), 3)


def test_batch_log_probs_match_rows():
    pol = SoftmaxLinearPolicy(2, 3, np.arange(6.0) / 10)
    X = np.array([[0.1, 0.2], [1.0, -1.0]])
    np.testing.assert_allclose(pol.log_probs(X)[1], pol.log_probs(X[1]))
