import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from harmonic_chain.lattice import (InitialCondition, InsufficientSupportError, LatticeSlice,
                                    clamped_q_delta, discrete_laplacian, evaluate_ic,
                                    first_difference, parse_ic, sample_slice)


def test_evaluate_examples():
    assert evaluate_ic(InitialCondition.sign(), 0) == 0.0
    assert evaluate_ic(InitialCondition.sign(), -7) == -1.0
    assert evaluate_ic(InitialCondition.spike(3.0), 0) == 3.0
    assert evaluate_ic(InitialCondition.spike(3.0), 5) == 1.0
    assert evaluate_ic(InitialCondition.alternating(), 4) == 1.0
    assert evaluate_ic(InitialCondition.alternating(), -3) == -1.0


def test_log_decay_rule():
    ic = InitialCondition.log_decay()
    assert ic.window == 2 ** 18
    assert evaluate_ic(ic, 0) == 0.0 and evaluate_ic(ic, 1) == 0.0 and evaluate_ic(ic, -1) == 0.0
    k = 1000
    expected = np.sin(np.log(np.log(k))) / np.log(k) ** 2
    assert evaluate_ic(ic, k) == pytest.approx(expected, rel=1e-15)
    assert evaluate_ic(ic, -k) == evaluate_ic(ic, k)


def test_sampled_and_custom_rules():
    ic = InitialCondition.sampled("exp(-x**2)")
    assert evaluate_ic(ic, 1) == pytest.approx(np.exp(-1.0))
    ic = InitialCondition.sampled(lambda x: x / (1 + x * x))
    assert evaluate_ic(ic, 2) == pytest.approx(0.4)
    ic = InitialCondition.custom({-1: 2.0, 3: -1.5})
    assert [evaluate_ic(ic, k) for k in (-1, 0, 3, 9)] == [2.0, 0.0, -1.5, 0.0]
    with pytest.raises(ValueError):
        InitialCondition.sampled("__import__('os')").values(np.arange(3))


def test_laplacian_sign_example():
    q = sample_slice(InitialCondition.sign(), -3, 3)
    qd = discrete_laplacian(q)
    assert qd.offset == -2
    np.testing.assert_array_equal(qd.values, [0.0, -1.0, 0.0, 1.0, 0.0])


def test_laplacian_constant_and_alternating():
    qd = discrete_laplacian(sample_slice(InitialCondition.constant(2.5), -6, 6))
    assert np.all(qd.values == 0.0)
    qd = discrete_laplacian(sample_slice(InitialCondition.alternating(), -6, 6))
    np.testing.assert_array_equal(qd.values, 4.0 * (-1.0) ** qd.indices)
    assert np.max(np.abs(qd.values)) == 4.0


def test_first_difference_examples():
    d = first_difference(sample_slice(InitialCondition.sign(), -2, 2))
    assert d.offset == -1
    np.testing.assert_array_equal(d.values, [0.0, 1.0, 1.0, 0.0])
    d = first_difference(sample_slice(InitialCondition.alternating(), 0, 3))
    assert d.offset == 1
    np.testing.assert_array_equal(d.values, [-2.0, 2.0, -2.0])
    assert np.all(first_difference(sample_slice(InitialCondition.constant(1.0), 0, 4)).values == 0)


def test_small_windows_raise():
    with pytest.raises(InsufficientSupportError):
        discrete_laplacian(LatticeSlice(0, [1.0, 2.0]))
    with pytest.raises(InsufficientSupportError):
        first_difference(LatticeSlice(0, [1.0]))


def test_finite_support_of_sign_and_spike():
    for ic in (InitialCondition.sign(), InitialCondition.spike(-2.0)):
        qd = discrete_laplacian(sample_slice(ic)).trimmed()
        assert qd.offset >= -1 and qd.last <= 1


def test_slice_is_immutable_and_finite():
    s = LatticeSlice(0, [1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0] = 3.0
    with pytest.raises(ValueError):
        LatticeSlice(0, [1.0, np.inf])


def test_clamped_q_delta_sums_to_zero():
    for ic in (InitialCondition.alternating(64), InitialCondition.log_decay(500),
               InitialCondition.sign(40)):
        qd = clamped_q_delta(ic)
        assert abs(qd.values.sum()) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=40), st.integers(-50, 50))
def test_laplacian_is_minus_difference_of_differences(values, offset):
    q = LatticeSlice(offset, values)
    qd = discrete_laplacian(q)
    d = first_difference(q)
    rhs = -(d.values[1:] - d.values[:-1])
    assert qd.offset == d.offset
    scale = max(1.0, np.max(np.abs(values)))
    np.testing.assert_allclose(qd.values, rhs, rtol=0, atol=1e-15 * scale * 4)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=30),
       st.lists(st.floats(-10, 10), min_size=3, max_size=30),
       st.floats(-5, 5), st.floats(-5, 5))
def test_laplacian_linearity(a_vals, b_vals, alpha, beta):
    n = min(len(a_vals), len(b_vals))
    q, r = LatticeSlice(0, a_vals[:n]), LatticeSlice(0, b_vals[:n])
    lhs = discrete_laplacian(q.scaled(alpha) + r.scaled(beta)).values
    rhs = alpha * discrete_laplacian(q).values + beta * discrete_laplacian(r).values
    scale = max(1.0, np.max(np.abs(lhs)), np.max(np.abs(rhs)))
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-14 * scale * 10)


@pytest.mark.parametrize("ic", [InitialCondition.sign(), InitialCondition.spike(3.0),
                                InitialCondition.alternating(), InitialCondition.log_decay(),
                                InitialCondition.constant(-1.5),
                                InitialCondition.custom({2: 1.0, -4: 0.5}),
                                InitialCondition.sampled("tanh(x)", window=300)])
def test_json_round_trip(ic):
    back = InitialCondition.from_json(ic.to_json())
    assert back == ic
    k = np.arange(-20, 21)
    np.testing.assert_array_equal(back.values(k), ic.values(k))
    assert set(json.loads(ic.to_json())) == {"rule", "params", "window"}


def test_callable_rule_is_not_serialisable():
    with pytest.raises(TypeError):
        InitialCondition.sampled(np.sin).to_json()


def test_parse_ic_forms():
    assert parse_ic("sign").rule == "sign"
    assert parse_ic("log-decay").rule == "log_decay"
    assert parse_ic("spike:3").params["b"] == 3.0
    assert parse_ic("constant:2").params["value"] == 2.0
    assert parse_ic("sampled:exp(-x**2)").rule == "sampled"
    ic = parse_ic('{"rule":"custom","table":{}}')
    assert ic.rule == "custom" and ic.params["table"] == {}
    with pytest.raises(ValueError):
        parse_ic("bogus")
