import numpy as np
import pytest
from hypothesis import given, strategies as st

from dsextract.gradcheck import check_gradients, numerical_grad, relative_error
from dsextract.nn import bilstm_encode, init_bilstm
from dsextract.tensor import (
    Rng, ShapeError, Tensor, add, concat, dropout, elementwise, expand, log_softmax, log_sum_exp,
    matmul, no_grad, parameter, sigmoid, softmax, stack, take_rows, tanh, zero_grads,
)


def test_sigmoid_value_and_local_derivative():
    x = parameter(0.0)
    y = sigmoid(x)
    assert y.item() == 0.5
    y.backward()
    assert x.grad == pytest.approx(0.25)


def test_add_zero_is_identity():
    x = np.random.default_rng(0).normal(size=(3, 4))
    assert np.array_equal(add(x, 0.0).data, x)
    assert np.array_equal(add(x, np.zeros((3, 4))).data, x)


def test_elementwise_dispatch_and_shape_error():
    assert elementwise("relu", np.array([-1.0, 2.0])).data.tolist() == [0.0, 2.0]
    with pytest.raises(ShapeError) as err:
        elementwise("add", np.ones((2, 3)), np.ones((3, 2)))
    assert "(2, 3)" in str(err.value) and "(3, 2)" in str(err.value)
    with pytest.raises(ValueError):
        elementwise("cosh", np.ones(2))


def test_tanh_gradient_matches_finite_differences(rng):
    x = parameter(rng.normal(size=4))
    errs = check_gradients(lambda: tanh(x).sum(), [x])
    assert errs[0] < 1e-4


def test_matmul_hand_values_and_identity(rng):
    assert matmul(np.array([[1.0, 2.0], [3.0, 4.0]]), np.ones((2, 1))).data.tolist() == [[3.0], [7.0]]
    v = rng.normal(size=(3, 1))
    assert np.array_equal(matmul(np.eye(3), v).data, v)
    with pytest.raises(ShapeError):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_matmul_gradient(rng):
    A, B = parameter(rng.normal(size=(3, 4))), parameter(rng.normal(size=(4, 2)))
    errs = check_gradients(lambda: (A @ B).sum(), [A, B])
    assert max(errs.values()) < 1e-4


def test_linear_case_grad_equals_input(rng):
    W = parameter(rng.normal(size=(2, 3)))
    x = rng.normal(size=(3, 1))
    (W @ Tensor(x)).sum().backward()
    assert np.allclose(W.grad, np.tile(x.T, (2, 1)))


def test_scalar_leaf_backward():
    x = parameter(3.0)
    x.backward()
    assert x.grad == 1.0


def test_backward_requires_scalar():
    with pytest.raises(ShapeError):
        parameter(np.ones(3)).backward()


def test_grads_accumulate_until_zeroed():
    x = parameter(2.0)
    (x * 3.0).backward()
    (x * 3.0).backward()
    assert x.grad == 6.0
    zero_grads([x])
    assert x.grad is None


def test_unused_parameter_gets_no_gradient(rng):
    a, b = parameter(rng.normal(size=3)), parameter(rng.normal(size=3))
    (a * a).sum().backward()
    assert b.grad is None


def test_tape_cleared_after_backward():
    x = parameter(1.0)
    y = tanh(x) * 2.0
    y.backward()
    assert y._parents == () and y._backward is None


def test_no_grad_records_nothing():
    x = parameter(1.0)
    with no_grad():
        y = x * 2.0
    assert not y.requires_grad


def test_softmax_symmetry_and_single_lse():
    assert np.allclose(softmax(np.zeros(3)).data, [1 / 3] * 3)
    assert log_sum_exp(np.array([4.2]), axis=0).item() == 4.2


def test_log_sum_exp_matches_naive(rng):
    x = rng.normal(size=5)
    assert abs(log_sum_exp(x, axis=0).item() - np.log(np.exp(x).sum())) < 1e-12


def test_log_sum_exp_overflow_safe_and_empty_axis():
    assert log_sum_exp(np.array([1000.0, 1000.0]), axis=0).item() == pytest.approx(1000 + np.log(2))
    assert log_sum_exp(np.array([-np.inf, 0.0]), axis=0).item() == 0.0
    with pytest.raises(ShapeError):
        log_sum_exp(np.zeros((2, 0)), axis=1)


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=8))
def test_softmax_sums_to_one(values):
    assert abs(softmax(np.array(values)).data.sum() - 1.0) < 1e-9


def test_softmax_and_log_softmax_gradients(rng):
    x = parameter(rng.normal(size=(2, 4)))
    w = rng.normal(size=(2, 4))
    assert check_gradients(lambda: (softmax(x, axis=1) * Tensor(w)).sum(), [x])[0] < 1e-4
    assert check_gradients(lambda: (log_softmax(x, axis=1) * Tensor(w)).sum(), [x])[0] < 1e-4


def test_dropout_modes():
    x = np.ones((4, 5))
    assert np.array_equal(dropout(x, 0.7, train=False).data, x)
    assert np.array_equal(dropout(x, 0.0, train=True, rng=Rng(0)).data, x)
    with pytest.raises(ValueError):
        dropout(x, 1.0, train=True, rng=Rng(0))
    with pytest.raises(ValueError):
        dropout(x, -0.1, train=True, rng=Rng(0))


def test_dropout_survivor_fraction_and_scale():
    out = dropout(np.ones(100_000), 0.3, train=True, rng=Rng(5)).data
    kept = out > 0
    assert abs(kept.mean() - 0.7) < 0.01
    assert np.allclose(out[kept], 1 / 0.7)


def test_shape_ops_gradients(rng):
    a = parameter(rng.normal(size=(2, 3)))
    b = parameter(rng.normal(size=(2, 3)))
    table = parameter(rng.normal(size=(5, 2)))
    w = rng.normal(size=(2, 2, 3))
    errs = check_gradients(lambda: (stack([a, b], axis=1) * Tensor(w.transpose(0, 1, 2))).sum(), [a, b])
    assert max(errs.values()) < 1e-4
    errs = check_gradients(lambda: (concat([a, b], axis=0).max(axis=0)).sum(), [a, b])
    assert max(errs.values()) < 1e-4
    idx = np.array([[0, 4], [4, 1]])
    assert check_gradients(lambda: (take_rows(table, idx) * take_rows(table, idx)).sum(), [table])[0] < 1e-4
    v = parameter(rng.normal(size=3))
    wv = Tensor(rng.normal(size=(4, 3)))
    assert check_gradients(lambda: (expand(v, (4, 3)) * wv).sum(), [v])[0] < 1e-4


def test_rng_streams_are_reproducible_and_independent():
    a = Rng(7).child("x").random(4)
    assert np.array_equal(a, Rng(7).child("x").random(4))
    assert not np.array_equal(a, Rng(7).child("y").random(4))
    assert Rng.algorithm == "PCG64"


def test_numerical_grad_restores_parameter(rng):
    p = parameter(rng.normal(size=3))
    before = p.data.copy()
    numerical_grad(lambda: (p * p).sum(), p)
    assert np.array_equal(p.data, before)
    assert relative_error(np.ones(2), np.ones(2)) == 0.0


def _toy_lstm(rng, H=3, D=2):
    params = {}
    init_bilstm(params, "enc", D, H, Rng(3))
    x = parameter(rng.normal(size=(3, D)))
    return params, x


def test_bilstm_step_gradients_match_finite_differences(rng):
    params, x = _toy_lstm(rng)
    w = Tensor(rng.normal(size=(3, 6)))
    plist = [x] + list(params.values())
    errs = check_gradients(lambda: (bilstm_encode(params, "enc", x) * w).sum(), plist)
    assert max(errs.values()) < 1e-3


def test_bilstm_zero_weights_give_zero_output(rng):
    params, x = _toy_lstm(rng)
    for p in params.values():
        p.data[...] = 0.0
    assert np.array_equal(bilstm_encode(params, "enc", x).data, np.zeros((3, 6)))


def test_bilstm_single_step_shape(rng):
    params, _ = _toy_lstm(rng)
    out = bilstm_encode(params, "enc", Tensor(rng.normal(size=(1, 2))))
    assert out.shape == (1, 6)


def test_bilstm_reversal_symmetry(rng):
    params, x = _toy_lstm(rng)
    swapped = {}
    for k, v in params.items():
        other = k.replace(".fwd.", ".tmp.").replace(".bwd.", ".fwd.").replace(".tmp.", ".bwd.")
        swapped[other] = v
    out = bilstm_encode(params, "enc", x).data
    rev = bilstm_encode(swapped, "enc", Tensor(x.data[::-1].copy())).data
    H = 3
    expected = np.concatenate([out[::-1, H:], out[::-1, :H]], axis=1)
    assert np.allclose(rev, expected, atol=1e-12)
