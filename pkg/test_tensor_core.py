import math

import numpy as np
import pytest

from conftest import naive_conv3d, numerical_gradient, relative_error
from landslide_framework.exceptions import LabelError, NonFiniteError, ShapeError, TapeError
from landslide_framework.tensor import (
    AdamState, ComputationTape, Tensor, adam_step, affine, backward, bce_loss, conv3d, conv_output_extent,
    global_avg_pool, maxpool3d, reduce_mean, reduce_sum, relu, reshape, sigmoid,
)


def t64(array, grad=True, name=None):
    return Tensor(np.asarray(array, dtype=np.float64), requires_grad=grad, name=name, dtype=np.float64)


# conv3d

def test_conv3d_identity_kernel():
    out = conv3d(Tensor(np.full((1, 1, 1, 1, 1), 7.0)), Tensor(np.ones((1, 1, 1, 1, 1))), Tensor(np.zeros(1)))
    assert out.shape == (1, 1, 1, 1, 1)
    assert out.item() == 7.0


def test_conv3d_all_ones_kernel_sums_window():
    x = Tensor(np.arange(1, 9, dtype=np.float32).reshape(1, 1, 2, 2, 2))
    out = conv3d(x, Tensor(np.ones((1, 1, 2, 2, 2))), Tensor(np.zeros(1)))
    assert out.item() == 36.0


def test_conv3d_full_scale_shape():
    # shape only: a zero input of the full-size tile keeps this cheap enough
    x = Tensor(np.zeros((1, 5, 2, 512, 512), dtype=np.float32))
    out = conv3d(x, Tensor(np.zeros((16, 5, 2, 3, 3))), Tensor(np.zeros(16)), stride=(1, 1, 1), padding=(0, 1, 1))
    assert out.shape == (1, 16, 1, 512, 512)


def test_conv3d_channel_mismatch_names_axis():
    with pytest.raises(ShapeError, match="channel"):
        conv3d(Tensor(np.ones((1, 2, 2, 4, 4))), Tensor(np.ones((1, 3, 1, 1, 1))), Tensor(np.zeros(1)))


def test_conv3d_kernel_larger_than_padded_extent():
    with pytest.raises(ShapeError, match="height"):
        conv3d(Tensor(np.ones((1, 1, 2, 2, 4))), Tensor(np.ones((1, 1, 1, 3, 1))), Tensor(np.zeros(1)))


def test_conv3d_matches_naive_loops():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n, c, f = rng.integers(1, 3), rng.integers(1, 4), rng.integers(1, 4)
        d, h, w = rng.integers(1, 5), rng.integers(1, 9), rng.integers(1, 9)
        kernel_ext = [int(rng.integers(1, min(e, 3) + 1)) for e in (d, h, w)]
        stride = tuple(int(s) for s in rng.integers(1, 3, size=3))
        padding = tuple(int(rng.integers(0, k)) if k > 1 else 0 for k in kernel_ext)
        x = rng.standard_normal((n, c, d, h, w)).astype(np.float32)
        k = rng.standard_normal((f, c, *kernel_ext)).astype(np.float32)
        b = rng.standard_normal(f).astype(np.float32)
        out = conv3d(Tensor(x), Tensor(k), Tensor(b), stride=stride, padding=padding)
        expected = naive_conv3d(x, k, b, stride, padding)
        assert out.shape == expected.shape
        np.testing.assert_allclose(out.data, expected, rtol=1e-5, atol=1e-5)


@pytest.mark.parametrize("extent", [1, 2, 5, 8])
@pytest.mark.parametrize("kernel", [1, 2, 3])
@pytest.mark.parametrize("stride", [1, 2, 3])
@pytest.mark.parametrize("pad", [0, 1])
def test_conv3d_output_extent_formula(extent, kernel, stride, pad):
    if kernel > extent + 2 * pad:
        pytest.skip("kernel does not fit")
    x = Tensor(np.ones((1, 1, 1, extent, 1)))
    out = conv3d(x, Tensor(np.ones((1, 1, 1, kernel, 1))), Tensor(np.zeros(1)), stride=(1, stride, 1), padding=(0, pad, 0))
    assert out.shape[3] == (extent + 2 * pad - kernel) // stride + 1 == conv_output_extent(extent, kernel, stride, pad)


# maxpool3d

def test_maxpool_of_constant_is_constant():
    out = maxpool3d(Tensor(np.full((1, 2, 2, 4, 4), 3.0)), (1, 2, 2))
    assert np.all(out.data == 3.0)


def test_maxpool_picks_maximum():
    out = maxpool3d(Tensor(np.array([1.0, 2.0, 3.0, 4.0]).reshape(1, 1, 1, 2, 2)), (1, 2, 2))
    assert out.item() == 4.0


def test_maxpool_backward_routes_to_argmax():
    x = t64(np.arange(1, 9).reshape(1, 1, 2, 2, 2))
    with ComputationTape() as tape:
        loss = reduce_sum(maxpool3d(x, (2, 2, 2)))
    backward(loss, tape)
    assert loss.item() == 8.0
    expected = np.zeros(8)
    expected[7] = 1.0
    np.testing.assert_array_equal(x.grad.reshape(-1), expected)


def test_maxpool_ties_go_to_first_element():
    x = t64(np.ones((1, 1, 1, 2, 2)))
    with ComputationTape() as tape:
        loss = reduce_sum(maxpool3d(x, (1, 2, 2)))
    backward(loss, tape)
    np.testing.assert_array_equal(x.grad.reshape(-1), [1.0, 0.0, 0.0, 0.0])


def test_maxpool_window_too_large():
    with pytest.raises(ShapeError):
        maxpool3d(Tensor(np.ones((1, 1, 1, 2, 2))), (1, 3, 3))


# affine and pointwise

def test_affine_identity_weight():
    x = np.random.default_rng(0).standard_normal((3, 4))
    out = affine(Tensor(x, dtype=np.float64), Tensor(np.eye(4)), Tensor(np.zeros(4)))
    np.testing.assert_allclose(out.data, x)


def test_affine_hand_example():
    out = affine(Tensor([[1.0, 2.0]]), Tensor([[1.0, 0.0], [0.0, 1.0]]), Tensor([3.0, 4.0]))
    np.testing.assert_array_equal(out.data, [[4.0, 6.0]])


def test_affine_matches_triple_loop():
    rng = np.random.default_rng(5)
    x, w, b = rng.standard_normal((4, 8)), rng.standard_normal((8, 3)), rng.standard_normal(3)
    out = affine(Tensor(x), Tensor(w), Tensor(b))
    expected = np.zeros((4, 3))
    for i in range(4):
        for j in range(3):
            expected[i, j] = b[j] + sum(x[i, k] * w[k, j] for k in range(8))
    np.testing.assert_allclose(out.data, expected, atol=1e-5)


def test_affine_extent_mismatch():
    with pytest.raises(ShapeError, match="inner axis"):
        affine(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 2))), Tensor(np.zeros(2)))


def test_relu_values_and_idempotence():
    out = relu(Tensor([-1.0, 0.0, 2.0]))
    np.testing.assert_array_equal(out.data, [0.0, 0.0, 2.0])
    np.testing.assert_array_equal(relu(out).data, out.data)


def test_sigmoid_values():
    assert sigmoid(Tensor([0.0])).item() == 0.5
    assert abs(sigmoid(Tensor([-10.0], dtype=np.float64)).item() - 1.0 / (1.0 + math.exp(10.0))) < 1e-9
    assert abs(sigmoid(Tensor([-10.0], dtype=np.float64)).item() - 4.5398e-5) < 1e-9


def test_sigmoid_strictly_inside_unit_interval():
    out = sigmoid(Tensor([-200.0, -50.0, 50.0, 200.0]))
    assert np.all(out.data > 0.0) and np.all(out.data < 1.0)


# bce_loss

def test_bce_half_probability():
    assert abs(bce_loss(Tensor([0.5]), [1.0]).value - math.log(2.0)) < 1e-6


def test_bce_perfect_prediction_hits_clamp():
    assert bce_loss(Tensor([1.0]), [1.0]).value <= 1.2e-7


def test_bce_mean_hand_example():
    loss = bce_loss(Tensor([0.9, 0.2], dtype=np.float64), [1.0, 0.0])
    assert loss.reduction == "mean"
    assert abs(loss.value - (-math.log(0.9) - math.log(0.8)) / 2.0) < 1e-6


def test_bce_sum_reduction():
    mean = bce_loss(Tensor([0.9, 0.2], dtype=np.float64), [1.0, 0.0]).value
    total = bce_loss(Tensor([0.9, 0.2], dtype=np.float64), [1.0, 0.0], reduction="sum").value
    assert abs(total - 2.0 * mean) < 1e-12


def test_bce_rejects_non_binary_labels():
    with pytest.raises(LabelError):
        bce_loss(Tensor([0.5]), [0.5])


def test_bce_non_negative():
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = rng.uniform(0.0, 1.0, size=6)
        y = rng.integers(0, 2, size=6).astype(float)
        assert bce_loss(Tensor(p, dtype=np.float64), y).value >= 0.0


# backward

def test_backward_of_sum_is_ones():
    x = t64(np.random.default_rng(0).standard_normal((2, 3, 4)))
    with ComputationTape() as tape:
        loss = reduce_sum(x)
    backward(loss, tape)
    np.testing.assert_array_equal(x.grad, np.ones((2, 3, 4)))


def test_sigmoid_bce_gradient_closed_form():
    logit = math.log(0.7 / 0.3)
    w = t64([[1.0]])
    x = Tensor([[logit]], dtype=np.float64)
    b = t64([0.0])
    with ComputationTape() as tape:
        z = affine(x, w, b)
        p = sigmoid(reshape(z, (1,)))
        loss = bce_loss(p, [1.0])
    backward(loss, tape)
    # dL/dz = p - y and z = w * x + b
    assert abs(b.grad[0] - (0.7 - 1.0)) < 1e-9
    assert abs(w.grad[0, 0] - (0.7 - 1.0) * logit) < 1e-9


@pytest.mark.parametrize("logit, label", [(17.0, 0.0), (-17.0, 1.0)])
def test_saturated_wrong_prediction_still_has_gradient(logit, label):
    z = Tensor([logit], requires_grad=True)
    with ComputationTape() as tape:
        loss = bce_loss(sigmoid(z), [label])
    backward(loss, tape)
    assert abs(loss.value + math.log(1e-7)) < 1e-3
    # pushes the logit back toward the label
    assert np.sign(z.grad[0]) == np.sign(logit)
    assert abs(z.grad[0]) > 0.1


def test_backward_gives_zero_to_unused_parameters():
    used, unused = t64([1.0, 2.0]), t64([3.0])
    with ComputationTape() as tape:
        loss = reduce_sum(used)
    backward(loss, tape, params=[used, unused])
    np.testing.assert_array_equal(unused.grad, [0.0])


def test_backward_rejects_non_scalar_loss():
    x = t64(np.ones(3))
    with ComputationTape() as tape:
        out = relu(x)
    with pytest.raises(TapeError, match="scalar"):
        backward(out, tape)


def test_backward_rejects_detached_loss():
    x = t64(np.ones(3))
    with ComputationTape():
        loss = reduce_sum(x)
    with pytest.raises(TapeError, match="detached"):
        backward(loss, ComputationTape())


def test_tape_records_in_order():
    x = t64(np.ones((1, 2)))
    with ComputationTape() as tape:
        reduce_mean(relu(x))
    assert [node.op for node in tape.nodes] == ["relu", "mean"]


def _check_op_gradients(build, inputs, rng, entries=3):
    """Compare backward against central differences on a few entries of each input"""
    def loss_value():
        return build(*inputs).item()

    with ComputationTape() as tape:
        loss = build(*inputs)
    backward(loss, tape)
    for tensor in inputs:
        for _ in range(entries):
            index = tuple(int(rng.integers(e)) for e in tensor.shape)
            numeric = numerical_gradient(loss_value, tensor.data, index)
            assert relative_error(float(tensor.grad[index]), numeric) < 1e-4, (tensor.name, index)


OP_CASES = {
    "conv3d": lambda rng: (
        lambda x, k, b: reduce_sum(conv3d(x, k, b, stride=(1, 2, 1), padding=(0, 1, 1))),
        [t64(rng.standard_normal((2, 2, 2, 5, 4)), name="x"),
         t64(rng.standard_normal((3, 2, 2, 3, 2)), name="k"),
         t64(rng.standard_normal(3), name="b")],
    ),
    "maxpool3d": lambda rng: (
        lambda x: reduce_sum(maxpool3d(x, (1, 2, 2))),
        [t64(rng.standard_normal((1, 2, 2, 4, 4)), name="x")],
    ),
    "affine": lambda rng: (
        lambda x, w, b: reduce_mean(affine(x, w, b)),
        [t64(rng.standard_normal((3, 4)), name="x"), t64(rng.standard_normal((4, 2)), name="w"),
         t64(rng.standard_normal(2), name="b")],
    ),
    "sigmoid_bce": lambda rng: (
        lambda z: bce_loss(sigmoid(z), np.array([1.0, 0.0, 1.0])).tensor,
        [t64(rng.standard_normal(3), name="z")],
    ),
    "relu": lambda rng: (
        lambda x: reduce_sum(relu(x)),
        [t64(rng.uniform(0.1, 2.0, size=10) * rng.choice([-1.0, 1.0], size=10), name="x")],
    ),
    "global_avg_pool": lambda rng: (
        lambda x: reduce_sum(global_avg_pool(x)),
        [t64(rng.standard_normal((2, 3, 1, 2, 2)), name="x")],
    ),
}


@pytest.mark.parametrize("op", sorted(OP_CASES))
def test_operation_gradients_match_finite_differences(op):
    for seed in range(100):
        rng = np.random.default_rng(seed)
        build, inputs = OP_CASES[op](rng)
        _check_op_gradients(build, inputs, rng)


# adam

def test_adam_zero_gradient_keeps_parameters():
    param = t64([1.0, -2.0])
    state = AdamState.for_parameters([param])
    for _ in range(5):
        adam_step([param], [np.zeros(2)], state)
    np.testing.assert_array_equal(param.data, [1.0, -2.0])
    assert state.step_count == 5


def test_adam_first_step():
    param = t64([1.0])
    state = AdamState.for_parameters([param], learning_rate=0.001)
    adam_step([param], [np.array([0.5])], state)
    assert abs(param.data[0] - (1.0 - 0.001 * 0.5 / (0.5 + 1e-8))) < 1e-12
    assert abs(param.data[0] - 0.999) < 1e-7


def test_adam_constant_gradient_moves_by_learning_rate():
    param = t64([0.0])
    state = AdamState.for_parameters([param], learning_rate=0.01)
    adam_step([param], [np.array([1.0])], state)
    first = param.data[0]
    adam_step([param], [np.array([1.0])], state)
    assert abs(first + 0.01) < 1e-8
    assert abs(param.data[0] - first + 0.01) < 1e-8


def test_adam_second_moment_non_negative():
    param = t64(np.zeros(4))
    state = AdamState.for_parameters([param])
    rng = np.random.default_rng(3)
    for _ in range(10):
        adam_step([param], [rng.standard_normal(4)], state)
        assert np.all(state.second_moment[0] >= 0.0)


def test_adam_rejects_non_finite_gradient_by_name():
    param = t64([1.0], name="dense8.bias")
    with pytest.raises(NonFiniteError, match="dense8.bias"):
        adam_step([param], [np.array([np.nan])], AdamState.for_parameters([param]))
    assert param.data[0] == 1.0


def test_operations_are_deterministic():
    rng = np.random.default_rng(11)
    x = rng.standard_normal((2, 3, 2, 6, 6)).astype(np.float32)
    k = rng.standard_normal((4, 3, 2, 3, 3)).astype(np.float32)
    b = rng.standard_normal(4).astype(np.float32)
    first = conv3d(Tensor(x), Tensor(k), Tensor(b), padding=(0, 1, 1)).data
    second = conv3d(Tensor(x), Tensor(k), Tensor(b), padding=(0, 1, 1)).data
    assert first.tobytes() == second.tobytes()
