import math

import numpy as np
import pytest
from pydantic import ValidationError

from conftest import make_pair, numerical_gradient, relative_error
from landslide_framework.exceptions import CheckpointError, ConfigurationError, ShapeError
from landslide_framework.model import ConvLayerSpec, NetworkConfig, build_network, load_checkpoint, save_checkpoint
from landslide_framework.tensor import ComputationTape, backward, bce_loss


def test_default_parameter_count():
    net = build_network(NetworkConfig.desk_scale())
    assert net.parameter_count == 144689
    assert net.learned_layer_count == 8


def test_parameter_names_follow_ledger():
    names = [name for name, _ in NetworkConfig().parameter_shapes()]
    assert names[:2] == ["conv1.weight", "conv1.bias"]
    assert names[-2:] == ["dense8.weight", "dense8.bias"]
    assert len(names) == 16


def test_layer_shapes_at_desk_scale():
    shapes = dict(NetworkConfig.desk_scale().layer_shapes())
    assert shapes["conv1"] == (16, 1, 64, 64)
    assert shapes["pool1"] == (16, 1, 32, 32)
    assert shapes["pool2"] == (32, 1, 16, 16)
    assert shapes["pool3"] == (64, 1, 8, 8)
    assert shapes["pool4"] == (64, 1, 4, 4)
    assert shapes["conv5"] == (128, 1, 4, 4)
    assert shapes["global_pool"] == (128,)
    assert shapes["dense8"] == (1,)


def test_forward_trace_matches_static_shapes(tiny_config):
    net = build_network(tiny_config)
    trace = []
    batch = np.stack([make_pair(1, bands=2).to_input(), make_pair(0, bands=2, seed=1).to_input()])
    out = net.forward(batch, trace=trace)
    assert out.shape == (2,)
    assert trace == tiny_config.layer_shapes()
    assert np.all((out.data > 0.0) & (out.data < 1.0))


def test_ledger_requires_eight_learned_layers():
    with pytest.raises(ValidationError, match="exactly 8"):
        NetworkConfig(conv_layers=[ConvLayerSpec(out_channels=4, kernel=(2, 3, 3))] * 4)


def test_first_convolution_consumes_time_axis():
    layers = [ConvLayerSpec(out_channels=4)] + NetworkConfig().conv_layers[1:]
    with pytest.raises(ValidationError, match="time_steps"):
        NetworkConfig(conv_layers=layers)


def test_tile_not_divisible_by_pooling_factor():
    with pytest.raises(ConfigurationError, match="pooling factor 16"):
        build_network(NetworkConfig(tile_size=60))


def test_forward_rejects_wrong_band_count(tiny_config):
    net = build_network(tiny_config)
    with pytest.raises(ShapeError):
        net.forward(np.zeros((1, 3, 2, 8, 8)))


def test_initialization_is_seeded():
    first = build_network(NetworkConfig.tiny(init_seed=3))
    second = build_network(NetworkConfig.tiny(init_seed=3))
    other = build_network(NetworkConfig.tiny(init_seed=4))
    for a, b in zip(first.parameters, second.parameters):
        assert a.data.tobytes() == b.data.tobytes()
    assert not np.array_equal(first.parameter("conv1.weight").data, other.parameter("conv1.weight").data)


def test_initialization_scale_and_zero_biases():
    net = build_network(NetworkConfig.desk_scale(init_seed=1))
    weight = net.parameter("conv5.weight").data
    expected = math.sqrt(2.0 / (64 * 3 * 3))
    assert abs(weight.std() - expected) / expected < 0.05
    assert not np.any(net.parameter("dense6.bias").data)


def _network_loss(net, inputs, labels):
    return bce_loss(net.forward(inputs), labels).value


def _kink_free_gradient(net, inputs, labels, array, index):
    """Central difference, or None when halving the step changes it (a relu or pool switch)"""
    loss = lambda: _network_loss(net, inputs, labels)
    coarse = numerical_gradient(loss, array, index, step=1e-5)
    fine = numerical_gradient(loss, array, index, step=5e-6)
    if relative_error(coarse, fine) > 1e-4:
        return None
    return fine


def _backprop(net, inputs, labels):
    with ComputationTape() as tape:
        loss = bce_loss(net.forward(inputs), labels)
    backward(loss, tape, net.parameters)


def test_network_gradients_match_finite_differences():
    checked = 0
    for seed in range(100):
        net = build_network(NetworkConfig.tiny(dtype="float64", init_seed=seed))
        pairs = [make_pair(1, bands=2, seed=seed), make_pair(0, bands=2, seed=seed + 1000)]
        inputs = np.stack([p.to_input() for p in pairs])
        labels = np.array([1.0, 0.0])
        _backprop(net, inputs, labels)
        rng = np.random.default_rng(seed)
        for param in net.parameters:
            index = tuple(int(rng.integers(e)) for e in param.shape)
            numeric = _kink_free_gradient(net, inputs, labels, param.data, index)
            if numeric is None:
                continue
            assert relative_error(float(param.grad[index]), numeric) < 1e-4, (seed, param.name, index)
            checked += 1
    assert checked > 1200


def test_every_dense_entry_of_one_network(tiny_config):
    net = build_network(tiny_config)
    pairs = [make_pair(1, bands=2, seed=5), make_pair(0, bands=2, seed=6)]
    inputs = np.stack([p.to_input() for p in pairs])
    labels = np.array([1.0, 0.0])
    _backprop(net, inputs, labels)
    for name in ("dense6.weight", "dense7.weight", "dense8.weight", "dense8.bias", "conv1.bias"):
        param = net.parameter(name)
        for index in np.ndindex(*param.shape):
            numeric = _kink_free_gradient(net, inputs, labels, param.data, index)
            if numeric is not None:
                assert relative_error(float(param.grad[index]), numeric) < 1e-4, (name, index)


def test_checkpoint_round_trip(tmp_path):
    net = build_network(NetworkConfig.tiny(init_seed=11))
    path = save_checkpoint(net, tmp_path / "model.lsnw")
    loaded = load_checkpoint(path)
    assert loaded.config == net.config
    for a, b in zip(net.parameters, loaded.parameters):
        assert a.name == b.name
        np.testing.assert_array_equal(a.data, b.data)
    batch = make_pair(1, bands=2).to_input()[None]
    assert loaded.forward(batch).item() == net.forward(batch).item()


def test_checkpoint_rejects_bad_magic(tmp_path):
    path = tmp_path / "bogus.lsnw"
    path.write_bytes(b"NOPE" + bytes(32))
    with pytest.raises(CheckpointError, match="not an LSNW"):
        load_checkpoint(path)


def test_checkpoint_rejects_truncation(tmp_path):
    path = save_checkpoint(build_network(NetworkConfig.tiny()), tmp_path / "model.lsnw")
    path.write_bytes(path.read_bytes()[:-10])
    with pytest.raises(CheckpointError, match="truncated"):
        load_checkpoint(path)


def test_checkpoint_missing_file(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "absent.lsnw")


def test_predict_applies_threshold(tiny_config):
    net = build_network(tiny_config)
    pair = make_pair(1, bands=2)
    assert net.predict(pair, threshold=0.0).label == 1
    strict = net.predict(pair, threshold=1.0)
    assert strict.label == 0
    assert 0.0 < strict.probability < 1.0


def test_predict_rejects_other_tile_size(tiny_config):
    net = build_network(tiny_config)
    with pytest.raises(ShapeError):
        net.predict(make_pair(1, size=16, bands=2))
