import json
import math

import numpy as np
import pytest

from dualcert.model import (
    AffineLayer,
    InputRegion,
    Network,
    NetworkFormatError,
    forward,
    load_network,
    predict,
    preactivation,
    preactivation_gradient,
    save_network,
)
from dualcert.synth import random_inputs, random_network

from conftest import make_net


def write_model(tmp_path, doc, name="net.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def identity_doc():
    return {
        "format": "dualcert-net-v1",
        "input_dim": 1,
        "layers": [{"type": "dense", "weights": [[1.0]], "bias": [0.0], "activation": "linear"}],
    }


class TestLoadNetwork:
    def test_identity_network(self, tmp_path):
        net = load_network(write_model(tmp_path, identity_doc()))
        assert net.input_dim == 1
        assert net.output_dim == 1
        assert forward(net, [0.7]) == pytest.approx([0.7])

    def test_shape_mismatch_names_layer(self, tmp_path):
        doc = identity_doc()
        doc["layers"] = [
            {"type": "dense", "weights": [[1.0, 2.0]], "bias": [0.0], "activation": "sigmoid"},
            {"type": "dense", "weights": [[1.0, 1.0]], "bias": [0.0], "activation": "linear"},
        ]
        doc["input_dim"] = 2
        with pytest.raises(NetworkFormatError, match="layer 1"):
            load_network(write_model(tmp_path, doc))

    def test_unknown_activation(self, tmp_path):
        doc = identity_doc()
        doc["layers"][0]["activation"] = "relu"
        with pytest.raises(NetworkFormatError, match="layer 0"):
            load_network(write_model(tmp_path, doc))

    def test_non_finite_entry(self, tmp_path):
        doc = identity_doc()
        doc["layers"][0]["weights"] = [[float("nan")]]
        with pytest.raises(NetworkFormatError, match="layer 0"):
            load_network(write_model(tmp_path, doc))

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(NetworkFormatError, match="not valid JSON"):
            load_network(path)

    def test_wrong_format_tag(self, tmp_path):
        doc = identity_doc()
        doc["format"] = "something-else"
        with pytest.raises(NetworkFormatError, match="dualcert-net-v1"):
            load_network(write_model(tmp_path, doc))

    def test_save_load_round_trip(self, tmp_path):
        net = random_network(seed=3, input_dim=5, hidden_widths=[6, 4], output_dim=3,
                             activation="sigmoid", bias_scale=0.5)
        path = tmp_path / "rt.json"
        save_network(net, path)
        loaded = load_network(path)
        for x in random_inputs(11, net, 10):
            np.testing.assert_allclose(forward(loaded, x), forward(net, x), atol=1e-5)


class TestForward:
    def test_single_sigmoid_neuron(self):
        # sigmoid hidden unit read out through an identity linear layer
        net = make_net(([[1.0]], [0.0], "sigmoid"), ([[1.0]], [0.0], "linear"))
        assert forward(net, [0.0]) == pytest.approx([0.5])

    def test_matches_independent_reimplementation(self, two_hidden_sigmoid):
        rng = np.random.default_rng(7)
        for _ in range(5):
            x = rng.normal(size=3)
            cur = x
            for layer in two_hidden_sigmoid.layers[:-1]:
                z = layer.weights @ cur + layer.bias
                cur = 1.0 / (1.0 + np.exp(-z))
            expected = two_hidden_sigmoid.layers[-1].weights @ cur + two_hidden_sigmoid.layers[-1].bias
            np.testing.assert_allclose(forward(two_hidden_sigmoid, x), expected, atol=1e-12)

    def test_deterministic_bitwise(self, two_hidden_sigmoid):
        x = np.array([0.3, -0.2, 1.1])
        a = forward(two_hidden_sigmoid, x)
        b = forward(two_hidden_sigmoid, x)
        assert np.array_equal(a, b)

    def test_dimension_mismatch(self, two_hidden_sigmoid):
        with pytest.raises(ValueError, match="features"):
            forward(two_hidden_sigmoid, [1.0, 2.0])


class TestPreactivation:
    def test_first_layer_exact(self, two_hidden_sigmoid):
        x = np.array([0.1, 0.2, -0.4])
        w = two_hidden_sigmoid.layers[0].weights
        b = two_hidden_sigmoid.layers[0].bias
        for r in range(4):
            assert preactivation(two_hidden_sigmoid, 0, r, x) == pytest.approx(
                float(w[r] @ x + b[r]), abs=1e-15
            )

    def test_second_layer_manual_composition(self, two_hidden_sigmoid):
        x = np.array([0.5, -1.0, 0.25])
        l0, l1 = two_hidden_sigmoid.layers[0], two_hidden_sigmoid.layers[1]
        hidden = 1.0 / (1.0 + np.exp(-(l0.weights @ x + l0.bias)))
        expected = l1.weights @ hidden + l1.bias
        for r in range(3):
            assert preactivation(two_hidden_sigmoid, 1, r, x) == pytest.approx(
                float(expected[r]), abs=1e-12
            )

    def test_matches_forward_instrumentation(self, two_hidden_sigmoid):
        from dualcert.model import hidden_preactivations

        rng = np.random.default_rng(17)
        for _ in range(10):
            x = rng.normal(size=3)
            zs = hidden_preactivations(two_hidden_sigmoid, x)
            for i, z in enumerate(zs):
                for r in range(z.shape[0]):
                    assert preactivation(two_hidden_sigmoid, i, r, x) == pytest.approx(
                        float(z[r]), abs=1e-12
                    )

    def test_index_out_of_range(self, two_hidden_sigmoid):
        with pytest.raises(IndexError):
            preactivation(two_hidden_sigmoid, 2, 0, np.zeros(3))
        with pytest.raises(IndexError):
            preactivation(two_hidden_sigmoid, 0, 4, np.zeros(3))


class TestPreactivationGradient:
    def test_first_layer_is_weight_row(self, two_hidden_sigmoid):
        x = np.array([0.3, 0.1, -0.7])
        for r in range(4):
            got = preactivation_gradient(two_hidden_sigmoid, 0, r, x)
            np.testing.assert_array_equal(got, two_hidden_sigmoid.layers[0].weights[r])

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 100:
            kind = ("sigmoid", "tanh", "arctan")[checked % 3]
            net = random_network(seed=int(rng.integers(1 << 30)), input_dim=4,
                                 hidden_widths=[5, 4], output_dim=2, activation=kind,
                                 bias_scale=0.5)
            x = rng.normal(size=4)
            layer = int(rng.integers(0, 2))
            neuron = int(rng.integers(0, net.layers[layer].out_dim))
            grad = preactivation_gradient(net, layer, neuron, x)
            h = 1e-5
            for j in range(4):
                e = np.zeros(4)
                e[j] = h
                fd = (preactivation(net, layer, neuron, x + e)
                      - preactivation(net, layer, neuron, x - e)) / (2 * h)
                denom = max(abs(fd), 1e-8)
                assert abs(grad[j] - fd) / denom < 1e-5
            checked += 1

    def test_zero_downstream_weights_give_zero_gradient(self):
        net = make_net(
            ([[1.0, -1.0], [0.5, 2.0]], [0.0, 0.1], "tanh"),
            ([[0.0, 0.0]], [0.3], "tanh"),
            ([[1.0]], [0.0], "linear"),
        )
        grad = preactivation_gradient(net, 1, 0, np.array([0.2, 0.4]))
        np.testing.assert_array_equal(grad, np.zeros(2))


class TestPredict:
    def test_argmax_of_outputs(self):
        net = make_net((np.zeros((3, 2)), [0.2, 0.9, 0.1], "linear"))
        assert predict(net, [0.0, 0.0]) == 1

    def test_tie_goes_to_lowest_index(self):
        net = make_net((np.zeros((2, 2)), [0.5, 0.5], "linear"))
        assert predict(net, [1.0, -1.0]) == 0

    def test_equals_argmax_of_forward(self, two_hidden_sigmoid):
        rng = np.random.default_rng(8)
        for _ in range(20):
            x = rng.normal(size=3)
            assert predict(two_hidden_sigmoid, x) == int(np.argmax(forward(two_hidden_sigmoid, x)))

    def test_invariant_under_common_output_bias_shift(self, two_hidden_sigmoid):
        rng = np.random.default_rng(9)
        last = two_hidden_sigmoid.layers[-1]
        shifted = make_net(
            *[(l.weights, l.bias, l.activation) for l in two_hidden_sigmoid.layers[:-1]],
            (last.weights, last.bias + 3.7, "linear"),
        )
        for _ in range(10):
            x = rng.normal(size=3)
            assert predict(two_hidden_sigmoid, x) == predict(shifted, x)


class TestNetworkValidation:
    def test_hidden_layer_must_have_s_curve(self):
        with pytest.raises(NetworkFormatError, match="S-curve"):
            make_net(([[1.0]], [0.0], "linear"), ([[1.0]], [0.0], "linear"))

    def test_final_layer_must_be_linear(self):
        with pytest.raises(NetworkFormatError, match="linear"):
            make_net(([[1.0]], [0.0], "sigmoid"), ([[1.0]], [0.0], "tanh"))

    def test_bias_length_checked(self):
        with pytest.raises(NetworkFormatError, match="bias"):
            AffineLayer(weights=np.ones((2, 2)), bias=np.zeros(3), activation="linear")


class TestInputRegion:
    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError):
            InputRegion(center=np.zeros(2), radius=-0.1)

    def test_clamp_validation(self):
        with pytest.raises(ValueError):
            InputRegion(center=np.zeros(2), radius=0.1, clamp=(1.0, 0.0))
        with pytest.raises(ValueError):
            InputRegion(center=np.array([2.0, 0.0]), radius=0.1, clamp=(0.0, 1.0))

    def test_bounds_respect_clamp(self):
        region = InputRegion(center=np.array([0.05, 0.9]), radius=0.2, clamp=(0.0, 1.0))
        lo, hi = region.bounds()
        np.testing.assert_allclose(lo, [0.0, 0.7])
        np.testing.assert_allclose(hi, [0.25, 1.0])
        assert region.contains(region.clip(np.array([-1.0, 2.0])))

    def test_unclamped_center_radii_are_exact(self):
        region = InputRegion(center=np.array([0.3, -0.4]), radius=0.25)
        ctr, rad = region.box_center_radii()
        assert np.array_equal(ctr, region.center)
        np.testing.assert_array_equal(rad, [0.25, 0.25])
