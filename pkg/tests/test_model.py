import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cem.model import (
    DenseAutoencoder,
    DenseNetwork,
    Layer,
    ShapeError,
    TrainConfig,
    WeightFormatError,
    accuracy,
    dumps_weights,
    input_gradient,
    load_weights,
    loads_weights,
    predict,
    reconstruct,
    reconstruction_error,
    reconstruction_gradient,
    save_weights,
    train_autoencoder,
    train_classifier,
)
from cem.datasets import make_blobs

from conftest import central_diff, min_kink_distance, random_ae, random_net, rel_err

I2 = np.eye(2)


def naive_forward(net, x):
    h = list(x)
    for layer in net.layers:
        out = []
        for i in range(layer.n_out):
            s = 0.0
            for j in range(layer.n_in):
                s += layer.weight[i, j] * h[j]
            s += layer.bias[i]
            out.append(max(s, 0.0) if layer.activation == "relu" else s)
        h = out
    return np.array(h)


def identity_ae(d, clamp=(0.0, 1.0)):
    eye = DenseNetwork((Layer(np.eye(d), np.zeros(d)),))
    return DenseAutoencoder(eye, eye, clamp)


class TestPredict:
    def test_identity_network(self):
        net = DenseNetwork((Layer(I2, np.zeros(2)),))
        np.testing.assert_array_equal(predict(net, [1.0, -2.0]), [1.0, -2.0])

    def test_relu_clamps_negatives(self):
        net = DenseNetwork((Layer(I2, np.zeros(2), "relu"), Layer(I2, np.zeros(2))))
        np.testing.assert_array_equal(predict(net, [1.0, -2.0]), [1.0, 0.0])

    def test_matches_triple_loop(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            net = random_net(rng, [5, 7, 3])
            x = rng.normal(size=5)
            np.testing.assert_allclose(predict(net, x), naive_forward(net, x), rtol=0, atol=1e-12)

    def test_batch_rows_match_single(self):
        rng = np.random.default_rng(4)
        net = random_net(rng, [4, 6, 3])
        X = rng.normal(size=(5, 4))
        np.testing.assert_allclose(predict(net, X), [predict(net, x) for x in X], atol=1e-14)

    def test_pure(self):
        rng = np.random.default_rng(5)
        net = random_net(rng, [4, 6, 3])
        x = rng.normal(size=4)
        assert np.array_equal(predict(net, x), predict(net, x.copy()))

    def test_dimension_mismatch(self):
        net = DenseNetwork((Layer(I2, np.zeros(2)),))
        with pytest.raises(ShapeError):
            predict(net, [1.0, 2.0, 3.0])

    def test_chain_checked(self):
        with pytest.raises(ShapeError, match="layer 1"):
            DenseNetwork((Layer(np.ones((3, 2)), np.zeros(3)), Layer(np.ones((2, 2)), np.zeros(2))))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            Layer(np.array([[np.nan]]), np.zeros(1))


class TestInputGradient:
    def test_linear_rows(self):
        rng = np.random.default_rng(0)
        W = rng.normal(size=(3, 4))
        net = DenseNetwork((Layer(W, rng.normal(size=3)),))
        for i in range(3):
            np.testing.assert_array_equal(input_gradient(net, rng.normal(size=4), np.eye(3)[i]), W[i])

    def test_zero_weights(self):
        rng = np.random.default_rng(1)
        net = random_net(rng, [4, 5, 3])
        np.testing.assert_array_equal(input_gradient(net, rng.normal(size=4), np.zeros(3)), np.zeros(4))

    def test_relu_kink_subgradient_is_zero(self):
        net = DenseNetwork((Layer(np.array([[1.0]]), np.zeros(1), "relu"), Layer(np.array([[1.0]]), np.zeros(1))))
        assert input_gradient(net, [0.0], [1.0])[0] == 0.0

    def test_finite_differences(self):
        rng = np.random.default_rng(2)
        checked = 0
        while checked < 10:
            net = random_net(rng, [5, 8, 6, 3])
            x = rng.normal(size=5)
            if min_kink_distance(net.layers, x) < 1e-3:
                continue
            w = rng.normal(size=3)
            fd = central_diff(lambda z: w @ predict(net, z), x)
            assert rel_err(input_gradient(net, x, w), fd) < 1e-5
            checked += 1

    def test_weight_length_checked(self):
        net = DenseNetwork((Layer(I2, np.zeros(2)),))
        with pytest.raises(ShapeError):
            input_gradient(net, [0.0, 0.0], [1.0])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_input_gradient_property(seed):
    rng = np.random.default_rng(seed)
    sizes = [int(rng.integers(1, 6)), int(rng.integers(1, 8)), int(rng.integers(2, 5))]
    net = random_net(rng, sizes)
    x = rng.normal(size=sizes[0])
    if min_kink_distance(net.layers, x) < 1e-3:
        return
    w = rng.normal(size=sizes[-1])
    fd = central_diff(lambda z: w @ predict(net, z), x)
    assert rel_err(input_gradient(net, x, w), fd) < 1e-5 or np.linalg.norm(fd) < 1e-9


class TestAutoencoder:
    def test_identity_reconstructs(self):
        x = np.array([0.1, 0.7, 0.3])
        np.testing.assert_array_equal(reconstruct(identity_ae(3), x), x)

    def test_zero_decoder(self):
        enc = DenseNetwork((Layer(np.eye(3), np.zeros(3)),))
        dec = DenseNetwork((Layer(np.zeros((3, 3)), np.zeros(3)),))
        ae = DenseAutoencoder(enc, dec, (0.0, 1.0))
        np.testing.assert_array_equal(reconstruct(ae, [0.2, 0.5, 0.9]), np.zeros(3))

    def test_clamp(self):
        enc = DenseNetwork((Layer(np.eye(2), np.zeros(2)),))
        dec = DenseNetwork((Layer(2 * np.eye(2), np.zeros(2)),))
        ae = DenseAutoencoder(enc, dec, (0.0, 1.0))
        np.testing.assert_array_equal(reconstruct(ae, [0.25, 0.75]), [0.5, 1.0])

    def test_identity_gradient_zero(self):
        np.testing.assert_array_equal(reconstruction_gradient(identity_ae(3), [0.2, 0.4, 0.6]), np.zeros(3))

    def test_zero_ae_gradient_is_2x(self):
        enc = DenseNetwork((Layer(np.eye(3), np.zeros(3)),))
        dec = DenseNetwork((Layer(np.zeros((3, 3)), np.zeros(3)),))
        ae = DenseAutoencoder(enc, dec, (0.0, 1.0))
        x = np.array([0.2, -0.4, 0.6])
        np.testing.assert_array_equal(reconstruction_gradient(ae, x), 2 * x)

    @pytest.mark.parametrize("clamp", [None, (0.0, 1.0)])
    def test_gradient_finite_differences(self, clamp):
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 10:
            ae = random_ae(rng, 5, clamp=clamp)
            x = rng.uniform(0, 1, size=5)
            if min_kink_distance(ae.layers, x, clamp) < 1e-3:
                continue
            fd = central_diff(lambda z: reconstruction_error(ae, z), x)
            assert rel_err(reconstruction_gradient(ae, x), fd) < 1e-5
            checked += 1

    def test_training_reduces_error(self):
        X, _ = make_blobs(200, seed=0)
        cfg = TrainConfig(epochs=200, learning_rate=0.5, batch_size=20, seed=0)
        one_epoch = train_autoencoder(X, hidden=(4, 2, 4), cfg=TrainConfig(epochs=1, learning_rate=1e-9, batch_size=200, seed=0))
        trained = train_autoencoder(X, hidden=(4, 2, 4), cfg=cfg)
        before = np.mean(reconstruction_error(one_epoch.model, X))
        after = np.mean(reconstruction_error(trained.model, X))
        assert after < before

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            reconstruct(identity_ae(3), [0.1, 0.2])


class TestTraining:
    def test_blobs(self):
        X, y = make_blobs(200, seed=0)
        res = train_classifier(X, y, hidden=(), cfg=TrainConfig(epochs=100, learning_rate=0.5, batch_size=20, seed=0))
        assert res.accuracy >= 0.95
        assert accuracy(res.model, X, y) == res.accuracy

    def test_single_repeated_point(self):
        X = np.tile([0.3, 0.6], (10, 1))
        y = np.ones(10, dtype=int)
        res = train_classifier(X, y, hidden=(4,), cfg=TrainConfig(epochs=50, learning_rate=0.1, batch_size=5, seed=0))
        assert res.accuracy == 1.0

    def test_xor_clusters(self):
        rng = np.random.default_rng(0)
        centers = np.array([[0.2, 0.2], [0.8, 0.8], [0.2, 0.8], [0.8, 0.2]])
        labels = np.array([0, 0, 1, 1])
        idx = np.arange(200) % 4
        X = centers[idx] + rng.normal(0, 0.05, size=(200, 2))
        res = train_classifier(X, labels[idx], hidden=(8,), cfg=TrainConfig(epochs=300, learning_rate=0.2, batch_size=20, seed=0))
        assert res.accuracy >= 0.9

    def test_deterministic(self):
        X, y = make_blobs(60, seed=2)
        cfg = TrainConfig(epochs=20, learning_rate=0.3, batch_size=8, seed=7)
        assert train_classifier(X, y, (4,), cfg).model == train_classifier(X, y, (4,), cfg).model

    def test_full_batch_loss_non_increasing(self):
        X, y = make_blobs(100, seed=3)
        res = train_classifier(X, y, hidden=(4,), cfg=TrainConfig(epochs=50, learning_rate=1e-3, batch_size=100, seed=0))
        assert all(b <= a for a, b in zip(res.loss_history, res.loss_history[1:]))

    def test_errors(self):
        with pytest.raises(ValueError, match="empty"):
            train_classifier(np.zeros((0, 2)), np.zeros(0, dtype=int))
        with pytest.raises(ValueError, match="2 classes"):
            train_classifier(np.zeros((4, 2)), np.zeros(4, dtype=int))

    @pytest.mark.parametrize("kwargs", [{"epochs": 0}, {"learning_rate": 0.0}, {"batch_size": 0}])
    def test_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            TrainConfig(**kwargs)


class TestWeightFiles:
    def test_round_trip_network(self, tmp_path):
        rng = np.random.default_rng(0)
        net = random_net(rng, [4, 7, 3])
        save_weights(net, tmp_path / "net.txt")
        back = load_weights(tmp_path / "net.txt")
        assert back == net
        for a, b in zip(net.layers, back.layers):
            assert a.weight.tobytes() == b.weight.tobytes() and a.bias.tobytes() == b.bias.tobytes()

    def test_round_trip_autoencoder(self, tmp_path):
        ae = random_ae(np.random.default_rng(1), 5)
        save_weights(ae, tmp_path / "ae.txt")
        assert load_weights(tmp_path / "ae.txt") == ae
        unclamped = random_ae(np.random.default_rng(2), 5, clamp=None)
        assert loads_weights(dumps_weights(unclamped)) == unclamped

    def test_hand_written_file(self):
        text = "dense-net v1 1\nlayer 2 2 identity\n1 2\n-1 0.5\n0.5 -1\n"
        net = loads_weights(text)
        # [1*3 + 2*4 + 0.5, -1*3 + 0.5*4 - 1]
        np.testing.assert_array_equal(predict(net, [3.0, 4.0]), [11.5, -2.0])

    def test_missing_row_cites_layer(self):
        text = "dense-net v1 2\nlayer 2 2 relu\n1 0\n0 1\n0 0\nlayer 2 2 identity\n1 0\n0 0\n"
        with pytest.raises(WeightFormatError, match="layer 1"):
            loads_weights(text)

    @pytest.mark.parametrize(
        "text, field",
        [
            ("dense-net v1 1\nlayer 2 1 identity\n1 nan\n0\n", "weight row 0"),
            ("dense-net v1 1\nlayer 2 1 identity\n1 2 3\n0\n", "weight row 0"),
            ("dense-net v1 1\nlayer 2 1 tanh\n1 2\n0\n", "activation"),
            ("dense-net v1 1\nlayer 2 1 identity\n1 2\n0 1\n", "bias"),
            ("dense-net v2 1\n", "header"),
            ("dense-net v1 2\nlayer 2 2 relu\n1 0\n0 1\n0 0\nlayer 3 1 identity\n1 1 1\n0\n", "layer 1"),
        ],
    )
    def test_malformed(self, text, field):
        with pytest.raises(WeightFormatError, match=field):
            loads_weights(text)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), scale=st.sampled_from([1e-300, 1e-8, 1.0, 1e8, 1e300]))
def test_weight_round_trip_property(seed, scale):
    rng = np.random.default_rng(seed)
    net = random_net(rng, [3, int(rng.integers(1, 6)), 2], scale=scale)
    assert loads_weights(dumps_weights(net)) == net
