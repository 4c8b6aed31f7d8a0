import math

import numpy as np
import pytest

from sentistock.dataset import WindowedSet
from sentistock.errors import (
    EmptyTrainingSetError,
    InvalidShapeError,
    NonFiniteLossError,
    ShapeMismatchError,
)
from sentistock.neuralnet import (
    BiLstmModel,
    ModelConfig,
    TrainConfig,
    _direction_forward,
    forward,
    init_model,
    load_model,
    loss_and_gradients,
    predict,
    save_model,
    train,
)


# ---------------------------------------------------------------------------
# Scalar reference implementation: plain-float transcription of the LSTM
# equations, independent of the vectorized code under test.
# ---------------------------------------------------------------------------

def _sig(x):
    return 1.0 / (1.0 + math.exp(-x))


def ref_direction(xs, Wx, Wh, b, reverse):
    """xs: list of w input vectors. Returns hidden states aligned to input time."""
    H = Wh.shape[0]
    w = len(xs)
    h = [0.0] * H
    c = [0.0] * H
    out = [None] * w
    order = range(w - 1, -1, -1) if reverse else range(w)
    for t in order:
        x = xs[t]
        z = [
            sum(x[a] * Wx[a][j] for a in range(len(x)))
            + sum(h[a] * Wh[a][j] for a in range(H))
            + b[j]
            for j in range(4 * H)
        ]
        i = [_sig(z[j]) for j in range(H)]
        f = [_sig(z[H + j]) for j in range(H)]
        g = [math.tanh(z[2 * H + j]) for j in range(H)]
        o = [_sig(z[3 * H + j]) for j in range(H)]
        c = [f[j] * c[j] + i[j] * g[j] for j in range(H)]
        h = [o[j] * math.tanh(c[j]) for j in range(H)]
        out[t] = h
    return out


def ref_forward(model, sample):
    """Full two-layer bidirectional forward for one (w, features) sample."""
    p = model.params
    xs = [list(row) for row in sample]
    for layer in ("l1", "l2"):
        fwd = ref_direction(xs, p[f"{layer}_fwd_Wx"], p[f"{layer}_fwd_Wh"], p[f"{layer}_fwd_b"], False)
        bwd = ref_direction(xs, p[f"{layer}_bwd_Wx"], p[f"{layer}_bwd_Wh"], p[f"{layer}_bwd_b"], True)
        xs = [fwd[t] + bwd[t] for t in range(len(xs))]
        terminal = fwd[-1] + bwd[0]
    head = [
        sum(terminal[a] * p["head_W"][a][k] for a in range(len(terminal))) + p["head_b"][k]
        for k in range(p["head_W"].shape[1])
    ]
    if model.config.output_head == "linear":
        return head[0]
    exps = [math.exp(v - max(head)) for v in head]
    total = sum(exps)
    centers = [(k + 0.5) / len(head) for k in range(len(head))]
    return sum(e / total * c for e, c in zip(exps, centers))


def random_batch(config, n, seed):
    rng = np.random.default_rng(seed)
    w, feat = config.input_shape
    return rng.uniform(0, 1, (n, w, feat)), rng.uniform(0, 1, n)


class TestInitModel:
    def test_same_seed_bit_identical(self):
        cfg = ModelConfig(hidden_units=4, input_shape=(5, 3), seed=9)
        a, b = init_model(cfg), init_model(cfg)
        assert a.params.keys() == b.params.keys()
        for key in a.params:
            np.testing.assert_array_equal(a.params[key], b.params[key])

    def test_shapes(self):
        model = init_model(ModelConfig(hidden_units=4, input_shape=(5, 3), seed=0))
        # stacked gate matrices: 4 gate blocks of width H each
        assert model.params["l1_fwd_Wx"].shape == (3, 16)
        assert model.params["l1_fwd_Wh"].shape == (4, 16)
        assert model.params["l1_fwd_b"].shape == (16,)
        assert model.params["l2_bwd_Wx"].shape == (8, 16)
        assert model.params["head_W"].shape == (8, 1)

    def test_forget_gate_bias_one(self):
        model = init_model(ModelConfig(hidden_units=3, input_shape=(4, 2), seed=0))
        b = model.params["l1_fwd_b"]
        np.testing.assert_array_equal(b[3:6], 1.0)
        np.testing.assert_array_equal(b[:3], 0.0)
        np.testing.assert_array_equal(b[6:], 0.0)

    def test_zero_hidden_rejected(self):
        with pytest.raises(InvalidShapeError):
            ModelConfig(hidden_units=0, input_shape=(5, 3))

    def test_bad_input_shape_rejected(self):
        with pytest.raises(InvalidShapeError):
            ModelConfig(hidden_units=2, input_shape=(0, 3))


class TestForward:
    def test_zero_parameters_emit_bias(self):
        model = init_model(ModelConfig(hidden_units=3, input_shape=(4, 2), seed=0))
        for key in model.params:
            model.params[key] = np.zeros_like(model.params[key])
        model.params["head_b"][:] = 0.37
        X = np.random.default_rng(0).uniform(-2, 2, (6, 4, 2))
        np.testing.assert_allclose(forward(model, X), 0.37, atol=1e-15)

    def test_batch_order_preserved(self):
        model = init_model(ModelConfig(hidden_units=3, input_shape=(4, 2), seed=1))
        X, _ = random_batch(model.config, 7, seed=2)
        batch_pred = forward(model, X)
        single = np.array([forward(model, X[k : k + 1])[0] for k in range(7)])
        np.testing.assert_allclose(batch_pred, single, atol=1e-12)

    def test_hand_set_tiny_model_matches_reference(self):
        # hidden=1, w=2, 1 feature: every gate weight set explicitly
        model = init_model(ModelConfig(hidden_units=1, input_shape=(2, 1), seed=0))
        values = {
            "l1_fwd_Wx": [[0.5, -0.3, 0.8, 0.2]],
            "l1_fwd_Wh": [[0.1, 0.4, -0.2, 0.6]],
            "l1_fwd_b": [0.05, 1.0, -0.1, 0.2],
            "l1_bwd_Wx": [[-0.4, 0.7, 0.3, -0.6]],
            "l1_bwd_Wh": [[0.2, -0.5, 0.9, 0.1]],
            "l1_bwd_b": [0.0, 1.0, 0.3, -0.2],
            "l2_fwd_Wx": [[0.3, -0.1, 0.5, 0.2], [-0.2, 0.4, 0.1, -0.3]],
            "l2_fwd_Wh": [[0.15, 0.25, -0.35, 0.45]],
            "l2_fwd_b": [0.1, 1.0, 0.0, -0.1],
            "l2_bwd_Wx": [[-0.25, 0.35, 0.45, -0.15], [0.55, -0.45, 0.05, 0.65]],
            "l2_bwd_Wh": [[-0.05, 0.5, 0.3, -0.4]],
            "l2_bwd_b": [0.2, 1.0, -0.3, 0.4],
            "head_W": [[1.5], [-0.7]],
            "head_b": [0.25],
        }
        for key, value in values.items():
            model.params[key] = np.array(value, dtype=float)
        sample = np.array([[0.3], [-0.9]])
        expected = ref_forward(model, sample)
        got = forward(model, sample[None, :, :])[0]
        assert got == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("hidden,w,feat", [(2, 3, 1), (3, 5, 4), (5, 2, 2)])
    def test_matches_reference_on_random_models(self, hidden, w, feat):
        model = init_model(ModelConfig(hidden_units=hidden, input_shape=(w, feat), seed=hidden))
        X, _ = random_batch(model.config, 3, seed=42 + hidden)
        got = forward(model, X)
        expected = [ref_forward(model, X[k]) for k in range(3)]
        np.testing.assert_allclose(got, expected, atol=1e-10)

    def test_softmax_bins_matches_reference_and_range(self):
        cfg = ModelConfig(hidden_units=3, input_shape=(4, 2), seed=5,
                          output_head="softmax_bins", n_bins=6)
        model = init_model(cfg)
        X, _ = random_batch(cfg, 4, seed=6)
        got = forward(model, X)
        expected = [ref_forward(model, X[k]) for k in range(4)]
        np.testing.assert_allclose(got, expected, atol=1e-10)
        assert np.all(got > 0) and np.all(got < 1)

    def test_shape_mismatch(self):
        model = init_model(ModelConfig(hidden_units=2, input_shape=(4, 2), seed=0))
        with pytest.raises(ShapeMismatchError):
            forward(model, np.zeros((3, 4, 5)))

    def test_bidirectional_symmetry_single_layer(self):
        # reversing the input and swapping direction parameters permutes the
        # two halves of the final concatenated state
        rng = np.random.default_rng(31)
        H, w, feat = 3, 6, 2
        Wxf, Whf, bf = rng.normal(size=(feat, 4 * H)), rng.normal(size=(H, 4 * H)), rng.normal(size=4 * H)
        Wxb, Whb, bb = rng.normal(size=(feat, 4 * H)), rng.normal(size=(H, 4 * H)), rng.normal(size=4 * H)
        x = rng.normal(size=(2, w, feat))

        h_f, _ = _direction_forward(x, Wxf, Whf, bf, reverse=False, keep_cache=False)
        h_b, _ = _direction_forward(x, Wxb, Whb, bb, reverse=True, keep_cache=False)
        terminal = np.concatenate([h_f[:, -1], h_b[:, 0]], axis=1)

        x_rev = x[:, ::-1, :]
        h_f2, _ = _direction_forward(x_rev, Wxb, Whb, bb, reverse=False, keep_cache=False)
        h_b2, _ = _direction_forward(x_rev, Wxf, Whf, bf, reverse=True, keep_cache=False)
        terminal_swapped = np.concatenate([h_f2[:, -1], h_b2[:, 0]], axis=1)

        np.testing.assert_allclose(
            terminal, np.concatenate([terminal_swapped[:, H:], terminal_swapped[:, :H]], axis=1),
            atol=1e-12,
        )


class TestLossAndGradients:
    def test_perfect_targets_zero_gradient(self):
        model = init_model(ModelConfig(hidden_units=2, input_shape=(3, 1), seed=3))
        X, _ = random_batch(model.config, 4, seed=3)
        y = forward(model, X)
        loss, grads = loss_and_gradients(model, X, y)
        assert loss == 0.0
        np.testing.assert_array_equal(grads["head_b"], 0.0)

    def test_residual_doubling_doubles_head_gradients(self):
        model = init_model(ModelConfig(hidden_units=2, input_shape=(3, 2), seed=4))
        X, _ = random_batch(model.config, 5, seed=4)
        pred = forward(model, X)
        rng = np.random.default_rng(8)
        residual = rng.uniform(0.1, 0.5, 5)
        _, grads1 = loss_and_gradients(model, X, pred - residual)
        _, grads2 = loss_and_gradients(model, X, pred - 2 * residual)
        np.testing.assert_allclose(grads2["head_W"], 2 * grads1["head_W"], atol=1e-10)
        np.testing.assert_allclose(grads2["l1_fwd_Wx"], 2 * grads1["l1_fwd_Wx"], atol=1e-10)

    @pytest.mark.parametrize("head", ["linear", "softmax_bins"])
    def test_finite_difference_check(self, head):
        cfg = ModelConfig(hidden_units=2, input_shape=(3, 2), seed=12,
                          output_head=head, n_bins=4)
        model = init_model(cfg)
        X, y = random_batch(cfg, 3, seed=13)
        _, grads = loss_and_gradients(model, X, y)
        h = 1e-5
        for key, param in model.params.items():
            flat = param.ravel()
            grad_flat = grads[key].ravel()
            for idx in range(flat.size):
                orig = flat[idx]
                flat[idx] = orig + h
                up = float(np.mean((forward(model, X) - y) ** 2))
                flat[idx] = orig - h
                down = float(np.mean((forward(model, X) - y) ** 2))
                flat[idx] = orig
                numeric = (up - down) / (2 * h)
                rel = abs(grad_flat[idx] - numeric) / max(abs(grad_flat[idx]), abs(numeric), 1e-5)
                assert rel < 1e-4, f"{key}[{idx}]: analytic {grad_flat[idx]}, numeric {numeric}"

    def test_shape_mismatch(self):
        model = init_model(ModelConfig(hidden_units=2, input_shape=(3, 2), seed=0))
        X, y = random_batch(model.config, 4, seed=0)
        with pytest.raises(ShapeMismatchError):
            loss_and_gradients(model, X, y[:3])


def make_windows_for(n, w, feat, seed, target_fn=None):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, (n, w, feat))
    if target_fn is None:
        y = rng.uniform(0, 1, n)
    else:
        y = target_fn(X)
    return WindowedSet(X=X, y=y, lookback=w)


class TestTrain:
    def small_model(self, w=4, feat=2, hidden=4, seed=0):
        return init_model(ModelConfig(hidden_units=hidden, input_shape=(w, feat), seed=seed))

    def test_patience_zero_stops_at_first_non_improvement(self):
        model = self.small_model()
        windows = make_windows_for(30, 4, 2, seed=1)
        cfg = TrainConfig(epochs=200, batch_size=8, validation_split=0.2, patience=0,
                          learning_rate=0.05)
        history = train(model, windows, cfg)
        assert history.stopped_early
        assert history.n_epochs == history.best_epoch + 2  # failing epoch recorded, then stop

    @pytest.mark.parametrize("patience", [1, 3])
    def test_early_stopping_bound(self, patience):
        model = self.small_model(seed=patience)
        windows = make_windows_for(30, 4, 2, seed=2)
        cfg = TrainConfig(epochs=300, batch_size=8, validation_split=0.2, patience=patience,
                          learning_rate=0.05)
        history = train(model, windows, cfg)
        if history.stopped_early:
            assert history.n_epochs - 1 <= history.best_epoch + patience
        assert history.n_epochs <= history.best_epoch + patience + 1 or not history.stopped_early

    def test_noiseless_linear_target_learns(self):
        # y is a fixed linear readout of the final input row
        model = self.small_model(w=3, feat=2, hidden=8, seed=7)
        target_fn = lambda X: 0.3 * X[:, -1, 0] + 0.5 * X[:, -1, 1]
        windows = make_windows_for(60, 3, 2, seed=3, target_fn=target_fn)
        initial_loss, _ = loss_and_gradients(model, windows.X, windows.y)
        cfg = TrainConfig(epochs=50, batch_size=16, validation_split=0.1, patience=50,
                          learning_rate=0.01)
        history = train(model, windows, cfg)
        assert history.train_loss[-1] < initial_loss

    def test_determinism(self):
        windows = make_windows_for(40, 4, 2, seed=5)
        cfg = TrainConfig(epochs=10, batch_size=8, validation_split=0.2, patience=10)
        h1 = train(self.small_model(seed=2), windows, cfg)
        h2 = train(self.small_model(seed=2), windows, cfg)
        assert h1 == h2

    def test_empty_training_set(self):
        model = self.small_model()
        empty = WindowedSet(X=np.zeros((0, 4, 2)), y=np.zeros(0), lookback=4)
        with pytest.raises(EmptyTrainingSetError):
            train(model, empty, TrainConfig())

    @pytest.mark.filterwarnings("ignore:invalid value:RuntimeWarning")
    def test_non_finite_loss_raises_with_epoch(self):
        model = self.small_model()
        model.params["head_W"][0, 0] = np.inf
        windows = make_windows_for(20, 4, 2, seed=6)
        with pytest.raises(NonFiniteLossError) as exc:
            train(model, windows, TrainConfig(epochs=5))
        assert exc.value.epoch == 0

    def test_parameters_finite_after_training(self):
        model = self.small_model()
        windows = make_windows_for(30, 4, 2, seed=9)
        train(model, windows, TrainConfig(epochs=15, batch_size=8, learning_rate=0.05))
        for value in model.params.values():
            assert np.all(np.isfinite(value))

    def test_history_fields_populated(self):
        model = self.small_model()
        windows = make_windows_for(30, 4, 2, seed=10)
        history = train(model, windows, TrainConfig(epochs=5, patience=100))
        assert history.n_epochs == 5
        assert len(history.val_loss) == len(history.val_mae) == len(history.val_rmse) == 5
        assert 0 <= history.best_epoch < 5


class TestPredict:
    def test_repeatable(self):
        model = init_model(ModelConfig(hidden_units=3, input_shape=(4, 2), seed=0))
        X, _ = random_batch(model.config, 6, seed=1)
        np.testing.assert_array_equal(predict(model, X), predict(model, X))

    def test_empty_windows(self):
        model = init_model(ModelConfig(hidden_units=3, input_shape=(4, 2), seed=0))
        assert predict(model, np.zeros((0, 4, 2))).size == 0

    def test_finite_predictions(self):
        model = init_model(ModelConfig(hidden_units=3, input_shape=(4, 2), seed=0))
        X, _ = random_batch(model.config, 10, seed=2)
        assert np.all(np.isfinite(predict(model, X)))

    def test_accepts_windowed_set(self):
        model = init_model(ModelConfig(hidden_units=2, input_shape=(3, 1), seed=0))
        windows = make_windows_for(5, 3, 1, seed=3)
        np.testing.assert_array_equal(predict(model, windows), predict(model, windows.X))


class TestPersistence:
    def test_round_trip(self, tmp_path):
        cfg = ModelConfig(hidden_units=3, input_shape=(4, 2), seed=8)
        model = init_model(cfg)
        path = tmp_path / "model.npz"
        save_model(model, path)
        reloaded = load_model(path)
        assert reloaded.config == cfg
        assert reloaded.params.keys() == model.params.keys()
        for key in model.params:
            np.testing.assert_array_equal(reloaded.params[key], model.params[key])
        X, _ = random_batch(cfg, 4, seed=9)
        np.testing.assert_array_equal(forward(reloaded, X), forward(model, X))
