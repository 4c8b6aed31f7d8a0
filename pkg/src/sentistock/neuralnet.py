"""A from-scratch bidirectional LSTM regressor.

Two stacked bidirectional LSTM layers feed a dense head. Each direction runs
the standard LSTM recurrences

    i_t = sigmoid(x_t Wx_i + h_{t-1} Wh_i + b_i)
    f_t = sigmoid(x_t Wx_f + h_{t-1} Wh_f + b_f)
    g_t = tanh   (x_t Wx_g + h_{t-1} Wh_g + b_g)
    o_t = sigmoid(x_t Wx_o + h_{t-1} Wh_o + b_o)
    c_t = f_t * c_{t-1} + i_t * g_t
    h_t = o_t * tanh(c_t)

with the four gate blocks stored stacked column-wise in order [i, f, g, o].
Layer 1 consumes the input window; its per-step forward/backward states are
concatenated (2H features per step) and fed to layer 2. The head consumes
each direction's final processed state of layer 2: the forward state at the
last step and the backward state at the first step. Gradients come from full
backpropagation through time; updates use Adam. Everything is float64 numpy
and fully deterministic for a fixed seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    EmptyTrainingSetError,
    InvalidShapeError,
    NonFiniteLossError,
    ShapeMismatchError,
    ZeroVarianceError,
)
from . import evalmetrics

LAYERS = ("l1", "l2")
DIRECTIONS = ("fwd", "bwd")
MODEL_FORMAT_VERSION = 1


@dataclass
class ModelConfig:
    """Architecture and initialization parameters."""

    hidden_units: int = 50
    input_shape: tuple[int, int] = (60, 5)  # (lookback, n_features)
    activation: str = "tanh"
    output_head: str = "linear"
    n_bins: int = 10  # softmax_bins head only
    seed: int = 0

    def __post_init__(self):
        if self.hidden_units < 1:
            raise InvalidShapeError(f"hidden_units must be >= 1, got {self.hidden_units}")
        w, n_features = self.input_shape
        if w < 1 or n_features < 1:
            raise InvalidShapeError(f"input_shape dims must be >= 1, got {self.input_shape}")
        if self.activation != "tanh":
            raise ValueError(f"unsupported activation {self.activation!r}")
        if self.output_head not in ("linear", "softmax_bins"):
            raise ValueError(f"unknown output head {self.output_head!r}")
        if self.output_head == "softmax_bins" and self.n_bins < 2:
            raise InvalidShapeError("softmax_bins head needs n_bins >= 2")


@dataclass
class TrainConfig:
    """Optimization parameters."""

    epochs: int = 100
    batch_size: int = 32
    validation_split: float = 0.1
    patience: int = 10
    learning_rate: float = 1e-3
    seed: int = 0  # reserved; batching is chronological, so training adds no randomness

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if not 0.0 <= self.validation_split <= 0.5:
            raise ValueError("validation_split must lie in [0, 0.5]")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")


@dataclass
class BiLstmModel:
    """Named parameter tensors plus the configuration that shaped them."""

    config: ModelConfig
    params: dict[str, np.ndarray]

    def parameter_count(self) -> int:
        return sum(p.size for p in self.params.values())


@dataclass
class TrainingHistory:
    """Per-epoch metric record with the early-stopping outcome."""

    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_r2: list[float] = field(default_factory=list)
    val_mae: list[float] = field(default_factory=list)
    val_rmse: list[float] = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False

    @property
    def n_epochs(self) -> int:
        return len(self.train_loss)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _layer_dims(config: ModelConfig, layer: str) -> int:
    """Input feature count of a layer."""
    return config.input_shape[1] if layer == "l1" else 2 * config.hidden_units


def init_model(config: ModelConfig) -> BiLstmModel:
    """Create a model with seeded Glorot-uniform weights.

    Biases start at 0 except the forget-gate block, which starts at 1.
    Identical configs (same seed) produce bit-identical parameters.
    """
    rng = np.random.default_rng(config.seed)
    H = config.hidden_units
    params: dict[str, np.ndarray] = {}
    for layer in LAYERS:
        in_dim = _layer_dims(config, layer)
        for direction in DIRECTIONS:
            limit_x = math.sqrt(6.0 / (in_dim + H))
            limit_h = math.sqrt(6.0 / (H + H))
            params[f"{layer}_{direction}_Wx"] = rng.uniform(-limit_x, limit_x, (in_dim, 4 * H))
            params[f"{layer}_{direction}_Wh"] = rng.uniform(-limit_h, limit_h, (H, 4 * H))
            b = np.zeros(4 * H)
            b[H : 2 * H] = 1.0  # forget gate
            params[f"{layer}_{direction}_b"] = b
    out_dim = 1 if config.output_head == "linear" else config.n_bins
    limit = math.sqrt(6.0 / (2 * H + out_dim))
    params["head_W"] = rng.uniform(-limit, limit, (2 * H, out_dim))
    params["head_b"] = np.zeros(out_dim)
    return BiLstmModel(config=config, params=params)


def _direction_forward(x, Wx, Wh, b, reverse, keep_cache):
    """Run one LSTM direction over (B, w, in_dim) input.

    Returns the per-step hidden states aligned to input time, plus the cache
    needed for backpropagation when keep_cache is set.
    """
    B, w, _ = x.shape
    H = Wh.shape[0]
    pre = x @ Wx + b
    h_seq = np.zeros((B, w, H))
    cache = None
    if keep_cache:
        cache = {
            "x": x,
            "reverse": reverse,
            "i": np.zeros((B, w, H)),
            "f": np.zeros((B, w, H)),
            "g": np.zeros((B, w, H)),
            "o": np.zeros((B, w, H)),
            "c_prev": np.zeros((B, w, H)),
            "h_prev": np.zeros((B, w, H)),
            "tanh_c": np.zeros((B, w, H)),
        }
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    steps = range(w - 1, -1, -1) if reverse else range(w)
    for t in steps:
        z = pre[:, t] + h @ Wh
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H : 2 * H])
        g = np.tanh(z[:, 2 * H : 3 * H])
        o = _sigmoid(z[:, 3 * H :])
        c_new = f * c + i * g
        tanh_c = np.tanh(c_new)
        h_new = o * tanh_c
        if keep_cache:
            cache["i"][:, t] = i
            cache["f"][:, t] = f
            cache["g"][:, t] = g
            cache["o"][:, t] = o
            cache["c_prev"][:, t] = c
            cache["h_prev"][:, t] = h
            cache["tanh_c"][:, t] = tanh_c
        h, c = h_new, c_new
        h_seq[:, t] = h
    return h_seq, cache


def _direction_backward(cache, d_h_seq, Wx, Wh):
    """BPTT through one direction given per-step output gradients.

    Returns (d_input, dWx, dWh, db).
    """
    x = cache["x"]
    B, w, _ = x.shape
    H = Wh.shape[0]
    dWx = np.zeros_like(Wx)
    dWh = np.zeros_like(Wh)
    db = np.zeros(4 * H)
    dx = np.zeros_like(x)
    dh_carry = np.zeros((B, H))
    dc_carry = np.zeros((B, H))
    steps = range(w) if cache["reverse"] else range(w - 1, -1, -1)
    for t in steps:
        i = cache["i"][:, t]
        f = cache["f"][:, t]
        g = cache["g"][:, t]
        o = cache["o"][:, t]
        tanh_c = cache["tanh_c"][:, t]
        dh = d_h_seq[:, t] + dh_carry
        do = dh * tanh_c
        dc = dc_carry + dh * o * (1.0 - tanh_c**2)
        df = dc * cache["c_prev"][:, t]
        di = dc * g
        dg = dc * i
        dz = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g**2),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        dWx += x[:, t].T @ dz
        dWh += cache["h_prev"][:, t].T @ dz
        db += dz.sum(axis=0)
        dx[:, t] = dz @ Wx.T
        dh_carry = dz @ Wh.T
        dc_carry = dc * f
    return dx, dWx, dWh, db


def _check_batch(model: BiLstmModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    w, n_features = model.config.input_shape
    if X.ndim != 3 or X.shape[1] != w or X.shape[2] != n_features:
        raise ShapeMismatchError(
            f"expected batch of shape (B, {w}, {n_features}), got {X.shape}"
        )
    return X


def _head_forward(model: BiLstmModel, terminal: np.ndarray):
    """Map the (B, 2H) terminal state to scalar predictions.

    The softmax_bins head turns logits into a distribution over n_bins
    bucket centers spaced evenly in [0, 1] and predicts its expectation.
    Returns (pred, softmax probabilities or None).
    """
    z = terminal @ model.params["head_W"] + model.params["head_b"]
    if model.config.output_head == "linear":
        return z[:, 0], None
    z = z - z.max(axis=1, keepdims=True)
    p = np.exp(z)
    p /= p.sum(axis=1, keepdims=True)
    centers = _bin_centers(model.config.n_bins)
    return p @ centers, p


def _bin_centers(n_bins: int) -> np.ndarray:
    return (np.arange(n_bins) + 0.5) / n_bins


def _forward_full(model: BiLstmModel, X: np.ndarray, keep_cache: bool):
    p = model.params
    caches = {}
    layer_in = X
    terminal = None
    for layer in LAYERS:
        h_parts = {}
        for direction in DIRECTIONS:
            h_seq, cache = _direction_forward(
                layer_in,
                p[f"{layer}_{direction}_Wx"],
                p[f"{layer}_{direction}_Wh"],
                p[f"{layer}_{direction}_b"],
                reverse=(direction == "bwd"),
                keep_cache=keep_cache,
            )
            h_parts[direction] = h_seq
            caches[f"{layer}_{direction}"] = cache
        layer_in = np.concatenate([h_parts["fwd"], h_parts["bwd"]], axis=2)
        terminal = np.concatenate([h_parts["fwd"][:, -1], h_parts["bwd"][:, 0]], axis=1)
    pred, softmax_p = _head_forward(model, terminal)
    if keep_cache:
        caches["terminal"] = terminal
        caches["softmax_p"] = softmax_p
    return pred, caches


def forward(model: BiLstmModel, X) -> np.ndarray:
    """Pure forward pass over a (B, w, n_features) batch; returns (B,) predictions."""
    X = _check_batch(model, X)
    if X.shape[0] == 0:
        return np.zeros(0)
    pred, _ = _forward_full(model, X, keep_cache=False)
    return pred


def predict(model: BiLstmModel, windows, chunk_size: int = 512) -> np.ndarray:
    """Forward pass over a WindowedSet or raw batch array, in chunks."""
    X = windows.X if hasattr(windows, "X") else windows
    X = _check_batch(model, np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        return np.zeros(0)
    parts = [forward(model, X[k : k + chunk_size]) for k in range(0, X.shape[0], chunk_size)]
    return np.concatenate(parts)


def loss_and_gradients(model: BiLstmModel, X, y) -> tuple[float, dict[str, np.ndarray]]:
    """Mean-squared-error loss and its gradient for every parameter."""
    X = _check_batch(model, X)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] != y.shape[0] or y.shape[0] < 1:
        raise ShapeMismatchError(f"{X.shape[0]} samples vs {y.shape[0]} targets")
    B = X.shape[0]
    p = model.params
    H = model.config.hidden_units

    pred, caches = _forward_full(model, X, keep_cache=True)
    residual = pred - y
    loss = float(np.mean(residual**2))
    dpred = 2.0 * residual / B

    grads = {}
    terminal = caches["terminal"]
    if model.config.output_head == "linear":
        dz = dpred[:, None]
    else:
        sm = caches["softmax_p"]
        centers = _bin_centers(model.config.n_bins)
        dz = dpred[:, None] * sm * (centers[None, :] - pred[:, None])
    grads["head_W"] = terminal.T @ dz
    grads["head_b"] = dz.sum(axis=0)
    dterminal = dz @ p["head_W"].T

    w = model.config.input_shape[0]
    d_layer_out = None  # (B, w, 2H) gradient w.r.t. a layer's concatenated sequence
    for layer in reversed(LAYERS):
        d_parts = {}
        if layer == "l2":
            for direction, column in (("fwd", 0), ("bwd", 1)):
                d_h_seq = np.zeros((B, w, H))
                step = -1 if direction == "fwd" else 0
                d_h_seq[:, step] = dterminal[:, column * H : (column + 1) * H]
                d_parts[direction] = d_h_seq
        else:
            d_parts["fwd"] = d_layer_out[:, :, :H]
            d_parts["bwd"] = d_layer_out[:, :, H:]
        d_input = None
        for direction in DIRECTIONS:
            dx, dWx, dWh, db = _direction_backward(
                caches[f"{layer}_{direction}"],
                d_parts[direction],
                p[f"{layer}_{direction}_Wx"],
                p[f"{layer}_{direction}_Wh"],
            )
            grads[f"{layer}_{direction}_Wx"] = dWx
            grads[f"{layer}_{direction}_Wh"] = dWh
            grads[f"{layer}_{direction}_b"] = db
            d_input = dx if d_input is None else d_input + dx
        d_layer_out = d_input
    return loss, grads


class _Adam:
    """Adam update rule over a named parameter dict."""

    def __init__(self, params, learning_rate, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params, grads):
        self.t += 1
        correct1 = 1.0 - self.beta1**self.t
        correct2 = 1.0 - self.beta2**self.t
        for key, g in grads.items():
            m = self.m[key] = self.beta1 * self.m[key] + (1.0 - self.beta1) * g
            v = self.v[key] = self.beta2 * self.v[key] + (1.0 - self.beta2) * g * g
            params[key] -= self.lr * (m / correct1) / (np.sqrt(v / correct2) + self.eps)


def _safe_r2(pred, actual) -> float:
    if len(pred) < 2:
        return float("nan")
    try:
        return evalmetrics.r2(pred, actual)
    except ZeroVarianceError:
        return float("nan")


def train(model: BiLstmModel, windows, cfg: TrainConfig) -> TrainingHistory:
    """Fit the model in place; returns the per-epoch history.

    The validation set is the chronological tail of the windows
    (ceil(validation_split * n) samples). Mini-batches preserve order, so a
    run is fully determined by (model, data, config). Training stops early
    after `patience` epochs without a new best validation loss (patience 0
    stops at the first non-improving epoch) and the best epoch's parameters
    are restored.
    """
    X = windows.X if hasattr(windows, "X") else np.asarray(windows[0], dtype=float)
    y = windows.y if hasattr(windows, "y") else np.asarray(windows[1], dtype=float)
    X = _check_batch(model, X)
    y = np.asarray(y, dtype=float).reshape(-1)
    n = y.shape[0]
    if n == 0:
        raise EmptyTrainingSetError("no training windows")
    n_val = math.ceil(cfg.validation_split * n)
    n_train = n - n_val
    if n_train < 1:
        raise EmptyTrainingSetError(f"validation split {cfg.validation_split} leaves no training samples")
    X_train, y_train = X[:n_train], y[:n_train]
    X_val, y_val = X[n_train:], y[n_train:]

    optimizer = _Adam(model.params, cfg.learning_rate)
    history = TrainingHistory()
    best_monitor = np.inf
    best_params = None
    bad_streak = 0
    stop_after = max(cfg.patience, 1)

    for epoch in range(cfg.epochs):
        loss_sum = 0.0
        for start in range(0, n_train, cfg.batch_size):
            xb = X_train[start : start + cfg.batch_size]
            yb = y_train[start : start + cfg.batch_size]
            loss, grads = loss_and_gradients(model, xb, yb)
            if not np.isfinite(loss):
                raise NonFiniteLossError(epoch)
            optimizer.step(model.params, grads)
            loss_sum += loss * len(yb)
        train_loss = loss_sum / n_train
        for value in model.params.values():
            if not np.all(np.isfinite(value)):
                raise NonFiniteLossError(epoch, f"non-finite parameter at epoch {epoch}")

        if n_val > 0:
            val_pred = predict(model, X_val)
            val_loss = float(np.mean((val_pred - y_val) ** 2))
            val_mae = evalmetrics.mae(val_pred, y_val)
            val_rmse = evalmetrics.rmse(val_pred, y_val)
            val_r2 = _safe_r2(val_pred, y_val)
        else:
            val_loss = val_mae = val_rmse = val_r2 = float("nan")
        history.train_loss.append(train_loss)
        history.val_loss.append(val_loss)
        history.val_mae.append(val_mae)
        history.val_rmse.append(val_rmse)
        history.val_r2.append(val_r2)

        monitor = val_loss if n_val > 0 else train_loss
        if monitor < best_monitor:
            best_monitor = monitor
            history.best_epoch = epoch
            best_params = {k: v.copy() for k, v in model.params.items()}
            bad_streak = 0
        else:
            bad_streak += 1
            if bad_streak >= stop_after:
                history.stopped_early = True
                break

    if best_params is not None:
        model.params = best_params
    return history


def save_model(model: BiLstmModel, path: str | Path) -> None:
    """Persist parameters and config as a versioned .npz container."""
    config = model.config
    meta = {
        "format_version": MODEL_FORMAT_VERSION,
        "hidden_units": config.hidden_units,
        "input_shape": list(config.input_shape),
        "activation": config.activation,
        "output_head": config.output_head,
        "n_bins": config.n_bins,
        "seed": config.seed,
    }
    np.savez(path, __meta__=np.array(json.dumps(meta)), **model.params)


def load_model(path: str | Path) -> BiLstmModel:
    """Load a model saved by save_model."""
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["__meta__"]))
        if meta.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format {meta.get('format_version')}")
        params = {k: data[k].copy() for k in data.files if k != "__meta__"}
    config = ModelConfig(
        hidden_units=meta["hidden_units"],
        input_shape=tuple(meta["input_shape"]),
        activation=meta["activation"],
        output_head=meta["output_head"],
        n_bins=meta["n_bins"],
        seed=meta["seed"],
    )
    return BiLstmModel(config=config, params=params)
