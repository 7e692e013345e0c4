"""From-scratch multilayer perceptron for the geometry-kernel regression.

Architecture: affine -> LayerNorm -> GELU for each hidden layer, then a plain
affine output layer.  Inputs and labels are standardized to zero mean / unit
variance; the statistics are stored with the parameters so inference is
self-contained.  Training uses Adam with cosine-annealed learning rate and the
Smooth-L1 loss on standardized labels.  Everything is plain numpy with a
manually derived backward pass, so gradients can be checked against finite
differences and training is bit-reproducible for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import ConfigError, TrainingDivergedError, ValidationError

_LN_EPS = 1e-5
_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)

DEFAULT_SIZES = (4, 256, 128, 6)


def gelu(x: np.ndarray) -> np.ndarray:
    """Exact (erf-based) GELU."""
    return 0.5 * x * (1.0 + erf(x * _INV_SQRT2))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    phi = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return 0.5 * (1.0 + erf(x * _INV_SQRT2)) + x * phi


def smooth_l1(diff: np.ndarray, beta: float = 1.0) -> np.ndarray:
    a = np.abs(diff)
    return np.where(a < beta, 0.5 * diff * diff / beta, a - 0.5 * beta)


def smooth_l1_grad(diff: np.ndarray, beta: float = 1.0) -> np.ndarray:
    return np.where(np.abs(diff) < beta, diff / beta, np.sign(diff))


@dataclass
class MlpParams:
    """Network parameters plus the input/output standardization statistics."""

    sizes: tuple
    weights: list          # weights[i] has shape (sizes[i], sizes[i+1])
    biases: list
    ln_gain: list          # one per hidden layer
    ln_bias: list
    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: np.ndarray
    y_scale: np.ndarray

    def arrays(self) -> list:
        """All trainable arrays in a fixed order (weights, biases, LN params)."""
        out = []
        for i in range(len(self.weights)):
            out.append(self.weights[i])
            out.append(self.biases[i])
        for i in range(len(self.ln_gain)):
            out.append(self.ln_gain[i])
            out.append(self.ln_bias[i])
        return out

    def copy(self) -> "MlpParams":
        return MlpParams(
            sizes=tuple(self.sizes),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            ln_gain=[g.copy() for g in self.ln_gain],
            ln_bias=[b.copy() for b in self.ln_bias],
            x_mean=self.x_mean.copy(), x_scale=self.x_scale.copy(),
            y_mean=self.y_mean.copy(), y_scale=self.y_scale.copy(),
        )


def init_params(sizes=DEFAULT_SIZES, seed: int = 0) -> MlpParams:
    """He-initialized parameters with identity standardization."""
    rng = np.random.default_rng(seed)
    sizes = tuple(int(s) for s in sizes)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    n_hidden = len(sizes) - 2
    return MlpParams(
        sizes=sizes, weights=weights, biases=biases,
        ln_gain=[np.ones(sizes[i + 1]) for i in range(n_hidden)],
        ln_bias=[np.zeros(sizes[i + 1]) for i in range(n_hidden)],
        x_mean=np.zeros(sizes[0]), x_scale=np.ones(sizes[0]),
        y_mean=np.zeros(sizes[-1]), y_scale=np.ones(sizes[-1]),
    )


def _forward_std(params: MlpParams, x_std: np.ndarray, want_cache: bool = False):
    """Forward pass on standardized input, optionally keeping caches."""
    h = x_std
    cache = [] if want_cache else None
    n_hidden = len(params.sizes) - 2
    for i in range(n_hidden):
        z = h @ params.weights[i] + params.biases[i]
        mu = z.mean(axis=1, keepdims=True)
        zc = z - mu
        var = (zc * zc).mean(axis=1, keepdims=True)
        inv = 1.0 / np.sqrt(var + _LN_EPS)
        zhat = zc * inv
        a = params.ln_gain[i] * zhat + params.ln_bias[i]
        g = gelu(a)
        if want_cache:
            cache.append((h, zhat, inv, a))
        h = g
    y_std = h @ params.weights[-1] + params.biases[-1]
    if want_cache:
        return y_std, (cache, h)
    return y_std


def mlp_forward(params: MlpParams, inputs: np.ndarray) -> np.ndarray:
    """De-standardized network output for raw inputs (single row or batch)."""
    x = np.asarray(inputs, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != params.sizes[0]:
        raise ValidationError(
            f"input width {x.shape[1]} does not match network input "
            f"size {params.sizes[0]}")
    x_std = (x - params.x_mean) / params.x_scale
    y = _forward_std(params, x_std) * params.y_scale + params.y_mean
    return y[0] if single else y


def loss_and_grads(params: MlpParams, x_std: np.ndarray, y_std: np.ndarray,
                   beta: float = 1.0):
    """Smooth-L1 loss (mean over batch and channels) and its gradients.

    Gradients come back in the same fixed order as ``MlpParams.arrays``.
    """
    n_hidden = len(params.sizes) - 2
    pred, (cache, last_h) = _forward_std(params, x_std, want_cache=True)
    diff = pred - y_std
    loss = float(smooth_l1(diff, beta).mean())
    d_pred = smooth_l1_grad(diff, beta) / diff.size

    grads_w = [None] * (n_hidden + 1)
    grads_b = [None] * (n_hidden + 1)
    grads_g = [None] * n_hidden
    grads_lb = [None] * n_hidden

    grads_w[-1] = last_h.T @ d_pred
    grads_b[-1] = d_pred.sum(axis=0)
    d_h = d_pred @ params.weights[-1].T

    for i in reversed(range(n_hidden)):
        h_in, zhat, inv, a = cache[i]
        d_a = d_h * gelu_grad(a)
        grads_g[i] = (d_a * zhat).sum(axis=0)
        grads_lb[i] = d_a.sum(axis=0)
        d_zhat = d_a * params.ln_gain[i]
        n_feat = zhat.shape[1]
        # fused LayerNorm backward
        d_z = inv / n_feat * (
            n_feat * d_zhat
            - d_zhat.sum(axis=1, keepdims=True)
            - zhat * (d_zhat * zhat).sum(axis=1, keepdims=True))
        grads_w[i] = h_in.T @ d_z
        grads_b[i] = d_z.sum(axis=0)
        d_h = d_z @ params.weights[i].T

    grads = []
    for i in range(n_hidden + 1):
        grads.append(grads_w[i])
        grads.append(grads_b[i])
    for i in range(n_hidden):
        grads.append(grads_g[i])
        grads.append(grads_lb[i])
    return loss, grads


@dataclass
class TrainConfig:
    learning_rate: float = 3e-3
    min_lr: float = 1e-12
    t_max: int = 300
    epochs: int = 300
    batch_size: int = 8192
    smooth_l1_beta: float = 1.0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    val_fraction: float = 0.1
    seed: int = 0
    sizes: tuple = DEFAULT_SIZES

    def __post_init__(self):
        for name in ("learning_rate", "min_lr", "batch_size", "epochs",
                     "smooth_l1_beta"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigError("val_fraction must be in (0, 1)")


def cosine_lr(config: TrainConfig, epoch: int) -> float:
    """Cosine-annealed learning rate; epoch 0 gives the initial rate and
    epoch ``t_max`` gives ``min_lr``."""
    t = min(epoch, config.t_max)
    return config.min_lr + 0.5 * (config.learning_rate - config.min_lr) * (
        1.0 + np.cos(np.pi * t / config.t_max))


@dataclass
class RegressionReport:
    """Per-channel and aggregate regression metrics on held-out data."""

    r2: np.ndarray
    mae: np.ndarray
    rmse: np.ndarray
    maxe: np.ndarray
    r2_aggregate: float
    mae_aggregate: float
    rmse_aggregate: float
    maxe_aggregate: float
    n_samples: int
    constant_channels: tuple = ()

    def summary(self) -> str:
        lines = [f"held-out samples: {self.n_samples}"]
        for c in range(len(self.r2)):
            lines.append(
                f"channel {c}: R2={self.r2[c]:.4f} MAE={self.mae[c]:.4g} "
                f"RMSE={self.rmse[c]:.4g} MaxE={self.maxe[c]:.4g}")
        lines.append(
            f"aggregate: R2={self.r2_aggregate:.4f} MAE={self.mae_aggregate:.4g} "
            f"RMSE={self.rmse_aggregate:.4g} MaxE={self.maxe_aggregate:.4g}")
        if self.constant_channels:
            lines.append(f"constant-truth channels (R2 undefined): "
                         f"{list(self.constant_channels)}")
        return "\n".join(lines)


def regression_metrics(truth: np.ndarray, pred: np.ndarray) -> RegressionReport:
    truth = np.asarray(truth, dtype=float)
    pred = np.asarray(pred, dtype=float)
    if truth.shape != pred.shape or truth.ndim != 2:
        raise ValidationError("truth and pred must be matching 2-d arrays")
    if truth.shape[0] < 2:
        raise ValidationError("need at least two samples for metrics")
    err = pred - truth
    sse = (err * err).sum(axis=0)
    sst = ((truth - truth.mean(axis=0)) ** 2).sum(axis=0)
    constant = tuple(int(c) for c in np.flatnonzero(sst == 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(sst > 0.0, 1.0 - sse / sst, np.nan)
    mae = np.abs(err).mean(axis=0)
    rmse = np.sqrt((err * err).mean(axis=0))
    maxe = np.abs(err).max(axis=0)
    valid = ~np.isnan(r2)
    return RegressionReport(
        r2=r2, mae=mae, rmse=rmse, maxe=maxe,
        r2_aggregate=float(r2[valid].mean()) if valid.any() else float("nan"),
        mae_aggregate=float(np.abs(err).mean()),
        rmse_aggregate=float(np.sqrt((err * err).mean())),
        maxe_aggregate=float(np.abs(err).max()),
        n_samples=truth.shape[0],
        constant_channels=constant,
    )


def train_mlp(inputs: np.ndarray, labels: np.ndarray, config: TrainConfig,
              callback=None):
    """Train on (inputs, labels) with a seeded 90/10 split.

    Returns ``(params, report)`` where the report is evaluated on the held-out
    split.  ``callback(epoch, lr, mean_batch_loss)`` is invoked once per epoch
    when given.  Raises :class:`TrainingDivergedError` on a non-finite loss.
    """
    x = np.asarray(inputs, dtype=float)
    y = np.asarray(labels, dtype=float)
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValidationError("inputs and labels must be matching 2-d arrays")
    if x.shape[0] == 0:
        raise ValidationError("empty dataset")
    if x.shape[1] != config.sizes[0] or y.shape[1] != config.sizes[-1]:
        raise ConfigError(
            f"network sizes {config.sizes} do not match data "
            f"({x.shape[1]} -> {y.shape[1]})")

    rng = np.random.default_rng(config.seed)
    order = rng.permutation(x.shape[0])
    n_test = max(2, int(round(config.val_fraction * x.shape[0])))
    test_idx, train_idx = order[:n_test], order[n_test:]
    if train_idx.size == 0:
        raise ValidationError("dataset too small for the requested split")
    x_train, y_train = x[train_idx], y[train_idx]
    x_test, y_test = x[test_idx], y[test_idx]

    params = init_params(config.sizes, seed=config.seed)
    params.x_mean = x_train.mean(axis=0)
    params.x_scale = np.maximum(x_train.std(axis=0), 1e-12)
    params.y_mean = y_train.mean(axis=0)
    params.y_scale = np.maximum(y_train.std(axis=0), 1e-12)

    x_tr = (x_train - params.x_mean) / params.x_scale
    y_tr = (y_train - params.y_mean) / params.y_scale

    arrays = params.arrays()
    m_state = [np.zeros_like(a) for a in arrays]
    v_state = [np.zeros_like(a) for a in arrays]
    step = 0
    batch = min(config.batch_size, x_tr.shape[0])
    b1, b2, eps = config.adam_beta1, config.adam_beta2, config.adam_eps

    for epoch in range(config.epochs):
        lr = cosine_lr(config, epoch)
        perm = rng.permutation(x_tr.shape[0])
        losses = []
        for start in range(0, x_tr.shape[0], batch):
            idx = perm[start:start + batch]
            loss, grads = loss_and_grads(params, x_tr[idx], y_tr[idx],
                                         config.smooth_l1_beta)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, step {step}")
            losses.append(loss)
            step += 1
            c1 = 1.0 - b1 ** step
            c2 = 1.0 - b2 ** step
            for a, g, m, v in zip(arrays, grads, m_state, v_state):
                m *= b1
                m += (1.0 - b1) * g
                v *= b2
                v += (1.0 - b2) * g * g
                a -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
        if callback is not None:
            callback(epoch, lr, float(np.mean(losses)))

    report = regression_metrics(y_test, mlp_forward(params, x_test))
    return params, report
