"""Conv -> ReLU -> MaxPool -> Dense -> ReLU -> Dropout -> Dense -> Softmax.

Everything is float64 numpy, NHWC layout. The convolution is 3x3, stride 1,
same (zero) padding; pooling is 2x2 with stride 2, so inputs need even H, W.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..exceptions import DimensionError, DivergenceError

KERNEL = 3
PARAM_NAMES = (
    "conv_kernels",
    "conv_bias",
    "dense1_weights",
    "dense1_bias",
    "dense2_weights",
    "dense2_bias",
)


@dataclass
class CnnModel:
    conv_kernels: np.ndarray  # (F, 3, 3, C)
    conv_bias: np.ndarray  # (F,)
    dense1_weights: np.ndarray  # (F*H/2*W/2, N_d)
    dense1_bias: np.ndarray  # (N_d,)
    dense2_weights: np.ndarray  # (N_d, K)
    dense2_bias: np.ndarray  # (K,)
    dropout_rate: float = 0.0

    @classmethod
    def initialize(cls, num_filters, dense_units, dropout_rate, input_shape, n_classes=4,
                   rng=None) -> "CnnModel":
        """He-normal weights, zero biases. ``input_shape`` is ``(H, W, C)``."""
        h, w, c = _check_input_shape(input_shape)
        rng = np.random.default_rng(rng)
        flat = num_filters * (h // 2) * (w // 2)

        def he(shape, fan_in):
            return rng.standard_normal(shape) * math.sqrt(2.0 / fan_in)

        return cls(
            conv_kernels=he((num_filters, KERNEL, KERNEL, c), KERNEL * KERNEL * c),
            conv_bias=np.zeros(num_filters),
            dense1_weights=he((flat, dense_units), flat),
            dense1_bias=np.zeros(dense_units),
            dense2_weights=he((dense_units, n_classes), dense_units),
            dense2_bias=np.zeros(n_classes),
            dropout_rate=float(dropout_rate),
        )

    @classmethod
    def zeros(cls, num_filters, dense_units, input_shape, n_classes=4, dropout_rate=0.0):
        h, w, c = _check_input_shape(input_shape)
        flat = num_filters * (h // 2) * (w // 2)
        return cls(
            np.zeros((num_filters, KERNEL, KERNEL, c)), np.zeros(num_filters),
            np.zeros((flat, dense_units)), np.zeros(dense_units),
            np.zeros((dense_units, n_classes)), np.zeros(n_classes),
            dropout_rate=float(dropout_rate),
        )

    @property
    def num_filters(self) -> int:
        return self.conv_kernels.shape[0]

    @property
    def dense_units(self) -> int:
        return self.dense1_bias.shape[0]

    @property
    def n_classes(self) -> int:
        return self.dense2_bias.shape[0]

    @property
    def channels(self) -> int:
        return self.conv_kernels.shape[3]

    def params(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def with_params(self, params: dict) -> "CnnModel":
        return replace(self, **{name: params[name] for name in PARAM_NAMES})

    def copy(self) -> "CnnModel":
        return self.with_params({k: v.copy() for k, v in self.params().items()})


def _check_input_shape(shape):
    if len(shape) != 3:
        raise DimensionError(f"input shape must be (H, W, C), got {tuple(shape)}")
    h, w, c = (int(s) for s in shape)
    if h < 2 or w < 2 or h % 2 or w % 2 or c < 1:
        raise DimensionError(f"input H and W must be even and >= 2, got {h}x{w}x{c}")
    return h, w, c


def _check_batch(model: CnnModel, batch) -> np.ndarray:
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 4:
        raise DimensionError(f"batch must be 4-D (B, H, W, C), got shape {x.shape}")
    _, h, w, c = x.shape
    _check_input_shape((h, w, c))
    if c != model.channels:
        raise DimensionError(f"batch has {c} channels, model expects {model.channels}")
    flat = model.num_filters * (h // 2) * (w // 2)
    if flat != model.dense1_weights.shape[0]:
        raise DimensionError(
            f"{h}x{w} input flattens to {flat} features, model expects {model.dense1_weights.shape[0]}"
        )
    return x


def im2col(x: np.ndarray) -> np.ndarray:
    """(B, H, W, C) -> (B*H*W, 9*C) patches for a same-padded 3x3 kernel."""
    b, h, w, c = x.shape
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    win = sliding_window_view(xp, (KERNEL, KERNEL), axis=(1, 2))  # (B, H, W, C, 3, 3)
    return win.transpose(0, 1, 2, 4, 5, 3).reshape(b * h * w, KERNEL * KERNEL * c)


def conv2d(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray) -> np.ndarray:
    b, h, w, _ = x.shape
    f = kernels.shape[0]
    out = im2col(x) @ kernels.reshape(f, -1).T + bias
    return out.reshape(b, h, w, f)


def _pool_windows(a: np.ndarray) -> np.ndarray:
    b, h, w, f = a.shape
    return a.reshape(b, h // 2, 2, w // 2, 2, f).transpose(0, 1, 3, 5, 2, 4).reshape(
        b, h // 2, w // 2, f, 4
    )


def maxpool2x2(a: np.ndarray):
    """Return pooled output and the argmax index within each 2x2 window."""
    win = _pool_windows(a)
    idx = win.argmax(axis=-1)
    return np.take_along_axis(win, idx[..., None], axis=-1)[..., 0], idx


def maxpool2x2_backward(d_pooled: np.ndarray, idx: np.ndarray) -> np.ndarray:
    b, h2, w2, f = d_pooled.shape
    d_win = np.zeros((b, h2, w2, f, 4))
    np.put_along_axis(d_win, idx[..., None], d_pooled[..., None], axis=-1)
    return d_win.reshape(b, h2, w2, f, 2, 2).transpose(0, 1, 4, 2, 5, 3).reshape(
        b, 2 * h2, 2 * w2, f
    )


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout multiplier: 0 with probability ``rate``, else 1/(1-rate)."""
    if rate <= 0.0:
        return np.ones(shape)
    if rate >= 1.0:
        raise ValueError(f"dropout rate must be < 1, got {rate}")
    return (rng.random(shape) >= rate) / (1.0 - rate)


def _forward(model: CnnModel, x: np.ndarray, training: bool, rng):
    z0 = conv2d(x, model.conv_kernels, model.conv_bias)
    a0 = np.maximum(z0, 0.0)
    pooled, pool_idx = maxpool2x2(a0)
    flat = pooled.reshape(x.shape[0], -1)
    z1 = flat @ model.dense1_weights + model.dense1_bias
    h1 = np.maximum(z1, 0.0)
    if training and model.dropout_rate > 0.0:
        if rng is None:
            raise ValueError("training-mode forward with dropout needs an rng")
        mask = dropout_mask(h1.shape, model.dropout_rate, rng)
    else:
        mask = None
    h1d = h1 * mask if mask is not None else h1
    logits = h1d @ model.dense2_weights + model.dense2_bias
    cache = dict(x=x, z0=z0, pooled_shape=pooled.shape, pool_idx=pool_idx, flat=flat, z1=z1,
                 h1d=h1d, mask=mask)
    return logits, cache


def forward(model: CnnModel, batch, training: bool = False, rng=None) -> np.ndarray:
    """Class probabilities, shape (B, n_classes). Dropout only when ``training``."""
    x = _check_batch(model, batch)
    logits, _ = _forward(model, x, training, rng)
    return softmax(logits)


def loss_and_grads(model: CnnModel, batch, labels, training: bool = False, rng=None,
                   return_probs: bool = False):
    """Mean cross-entropy over the batch and its gradient for every parameter.

    Raises :class:`DivergenceError` if the loss is not finite.
    """
    x = _check_batch(model, batch)
    y = np.asarray(labels)
    if y.shape != (x.shape[0],):
        raise DimensionError(f"labels shape {y.shape} does not match batch size {x.shape[0]}")
    if y.size and (y.min() < 0 or y.max() >= model.n_classes):
        raise DimensionError(f"labels must lie in [0, {model.n_classes})")
    logits, cache = _forward(model, x, training, rng)
    b = x.shape[0]
    logp = log_softmax(logits)
    loss = float(-logp[np.arange(b), y].mean())
    if not math.isfinite(loss):
        raise DivergenceError(f"non-finite training loss {loss}")
    probs = np.exp(logp)

    d_logits = probs.copy()
    d_logits[np.arange(b), y] -= 1.0
    d_logits /= b
    grads = {
        "dense2_weights": cache["h1d"].T @ d_logits,
        "dense2_bias": d_logits.sum(axis=0),
    }
    d_h1 = d_logits @ model.dense2_weights.T
    if cache["mask"] is not None:
        d_h1 = d_h1 * cache["mask"]
    d_z1 = d_h1 * (cache["z1"] > 0)
    grads["dense1_weights"] = cache["flat"].T @ d_z1
    grads["dense1_bias"] = d_z1.sum(axis=0)
    d_pooled = (d_z1 @ model.dense1_weights.T).reshape(cache["pooled_shape"])
    d_a0 = maxpool2x2_backward(d_pooled, cache["pool_idx"])
    d_z0 = (d_a0 * (cache["z0"] > 0)).reshape(-1, model.num_filters)
    grads["conv_kernels"] = (d_z0.T @ im2col(x)).reshape(model.conv_kernels.shape)
    grads["conv_bias"] = d_z0.sum(axis=0)
    if not all(np.isfinite(g).all() for g in grads.values()):
        raise DivergenceError("non-finite gradient")
    if return_probs:
        return loss, grads, probs
    return loss, grads


@dataclass
class AdamState:
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_params(cls, params: dict, **kwargs) -> "AdamState":
        return cls(
            first_moment={k: np.zeros_like(v) for k, v in params.items()},
            second_moment={k: np.zeros_like(v) for k, v in params.items()},
            **kwargs,
        )


def adam_step(params: dict, grads: dict, state: AdamState, learning_rate: float):
    """One bias-corrected Adam update. Returns ``(new_params, new_state)``; inputs untouched."""
    if set(params) != set(grads):
        raise DimensionError("params and grads have different keys")
    t = state.step_count + 1
    b1, b2, eps = state.beta1, state.beta2, state.epsilon
    new_params, m_new, v_new = {}, {}, {}
    for name, theta in params.items():
        g = grads[name]
        if g.shape != theta.shape:
            raise DimensionError(f"gradient for {name} has shape {g.shape}, expected {theta.shape}")
        m = state.first_moment.get(name, np.zeros_like(theta))
        v = state.second_moment.get(name, np.zeros_like(theta))
        m = b1 * m
        m += (1.0 - b1) * g
        v = b2 * v
        v += (1.0 - b2) * np.square(g)
        # theta - lr * m_hat / (sqrt(v_hat) + eps), with few temporaries
        denom = v / (1.0 - b2**t)
        np.sqrt(denom, out=denom)
        denom += eps
        step = m / (1.0 - b1**t)
        step /= denom
        step *= learning_rate
        new_params[name] = theta - step
        m_new[name], v_new[name] = m, v
    return new_params, AdamState(m_new, v_new, t, b1, b2, eps)
