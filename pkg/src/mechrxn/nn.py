"""Dense feed-forward networks with a deterministic training loop.

Covers the two classifier profiles (reactive-atom source/sink models) and
the shared-weight pairwise ranker.  Everything is numpy: weights live as
little-endian float32, math runs in float64, so a saved and reloaded
model reproduces its scores bit for bit.

Update rule: adaptive moment estimation (beta1 0.9, beta2 0.999,
eps 1e-8) over mini-batches, with L2 applied to weights only; a plain
gradient-descent mode exists for verification runs.  Initialization is
fan-in scaled uniform (+-sqrt(6/fan_in)) from the config seed.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, asdict

import numpy as np

MAGIC = b"MRXNMDL1"

ACTIVATIONS = ("relu", "tanh")


@dataclass(frozen=True)
class MlpConfig:
    layer_dims: tuple[int, ...]
    activation: str = "relu"
    dropout: float = 0.0
    l2: float = 0.0
    batch_size: int = 64
    learning_rate: float = 1e-3
    seed: int = 0
    epochs: int = 30
    margin: float = 1.0
    class_weight: str | None = None
    optimizer: str = "adam"

    def __post_init__(self):
        if len(self.layer_dims) < 2:
            raise ValueError("need at least input and output widths")
        if self.layer_dims[-1] != 1:
            raise ValueError("final layer width must be 1")
        if any(w < 1 for w in self.layer_dims):
            raise ValueError("layer widths must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")


# Table-10 profile kept verbatim (including the 164 as printed) plus a
# corrected variant; neither is asserted as the intended one.
CLASSIFIER_PROFILE_VERBATIM = dict(
    layer_dims=(6487, 512, 256, 128, 164, 1), activation="relu",
    dropout=0.2, l2=1e-4, batch_size=64,
)
CLASSIFIER_PROFILE_CORRECTED = dict(
    layer_dims=(6487, 512, 256, 128, 64, 1), activation="relu",
    dropout=0.2, l2=1e-4, batch_size=64,
)
RANKER_PROFILE = dict(
    layer_dims=(15022, 360, 360, 1), activation="tanh",
    dropout=0.5, batch_size=200,
)


def _act(name: str, z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0) if name == "relu" else np.tanh(z)


def _act_grad(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (z > 0).astype(np.float64)
    t = np.tanh(z)
    return 1.0 - t * t


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


@dataclass
class TrainedModel:
    config: MlpConfig
    weights: list[np.ndarray]  # float32, shape (fan_in, fan_out)
    biases: list[np.ndarray]   # float32, shape (fan_out,)
    epochs_run: int = 0
    final_loss: float = float("nan")

    @property
    def input_dim(self) -> int:
        return self.config.layer_dims[0]

    def forward(self, x: np.ndarray, return_probability: bool = False):
        """Score one vector or a (n, dim) batch; dropout disabled."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        h = x[None, :] if single else x
        if h.shape[1] != self.input_dim:
            raise ValueError(
                f"input width {h.shape[1]} != model width {self.input_dim}"
            )
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w.astype(np.float64) + b.astype(np.float64)
            if layer < len(self.weights) - 1:
                h = _act(self.config.activation, h)
        scores = h[:, 0]
        out = scores[0] if single else scores
        if return_probability:
            return out, sigmoid(out)
        return out

    # -- persistence --------------------------------------------------------

    def save(self, path) -> None:
        header = json.dumps(
            {
                "config": asdict(self.config),
                "epochs_run": self.epochs_run,
                "final_loss": self.final_loss,
            }
        ).encode()
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(header)))
            fh.write(header)
            for w, b in zip(self.weights, self.biases):
                fh.write(w.astype("<f4").tobytes())
                fh.write(b.astype("<f4").tobytes())

    @classmethod
    def load(cls, path) -> "TrainedModel":
        with open(path, "rb") as fh:
            if fh.read(len(MAGIC)) != MAGIC:
                raise ValueError(f"{path} is not a model file")
            (header_len,) = struct.unpack("<I", fh.read(4))
            meta = json.loads(fh.read(header_len).decode())
            cfg_dict = meta["config"]
            cfg_dict["layer_dims"] = tuple(cfg_dict["layer_dims"])
            config = MlpConfig(**cfg_dict)
            weights, biases = [], []
            dims = config.layer_dims
            for fan_in, fan_out in zip(dims[:-1], dims[1:]):
                raw = fh.read(fan_in * fan_out * 4)
                weights.append(
                    np.frombuffer(raw, dtype="<f4").reshape(fan_in, fan_out).copy()
                )
                raw = fh.read(fan_out * 4)
                biases.append(np.frombuffer(raw, dtype="<f4").copy())
        return cls(config, weights, biases, meta["epochs_run"], meta["final_loss"])

    def export_json(self, path) -> None:
        """Human-readable debug dump (not the canonical format)."""
        payload = {
            "config": asdict(self.config),
            "epochs_run": self.epochs_run,
            "final_loss": self.final_loss,
            "layers": [
                {"weights": w.tolist(), "biases": b.tolist()}
                for w, b in zip(self.weights, self.biases)
            ],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)


def _init_params(config: MlpConfig) -> tuple[list[np.ndarray], list[np.ndarray]]:
    rng = np.random.default_rng(config.seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(config.layer_dims[:-1], config.layer_dims[1:]):
        bound = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _forward_full(config, weights, biases, x, dropout_masks=None):
    """Forward keeping pre-activations for backprop."""
    h = x
    pre: list[np.ndarray] = []
    post: list[np.ndarray] = [h]
    for layer, (w, b) in enumerate(zip(weights, biases)):
        z = h @ w + b
        pre.append(z)
        if layer < len(weights) - 1:
            h = _act(config.activation, z)
            if dropout_masks is not None:
                h = h * dropout_masks[layer]
        else:
            h = z
        post.append(h)
    return pre, post


def _backward(config, weights, pre, post, dscore, dropout_masks=None):
    """Gradients of sum(dscore * score) w.r.t. weights and biases."""
    grads_w = [None] * len(weights)
    grads_b = [None] * len(weights)
    delta = dscore[:, None]
    for layer in reversed(range(len(weights))):
        grads_w[layer] = post[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = delta @ weights[layer].T
            if dropout_masks is not None:
                delta = delta * dropout_masks[layer - 1]
            delta = delta * _act_grad(config.activation, pre[layer - 1])
    return grads_w, grads_b


class _Optimizer:
    def __init__(self, config: MlpConfig, weights, biases):
        self.config = config
        self.t = 0
        if config.optimizer == "adam":
            self.m_w = [np.zeros_like(w) for w in weights]
            self.v_w = [np.zeros_like(w) for w in weights]
            self.m_b = [np.zeros_like(b) for b in biases]
            self.v_b = [np.zeros_like(b) for b in biases]

    def step(self, weights, biases, grads_w, grads_b):
        lr = self.config.learning_rate
        if self.config.optimizer == "sgd":
            for w, b, gw, gb in zip(weights, biases, grads_w, grads_b):
                w -= lr * gw
                b -= lr * gb
            return
        self.t += 1
        b1, b2, eps = 0.9, 0.999, 1e-8
        corr1 = 1.0 - b1**self.t
        corr2 = 1.0 - b2**self.t
        for i, (w, gw) in enumerate(zip(weights, grads_w)):
            self.m_w[i] = b1 * self.m_w[i] + (1 - b1) * gw
            self.v_w[i] = b2 * self.v_w[i] + (1 - b2) * gw * gw
            w -= lr * (self.m_w[i] / corr1) / (np.sqrt(self.v_w[i] / corr2) + eps)
        for i, (b, gb) in enumerate(zip(biases, grads_b)):
            self.m_b[i] = b1 * self.m_b[i] + (1 - b1) * gb
            self.v_b[i] = b2 * self.v_b[i] + (1 - b2) * gb * gb
            b -= lr * (self.m_b[i] / corr1) / (np.sqrt(self.v_b[i] / corr2) + eps)


def _dropout_masks(config, rng, batch_size):
    if config.dropout == 0.0:
        return None
    keep = 1.0 - config.dropout
    return [
        (rng.random((batch_size, width)) < keep) / keep
        for width in config.layer_dims[1:-1]
    ]


def _finish(config, weights, biases, epochs, loss) -> TrainedModel:
    return TrainedModel(
        config,
        [w.astype("<f4") for w in weights],
        [b.astype("<f4") for b in biases],
        epochs_run=epochs,
        final_loss=float(loss),
    )


def train_classifier(dataset, config: MlpConfig) -> TrainedModel:
    """Binary cross-entropy training over (vector, 0/1 label) pairs.

    Deterministic for a fixed seed.  With class_weight='balanced',
    positive examples are up-weighted by the negative/positive ratio.
    """
    xs, ys = _collect_dataset(dataset, config.layer_dims[0])
    n = len(ys)
    if n == 0:
        raise ValueError("empty dataset")
    n_pos = int(ys.sum())
    if n_pos in (0, n):
        import warnings

        warnings.warn("single-class dataset; training proceeds", stacklevel=2)
    pos_weight = 1.0
    if config.class_weight == "balanced" and 0 < n_pos < n:
        pos_weight = (n - n_pos) / n_pos

    weights, biases = _init_params(config)
    opt = _Optimizer(config, weights, biases)
    rng = np.random.default_rng(config.seed + 1)
    loss_value = float("nan")
    for _ in range(config.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            xb, yb = xs[idx], ys[idx]
            masks = _dropout_masks(config, rng, len(idx))
            pre, post = _forward_full(config, weights, biases, xb, masks)
            z = post[-1][:, 0]
            sample_w = np.where(yb == 1.0, pos_weight, 1.0)
            # stable BCE-with-logits
            losses = np.maximum(z, 0) - z * yb + np.log1p(np.exp(-np.abs(z)))
            epoch_loss += float((sample_w * losses).sum())
            dscore = sample_w * (sigmoid(z) - yb) / len(idx)
            gw, gb = _backward(config, weights, pre, post, dscore, masks)
            if config.l2:
                gw = [g + config.l2 * w for g, w in zip(gw, weights)]
            opt.step(weights, biases, gw, gb)
        loss_value = epoch_loss / n
    return _finish(config, weights, biases, config.epochs, loss_value)


def train_siamese(pairs, config: MlpConfig) -> TrainedModel:
    """Margin ranking over (plausible_fp, decoy_fp) pairs, shared weights.

    loss = max(0, margin - s(plausible) + s(decoy)); higher score means
    more plausible.
    """
    plausible, decoys = [], []
    for good, bad in pairs:
        plausible.append(np.asarray(good, dtype=np.float64))
        decoys.append(np.asarray(bad, dtype=np.float64))
    if not plausible:
        raise ValueError("empty pair stream")
    xp = np.stack(plausible)
    xd = np.stack(decoys)
    n = len(xp)

    weights, biases = _init_params(config)
    opt = _Optimizer(config, weights, biases)
    rng = np.random.default_rng(config.seed + 1)
    loss_value = float("nan")
    for _ in range(config.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            xb = np.concatenate([xp[idx], xd[idx]])
            masks = _dropout_masks(config, rng, len(xb))
            pre, post = _forward_full(config, weights, biases, xb, masks)
            z = post[-1][:, 0]
            k = len(idx)
            s_good, s_bad = z[:k], z[k:]
            active = (config.margin - s_good + s_bad) > 0
            epoch_loss += float(
                np.maximum(0.0, config.margin - s_good + s_bad).sum()
            )
            dscore = np.concatenate(
                [np.where(active, -1.0, 0.0), np.where(active, 1.0, 0.0)]
            ) / k
            gw, gb = _backward(config, weights, pre, post, dscore, masks)
            if config.l2:
                gw = [g + config.l2 * w for g, w in zip(gw, weights)]
            opt.step(weights, biases, gw, gb)
        loss_value = epoch_loss / n
    return _finish(config, weights, biases, config.epochs, loss_value)


def _collect_dataset(dataset, dim):
    xs, ys = [], []
    for vec, label in dataset:
        if label not in (0, 1, 0.0, 1.0):
            raise ValueError(f"labels must be 0/1, got {label!r}")
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (dim,):
            raise ValueError(f"feature width {vec.shape} != input dim {dim}")
        xs.append(vec)
        ys.append(float(label))
    if not xs:
        return np.zeros((0, dim)), np.zeros(0)
    return np.stack(xs), np.asarray(ys)


def grad_check(model: TrainedModel, x: np.ndarray, epsilon: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Checks d(score)/d(theta) for every parameter, dropout off.
    """
    if not 1e-7 <= epsilon <= 1e-3:
        raise ValueError("epsilon outside [1e-7, 1e-3]")
    x = np.asarray(x, dtype=np.float64)[None, :]
    config = model.config
    weights = [w.astype(np.float64) for w in model.weights]
    biases = [b.astype(np.float64) for b in model.biases]
    pre, post = _forward_full(config, weights, biases, x)
    grads_w, grads_b = _backward(config, weights, pre, post, np.ones(1))

    def score() -> float:
        _, p = _forward_full(config, weights, biases, x)
        return float(p[-1][0, 0])

    worst = 0.0
    for params, grads in ((weights, grads_w), (biases, grads_b)):
        for arr, grad in zip(params, grads):
            flat, gflat = arr.ravel(), np.asarray(grad).ravel()
            for k in range(flat.size):
                keep = flat[k]
                flat[k] = keep + epsilon
                up = score()
                flat[k] = keep - epsilon
                down = score()
                flat[k] = keep
                numeric = (up - down) / (2 * epsilon)
                denom = max(abs(numeric), abs(gflat[k]), 1e-8)
                worst = max(worst, abs(numeric - gflat[k]) / denom)
    return worst
