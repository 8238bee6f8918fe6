"""Twin-network similarity model over memory-spectrum images.

A single weight-shared convolutional extractor embeds both images of a
pair; the head maps the elementwise absolute difference of the two
embeddings through two fully connected layers (rectified-linear between,
sigmoid out) to a similarity in (0, 1).  Training minimizes mean binary
cross entropy with adaptive-moment stochastic gradient steps and a
per-epoch multiplicative learning-rate decay.

Everything is plain numpy with hand-written backpropagation so gradients
can be verified against central finite differences and runs are bitwise
reproducible from a seed.
"""
from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .errors import DataError, SchemaError
from .pms import PMSImage

ARCHITECTURES: dict[str, tuple[tuple, ...]] = {
    # (kind, *args); conv args = (out_channels, kernel, pad)
    "alexnet-small": (
        ("conv", 8, 3, 1),
        ("relu",),
        ("pool",),
        ("conv", 16, 3, 1),
        ("relu",),
        ("pool",),
        ("flatten",),
    ),
    "tiny": (
        ("conv", 4, 3, 1),
        ("relu",),
        ("pool",),
        ("flatten",),
    ),
}


class DegenerateTrainingWarning(UserWarning):
    """Training set contains a single label class."""


# ---------------------------------------------------------------------------
# Input preparation


def resize_uniform(image: PMSImage, side: int) -> np.ndarray:
    """Nearest-neighbor resample to (3, side, side), scaled to [0, 1].

    The image's original side length is untouched; it keeps feeding the
    size-ratio factor of the distance stage.
    """
    if side < 1:
        raise DataError(f"target side must be >= 1, got {side}")
    src = image.pixels.astype(np.float64) / 255.0
    n = image.side
    idx = (np.arange(side) * n) // side  # exact integer mapping
    resized = src[np.ix_(idx, idx)]
    return np.transpose(resized, (2, 0, 1)).copy()


def pairs_to_tensors(
    pairs: Sequence["TrainingPair"], side: int
) -> tuple[np.ndarray, np.ndarray]:
    """Stack training pairs into (N, 2, 3, side, side) tensors plus labels."""
    xs = np.stack(
        [np.stack([resize_uniform(p.a, side), resize_uniform(p.b, side)]) for p in pairs]
    )
    ys = np.array([p.label for p in pairs], dtype=np.float64)
    return xs, ys


@dataclass
class TrainingPair:
    a: PMSImage
    b: PMSImage
    label: int  # 1 = same culprit fault, 0 = different


# ---------------------------------------------------------------------------
# Layers (functional: forward returns a cache, backward consumes it)


def _im2col(x: np.ndarray, k: int, pad: int) -> np.ndarray:
    n, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    ho, wo = h + 2 * pad - k + 1, w + 2 * pad - k + 1
    s = xp.strides
    windows = np.lib.stride_tricks.as_strided(
        xp, (n, c, k, k, ho, wo), (s[0], s[1], s[2], s[3], s[2], s[3])
    )
    return windows.reshape(n, c * k * k, ho * wo)


def _col2im(dcols: np.ndarray, x_shape: tuple, k: int, pad: int) -> np.ndarray:
    n, c, h, w = x_shape
    ho, wo = h + 2 * pad - k + 1, w + 2 * pad - k + 1
    dxp = np.zeros((n, c, h + 2 * pad, w + 2 * pad))
    d6 = dcols.reshape(n, c, k, k, ho, wo)
    for i in range(k):
        for j in range(k):
            dxp[:, :, i : i + ho, j : j + wo] += d6[:, :, i, j]
    return dxp[:, :, pad : pad + h, pad : pad + w] if pad else dxp


def _conv_forward(x, weight, bias, pad):
    f, _, k, _ = weight.shape
    cols = _im2col(x, k, pad)
    out = np.matmul(weight.reshape(f, -1), cols) + bias[None, :, None]
    n = x.shape[0]
    ho = x.shape[2] + 2 * pad - k + 1
    return out.reshape(n, f, ho, -1), (x.shape, cols)


def _conv_backward(dy, weight, pad, cache):
    x_shape, cols = cache
    f, c, k, _ = weight.shape
    n = dy.shape[0]
    dyf = dy.reshape(n, f, -1)
    dbias = dyf.sum(axis=(0, 2))
    dweight = np.matmul(dyf, cols.transpose(0, 2, 1)).sum(axis=0).reshape(f, c, k, k)
    dcols = np.matmul(weight.reshape(f, -1).T, dyf)
    return _col2im(dcols, x_shape, k, pad), dweight, dbias


def _pool_forward(x):
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise DataError(f"pooling needs even spatial size, got {h}x{w}")
    xr = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(
        n, c, h // 2, w // 2, 4
    )
    idx = xr.argmax(axis=4)  # first maximum: deterministic tie routing
    y = np.take_along_axis(xr, idx[..., None], axis=4)[..., 0]
    return y, (x.shape, idx)


def _pool_backward(dy, cache):
    x_shape, idx = cache
    n, c, h, w = x_shape
    d5 = np.zeros((n, c, h // 2, w // 2, 4))
    np.put_along_axis(d5, idx[..., None], dy[..., None], axis=4)
    return (
        d5.reshape(n, c, h // 2, w // 2, 2, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, c, h, w)
    )


# ---------------------------------------------------------------------------
# Parameters


@dataclass
class NetworkParams:
    """Single parameter storage; both twin passes read the same arrays."""

    arch: str
    input_side: int
    head_hidden: int
    seed: int
    values: dict[str, np.ndarray]

    def blocks(self) -> list[str]:
        return list(self.values)

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            self.arch, self.input_side, self.head_hidden, self.seed,
            {k: v.copy() for k, v in self.values.items()},
        )


def _extractor_out_dim(arch: str, side: int) -> tuple[int, int]:
    """(flattened dim, channels) after running the arch spec on a side."""
    channels, cur = 3, side
    for layer in ARCHITECTURES[arch]:
        if layer[0] == "conv":
            channels = layer[1]
            cur = cur + 2 * layer[3] - layer[2] + 1
        elif layer[0] == "pool":
            if cur % 2:
                raise DataError(f"arch {arch!r} needs side divisible by pooling, got {cur}")
            cur //= 2
    return channels * cur * cur, channels


def init_params(arch: str, input_side: int, head_hidden: int, seed: int) -> NetworkParams:
    if arch not in ARCHITECTURES:
        raise DataError(f"unknown architecture {arch!r}; available: {', '.join(ARCHITECTURES)}")
    rng = np.random.default_rng(seed)
    values: dict[str, np.ndarray] = {}
    channels = 3
    for i, layer in enumerate(ARCHITECTURES[arch]):
        if layer[0] == "conv":
            out_ch, k, _pad = layer[1], layer[2], layer[3]
            fan_in = channels * k * k
            values[f"extractor.{i}.weight"] = rng.normal(
                0.0, np.sqrt(2.0 / fan_in), size=(out_ch, channels, k, k)
            )
            values[f"extractor.{i}.bias"] = np.zeros(out_ch)
            channels = out_ch
    dim, _ = _extractor_out_dim(arch, input_side)
    values["head.fc1.weight"] = rng.normal(0.0, np.sqrt(2.0 / dim), size=(dim, head_hidden))
    values["head.fc1.bias"] = np.zeros(head_hidden)
    values["head.fc2.weight"] = rng.normal(0.0, np.sqrt(1.0 / head_hidden), size=(head_hidden, 1))
    values["head.fc2.bias"] = np.zeros(1)
    return NetworkParams(arch, input_side, head_hidden, seed, values)


# ---------------------------------------------------------------------------
# Forward / backward


def _extract(params: NetworkParams, x: np.ndarray):
    caches = []
    out = x
    for i, layer in enumerate(ARCHITECTURES[params.arch]):
        kind = layer[0]
        if kind == "conv":
            out, cache = _conv_forward(
                out, params.values[f"extractor.{i}.weight"], params.values[f"extractor.{i}.bias"], layer[3]
            )
            caches.append(("conv", i, cache))
        elif kind == "relu":
            caches.append(("relu", i, out > 0))
            out = np.maximum(out, 0.0)
        elif kind == "pool":
            out, cache = _pool_forward(out)
            caches.append(("pool", i, cache))
        elif kind == "flatten":
            caches.append(("flatten", i, out.shape))
            out = out.reshape(out.shape[0], -1)
    return out, caches


def _extract_backward(params: NetworkParams, dout: np.ndarray, caches, grads: dict[str, np.ndarray]):
    for kind, i, cache in reversed(caches):
        if kind == "conv":
            dout, dw, db = _conv_backward(
                dout, params.values[f"extractor.{i}.weight"], ARCHITECTURES[params.arch][i][3], cache
            )
            grads[f"extractor.{i}.weight"] += dw
            grads[f"extractor.{i}.bias"] += db
        elif kind == "relu":
            dout = dout * cache
        elif kind == "pool":
            dout = _pool_backward(dout, cache)
        elif kind == "flatten":
            dout = dout.reshape(cache)
    return dout


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def forward_similarity_batch(params: NetworkParams, a: np.ndarray, b: np.ndarray):
    """Similarities for batched resized tensors; returns (p, cache)."""
    if a.shape != b.shape:
        raise DataError(f"twin inputs must share a shape, got {a.shape} vs {b.shape}")
    expected = (a.shape[0], 3, params.input_side, params.input_side)
    if a.shape != expected:
        raise DataError(f"expected input shape {expected}, got {a.shape}")
    ha, ca = _extract(params, a)
    hb, cb = _extract(params, b)
    diff = ha - hb
    d = np.abs(diff)
    w1, b1 = params.values["head.fc1.weight"], params.values["head.fc1.bias"]
    w2, b2 = params.values["head.fc2.weight"], params.values["head.fc2.bias"]
    z1 = d @ w1 + b1
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ w2 + b2
    p = _sigmoid(z2).ravel()
    cache = (ca, cb, np.sign(diff), d, z1, a1)
    return p, cache


def backward_similarity_batch(
    params: NetworkParams, p: np.ndarray, y: np.ndarray, cache
) -> dict[str, np.ndarray]:
    """Gradients of mean BCE w.r.t. every parameter (twin grads summed)."""
    ca, cb, sgn, d, z1, a1 = cache
    n = p.shape[0]
    grads = {k: np.zeros_like(v) for k, v in params.values.items()}
    dz2 = ((p - y) / n)[:, None]  # fused sigmoid + BCE
    grads["head.fc2.weight"] += a1.T @ dz2
    grads["head.fc2.bias"] += dz2.sum(axis=0)
    da1 = dz2 @ params.values["head.fc2.weight"].T
    dz1 = da1 * (z1 > 0)
    grads["head.fc1.weight"] += d.T @ dz1
    grads["head.fc1.bias"] += dz1.sum(axis=0)
    dd = dz1 @ params.values["head.fc1.weight"].T
    _extract_backward(params, dd * sgn, ca, grads)
    _extract_backward(params, -dd * sgn, cb, grads)
    return grads


def bce_loss(p: np.ndarray, y: np.ndarray, eps: float = 1e-7) -> float:
    """Mean binary cross entropy; predictions clipped to (eps, 1 - eps)."""
    p = np.clip(np.asarray(p, dtype=np.float64), eps, 1.0 - eps)
    y = np.asarray(y, dtype=np.float64)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def learning_rate(initial_lr: float, decay_per_epoch: float, epoch: int) -> float:
    """Schedule: the initial rate multiplied by the decay once per epoch."""
    return initial_lr * decay_per_epoch**epoch


# ---------------------------------------------------------------------------
# Training


class _Adam:
    def __init__(self, params: NetworkParams, beta1=0.9, beta2=0.999, eps=1e-8):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.values.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.values.items()}
        self.t = 0

    def step(self, params: NetworkParams, grads: dict[str, np.ndarray], lr: float) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for key, g in grads.items():
            self.m[key] = b1 * self.m[key] + (1 - b1) * g
            self.v[key] = b2 * self.v[key] + (1 - b2) * g * g
            mhat = self.m[key] / (1 - b1**self.t)
            vhat = self.v[key] / (1 - b2**self.t)
            params.values[key] -= lr * mhat / (np.sqrt(vhat) + self.eps)


class SiameseSimilarity(BaseEstimator):
    """Estimator over image pairs: ``fit(X, y)`` then ``predict(X)``.

    ``X`` has shape (N, 2, 3, side, side) holding resized twin inputs and
    ``y`` holds 0/1 same-fault labels.  ``predict`` returns similarities
    in (clip_eps, 1 - clip_eps).  Mini-batches are shuffled with a seeded
    generator; the learning rate is ``initial_lr * lr_decay_per_epoch**t``
    in epoch t.
    """

    def __init__(
        self,
        arch: str = "alexnet-small",
        uniform_side: int = 64,
        head_hidden: int = 64,
        batch_size: int = 16,
        initial_lr: float = 1e-4,
        lr_decay_per_epoch: float = 0.96,
        epochs: int = 30,
        seed: int = 0,
        clip_eps: float = 1e-7,
    ):
        self.arch = arch
        self.uniform_side = uniform_side
        self.head_hidden = head_hidden
        self.batch_size = batch_size
        self.initial_lr = initial_lr
        self.lr_decay_per_epoch = lr_decay_per_epoch
        self.epochs = epochs
        self.seed = seed
        self.clip_eps = clip_eps

    # -- scikit-learn style API -------------------------------------------

    def fit(self, X: np.ndarray, y: np.ndarray) -> "SiameseSimilarity":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.ndim != 5 or X.shape[1] != 2:
            raise DataError(f"expected pair tensor (N, 2, 3, side, side), got {X.shape}")
        if X.shape[0] == 0:
            raise DataError("cannot fit on an empty pair set")
        if X.shape[0] != y.shape[0]:
            raise DataError(f"{X.shape[0]} pairs but {y.shape[0]} labels")
        if not self.batch_size >= 1:
            raise DataError("batch_size must be >= 1")
        if not 0 < self.lr_decay_per_epoch <= 1:
            raise DataError("lr_decay_per_epoch must be in (0, 1]")
        if len(np.unique(y)) < 2:
            warnings.warn(
                "training set contains a single label class", DegenerateTrainingWarning
            )
        params = init_params(self.arch, self.uniform_side, self.head_hidden, self.seed)
        rng = np.random.default_rng(self.seed)
        optimizer = _Adam(params)
        history: list[float] = []
        n = X.shape[0]
        for epoch in range(self.epochs):
            lr = learning_rate(self.initial_lr, self.lr_decay_per_epoch, epoch)
            order = rng.permutation(n)
            losses = []
            for start in range(0, n, self.batch_size):
                batch = order[start : start + self.batch_size]
                a, b = X[batch, 0], X[batch, 1]
                p, cache = forward_similarity_batch(params, a, b)
                losses.append(bce_loss(p, y[batch], self.clip_eps) * len(batch))
                grads = backward_similarity_batch(params, p, y[batch], cache)
                optimizer.step(params, grads, lr)
            history.append(float(np.sum(losses) / n))
        self.params_ = params
        self.loss_history_ = history
        return self

    def fit_pairs(self, pairs: Sequence[TrainingPair]) -> "SiameseSimilarity":
        X, y = pairs_to_tensors(pairs, self.uniform_side)
        return self.fit(X, y)

    def predict(self, X: np.ndarray) -> np.ndarray:
        self._check_fitted()
        X = np.asarray(X, dtype=np.float64)
        p, _ = forward_similarity_batch(self.params_, X[:, 0], X[:, 1])
        return np.clip(p, self.clip_eps, 1.0 - self.clip_eps)

    def predict_similarity(self, a: PMSImage, b: PMSImage) -> float:
        self._check_fitted()
        side = self.params_.input_side
        x = np.stack([np.stack([resize_uniform(a, side), resize_uniform(b, side)])])
        return float(self.predict(x)[0])

    def _check_fitted(self) -> None:
        if not hasattr(self, "params_"):
            raise DataError("model is not fitted; call fit() or load_params() first")

    # -- persistence --------------------------------------------------------

    def save(self, path: str | Path) -> None:
        self._check_fitted()
        save_params(self.params_, path)

    @classmethod
    def load(cls, path: str | Path) -> "SiameseSimilarity":
        params = load_params(path)
        model = cls(
            arch=params.arch,
            uniform_side=params.input_side,
            head_hidden=params.head_hidden,
            seed=params.seed,
        )
        model.params_ = params
        model.loss_history_ = []
        return model


# ---------------------------------------------------------------------------
# Persistence (fixed binary layout for byte-identical reruns)

_MAGIC = b"PMSNET01"


def save_params(params: NetworkParams, path: str | Path) -> None:
    header = {
        "arch": params.arch,
        "input_side": params.input_side,
        "head_hidden": params.head_hidden,
        "seed": params.seed,
        "arrays": [
            {"name": k, "shape": list(v.shape)} for k, v in params.values.items()
        ],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for v in params.values.values():
            fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def load_params(path: str | Path) -> NetworkParams:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise SchemaError(f"{path} is not a model parameter file")
        (header_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(header_len).decode("utf-8"))
        values: dict[str, np.ndarray] = {}
        for spec in header["arrays"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise SchemaError(f"{path} is truncated")
            values[spec["name"]] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    return NetworkParams(
        header["arch"], header["input_side"], header["head_hidden"], header["seed"], values
    )


# ---------------------------------------------------------------------------
# Gradient verification


def grad_check(
    params: NetworkParams,
    a: np.ndarray,
    b: np.ndarray,
    label: float = 1.0,
    step: float = 1e-4,
) -> dict[str, float]:
    """Relative error between analytic and central-finite-difference
    gradients, per parameter block plus an overall ``max``."""
    a = a[None] if a.ndim == 3 else a
    b = b[None] if b.ndim == 3 else b
    y = np.full(a.shape[0], label, dtype=np.float64)

    p, cache = forward_similarity_batch(params, a, b)
    analytic = backward_similarity_batch(params, p, y, cache)

    def loss_at() -> float:
        probe, _ = forward_similarity_batch(params, a, b)
        return bce_loss(probe, y)

    report: dict[str, float] = {}
    worst = 0.0
    for key, array in params.values.items():
        fd = np.zeros_like(array)
        flat = array.reshape(-1)
        fd_flat = fd.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            hi = loss_at()
            flat[i] = orig - step
            lo = loss_at()
            flat[i] = orig
            fd_flat[i] = (hi - lo) / (2 * step)
        ga = analytic[key]
        denom = np.linalg.norm(ga) + np.linalg.norm(fd) + 1e-12
        rel = float(np.linalg.norm(ga - fd) / denom)
        report[key] = rel
        worst = max(worst, rel)
    report["max"] = worst
    return report
