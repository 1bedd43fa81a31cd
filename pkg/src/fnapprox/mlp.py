"""Dense feed-forward regressor with analytic backpropagation.

tanh hidden layers, one linear output neuron, Xavier-uniform weights,
zero biases. Parameters live in a single flat float64 vector (layer by
layer, weights row-major then bias) so quasi-Newton curvature pairs are
well-defined; all layer matrices are views into that vector.

A "linear" activation mode exists so tests can hand-compute losses and
gradients on one-neuron toys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .benchmarks import format_float
from .rng import Prng

DEFAULT_HIDDEN = (100, 100, 50, 50)
ADJUSTED_HIDDEN = (102, 102, 52, 52)


@dataclass(frozen=True)
class MlpArchitecture:
    input_dim: int
    hidden_widths: tuple[int, ...] = DEFAULT_HIDDEN
    activation: str = "tanh"

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValueError("input_dim must be at least 1")
        if len(self.hidden_widths) == 0:
            raise ValueError("at least one hidden layer is required")
        if any(w < 1 for w in self.hidden_widths):
            raise ValueError("hidden widths must be positive")
        if self.activation not in ("tanh", "linear"):
            raise ValueError(f"unsupported activation {self.activation!r}")
        object.__setattr__(self, "hidden_widths", tuple(self.hidden_widths))

    @property
    def layer_dims(self) -> tuple[tuple[int, int], ...]:
        """(fan_in, fan_out) per layer, output layer included."""
        widths = (self.input_dim, *self.hidden_widths, 1)
        return tuple(zip(widths[:-1], widths[1:]))


def param_count(arch: MlpArchitecture) -> int:
    """Total parameters: fan_in*fan_out weights + fan_out biases per layer."""
    return sum(fi * fo + fo for fi, fo in arch.layer_dims)


@lru_cache(maxsize=None)
def _layout(arch: MlpArchitecture):
    """Flat-vector offsets of each layer's weight block and bias block."""
    spans = []
    offset = 0
    for fi, fo in arch.layer_dims:
        w_end = offset + fi * fo
        b_end = w_end + fo
        spans.append((offset, w_end, b_end, fo, fi))
        offset = b_end
    return tuple(spans)


def unpack(arch: MlpArchitecture, params: np.ndarray):
    """Per-layer (W, b) views into the flat parameter vector."""
    layers = []
    for w_start, w_end, b_end, fo, fi in _layout(arch):
        layers.append((params[w_start:w_end].reshape(fo, fi), params[w_end:b_end]))
    return layers


@dataclass
class MlpModel:
    arch: MlpArchitecture
    params: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=np.float64)
        expected = param_count(self.arch)
        if self.params.shape != (expected,):
            raise ValueError(
                f"parameter vector has {self.params.shape}, expected ({expected},)"
            )


def init_xavier(arch: MlpArchitecture, prng: Prng) -> MlpModel:
    """Weights uniform in +/-sqrt(6/(fan_in+fan_out)); biases zero.

    Weights are drawn layer by layer in row-major order, so a given seed
    fixes the model exactly.
    """
    params = np.zeros(param_count(arch))
    for (w_start, w_end, _b_end, fo, fi) in _layout(arch):
        limit = np.sqrt(6.0 / (fi + fo))
        block = params[w_start:w_end]
        for i in range(fi * fo):
            block[i] = prng.uniform(-limit, limit)
    return MlpModel(arch=arch, params=params)


def _forward_hidden(arch: MlpArchitecture, layers, X: np.ndarray):
    """Activations after each hidden layer (input batch excluded)."""
    acts = []
    h = X
    for W, b in layers[:-1]:
        z = h @ W.T + b
        h = np.tanh(z) if arch.activation == "tanh" else z
        acts.append(h)
    return acts


def forward_batch(model: MlpModel, X: np.ndarray) -> np.ndarray:
    """Network outputs for a batch of rows."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.arch.input_dim:
        raise ValueError(
            f"input batch must be (n, {model.arch.input_dim}), got {X.shape}"
        )
    layers = unpack(model.arch, model.params)
    acts = _forward_hidden(model.arch, layers, X)
    W_out, b_out = layers[-1]
    return (acts[-1] @ W_out.T + b_out)[:, 0]


def forward(model: MlpModel, inputs) -> float:
    """Scalar network output for a single input vector."""
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.arch.input_dim:
        raise ValueError(f"input must have length {model.arch.input_dim}")
    return float(forward_batch(model, x[np.newaxis, :])[0])


def _backprop(arch: MlpArchitecture, params: np.ndarray, X: np.ndarray,
              Y: np.ndarray):
    """MSE and its exact gradient, computed in the dtype of the inputs.

    params, X and Y must share a dtype; every intermediate stays in that
    dtype, so a float32 call reproduces single-precision training
    arithmetic exactly.
    """
    n = X.shape[0]
    layers = unpack(arch, params)
    acts = _forward_hidden(arch, layers, X)
    W_out, b_out = layers[-1]
    pred = (acts[-1] @ W_out.T + b_out)[:, 0]

    resid = pred - Y
    mse = float(np.dot(resid, resid) / n)

    grad = np.zeros_like(params)
    g_layers = unpack(arch, grad)

    # linear output layer
    d = (2.0 / n) * resid[:, np.newaxis]          # (n, 1)
    gW, gb = g_layers[-1]
    gW[:] = d.T @ acts[-1]
    gb[:] = d.sum(axis=0)
    d = d @ W_out                                  # (n, last hidden width)

    hidden = [X, *acts]
    for li in range(len(layers) - 2, -1, -1):
        h = hidden[li + 1]
        if arch.activation == "tanh":
            d = d * (1.0 - h * h)
        gW, gb = g_layers[li]
        gW[:] = d.T @ hidden[li]
        gb[:] = d.sum(axis=0)
        if li > 0:
            d = d @ layers[li][0]
    return mse, grad


def loss_and_grad(model: MlpModel, X: np.ndarray, Y: np.ndarray):
    """Mean squared error over the batch and its exact parameter gradient.

    The gradient shares the flat layout of model.params. All arithmetic
    is 64-bit.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    arch = model.arch
    if X.ndim != 2 or X.shape[1] != arch.input_dim:
        raise ValueError(f"design matrix must be (n, {arch.input_dim}), got {X.shape}")
    if Y.shape != (X.shape[0],):
        raise ValueError(f"targets must be ({X.shape[0]},), got {Y.shape}")
    if X.shape[0] < 1:
        raise ValueError("need at least one sample")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise ValueError("inputs and targets must be finite")
    return _backprop(arch, model.params, X, Y)


def make_objective(arch: MlpArchitecture, X: np.ndarray, Y: np.ndarray,
                   dtype=np.float64):
    """(value, gradient) oracle over the flat float64 parameter vector.

    dtype selects the arithmetic used inside the objective; the returned
    gradient is always float64 so the caller's optimizer state stays in
    double precision.
    """
    dtype = np.dtype(dtype)
    if dtype not in (np.dtype(np.float64), np.dtype(np.float32)):
        raise ValueError(f"unsupported objective dtype {dtype}")
    X = np.ascontiguousarray(X, dtype=dtype)
    Y = np.ascontiguousarray(Y, dtype=dtype)

    if dtype == np.float64:
        def objective(params: np.ndarray):
            return loss_and_grad(MlpModel(arch=arch, params=params), X, Y)
        return objective

    def objective(params: np.ndarray):
        if params.dtype != dtype:
            params = params.astype(dtype)
        return _backprop(arch, params, X, Y)

    return objective


def permute_hidden_neurons(model: MlpModel, layer: int, permutation) -> MlpModel:
    """Relabel one hidden layer's neurons; the network function is unchanged.

    Rows of that layer's weights and its biases move together with the
    matching columns of the next layer's weights.
    """
    n_hidden = len(model.arch.hidden_widths)
    if not 0 <= layer < n_hidden:
        raise ValueError(f"layer index {layer} out of range [0, {n_hidden})")
    width = model.arch.hidden_widths[layer]
    perm = np.asarray(permutation, dtype=np.intp)
    if perm.shape != (width,) or not np.array_equal(np.sort(perm), np.arange(width)):
        raise ValueError(f"permutation must be a bijection on {width} neurons")

    new = MlpModel(arch=model.arch, params=model.params.copy())
    layers = unpack(new.arch, new.params)
    W, b = layers[layer]
    W[:] = W[perm, :]
    b[:] = b[perm]
    W_next, _ = layers[layer + 1]
    W_next[:] = W_next[:, perm]
    return new


def save_checkpoint(model: MlpModel, path: str | Path, meta: dict | None = None) -> None:
    """JSON checkpoint: architecture + metadata header, then the flat
    parameter array as 17-significant-digit decimals (exact round-trip)."""
    header = {
        "architecture": {
            "input_dim": model.arch.input_dim,
            "hidden_widths": list(model.arch.hidden_widths),
            "activation": model.arch.activation,
        },
        **(meta or {}),
    }
    body = json.dumps(header, sort_keys=True)
    values = ",".join(format_float(v) for v in model.params)
    with open(path, "w") as fh:
        fh.write(body[:-1] + ', "params": [' + values + "]}\n")


def load_checkpoint(path: str | Path) -> tuple[MlpModel, dict]:
    with open(path) as fh:
        data = json.load(fh)
    arch_data = data.pop("architecture")
    params = np.asarray(data.pop("params"), dtype=np.float64)
    arch = MlpArchitecture(
        input_dim=arch_data["input_dim"],
        hidden_widths=tuple(arch_data["hidden_widths"]),
        activation=arch_data.get("activation", "tanh"),
    )
    return MlpModel(arch=arch, params=params), data
