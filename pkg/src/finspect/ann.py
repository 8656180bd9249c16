"""Feed-forward sigmoid network trained by batch gradient descent.

The output layer is sigmoid (not softmax); the loss is the mean binary
cross-entropy summed over output units, so the output delta reduces to
(o - y) exactly and the hidden deltas carry the o(1-o) factor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import LabeledSet
from .errors import ParameterError, ShapeError, TrainingDivergedError

_CLAMP = 1e-12


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class TrainConfig:
    hidden: int = 16
    learning_rate: float = 0.5
    epochs: int = 200
    rng_seed: int = 0
    init_scale: float = 0.5

    def validate(self):
        if self.epochs < 1:
            raise ParameterError("epochs must be >= 1")
        if self.hidden < 1:
            raise ParameterError("hidden must be >= 1")
        if self.learning_rate <= 0:
            raise ParameterError("learning_rate must be positive")


@dataclass(frozen=True)
class MlpModel:
    """Layer sizes (p, ..., k) with W_l of shape (n_l, n_{l-1})."""

    layers: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    loss_trace: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if len(self.layers) < 2:
            raise ShapeError("need at least input and output layers")
        if len(self.weights) != len(self.layers) - 1 or len(self.biases) != len(self.layers) - 1:
            raise ShapeError("one weight matrix and bias vector per non-input layer")
        ws, bs = [], []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            w = np.asarray(w, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64)
            if w.shape != (self.layers[i + 1], self.layers[i]) or b.shape != (self.layers[i + 1],):
                raise ShapeError(f"layer {i + 1} parameter shapes do not match layer sizes")
            w.setflags(write=False)
            b.setflags(write=False)
            ws.append(w)
            bs.append(b)
        object.__setattr__(self, "weights", tuple(ws))
        object.__setattr__(self, "biases", tuple(bs))


def feedforward(model: MlpModel, inputs: np.ndarray) -> list[np.ndarray]:
    """Activations per layer, input batch first. inputs is (n, p) or (p,)."""
    x = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    if x.shape[1] != model.layers[0]:
        raise ShapeError(f"expected {model.layers[0]} inputs, got {x.shape[1]}")
    acts = [x]
    for w, b in zip(model.weights, model.biases):
        x = sigmoid(x @ w.T + b)
        acts.append(x)
    return acts


def cross_entropy(outputs, targets) -> float:
    o = np.clip(np.atleast_2d(np.asarray(outputs, dtype=np.float64)), _CLAMP, 1.0 - _CLAMP)
    y = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if o.shape != y.shape:
        raise ShapeError("outputs and targets must have the same shape")
    return float(-np.sum(y * np.log(o) + (1.0 - y) * np.log(1.0 - o)) / o.shape[0])


def backprop(model: MlpModel, inputs, targets):
    """Mean-over-batch gradients of the cross-entropy loss.

    Returns (grads_w, grads_b) shaped like model.weights / model.biases.
    """
    y = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    acts = feedforward(model, inputs)
    if acts[-1].shape != y.shape:
        raise ShapeError("targets must be (n, k) matching the output layer")
    n = y.shape[0]
    delta = acts[-1] - y
    grads_w, grads_b = [], []
    for layer in range(len(model.weights) - 1, -1, -1):
        grads_w.append(delta.T @ acts[layer] / n)
        grads_b.append(delta.mean(axis=0))
        if layer > 0:
            o = acts[layer]
            delta = (delta @ model.weights[layer]) * o * (1.0 - o)
    grads_w.reverse()
    grads_b.reverse()
    return grads_w, grads_b


def sgd_step(model: MlpModel, grads_w, grads_b, learning_rate: float) -> MlpModel:
    ws = tuple(w - learning_rate * g for w, g in zip(model.weights, grads_w))
    bs = tuple(b - learning_rate * g for b, g in zip(model.biases, grads_b))
    return MlpModel(model.layers, ws, bs, model.loss_trace)


def init_model(layers: tuple[int, ...], rng: np.random.Generator, init_scale: float) -> MlpModel:
    ws, bs = [], []
    for i in range(len(layers) - 1):
        ws.append(rng.uniform(-init_scale, init_scale, size=(layers[i + 1], layers[i])))
        bs.append(rng.uniform(-init_scale, init_scale, size=layers[i + 1]))
    return MlpModel(tuple(layers), tuple(ws), tuple(bs))


def train(data: LabeledSet, config: TrainConfig | None = None) -> MlpModel:
    config = config or TrainConfig()
    config.validate()
    rng = np.random.default_rng(config.rng_seed)
    layers = (data.inputs.shape[1], config.hidden, data.n_classes)
    model = init_model(layers, rng, config.init_scale)
    trace = []
    for epoch in range(config.epochs):
        grads_w, grads_b = backprop(model, data.inputs, data.targets)
        model = sgd_step(model, grads_w, grads_b, config.learning_rate)
        loss = cross_entropy(feedforward(model, data.inputs)[-1], data.targets)
        params_ok = all(np.isfinite(p).all() for p in model.weights + model.biases)
        if not np.isfinite(loss) or not params_ok:
            raise TrainingDivergedError(epoch)
        trace.append(loss)
    return MlpModel(model.layers, model.weights, model.biases, tuple(trace))


def predict_proba(model: MlpModel, inputs) -> np.ndarray:
    out = feedforward(model, inputs)[-1]
    total = out.sum(axis=1, keepdims=True)
    uniform = np.full_like(out, 1.0 / out.shape[1])
    with np.errstate(invalid="ignore", divide="ignore"):
        proba = np.where(total > 0, out / np.where(total > 0, total, 1.0), uniform)
    return proba


def predict(model: MlpModel, inputs) -> np.ndarray:
    return np.argmax(predict_proba(model, inputs), axis=1)


def save_model(model: MlpModel, path: str | Path, config: TrainConfig | None = None) -> None:
    doc = {
        "layers": list(model.layers),
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "loss_trace": list(model.loss_trace),
        "config": None if config is None else {
            "hidden": config.hidden,
            "learning_rate": config.learning_rate,
            "epochs": config.epochs,
            "rng_seed": config.rng_seed,
            "init_scale": config.init_scale,
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_model(path: str | Path) -> MlpModel:
    doc = json.loads(Path(path).read_text())
    return MlpModel(
        tuple(doc["layers"]),
        tuple(np.asarray(w) for w in doc["weights"]),
        tuple(np.asarray(b) for b in doc["biases"]),
        tuple(doc.get("loss_trace", ())),
    )
