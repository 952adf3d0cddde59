"""Feedforward multilayer perceptron with exact backpropagation gradients.

Plain numpy implementation: affine layers with tanh or logistic hidden
activations and a linear output layer, trained full-batch on mean squared
error.  Parameters can be flattened to a single vector so the optimizers
in :mod:`hifloc.optimizers` treat the network as a generic smooth
function.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import BadTopology, DimensionMismatch, EmptyBatch


def _logistic(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# activation -> (value from pre-activation, derivative from activation output)
ACTIVATIONS = {
    "tanh": (np.tanh, lambda a: 1.0 - a * a),
    "logistic": (_logistic, lambda a: a * (1.0 - a)),
}


@dataclass(frozen=True)
class MlpModel:
    """Network parameters: weights[l] has shape (sizes[l+1], sizes[l])."""

    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    hidden_activation: str = "tanh"

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]


def init_mlp(layer_sizes, hidden_activation: str = "tanh", seed: int = 0) -> MlpModel:
    """Seeded uniform initialisation in [-1/sqrt(fan_in), +1/sqrt(fan_in)].

    Biases start at zero.  Layers are drawn input-to-output so a given
    seed always yields the same parameters.

    Raises
    ------
    BadTopology
        If fewer than one hidden layer is requested, any layer size is
        below 1, or the activation name is unknown.
    """
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 3:
        raise BadTopology("need at least input, one hidden and output layer")
    if any(s < 1 for s in sizes):
        raise BadTopology(f"layer sizes must all be >= 1, got {sizes}")
    if hidden_activation not in ACTIVATIONS:
        raise BadTopology(f"unknown hidden activation {hidden_activation!r}")
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpModel(layer_sizes=sizes, weights=tuple(weights), biases=tuple(biases),
                    hidden_activation=hidden_activation)


def n_params(model: MlpModel) -> int:
    return sum(w.size + b.size for w, b in zip(model.weights, model.biases))


def flatten_params(model: MlpModel) -> np.ndarray:
    parts = []
    for w, b in zip(model.weights, model.biases):
        parts.append(w.ravel())
        parts.append(b)
    return np.concatenate(parts)


def model_with_params(model: MlpModel, flat: np.ndarray) -> MlpModel:
    """Rebuild a model from a flat parameter vector (inverse of flatten)."""
    flat = np.asarray(flat, dtype=float)
    if flat.size != n_params(model):
        raise DimensionMismatch(
            f"expected {n_params(model)} parameters, got {flat.size}")
    weights = []
    biases = []
    pos = 0
    for w, b in zip(model.weights, model.biases):
        weights.append(flat[pos:pos + w.size].reshape(w.shape).copy())
        pos += w.size
        biases.append(flat[pos:pos + b.size].copy())
        pos += b.size
    return replace(model, weights=tuple(weights), biases=tuple(biases))


def _as_batch(x: np.ndarray, width: int, what: str) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != width:
        raise DimensionMismatch(f"{what} must have width {width}, got shape {arr.shape}")
    return arr, single


def _forward_layers(model: MlpModel, x: np.ndarray) -> list[np.ndarray]:
    """Activations of every layer, input included (for backprop reuse)."""
    act, _ = ACTIVATIONS[model.hidden_activation]
    layers = [x]
    a = x
    last = len(model.weights) - 1
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w.T + b
        a = z if l == last else act(z)
        layers.append(a)
    return layers


def mlp_forward(model: MlpModel, x) -> np.ndarray:
    """Network output for a single feature vector or a batch of rows."""
    batch, single = _as_batch(x, model.n_inputs, "input")
    out = _forward_layers(model, batch)[-1]
    return out[0] if single else out


def mlp_loss(model: MlpModel, x: np.ndarray, targets: np.ndarray) -> float:
    """Mean squared error averaged over every output entry of the batch."""
    batch, _ = _as_batch(x, model.n_inputs, "input")
    t, _ = _as_batch(targets, model.n_outputs, "target")
    if len(batch) == 0:
        raise EmptyBatch("cannot evaluate the loss of an empty batch")
    resid = _forward_layers(model, batch)[-1] - t
    return float(np.mean(resid * resid))


def mlp_gradient(model: MlpModel, x: np.ndarray,
                 targets: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Exact full-batch gradient of the mean squared error.

    Returns per-layer weight and bias gradients with the same shapes as
    the model parameters.

    Raises
    ------
    EmptyBatch
        If the batch holds no rows.
    """
    batch, _ = _as_batch(x, model.n_inputs, "input")
    t, _ = _as_batch(targets, model.n_outputs, "target")
    if len(batch) == 0:
        raise EmptyBatch("cannot take a gradient over an empty batch")
    _, deriv = ACTIVATIONS[model.hidden_activation]

    layers = _forward_layers(model, batch)
    m, k = t.shape
    delta = 2.0 * (layers[-1] - t) / (m * k)

    grads_w: list[np.ndarray] = [np.empty(0)] * len(model.weights)
    grads_b: list[np.ndarray] = [np.empty(0)] * len(model.biases)
    for l in range(len(model.weights) - 1, -1, -1):
        grads_w[l] = delta.T @ layers[l]
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ model.weights[l]) * deriv(layers[l])
    return grads_w, grads_b


def loss_and_flat_gradient(model: MlpModel, x: np.ndarray,
                           targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Loss plus the gradient flattened in parameter order."""
    loss = mlp_loss(model, x, targets)
    gw, gb = mlp_gradient(model, x, targets)
    parts = []
    for w, b in zip(gw, gb):
        parts.append(w.ravel())
        parts.append(b)
    return loss, np.concatenate(parts)


def make_objective(model: MlpModel, x: np.ndarray, targets: np.ndarray):
    """(f, grad) closures over the flat parameter vector, for the optimizers."""

    def f(w: np.ndarray) -> float:
        return mlp_loss(model_with_params(model, w), x, targets)

    def grad(w: np.ndarray) -> np.ndarray:
        return loss_and_flat_gradient(model_with_params(model, w), x, targets)[1]

    return f, grad


def model_to_dict(model: MlpModel) -> dict:
    return {
        "layer_sizes": list(model.layer_sizes),
        "hidden_activation": model.hidden_activation,
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
    }


def model_from_dict(data: dict) -> MlpModel:
    sizes = tuple(int(s) for s in data["layer_sizes"])
    weights = tuple(np.asarray(w, dtype=float) for w in data["weights"])
    biases = tuple(np.asarray(b, dtype=float) for b in data["biases"])
    for l, (w, b) in enumerate(zip(weights, biases)):
        if w.shape != (sizes[l + 1], sizes[l]) or b.shape != (sizes[l + 1],):
            raise DimensionMismatch(f"layer {l} parameter shapes do not match sizes")
    return MlpModel(layer_sizes=sizes, weights=weights, biases=biases,
                    hidden_activation=data["hidden_activation"])
