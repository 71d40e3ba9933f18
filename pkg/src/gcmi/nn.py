"""Dense feed-forward networks with manual backprop and Adam + L2.

Small float64 numpy networks sized for per-column conditional generators
and discriminators on tabular data: ReLU hidden layers, a configurable
output head, no autograd and no GPU.  An ``Mlp`` together with its
``AdamState`` is a single-owner mutable unit; independent networks may be
trained in parallel but one network is never mutated concurrently.

Checkpoint layout (``save_mlp``/``load_mlp``): JSON object with keys
``format`` ("gcmi-mlp"), ``version`` (1), ``input_dim``, ``hidden_dims``,
``output_dim``, ``output_activation`` and ``layers``, a list of
``{"weights": [...], "biases": [...]}`` with weights flattened row-major
from the (in_dim, out_dim) matrix of each layer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NumericError, ShapeError
from .seeding import canonical_seed

OUTPUT_ACTIVATIONS = ("identity", "sigmoid", "scaled_sigmoid_0_2")

# Sigmoid outputs are clamped into the open interval so that logarithms and
# the (0, 2) discriminator range stay well-defined at float saturation.
_SIGMOID_CLIP = 1e-12

CHECKPOINT_FORMAT = "gcmi-mlp"
CHECKPOINT_VERSION = 1


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return np.clip(out, _SIGMOID_CLIP, 1.0 - _SIGMOID_CLIP)


@dataclass
class Mlp:
    """Feed-forward net: ReLU hidden layers, configurable output head.

    ``weights[i]`` has shape (in_i, out_i) and ``biases[i]`` shape (out_i,);
    consecutive layer dimensions chain.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    output_activation: str

    def __post_init__(self):
        if not self.weights or len(self.weights) != len(self.biases):
            raise ShapeError("need one bias vector per weight matrix")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ShapeError(f"layer {i}: weights {w.shape} and biases {b.shape} disagree")
            if i > 0 and self.weights[i - 1].shape[1] != w.shape[0]:
                raise ShapeError(f"layer {i - 1} output does not chain into layer {i} input")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise NumericError(f"layer {i}: non-finite parameters")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output_activation {self.output_activation!r}")

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def hidden_dims(self) -> list[int]:
        return [w.shape[1] for w in self.weights[:-1]]

    def copy(self) -> "Mlp":
        return Mlp(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.output_activation,
        )


@dataclass
class ParamGrads:
    """Per-layer gradients, shape-congruent with the owning Mlp."""

    d_weights: list[np.ndarray]
    d_biases: list[np.ndarray]

    def accumulate(self, other: "ParamGrads") -> "ParamGrads":
        for dw, ow in zip(self.d_weights, other.d_weights):
            dw += ow
        for db, ob in zip(self.d_biases, other.d_biases):
            db += ob
        return self


@dataclass
class AdamState:
    """Bias-corrected Adam moments plus hyperparameters for one Mlp."""

    m_weights: list[np.ndarray]
    v_weights: list[np.ndarray]
    m_biases: list[np.ndarray]
    v_biases: list[np.ndarray]
    learning_rate: float
    l2_coeff: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0


def mlp_new(
    input_dim: int,
    hidden_dims: list[int],
    output_dim: int,
    output_activation: str = "identity",
    seed: int = 0,
) -> Mlp:
    """Build a network with He-initialised weights (variance 2/fan_in).

    Deterministic given ``seed``; biases start at zero.
    """
    dims = [input_dim, *hidden_dims, output_dim]
    if not hidden_dims:
        raise ValueError("hidden_dims must be non-empty")
    for d in dims:
        if not isinstance(d, (int, np.integer)) or d <= 0:
            raise ValueError(f"all layer dimensions must be positive integers, got {d}")
    if output_activation not in OUTPUT_ACTIVATIONS:
        raise ValueError(
            f"unknown output_activation {output_activation!r}; expected one of {OUTPUT_ACTIVATIONS}"
        )
    rng = np.random.default_rng(canonical_seed(seed))
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        scale = np.sqrt(2.0 / fan_in)
        weights.append(rng.standard_normal((fan_in, fan_out)) * scale)
        biases.append(np.zeros(fan_out))
    return Mlp(weights, biases, output_activation)


def _check_inputs(mlp: Mlp, inputs: np.ndarray) -> np.ndarray:
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2 or inputs.shape[1] != mlp.input_dim:
        raise ShapeError(
            f"expected inputs of shape (batch, {mlp.input_dim}), got {inputs.shape}"
        )
    return inputs


def _forward_cache(mlp: Mlp, inputs: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Forward pass returning the output and every layer input (post-ReLU)."""
    acts = [inputs]
    a = inputs
    last = len(mlp.weights) - 1
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        z = a @ w
        z += b
        if i < last:
            a = np.maximum(z, 0.0, out=z)
            acts.append(a)
        else:
            a = _apply_output_activation(z, mlp.output_activation)
    return a, acts


def _apply_output_activation(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "identity":
        return z
    if activation == "sigmoid":
        return _sigmoid(z)
    if activation == "scaled_sigmoid_0_2":
        return 2.0 * _sigmoid(z)
    raise ValueError(f"unknown output activation {activation!r}")


def _output_delta(out: np.ndarray, output_grads: np.ndarray, activation: str) -> np.ndarray:
    """Gradient w.r.t. the output layer pre-activation."""
    if activation == "identity":
        return output_grads
    if activation == "sigmoid":
        return output_grads * out * (1.0 - out)
    # scaled: out = 2*sigma, d out/d z = 2*sigma*(1-sigma) = out*(1 - out/2)
    return output_grads * out * (1.0 - 0.5 * out)


def forward(mlp: Mlp, inputs: np.ndarray) -> np.ndarray:
    """Batched forward pass; returns (batch, output_dim)."""
    inputs = _check_inputs(mlp, inputs)
    out, _ = _forward_cache(mlp, inputs)
    return out


def _backward_from_cache(
    mlp: Mlp,
    acts: list[np.ndarray],
    out: np.ndarray,
    output_grads: np.ndarray,
) -> tuple[ParamGrads, np.ndarray]:
    delta = _output_delta(out, output_grads, mlp.output_activation)
    n_layers = len(mlp.weights)
    d_weights: list[np.ndarray] = [np.empty(0)] * n_layers
    d_biases: list[np.ndarray] = [np.empty(0)] * n_layers
    for i in range(n_layers - 1, -1, -1):
        d_weights[i] = acts[i].T @ delta
        d_biases[i] = delta.sum(axis=0)
        delta = delta @ mlp.weights[i].T
        if i > 0:
            delta *= acts[i] > 0
    return ParamGrads(d_weights, d_biases), delta


def backward(mlp: Mlp, inputs: np.ndarray, output_grads: np.ndarray) -> ParamGrads:
    """Gradients of sum(outputs * output_grads) w.r.t. every parameter."""
    grads, _ = backward_with_input_grads(mlp, inputs, output_grads)
    return grads


def backward_with_input_grads(
    mlp: Mlp, inputs: np.ndarray, output_grads: np.ndarray
) -> tuple[ParamGrads, np.ndarray]:
    """Like ``backward`` but also returns gradients w.r.t. the inputs.

    The input gradient is what lets a generator receive feedback through a
    frozen discriminator stacked on top of it.
    """
    inputs = _check_inputs(mlp, inputs)
    output_grads = np.asarray(output_grads, dtype=float)
    if output_grads.shape != (inputs.shape[0], mlp.output_dim):
        raise ShapeError(
            f"expected output_grads of shape {(inputs.shape[0], mlp.output_dim)}, "
            f"got {output_grads.shape}"
        )
    out, acts = _forward_cache(mlp, inputs)
    return _backward_from_cache(mlp, acts, out, output_grads)


def adam_new(
    mlp: Mlp,
    learning_rate: float,
    l2_coeff: float = 0.0,
    beta1: float = 0.9,
    beta2: float = 0.999,
    epsilon: float = 1e-8,
) -> AdamState:
    """Zero-initialised Adam state shaped like ``mlp``."""
    if learning_rate <= 0:
        raise ValueError("learning_rate must be positive")
    if not (0.0 < beta1 < 1.0 and 0.0 < beta2 < 1.0):
        raise ValueError("beta1 and beta2 must lie in (0, 1)")
    if l2_coeff < 0:
        raise ValueError("l2_coeff must be non-negative")
    return AdamState(
        m_weights=[np.zeros_like(w) for w in mlp.weights],
        v_weights=[np.zeros_like(w) for w in mlp.weights],
        m_biases=[np.zeros_like(b) for b in mlp.biases],
        v_biases=[np.zeros_like(b) for b in mlp.biases],
        learning_rate=learning_rate,
        l2_coeff=l2_coeff,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
    )


def adam_step(mlp: Mlp, grads: ParamGrads, state: AdamState) -> tuple[Mlp, AdamState]:
    """One bias-corrected Adam update on grad + l2_coeff * param, in place."""
    if len(grads.d_weights) != len(mlp.weights):
        raise ShapeError("gradient layer count does not match network")
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    lr, eps, l2 = state.learning_rate, state.epsilon, state.l2_coeff
    for i in range(len(mlp.weights)):
        for param, grad, m, v in (
            (mlp.weights[i], grads.d_weights[i], state.m_weights[i], state.v_weights[i]),
            (mlp.biases[i], grads.d_biases[i], state.m_biases[i], state.v_biases[i]),
        ):
            if grad.shape != param.shape:
                raise ShapeError(
                    f"layer {i}: gradient shape {grad.shape} != parameter shape {param.shape}"
                )
            if not np.all(np.isfinite(grad)):
                raise NumericError(f"non-finite gradient in layer {i}")
            g = grad + l2 * param if l2 else grad
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * np.square(g)
            param -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return mlp, state


def save_mlp(mlp: Mlp, path: str | Path) -> None:
    """Write the checkpoint JSON described in the module docstring."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "input_dim": mlp.input_dim,
        "hidden_dims": mlp.hidden_dims,
        "output_dim": mlp.output_dim,
        "output_activation": mlp.output_activation,
        "layers": [
            {"weights": w.ravel().tolist(), "biases": b.tolist()}
            for w, b in zip(mlp.weights, mlp.biases)
        ],
    }
    Path(path).write_text(json.dumps(payload))


def load_mlp(path: str | Path) -> Mlp:
    """Load a checkpoint written by ``save_mlp``, validating the layout."""
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != CHECKPOINT_FORMAT or payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"not a {CHECKPOINT_FORMAT} v{CHECKPOINT_VERSION} checkpoint: {path}")
    dims = [payload["input_dim"], *payload["hidden_dims"], payload["output_dim"]]
    weights, biases = [], []
    for (fan_in, fan_out), layer in zip(zip(dims[:-1], dims[1:]), payload["layers"]):
        w = np.asarray(layer["weights"], dtype=float).reshape(fan_in, fan_out)
        b = np.asarray(layer["biases"], dtype=float)
        if b.shape != (fan_out,):
            raise ValueError(f"checkpoint bias shape {b.shape} != ({fan_out},)")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise NumericError("checkpoint contains non-finite parameters")
        weights.append(w)
        biases.append(b)
    if len(weights) != len(dims) - 1:
        raise ValueError("checkpoint layer count does not match dims")
    return Mlp(weights, biases, payload["output_activation"])
