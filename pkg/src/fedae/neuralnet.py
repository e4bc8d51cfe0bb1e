"""Minimal dense autoencoder engine.

Mirrored fully-connected autoencoders with ReLU hidden layers and a linear
output, trained by mini-batch Adam on mean squared reconstruction error.
Everything runs in float64 on plain numpy arrays and every operation is a
deterministic function of its inputs and an explicit seed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

Matrix = np.ndarray

DEFAULT_ENCODER_HIDDEN: tuple[int, ...] = (105, 90, 75, 60)
DEFAULT_BOTTLENECK_DIM = 10

MODEL_MAGIC = b"FEDAE"
MODEL_FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """A serialized model file is malformed or has the wrong magic/version."""


class TrainingDivergedError(RuntimeError):
    """Training hit a non-finite loss value."""


@dataclass
class LayerWeights:
    """One dense layer: ``weight`` is fan_in x fan_out, ``bias`` has fan_out entries."""

    weight: Matrix
    bias: np.ndarray

    @property
    def fan_in(self) -> int:
        return self.weight.shape[0]

    @property
    def fan_out(self) -> int:
        return self.weight.shape[1]

    @property
    def param_count(self) -> int:
        return self.weight.size + self.bias.size

    def copy(self) -> "LayerWeights":
        return LayerWeights(self.weight.copy(), self.bias.copy())


@dataclass(frozen=True)
class AutoencoderSpec:
    """Architecture descriptor.

    The decoder mirrors the encoder, so the full width chain is
    input_dim -> encoder_hidden... -> bottleneck_dim -> reversed(encoder_hidden)... -> input_dim.
    """

    input_dim: int
    encoder_hidden: tuple[int, ...] = DEFAULT_ENCODER_HIDDEN
    bottleneck_dim: int = DEFAULT_BOTTLENECK_DIM
    hidden_activation: str = "relu"
    output_activation: str = "identity"

    def __post_init__(self) -> None:
        object.__setattr__(self, "encoder_hidden", tuple(int(w) for w in self.encoder_hidden))
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be a positive integer, got {self.input_dim}")
        if not self.encoder_hidden:
            raise ValueError("encoder_hidden must be a non-empty list of layer widths")
        for w in self.encoder_hidden:
            if w < 1:
                raise ValueError(f"encoder_hidden widths must be positive, got {w}")
        if self.bottleneck_dim < 1:
            raise ValueError(f"bottleneck_dim must be a positive integer, got {self.bottleneck_dim}")
        if self.hidden_activation != "relu":
            raise ValueError(f"unsupported hidden_activation {self.hidden_activation!r}")
        if self.output_activation != "identity":
            raise ValueError(f"unsupported output_activation {self.output_activation!r}")

    def layer_widths(self) -> list[int]:
        hidden = list(self.encoder_hidden)
        return [self.input_dim] + hidden + [self.bottleneck_dim] + hidden[::-1] + [self.input_dim]


@dataclass
class AutoencoderModel:
    spec: AutoencoderSpec
    layers: list[LayerWeights]
    bottleneck_index: int

    @property
    def input_dim(self) -> int:
        return self.spec.input_dim

    @property
    def param_count(self) -> int:
        return sum(layer.param_count for layer in self.layers)


@dataclass
class OptimizerConfig:
    """Adam hyperparameters and mini-batch size."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0 < self.beta1 < 1:
            raise ValueError(f"beta1 must lie in (0, 1), got {self.beta1}")
        if not 0 < self.beta2 < 1:
            raise ValueError(f"beta2 must lie in (0, 1), got {self.beta2}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class TrainingReport:
    epoch_losses: list[float]
    epochs_run: int
    samples_seen: int


def build_autoencoder(spec: AutoencoderSpec, seed: int) -> AutoencoderModel:
    """Construct a model with seeded uniform +/-sqrt(6/(fan_in+fan_out)) weights and zero biases."""
    rng = np.random.default_rng(seed)
    widths = spec.layer_widths()
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weight = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        layers.append(LayerWeights(weight, np.zeros(fan_out)))
    return AutoencoderModel(spec=spec, layers=layers, bottleneck_index=len(spec.encoder_hidden))


def _check_batch(model: AutoencoderModel, batch: Matrix) -> Matrix:
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2:
        raise ValueError(f"batch must be a 2-D matrix, got {batch.ndim} dimensions")
    if batch.shape[1] != model.input_dim:
        raise ValueError(
            f"batch has {batch.shape[1]} columns, model expects {model.input_dim}"
        )
    return batch


def _forward_pass(model: AutoencoderModel, batch: Matrix) -> tuple[list[Matrix], list[Matrix]]:
    """Returns (pre_activations, activations); activations[0] is the input batch."""
    last = len(model.layers) - 1
    pre_acts: list[Matrix] = []
    acts: list[Matrix] = [batch]
    out = batch
    for i, layer in enumerate(model.layers):
        z = out @ layer.weight + layer.bias
        pre_acts.append(z)
        out = z if i == last else np.maximum(z, 0.0)
        acts.append(out)
    return pre_acts, acts


def activations(model: AutoencoderModel, batch: Matrix) -> list[Matrix]:
    """Post-activation output of every layer, in order, for one forward pass."""
    batch = _check_batch(model, batch)
    return _forward_pass(model, batch)[1][1:]


def forward(model: AutoencoderModel, batch: Matrix) -> Matrix:
    """Reconstruct a batch: ReLU hidden layers, identity output layer."""
    batch = _check_batch(model, batch)
    return _forward_pass(model, batch)[1][-1]


def encode(model: AutoencoderModel, batch: Matrix) -> Matrix:
    """Latent codes: the activation output of the bottleneck layer."""
    batch = _check_batch(model, batch)
    pre_acts, acts = _forward_pass(model, batch)
    return acts[model.bottleneck_index + 1]


def mse_loss(x: Matrix, x_hat: Matrix) -> float:
    """Mean squared error over all elements: (1/n) * sum((x - x_hat)^2)."""
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {x_hat.shape}")
    diff = x - x_hat
    return float(np.mean(diff * diff))


def mse_gradients(model: AutoencoderModel, batch: Matrix) -> tuple[float, list[LayerWeights]]:
    """Loss and analytic parameter gradients for self-reconstruction of ``batch``.

    Gradients come back as LayerWeights carriers shaped like the model's layers.
    """
    batch = _check_batch(model, batch)
    pre_acts, acts = _forward_pass(model, batch)
    recon = acts[-1]
    diff = recon - batch
    loss = float(np.mean(diff * diff))

    grads: list[LayerWeights | None] = [None] * len(model.layers)
    # identity output layer: dL/dz = dL/da
    dz = (2.0 / diff.size) * diff
    for i in reversed(range(len(model.layers))):
        grads[i] = LayerWeights(acts[i].T @ dz, dz.sum(axis=0))
        if i > 0:
            da = dz @ model.layers[i].weight.T
            dz = da * (pre_acts[i - 1] > 0.0)
    return loss, grads  # type: ignore[return-value]


def adam_step(
    value: np.ndarray,
    grad: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    step: int,
    opt: OptimizerConfig,
) -> None:
    """One bias-corrected Adam update, in place. ``step`` counts from 1."""
    m *= opt.beta1
    m += (1.0 - opt.beta1) * grad
    v *= opt.beta2
    v += (1.0 - opt.beta2) * grad * grad
    m_hat = m / (1.0 - opt.beta1**step)
    v_hat = v / (1.0 - opt.beta2**step)
    value -= opt.learning_rate * m_hat / (np.sqrt(v_hat) + opt.epsilon)


def train(
    model: AutoencoderModel,
    data: Matrix,
    epochs: int,
    opt: OptimizerConfig,
    seed: int,
) -> TrainingReport:
    """Mini-batch Adam on self-reconstruction MSE; mutates the model in place.

    Batch order is reshuffled every epoch from ``seed``. Adam moment state is
    fresh for this call and persists across its batches only; a later call
    starts over (spliced-in weights would invalidate stale moments). The last
    short batch is trained as-is, its gradient already averaged over the
    actual element count.
    """
    data = _check_batch(model, data)
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    n_rows = data.shape[0]
    if n_rows == 0:
        raise ValueError("training data is empty")

    rng = np.random.default_rng(seed)
    m_state = [LayerWeights(np.zeros_like(l.weight), np.zeros_like(l.bias)) for l in model.layers]
    v_state = [LayerWeights(np.zeros_like(l.weight), np.zeros_like(l.bias)) for l in model.layers]

    step = 0
    epoch_losses: list[float] = []
    for epoch in range(epochs):
        order = rng.permutation(n_rows)
        sq_err_sum = 0.0
        elements = 0
        for start in range(0, n_rows, opt.batch_size):
            batch = data[order[start : start + opt.batch_size]]
            loss, grads = mse_gradients(model, batch)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {start // opt.batch_size}"
                )
            sq_err_sum += loss * batch.size
            elements += batch.size
            step += 1
            for layer, grad, m, v in zip(model.layers, grads, m_state, v_state):
                adam_step(layer.weight, grad.weight, m.weight, v.weight, step, opt)
                adam_step(layer.bias, grad.bias, m.bias, v.bias, step, opt)
        epoch_losses.append(sq_err_sum / elements)
    return TrainingReport(epoch_losses=epoch_losses, epochs_run=epochs, samples_seen=epochs * n_rows)


def export_layers(model: AutoencoderModel) -> list[LayerWeights]:
    """Deep copies of all layer parameters; later training leaves them untouched."""
    return [layer.copy() for layer in model.layers]


def import_layers(model: AutoencoderModel, layers: Sequence[LayerWeights]) -> None:
    """Replace all model parameters; shapes must match the existing layout exactly."""
    if len(layers) != len(model.layers):
        raise ValueError(f"expected {len(model.layers)} layers, got {len(layers)}")
    for i, (current, new) in enumerate(zip(model.layers, layers)):
        if new.weight.shape != current.weight.shape or new.bias.shape != current.bias.shape:
            raise ValueError(
                f"shape mismatch at layer {i}: expected {current.weight.shape}/{current.bias.shape}, "
                f"got {new.weight.shape}/{new.bias.shape}"
            )
    model.layers = [layer.copy() for layer in layers]


def save_model(model: AutoencoderModel, path) -> None:
    """Write the versioned binary container (bit-exact round-trip with load_model)."""
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<II", MODEL_FORMAT_VERSION, len(model.layers)))
        for layer in model.layers:
            fh.write(struct.pack("<II", layer.fan_in, layer.fan_out))
            fh.write(np.ascontiguousarray(layer.weight, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(layer.bias, dtype="<f8").tobytes())


def load_model(path) -> AutoencoderModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise ModelFormatError("bad magic: not a model container")
    offset = len(MODEL_MAGIC)
    try:
        version, n_layers = struct.unpack_from("<II", blob, offset)
    except struct.error as exc:
        raise ModelFormatError("truncated header") from exc
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format version {version}")
    offset += 8

    layers: list[LayerWeights] = []
    for i in range(n_layers):
        try:
            fan_in, fan_out = struct.unpack_from("<II", blob, offset)
        except struct.error as exc:
            raise ModelFormatError(f"truncated at layer {i} header") from exc
        offset += 8
        need = 8 * (fan_in * fan_out + fan_out)
        if offset + need > len(blob):
            raise ModelFormatError(f"truncated at layer {i} parameters")
        weight = np.frombuffer(blob, dtype="<f8", count=fan_in * fan_out, offset=offset)
        offset += 8 * fan_in * fan_out
        bias = np.frombuffer(blob, dtype="<f8", count=fan_out, offset=offset)
        offset += 8 * fan_out
        layers.append(
            LayerWeights(weight.reshape(fan_in, fan_out).astype(np.float64), bias.astype(np.float64))
        )
    if offset != len(blob):
        raise ModelFormatError("trailing bytes after last layer")

    widths = _widths_from_layers(layers)
    n_hidden = len(layers) // 2 - 1
    spec = AutoencoderSpec(
        input_dim=widths[0],
        encoder_hidden=tuple(widths[1 : 1 + n_hidden]),
        bottleneck_dim=widths[1 + n_hidden],
    )
    return AutoencoderModel(spec=spec, layers=layers, bottleneck_index=n_hidden)


def _widths_from_layers(layers: list[LayerWeights]) -> list[int]:
    if len(layers) < 4 or len(layers) % 2 != 0:
        raise ModelFormatError(f"layer count {len(layers)} is not a mirrored autoencoder chain")
    for i, layer in enumerate(layers):
        if layer.fan_in < 1 or layer.fan_out < 1:
            raise ModelFormatError(f"layer {i} has a zero-width dimension")
    widths = [layers[0].fan_in]
    for i, layer in enumerate(layers):
        if layer.fan_in != widths[-1]:
            raise ModelFormatError(f"layer {i} fan_in {layer.fan_in} breaks the width chain")
        widths.append(layer.fan_out)
    if widths != widths[::-1]:
        raise ModelFormatError("width chain is not mirrored around the bottleneck")
    return widths
