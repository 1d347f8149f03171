"""Capability scorer: model container, prediction, loss and persistence.

The model maps a normalized 3x3 feature matrix to a capability score.
Internally the network regresses the score divided by
``OUTPUT_SCALE`` (which keeps gradients well conditioned); ``predict``
rescales, so callers only ever see score-scale values.
"""

import json
from dataclasses import dataclass

import numpy as np

from poai.errors import ModelFormatError, ValidationError
from poai.features import validate_matrix
from poai.scorer.backend import kernels

OUTPUT_SCALE = 200.0
DEFAULT_L2_LAMBDA = 1e-4

MODEL_FORMAT = "poai-scorer"
MODEL_VERSION = 1

# (name, shape, kind); convolution kernels are (kh, kw, in, out),
# dense weights (in, out). Order is fixed and shared by persistence,
# initialization and the gradient check.
LAYER_SPECS = (
    ("conv1_w", (2, 2, 1, 8), "conv"),
    ("conv1_b", (8,), "bias"),
    ("conv2_w", (2, 2, 8, 16), "conv"),
    ("conv2_b", (16,), "bias"),
    ("conv3_w", (1, 1, 16, 16), "conv"),
    ("conv3_b", (16,), "bias"),
    ("dense1_w", (16, 8), "dense"),
    ("dense1_b", (8,), "bias"),
    ("dense2_w", (8, 1), "dense"),
    ("dense2_b", (1,), "bias"),
)

_CONV_WEIGHTS = ("conv1_w", "conv2_w", "conv3_w")

# Matmul shapes the kernels expect, keyed by weight name.
_KERNEL_SHAPES = {
    "conv1_w": (4, 8),
    "conv2_w": (32, 16),
    "conv3_w": (16, 16),
    "dense1_w": (16, 8),
    "dense2_w": (8, 1),
}


@dataclass
class ScorerModel:
    """Weights of the 3-conv / 2-dense scorer network.

    Output shapes chain 3x3x1 -> 2x2x8 -> 1x1x16 -> 1x1x16 -> 8 -> 1.
    Treat instances as immutable once shared; training works on copies.
    """

    conv1_w: np.ndarray
    conv1_b: np.ndarray
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    conv3_w: np.ndarray
    conv3_b: np.ndarray
    dense1_w: np.ndarray
    dense1_b: np.ndarray
    dense2_w: np.ndarray
    dense2_b: np.ndarray

    def __post_init__(self):
        for name, shape, _ in LAYER_SPECS:
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.shape != shape:
                raise ValidationError(f"{name} must have shape {shape}, got {arr.shape}")
            object.__setattr__(self, name, arr)

    def params(self) -> list[tuple[str, np.ndarray]]:
        return [(name, getattr(self, name)) for name, _, _ in LAYER_SPECS]

    def copy(self) -> "ScorerModel":
        return ScorerModel(**{name: getattr(self, name).copy() for name, _, _ in LAYER_SPECS})

    def conv_weight_square_sum(self) -> float:
        return float(sum(np.sum(getattr(self, name) ** 2) for name in _CONV_WEIGHTS))


def init_model(seed: int) -> ScorerModel:
    """Glorot-uniform weights, zero biases, deterministic per seed."""
    rng = np.random.default_rng(seed)
    arrays = {}
    for name, shape, kind in LAYER_SPECS:
        if kind == "bias":
            arrays[name] = np.zeros(shape)
            continue
        if kind == "conv":
            kh, kw, cin, cout = shape
            fan_in, fan_out = kh * kw * cin, kh * kw * cout
        else:
            fan_in, fan_out = shape
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        arrays[name] = rng.uniform(-limit, limit, size=shape)
    return ScorerModel(**arrays)


def kernel_params(model: ScorerModel) -> tuple[np.ndarray, ...]:
    """Weights and biases reshaped to the form the kernels consume."""
    out = []
    for name, _, kind in LAYER_SPECS:
        arr = getattr(model, name)
        if kind != "bias":
            arr = np.ascontiguousarray(arr.reshape(_KERNEL_SHAPES[name]))
        out.append(arr)
    return tuple(out)


def predict_batch(model: ScorerModel, x: np.ndarray) -> np.ndarray:
    """Scores for a stack of feature matrices, shape (n, 3, 3) -> (n,)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[1:] != (3, 3):
        raise ValidationError(f"expected input of shape (n, 3, 3), got {x.shape}")
    return OUTPUT_SCALE * kernels.forward(x, *kernel_params(model))


def predict(model: ScorerModel, m: np.ndarray) -> float:
    """Score one feature matrix; a pure function of (model, matrix)."""
    m = validate_matrix(m)
    return float(predict_batch(model, m[None, :, :])[0])


def _stack_batch(batch) -> tuple[np.ndarray, np.ndarray]:
    if len(batch) == 0:
        raise ValidationError("batch must be non-empty")
    x = np.stack([np.asarray(m, dtype=np.float64) for m, _ in batch])
    y = np.array([float(label) for _, label in batch])
    if x.shape[1:] != (3, 3):
        raise ValidationError(f"feature matrices must be 3x3, got {x.shape[1:]}")
    return x, y


def loss(model: ScorerModel, batch, l2_lambda: float = DEFAULT_L2_LAMBDA) -> float:
    """Mean squared prediction error plus an L2 penalty on conv weights.

    ``batch`` is a sequence of (feature matrix, label) pairs. Only the
    convolution kernels are penalized; dense weights and biases are not.
    """
    if l2_lambda < 0:
        raise ValidationError(f"l2_lambda must be >= 0, got {l2_lambda!r}")
    x, y = _stack_batch(batch)
    preds = predict_batch(model, x)
    mse = float(np.mean((preds - y) ** 2))
    return mse + l2_lambda * model.conv_weight_square_sum()


def loss_gradients(model: ScorerModel, x: np.ndarray, y: np.ndarray,
                   l2_lambda: float, scaled: bool) -> tuple[float, dict[str, np.ndarray]]:
    """Loss value and gradient per parameter, keyed by parameter name.

    ``scaled=True`` evaluates the internal training objective (targets
    divided by OUTPUT_SCALE); ``scaled=False`` the score-scale loss that
    ``loss`` reports. Both include the conv L2 penalty.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    targets = y / OUTPUT_SCALE
    result = kernels.mse_and_grads(x, targets, *kernel_params(model))
    mse_scaled, raw_grads = result[0], result[1:]
    factor = 1.0 if scaled else OUTPUT_SCALE**2

    grads: dict[str, np.ndarray] = {}
    i = 0
    for name, shape, kind in LAYER_SPECS:
        if kind == "bias":
            grads[name] = factor * raw_grads[i]
        else:
            grads[name] = factor * raw_grads[i].reshape(shape)
            if kind == "conv":
                grads[name] = grads[name] + 2.0 * l2_lambda * getattr(model, name)
        i += 1
    value = factor * mse_scaled + l2_lambda * model.conv_weight_square_sum()
    return value, grads


def _training_loss(model: ScorerModel, x: np.ndarray, targets: np.ndarray,
                   l2_lambda: float) -> float:
    preds = kernels.forward(x, *kernel_params(model))
    return float(np.mean((preds - targets) ** 2)) + l2_lambda * model.conv_weight_square_sum()


def gradient_check(model: ScorerModel, sample, eps: float = 1e-5,
                   l2_lambda: float = DEFAULT_L2_LAMBDA) -> float:
    """Max relative error of analytic gradients vs central differences.

    Verifies the backward pass the trainer relies on: for a single
    (feature matrix, label) sample it compares the analytic gradient of
    the training objective (squared error on the rescaled output plus
    the conv L2 penalty) against a central finite difference, over
    every parameter. The relative error uses a 1e-8 floor, so
    parameters whose perturbation never reaches the output (dead relu
    paths) contribute exactly 0.
    """
    if not (1e-7 <= eps <= 1e-3):
        raise ValidationError(f"eps must lie in [1e-7, 1e-3], got {eps!r}")
    m, label = sample
    x = np.ascontiguousarray(m, dtype=np.float64)[None, :, :]
    y = np.array([float(label)])
    targets = y / OUTPUT_SCALE
    _, analytic = loss_gradients(model, x, y, l2_lambda, scaled=True)

    probe = model.copy()
    worst = 0.0
    for name, arr in probe.params():
        g_a_flat = analytic[name].reshape(-1)
        flat = arr.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            up = _training_loss(probe, x, targets, l2_lambda)
            flat[i] = orig - eps
            down = _training_loss(probe, x, targets, l2_lambda)
            flat[i] = orig
            g_n = (up - down) / (2.0 * eps)
            rel = abs(g_a_flat[i] - g_n) / max(abs(g_a_flat[i]), abs(g_n), 1e-8)
            if rel > worst:
                worst = rel
    return worst


def save_model(model: ScorerModel) -> bytes:
    """Versioned JSON container: layer metadata plus row-major weights."""
    layers = []
    for name, shape, kind in LAYER_SPECS:
        layers.append(
            {
                "name": name,
                "kind": kind,
                "shape": list(shape),
                "values": getattr(model, name).reshape(-1).tolist(),
            }
        )
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "output_scale": OUTPUT_SCALE,
        "layers": layers,
    }
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


def load_model(data: bytes) -> ScorerModel:
    """Inverse of :func:`save_model`; weights round-trip at full precision."""
    if not data:
        raise ModelFormatError("empty model payload")
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot parse model payload: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError("not a scorer model payload")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"unsupported model version {doc.get('version')!r}, expected {MODEL_VERSION}"
        )
    layers = doc.get("layers")
    if not isinstance(layers, list) or len(layers) != len(LAYER_SPECS):
        raise ModelFormatError("layer list missing or wrong length")
    arrays = {}
    for entry, (name, shape, _) in zip(layers, LAYER_SPECS):
        if entry.get("name") != name or tuple(entry.get("shape", ())) != shape:
            raise ModelFormatError(f"unexpected layer entry for {name}")
        values = entry.get("values")
        size = int(np.prod(shape))
        if not isinstance(values, list) or len(values) != size:
            raise ModelFormatError(f"layer {name} expects {size} values")
        try:
            arrays[name] = np.array(values, dtype=np.float64).reshape(shape)
        except (TypeError, ValueError) as exc:
            raise ModelFormatError(f"layer {name}: {exc}") from None
    return ScorerModel(**arrays)
