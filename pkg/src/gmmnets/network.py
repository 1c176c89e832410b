"""Layered feedforward networks with a small set of named activations.

Networks are plain dense affine+activation stacks evaluated with numpy.
Nothing here trains; weights come from explicit constructions, so a
non-finite intermediate is treated as a construction bug rather than a
numerical inconvenience.  Construction weights are sparse in principle
but stored dense: the target scale is desk-sized and density keeps the
forward pass a single matrix product per layer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import (
    AssumptionViolated,
    DimensionMismatch,
    NonFiniteIntermediate,
    ParseError,
)

ACTIVATION_KINDS = (
    "square",
    "negexp",
    "sigmoid",
    "tanh",
    "relu",
    "indicator",
    "cosine",
    "identity",
)


@dataclass(frozen=True)
class Activation:
    """Elementwise activation tag.

    ``input_scale`` rescales the argument before the nonlinearity
    (sigma(input_scale * x)); the staircase construction uses it to tighten
    an activation's decay exponent without touching layer weights.
    ``cosine_scale`` is the ``s`` in cos(x / sqrt(s)) and applies only to
    the cosine kind.
    """

    kind: str
    cosine_scale: float | None = None
    input_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ACTIVATION_KINDS:
            raise ParseError("activation.kind", f"unknown activation kind {self.kind!r}")
        if self.kind == "cosine":
            if self.cosine_scale is None or self.cosine_scale <= 0:
                raise ParseError("activation.cosine_scale", "cosine requires a positive scale")
        elif self.cosine_scale is not None:
            raise ParseError("activation.cosine_scale", f"{self.kind} takes no cosine scale")
        if not (self.input_scale > 0):
            raise ParseError("activation.input_scale", "input scale must be positive")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.input_scale != 1.0:
            z = self.input_scale * z
        if self.kind == "square":
            return z * z
        if self.kind == "negexp":
            return np.exp(-z)
        if self.kind == "sigmoid":
            return expit(z)
        if self.kind == "tanh":
            return np.tanh(z)
        if self.kind == "relu":
            return np.maximum(z, 0.0)
        if self.kind == "indicator":
            # u(x) = 1{x >= 0}; -0.0 compares equal to zero and maps to 1.
            return (z >= 0.0).astype(float)
        if self.kind == "cosine":
            return np.cos(z / np.sqrt(self.cosine_scale))
        return z  # identity

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.cosine_scale is not None:
            out["cosine_scale"] = self.cosine_scale
        if self.input_scale != 1.0:
            out["input_scale"] = self.input_scale
        return out

    @staticmethod
    def from_dict(doc, location="activation") -> "Activation":
        if not isinstance(doc, dict) or "kind" not in doc:
            raise ParseError(location, "activation must be an object with a 'kind' tag")
        kind = doc["kind"]
        if kind not in ACTIVATION_KINDS:
            raise ParseError(f"{location}.kind", f"unknown activation kind {kind!r}")
        return Activation(
            kind=kind,
            cosine_scale=doc.get("cosine_scale"),
            input_scale=doc.get("input_scale", 1.0),
        )


SQUARE = Activation("square")
NEGEXP = Activation("negexp")
SIGMOID = Activation("sigmoid")
TANH = Activation("tanh")
RELU = Activation("relu")
INDICATOR = Activation("indicator")
IDENTITY = Activation("identity")


def cosine_activation(scale: float) -> Activation:
    return Activation("cosine", cosine_scale=scale)


def _freeze(arr):
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Layer:
    """One affine map followed by an elementwise activation."""

    weights: np.ndarray
    bias: np.ndarray
    activation: Activation

    def __post_init__(self):
        w = _freeze(np.atleast_2d(self.weights))
        b = _freeze(np.atleast_1d(self.bias))
        if b.shape != (w.shape[0],):
            raise DimensionMismatch(
                f"bias shape {b.shape} does not match weight rows {w.shape[0]}"
            )
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]


class FeedforwardNet:
    """An evaluable stack of layers.

    ``metadata`` records provenance (which construction produced the net,
    node counts, parameter digest); it travels with serialization but never
    affects evaluation.
    """

    def __init__(self, input_dim: int, layers, metadata: dict | None = None):
        layers = tuple(layers)
        if not layers:
            raise DimensionMismatch("a network needs at least one layer")
        prev = input_dim
        for idx, layer in enumerate(layers):
            if layer.in_dim != prev:
                raise DimensionMismatch(
                    f"layer {idx} expects {layer.in_dim} inputs, previous width is {prev}"
                )
            prev = layer.out_dim
        self.input_dim = int(input_dim)
        self.layers = layers
        self.metadata = dict(metadata or {})

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def hidden_widths(self):
        """Widths of all layers except the output layer."""
        return [layer.out_dim for layer in self.layers[:-1]]

    @property
    def node_count(self) -> int:
        """Total number of basic hidden nodes (output layer excluded)."""
        return int(sum(self.hidden_widths))

    def eval(self, x, block_size: int | None = None):
        """Forward pass.  Accepts one point (n,) or a batch (m, n).

        Batches are processed in fixed-size blocks so wide hidden layers
        never materialize an (m, width) matrix; block boundaries are
        deterministic, so results do not depend on the block size beyond
        roundoff-identical arithmetic order within each row.
        """
        arr = np.asarray(x, dtype=float)
        single = arr.ndim == 1
        if single:
            arr = arr[np.newaxis, :]
        if arr.ndim != 2 or arr.shape[1] != self.input_dim:
            raise DimensionMismatch(
                f"expected points of dimension {self.input_dim}, got shape {np.shape(x)}"
            )
        if block_size is None:
            widest = max(layer.out_dim for layer in self.layers)
            block_size = int(min(8192, max(32, 2**23 // widest)))
        outs = []
        for start in range(0, arr.shape[0], block_size):
            outs.append(self._forward(arr[start : start + block_size]))
        result = np.concatenate(outs, axis=0)
        return result[0] if single else result

    def _forward(self, block):
        h = block
        for idx, layer in enumerate(self.layers):
            h = layer.activation(h @ layer.weights.T + layer.bias)
            if not np.all(np.isfinite(h)):
                raise NonFiniteIntermediate(f"non-finite value after layer {idx}")
        return h

    def scalar_fn(self, block_size: int | None = None):
        """Closure mapping a batch (m, n) to the first output coordinate (m,)."""
        return lambda pts: self.eval(pts, block_size=block_size)[:, 0]

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "layers": [
                {
                    "weights": layer.weights.tolist(),
                    "bias": layer.bias.tolist(),
                    "activation": layer.activation.to_dict(),
                }
                for layer in self.layers
            ],
            "metadata": self.metadata,
        }


def count_nodes(net: FeedforwardNet):
    """Per-layer hidden node counts and their total."""
    widths = net.hidden_widths
    return {"per_layer": widths, "total": int(sum(widths))}


def serialize_net(net: FeedforwardNet) -> str:
    """JSON text for a network; floats keep full round-trip precision."""
    return json.dumps(net.to_dict(), indent=2)


def deserialize_net(text) -> FeedforwardNet:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("$", f"invalid JSON: {exc}") from exc
    return net_from_dict(doc)


def net_from_dict(doc) -> FeedforwardNet:
    if not isinstance(doc, dict):
        raise ParseError("$", "network document must be an object")
    for key in ("input_dim", "layers"):
        if key not in doc:
            raise ParseError(key, "missing field")
    layers = []
    for idx, raw in enumerate(doc["layers"]):
        loc = f"layers[{idx}]"
        if not isinstance(raw, dict):
            raise ParseError(loc, "layer must be an object")
        try:
            weights = np.asarray(raw["weights"], dtype=float)
            bias = np.asarray(raw["bias"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(loc, f"bad weights/bias: {exc}") from exc
        act = Activation.from_dict(raw.get("activation"), location=f"{loc}.activation")
        try:
            layers.append(Layer(weights, bias, act))
        except DimensionMismatch as exc:
            raise ParseError(loc, str(exc)) from exc
    try:
        return FeedforwardNet(int(doc["input_dim"]), layers, doc.get("metadata"))
    except DimensionMismatch as exc:
        raise ParseError("layers", str(exc)) from exc


def save_net(net: FeedforwardNet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_net(net))
        fh.write("\n")


def load_net(path) -> FeedforwardNet:
    with open(path, "r", encoding="utf-8") as fh:
        return deserialize_net(fh.read())


# ----------------------------------------------------------------------
# Regularity checks for basic activations
# ----------------------------------------------------------------------

# Central-difference steps.  The three-derivative stencil cannot use the
# second-derivative step: with h = 1e-5 the h^3 divisor amplifies float64
# noise to O(0.1), so it gets a near-optimal larger step instead.
SECOND_DERIV_STEP = 1e-5
THIRD_DERIV_STEP = 6e-4


def second_derivative(fn, x, h=SECOND_DERIV_STEP):
    x = np.asarray(x, dtype=float)
    return (fn(x + h) - 2.0 * fn(x) + fn(x - h)) / (h * h)


def third_derivative(fn, x, h=THIRD_DERIV_STEP):
    """Five-point central stencil for f'''."""
    x = np.asarray(x, dtype=float)
    num = fn(x + 2 * h) - 2.0 * fn(x + h) + 2.0 * fn(x - h) - fn(x - 2 * h)
    return num / (2.0 * h**3)


@dataclass(frozen=True)
class ActivationProfile:
    """Measured regularity constants of a basic activation.

    curvature:    sigma''(tau) > 0 with |sigma'''| <= third_max on
                  [tau - r, tau + r]  (feeds the squaring supernode).
    monotonicity: x -> sigma(x + tau) + sigma(-x + tau) nondecreasing on
                  [0, grid max]  (extends supernode bounds beyond range).
    decay:        |sigma(s x)| <= e^x and |sigma(s x) - 1| <= e^{-x} on the
                  grid for the reported input scale s  (feeds the staircase).
    """

    activation: Activation
    tau: float
    r: float
    sigma2_tau: float
    third_max: float
    curvature_ok: bool
    monotonic_ok: bool
    decay_ok: bool
    decay_scale: float
    failures: tuple = ()

    @property
    def ok(self) -> bool:
        return self.curvature_ok and self.monotonic_ok and self.decay_ok

    def require(self, *, need_decay: bool = True) -> "ActivationProfile":
        problems = [f for f in self.failures if need_decay or not f.startswith("decay")]
        if problems:
            raise AssumptionViolated("; ".join(problems))
        return self

    def staircase_activation(self) -> Activation:
        """The activation rescaled so the decay bounds hold with unit exponent."""
        if not self.decay_ok:
            raise AssumptionViolated("decay bounds not satisfied at any probed input scale")
        act = self.activation
        return Activation(act.kind, act.cosine_scale, act.input_scale * self.decay_scale)


def check_assumptions(
    activation: Activation,
    tau: float,
    r: float,
    *,
    monotone_max: float = 50.0,
    decay_max: float = 50.0,
    grid_points: int = 4001,
) -> ActivationProfile:
    """Numerically verify the regularity conditions the builders rely on.

    Derivatives are taken by central differences (the grid is a
    verification surrogate, not a proof).  The decay check probes
    power-of-two input scales 1, 2, ..., 64 and records the smallest one
    that passes; smooth saturating activations such as the sigmoid pass
    at scale 1, while tanh fails at every scale because it tends to -1.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    failures = []

    d2 = float(second_derivative(activation, tau))
    xs = np.linspace(tau - r, tau + r, grid_points)
    third_max = float(np.max(np.abs(third_derivative(activation, xs))))
    curvature_ok = d2 > 0 and np.isfinite(third_max)
    if not curvature_ok:
        failures.append(f"curvature: sigma''({tau}) = {d2:.6g} is not positive")

    grid = np.linspace(0.0, monotone_max, grid_points)
    sym = activation(grid + tau) + activation(-grid + tau)
    drops = np.diff(sym)
    monotonic_ok = bool(np.all(drops >= -1e-12))
    if not monotonic_ok:
        where = float(grid[int(np.argmin(drops))])
        failures.append(f"monotonicity: symmetric sum decreases near x = {where:.4g}")

    decay_ok, decay_scale, decay_msg = _probe_decay(activation, decay_max, grid_points)
    if not decay_ok:
        failures.append(decay_msg)

    return ActivationProfile(
        activation=activation,
        tau=float(tau),
        r=float(r),
        sigma2_tau=d2,
        third_max=third_max,
        curvature_ok=curvature_ok,
        monotonic_ok=monotonic_ok,
        decay_ok=decay_ok,
        decay_scale=decay_scale,
        failures=tuple(failures),
    )


def decay_bounds_hold(activation: Activation, scale: float, grid) -> bool:
    """Grid check of |sigma(scale x)| <= e^x and |sigma(scale x) - 1| <= e^{-x}."""
    vals = activation(scale * np.asarray(grid, dtype=float))
    slack = 1e-12
    lower = np.abs(vals) <= np.exp(grid) * (1 + slack) + slack
    upper = np.abs(vals - 1.0) <= np.exp(-grid) * (1 + slack) + slack
    return bool(np.all(lower) and np.all(upper))


def _probe_decay(activation, decay_max, grid_points):
    grid = np.linspace(-decay_max, decay_max, grid_points)
    for exponent in range(0, 7):
        scale = float(2**exponent)
        if decay_bounds_hold(activation, scale, grid):
            return True, scale, ""
    return False, np.nan, (
        f"decay: |sigma(x)| <= e^x / |sigma(x)-1| <= e^-x fails on [-{decay_max}, {decay_max}] "
        "at every probed input scale"
    )
