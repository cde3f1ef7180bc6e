"""Declarative CNN layer lists with shape inference, parameter counts and
receptive-field analysis.

The two built-in networks are the bidirectional-conversion generator
(7x7 stem, two stride-2 encoders, nine residual blocks, two stride-2
transposed-conv decoders, 7x7 head) and the 70x70 PatchGAN discriminator.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import tensorcore as tc
from .errors import ArgumentError, ParseError, ShapeError, UnsupportedLayerError

LAYER_KINDS = ("conv", "transposed_conv", "residual_block")
NORMS = ("instance", "none")
_ACTIVATION_RE = re.compile(r"^(relu|none|leaky_relu\((?P<slope>[0-9.eE+-]+)\))$")


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    kernel: int
    stride: int
    padding: int
    pad_mode: str
    in_ch: int
    out_ch: int
    activation: str = "relu"
    norm: str = "none"

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ArgumentError(f"unknown layer kind {self.kind!r}")
        if self.kernel < 1 or self.stride < 1:
            raise ArgumentError("kernel and stride must be >= 1")
        if self.padding < 0:
            raise ArgumentError("padding must be >= 0")
        if self.in_ch < 1 or self.out_ch < 1:
            raise ArgumentError("channel counts must be >= 1")
        if self.pad_mode not in tc.PAD_MODES:
            raise ArgumentError(f"unknown pad mode {self.pad_mode!r}")
        if self.norm not in NORMS:
            raise ArgumentError(f"unknown norm {self.norm!r}")
        if not _ACTIVATION_RE.match(self.activation):
            raise ArgumentError(f"unknown activation {self.activation!r}")
        if self.kind == "residual_block" and (self.in_ch != self.out_ch or self.stride != 1):
            raise ArgumentError("residual_block needs in_ch == out_ch and stride 1")

    @property
    def output_padding(self) -> int:
        # transposed convs double the extent exactly
        return self.stride - 1 if self.kind == "transposed_conv" else 0

    @property
    def leaky_slope(self):
        m = _ACTIVATION_RE.match(self.activation)
        return float(m.group("slope")) if m.group("slope") else None

    def describe(self) -> str:
        name = {"conv": "conv", "transposed_conv": "deconv", "residual_block": "resblock"}[self.kind]
        return f"{name} {self.kernel}x{self.kernel}/s{self.stride}"


@dataclass(frozen=True)
class NetworkSpec:
    name: str
    input_channels: int
    layers: tuple = field(default_factory=tuple)

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        prev = self.input_channels
        for idx, layer in enumerate(layers, start=1):
            if layer.in_ch != prev:
                raise ArgumentError(
                    f"layer {idx} expects {layer.in_ch} input channels, previous stage gives {prev}"
                )
            prev = layer.out_ch

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "input_channels": self.input_channels,
            "layers": [asdict(layer) for layer in self.layers],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, obj: dict) -> "NetworkSpec":
        try:
            layers = [LayerSpec(**layer) for layer in obj["layers"]]
            return cls(obj["name"], int(obj["input_channels"]), tuple(layers))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed network spec: {exc}") from None


def load_network(path) -> NetworkSpec:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}") from None
    return NetworkSpec.from_dict(obj)


def _generator() -> NetworkSpec:
    layers = [LayerSpec("conv", 7, 1, 3, "reflect", 1, 64, "relu", "instance"),
              LayerSpec("conv", 3, 2, 1, "zero", 64, 128, "relu", "instance"),
              LayerSpec("conv", 3, 2, 1, "zero", 128, 256, "relu", "instance")]
    layers += [LayerSpec("residual_block", 3, 1, 1, "zero", 256, 256, "relu", "instance")] * 9
    layers += [LayerSpec("transposed_conv", 3, 2, 1, "zero", 256, 128, "relu", "instance"),
               LayerSpec("transposed_conv", 3, 2, 1, "zero", 128, 64, "relu", "instance"),
               # final layer follows the published table literally (ReLU, not tanh)
               LayerSpec("conv", 7, 1, 3, "reflect", 64, 1, "relu", "instance")]
    return NetworkSpec("generator", 1, tuple(layers))


def _discriminator() -> NetworkSpec:
    lrelu = "leaky_relu(0.2)"
    return NetworkSpec("discriminator", 1, (
        LayerSpec("conv", 4, 2, 1, "zero", 1, 64, lrelu, "none"),
        LayerSpec("conv", 4, 2, 1, "zero", 64, 128, lrelu, "instance"),
        LayerSpec("conv", 4, 2, 1, "zero", 128, 256, lrelu, "instance"),
        LayerSpec("conv", 4, 1, 1, "zero", 256, 512, lrelu, "instance"),
        LayerSpec("conv", 4, 1, 1, "zero", 512, 1, "none", "none"),
    ))


_BUILTINS = {"generator": _generator, "discriminator": _discriminator}


def builtin(name: str) -> NetworkSpec:
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise ArgumentError(f"unknown builtin network {name!r}; choose from {sorted(_BUILTINS)}") from None


def _layer_extent(layer: LayerSpec, n: int, idx: int) -> int:
    if layer.pad_mode == "reflect" and layer.padding and layer.padding >= n:
        raise ShapeError(
            f"layer {idx} ({layer.describe()}): reflect padding {layer.padding} needs extent > {layer.padding}, got {n}"
        )
    if layer.kind == "transposed_conv":
        out = tc.conv_transpose_output_extent(n, layer.kernel, layer.stride, layer.padding,
                                              layer.output_padding)
    elif layer.kind == "residual_block":
        out = n
        for _ in range(2):
            if layer.kernel > out + 2 * layer.padding:
                out = 0
                break
            out = tc.conv_output_extent(out, layer.kernel, 1, layer.padding)
        if out != n and out >= 1:
            raise ShapeError(f"layer {idx} ({layer.describe()}): residual branch changes extent {n} -> {out}")
    else:
        out = tc.conv_output_extent(n, layer.kernel, layer.stride, layer.padding) \
            if layer.kernel <= n + 2 * layer.padding else 0
    if out < 1:
        raise ShapeError(f"layer {idx} ({layer.describe()}): output extent {out} < 1 for input extent {n}")
    return out


def infer_shapes(net: NetworkSpec, input_shape) -> list[tuple[int, int, int]]:
    """Per-layer output shapes ``(channels, H, W)`` for a (C, H, W) input."""
    c, h, w = (int(v) for v in input_shape)
    if c != net.input_channels:
        raise ShapeError(f"{net.name} expects {net.input_channels} input channels, got {c}")
    shapes = []
    for idx, layer in enumerate(net.layers, start=1):
        h = _layer_extent(layer, h, idx)
        w = _layer_extent(layer, w, idx)
        shapes.append((layer.out_ch, h, w))
    return shapes


def param_count(net: NetworkSpec) -> int:
    """Weights + biases of every conv, plus 2 affine parameters per instance-normalized channel.

    A residual block holds two convs, each followed by its own normalization.
    """
    total = 0
    for layer in net.layers:
        convs = 2 if layer.kind == "residual_block" else 1
        per_conv = layer.kernel * layer.kernel * layer.in_ch * layer.out_ch + layer.out_ch
        if layer.norm == "instance":
            per_conv += 2 * layer.out_ch
        total += convs * per_conv
    return total


def receptive_field(net: NetworkSpec) -> int:
    """Analytic receptive field (pixels along one axis) of a single output unit."""
    r, j = 1, 1
    for idx, layer in enumerate(net.layers, start=1):
        if layer.kind == "transposed_conv":
            raise UnsupportedLayerError(f"layer {idx}: receptive field of transposed convolutions is not supported")
        if layer.kind == "residual_block":
            r += 2 * (layer.kernel - 1) * j
        else:
            r += (layer.kernel - 1) * j
            j *= layer.stride
    return r


def _activate(layer: LayerSpec, x: np.ndarray) -> np.ndarray:
    if layer.activation == "relu":
        return np.maximum(x, 0.0)
    slope = layer.leaky_slope
    if slope is not None:
        return np.where(x >= 0, x, slope * x)
    return x


def _forward(net: NetworkSpec, weights: list, x: np.ndarray) -> np.ndarray:
    # instance norm is left out: its per-image statistics couple every pixel
    for layer, wts in zip(net.layers, weights):
        if layer.kind == "residual_block":
            y = _activate(layer, tc.conv2d(x, wts[0], 1, layer.padding, layer.pad_mode))
            y = tc.conv2d(y, wts[1], 1, layer.padding, layer.pad_mode)
            x = _activate(layer, x + y)
        else:
            x = _activate(layer, tc.conv2d(x, wts[0], layer.stride, layer.padding, layer.pad_mode))
    return x


def empirical_receptive_field(net: NetworkSpec, seed: int = 0, input_size: int | None = None) -> int:
    """Receptive field measured by perturbation through a direct forward pass.

    Weights are drawn strictly positive so no contributions cancel. Every
    pixel of the input's central row is bumped in turn; for each output unit
    the span of bumped columns that changed it is recorded, and the widest
    span over all output units is returned. Units near the border see a
    truncated span, interior units see the full field.
    """
    for idx, layer in enumerate(net.layers, start=1):
        if layer.kind == "transposed_conv":
            raise UnsupportedLayerError(f"layer {idx}: transposed convolution in an all-conv analysis")
    analytic = receptive_field(net)
    if input_size is None:
        input_size = 2 * analytic + 1
    if input_size <= analytic:
        raise ArgumentError(f"input_size {input_size} must exceed the receptive field {analytic}")
    infer_shapes(net, (net.input_channels, input_size, input_size))

    rng = np.random.default_rng(seed)
    weights = []
    for layer in net.layers:
        n = 2 if layer.kind == "residual_block" else 1
        shape = (layer.out_ch, layer.in_ch, layer.kernel, layer.kernel)
        weights.append([rng.uniform(0.1, 1.0, size=shape) / (layer.in_ch * layer.kernel ** 2)
                        for _ in range(n)])
    base = rng.uniform(0.5, 1.5, size=(net.input_channels, input_size, input_size))
    ref = _forward(net, weights, base)

    row = input_size // 2
    lo = np.full(ref.shape[1:], input_size, dtype=int)
    hi = np.full(ref.shape[1:], -1, dtype=int)
    for col in range(input_size):
        bumped = base.copy()
        bumped[:, row, col] += 1.0
        hit = np.abs(_forward(net, weights, bumped) - ref).max(axis=0) > 0.0
        lo[hit] = np.minimum(lo[hit], col)
        hi[hit] = np.maximum(hi[hit], col)
    spans = np.where(hi >= 0, hi - lo + 1, 0)
    return int(spans.max())


def shape_report(net: NetworkSpec, input_shape, empirical_seed: int | None = None,
                 empirical_size: int | None = None) -> str:
    """Plain-text table of per-layer shapes and parameters, then totals and RF."""
    shapes = infer_shapes(net, input_shape)
    lines = [f"network: {net.name}", f"input: {tuple(int(v) for v in input_shape)}",
             f"{'layer':>5}  {'type':<18} {'pad':<9} {'act':<16} {'norm':<8} {'output':<18} {'params':>10}"]
    for idx, (layer, shape) in enumerate(zip(net.layers, shapes), start=1):
        single = NetworkSpec(net.name, layer.in_ch, (layer,))
        lines.append(
            f"{idx:>5}  {layer.describe():<18} {f'{layer.padding} {layer.pad_mode}':<9} "
            f"{layer.activation:<16} {layer.norm:<8} {str(shape):<18} {param_count(single):>10}"
        )
    lines.append(f"total parameters: {param_count(net)}")
    try:
        lines.append(f"receptive field (analytic): {receptive_field(net)}")
    except UnsupportedLayerError:
        lines.append("receptive field (analytic): n/a (transposed convolution present)")
    if empirical_seed is not None:
        rf = empirical_receptive_field(net, empirical_seed, empirical_size)
        lines.append(f"receptive field (empirical, seed {empirical_seed}): {rf}")
    return "\n".join(lines) + "\n"
