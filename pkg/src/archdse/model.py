"""Analytic construction and cost counting of compact detection networks.

A design point is a pair (width multiplier alpha, input resolution). From it
we build a static layer graph for a MobileNetV2 backbone with an SSD-style
detection head, then count trainable parameters and multiply-accumulate
operations in closed form. No tensors are ever instantiated; everything is
integer arithmetic over the layer table, so counting the whole default grid
takes microseconds per point.

Channel widths follow the usual divisor-8 rounding rule (see
``scale_channels``). Feature-map sides follow same-padding ceiling division,
so a stride-2 layer maps side S to ceil(S / 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ResolutionTooSmall, ValidationError

__all__ = [
    "Theta",
    "LayerSpec",
    "SSDHeadSpec",
    "ArchitectureGraph",
    "scale_channels",
    "build_graph",
    "count_params",
    "count_macs",
    "feature_source_channels",
    "graph_to_json",
    "BASE_RESOLUTION",
    "MIN_RESOLUTION",
    "CHANNEL_DIVISOR",
    "DEFAULT_ANCHORS_PER_LOCATION",
]

# Inverted-residual stages as (expansion t, base output channels c, repeats n,
# first stride s). The stem conv and the trailing 1x1 conv bracket these.
INVERTED_RESIDUAL_STAGES = (
    (1, 16, 1, 1),
    (6, 24, 2, 2),
    (6, 32, 3, 2),
    (6, 64, 4, 2),
    (6, 96, 3, 1),
    (6, 160, 3, 2),
    (6, 320, 1, 1),
)
FIRST_CONV_CHANNELS = 32
LAST_CONV_CHANNELS = 1280

# Extra detection feature layers appended after the backbone, each built as a
# 1x1 bottleneck conv followed by a stride-2 3x3 conv (depthwise separable
# when the head style is ssdlite). Entries are (bottleneck, output) base
# channels; both are scaled and rounded like every other width.
EXTRA_FEATURE_LAYERS = ((256, 512), (128, 256), (128, 256), (64, 128))

DEFAULT_ANCHORS_PER_LOCATION = (3, 6, 6, 6, 6, 6)

CHANNEL_DIVISOR = 8
BASE_RESOLUTION = 224
# The backbone downsamples by 32x overall; smaller inputs would degenerate
# before the deepest feature map exists at its nominal stride.
MIN_RESOLUTION = 32

LAYER_KINDS = ("standard_conv", "depthwise_separable_conv", "inverted_residual")
HEAD_STYLES = ("ssd", "ssdlite")


@dataclass(frozen=True)
class Theta:
    """One candidate design point: width multiplier and input resolution."""

    alpha: float
    resolution: int

    def __post_init__(self):
        if isinstance(self.alpha, bool) or not isinstance(self.alpha, (int, float)):
            raise ValidationError(f"alpha must be a real number, got {self.alpha!r}")
        if not math.isfinite(self.alpha) or self.alpha <= 0:
            raise ValidationError(f"alpha must be a positive finite real, got {self.alpha!r}")
        if isinstance(self.resolution, bool) or not isinstance(self.resolution, int):
            raise ValidationError(f"resolution must be an integer, got {self.resolution!r}")
        if self.resolution < MIN_RESOLUTION:
            raise ResolutionTooSmall(
                f"resolution {self.resolution} is below the minimum of {MIN_RESOLUTION}; "
                "the detection feature maps would collapse below 1x1 at nominal stride"
            )

    @property
    def rho(self) -> float:
        """Resolution as a fraction of the 224 base resolution."""
        return self.resolution / BASE_RESOLUTION


@dataclass(frozen=True)
class LayerSpec:
    """A single counted layer.

    ``expansion`` only matters for inverted_residual layers; an expansion of 1
    means the block has no expansion pointwise conv, matching the reference
    convention for t=1 blocks. ``has_batchnorm`` and ``has_bias`` are mutually
    exclusive, as in the reference implementations.
    """

    kind: str
    kernel: int
    in_channels: int
    out_channels: int
    stride: int = 1
    expansion: int = 1
    has_batchnorm: bool = True
    has_bias: bool = False

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ValidationError(f"unknown layer kind {self.kind!r}")
        if self.kernel < 1:
            raise ValidationError("kernel must be >= 1")
        if self.in_channels < 1 or self.out_channels < 1:
            raise ValidationError("channel counts must be >= 1")
        if self.stride not in (1, 2):
            raise ValidationError(f"stride must be 1 or 2, got {self.stride}")
        if self.expansion < 1:
            raise ValidationError("expansion must be >= 1")
        if self.has_batchnorm and self.has_bias:
            raise ValidationError("a layer carries batchnorm or bias, not both")

    @property
    def hidden_channels(self) -> int:
        """Width of the expanded representation inside an inverted residual."""
        return self.in_channels * self.expansion


@dataclass(frozen=True)
class SSDHeadSpec:
    """Detection head: where to tap features and how many anchors per cell.

    ``feature_sources`` holds (layer index, spatial side) pairs. A source
    pointing at an inverted_residual layer taps that block's expansion output
    (channels = in_channels * expansion, at the pre-stride side); any other
    source taps the layer's output. Each tap feeds one class predictor and one
    box predictor; ssdlite predictors are depthwise separable, ssd predictors
    are plain 3x3 convs.
    """

    feature_sources: tuple[tuple[int, int], ...]
    anchors_per_location: tuple[int, ...]
    head_style: str = "ssdlite"

    def __post_init__(self):
        if self.head_style not in HEAD_STYLES:
            raise ValidationError(f"head_style must be one of {HEAD_STYLES}, got {self.head_style!r}")
        if len(self.feature_sources) != len(self.anchors_per_location):
            raise ValidationError(
                f"{len(self.feature_sources)} feature sources but "
                f"{len(self.anchors_per_location)} anchor counts"
            )
        for index, side in self.feature_sources:
            if side < 1:
                raise ValidationError(f"feature source {index} has spatial side {side} < 1")
        for n in self.anchors_per_location:
            if n < 1:
                raise ValidationError("anchors per location must be >= 1")


@dataclass(frozen=True)
class ArchitectureGraph:
    """The full static network for one design point."""

    layers: tuple[LayerSpec, ...]
    head: SSDHeadSpec
    theta: Theta
    num_classes: int

    def __post_init__(self):
        if self.num_classes < 1:
            raise ValidationError("num_classes must be >= 1")
        for i in range(len(self.layers) - 1):
            a, b = self.layers[i], self.layers[i + 1]
            if a.out_channels != b.in_channels:
                raise ValidationError(
                    f"layers {i} and {i + 1} are not channel-consistent "
                    f"({a.out_channels} out vs {b.in_channels} in)"
                )
        for index, _ in self.head.feature_sources:
            if not 0 <= index < len(self.layers):
                raise ValidationError(f"feature source index {index} out of range")


def scale_channels(base_channels: int, alpha: float, divisor: int = CHANNEL_DIVISOR) -> int:
    """Scale a channel count by alpha and round onto the divisor grid.

    Rounds to the nearest multiple of ``divisor`` with a floor of one divisor
    step; if rounding would drop the width below 90% of the scaled value, the
    result is bumped up one step. This is the standard width-multiplier rule
    used by the reference backbone implementations.
    """
    if base_channels < 1:
        raise ValidationError(f"base_channels must be >= 1, got {base_channels}")
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValidationError(f"alpha must be a positive finite real, got {alpha!r}")
    if divisor < 1:
        raise ValidationError(f"divisor must be >= 1, got {divisor}")
    v = base_channels * alpha
    c = max(divisor, int(v + divisor / 2) // divisor * divisor)
    if c < 0.9 * v:
        c += divisor
    return c


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def build_graph(
    theta: Theta,
    num_classes: int = 21,
    head_style: str = "ssdlite",
    anchors_per_location: tuple[int, ...] | None = None,
) -> ArchitectureGraph:
    """Construct the layer graph for one design point.

    ``num_classes`` counts foreground classes; one background class is added
    inside the class predictors. The six default feature sources are the
    expansion output of the first block of the last stride-2 stage, the final
    1x1 conv, and the four extra feature layers.
    """
    if num_classes < 1:
        raise ValidationError("num_classes must be >= 1")
    alpha = theta.alpha

    layers: list[LayerSpec] = []
    side = _ceil_div(theta.resolution, 2)
    c = scale_channels(FIRST_CONV_CHANNELS, alpha)
    layers.append(LayerSpec("standard_conv", 3, 3, c, stride=2))

    last_s2_stage = max(i for i, stage in enumerate(INVERTED_RESIDUAL_STAGES) if stage[3] == 2)
    expansion_tap: tuple[int, int] | None = None
    for stage_index, (t, base_out, repeats, first_stride) in enumerate(INVERTED_RESIDUAL_STAGES):
        c_out = scale_channels(base_out, alpha)
        for block_index in range(repeats):
            stride = first_stride if block_index == 0 else 1
            if stage_index == last_s2_stage and block_index == 0:
                expansion_tap = (len(layers), side)
            side = _ceil_div(side, stride)
            layers.append(LayerSpec("inverted_residual", 3, c, c_out, stride=stride, expansion=t))
            c = c_out

    c_last = scale_channels(LAST_CONV_CHANNELS, alpha) if alpha > 1.0 else LAST_CONV_CHANNELS
    layers.append(LayerSpec("standard_conv", 1, c, c_last, stride=1))
    c = c_last

    assert expansion_tap is not None
    sources: list[tuple[int, int]] = [expansion_tap, (len(layers) - 1, side)]

    extra_kind = "depthwise_separable_conv" if head_style == "ssdlite" else "standard_conv"
    for base_mid, base_out in EXTRA_FEATURE_LAYERS:
        mid = scale_channels(base_mid, alpha)
        out = scale_channels(base_out, alpha)
        layers.append(LayerSpec("standard_conv", 1, c, mid, stride=1))
        side = _ceil_div(side, 2)
        layers.append(LayerSpec(extra_kind, 3, mid, out, stride=2))
        sources.append((len(layers) - 1, side))
        c = out

    anchors = tuple(anchors_per_location) if anchors_per_location is not None else DEFAULT_ANCHORS_PER_LOCATION
    head = SSDHeadSpec(tuple(sources), anchors, head_style)
    return ArchitectureGraph(tuple(layers), head, theta, num_classes)


def _affine_params(channels: int, has_batchnorm: bool, has_bias: bool) -> int:
    # Batchnorm contributes a trainable scale and shift per channel; running
    # statistics are not trainable and are not counted.
    p = 0
    if has_batchnorm:
        p += 2 * channels
    if has_bias:
        p += channels
    return p


def _layer_costs(layer: LayerSpec, in_side: int, out_side: int) -> tuple[int, int]:
    """Parameter and MAC count for one layer at the given feature sides."""
    k, cin, cout = layer.kernel, layer.in_channels, layer.out_channels
    aff = lambda c: _affine_params(c, layer.has_batchnorm, layer.has_bias)
    if layer.kind == "standard_conv":
        params = k * k * cin * cout + aff(cout)
        macs = k * k * cin * cout * out_side * out_side
    elif layer.kind == "depthwise_separable_conv":
        params = k * k * cin + aff(cin) + cin * cout + aff(cout)
        macs = (k * k * cin + cin * cout) * out_side * out_side
    else:  # inverted_residual
        hidden = layer.hidden_channels
        params = 0
        macs = 0
        if layer.expansion != 1:
            params += cin * hidden + aff(hidden)
            macs += cin * hidden * in_side * in_side
        params += k * k * hidden + aff(hidden)
        params += hidden * cout + aff(cout)
        macs += (k * k * hidden + hidden * cout) * out_side * out_side
    return params, macs


def _source_channels(graph: ArchitectureGraph, index: int) -> int:
    layer = graph.layers[index]
    if layer.kind == "inverted_residual":
        return layer.hidden_channels
    return layer.out_channels


def _predictor_costs(
    channels: int, side: int, outputs: int, head_style: str
) -> tuple[int, int]:
    """Cost of one prediction conv producing ``outputs`` channels per cell."""
    if head_style == "ssdlite":
        # depthwise 3x3 with batchnorm, then pointwise 1x1 with bias
        params = 9 * channels + 2 * channels + channels * outputs + outputs
        macs = (9 * channels + channels * outputs) * side * side
    else:
        # plain 3x3 conv with bias
        params = 9 * channels * outputs + outputs
        macs = 9 * channels * outputs * side * side
    return params, macs


def _graph_costs(graph: ArchitectureGraph) -> tuple[int, int]:
    params = 0
    macs = 0
    side = graph.theta.resolution
    for layer in graph.layers:
        out_side = _ceil_div(side, layer.stride)
        p, m = _layer_costs(layer, side, out_side)
        params += p
        macs += m
        side = out_side

    class_outputs_per_anchor = graph.num_classes + 1
    for (index, tap_side), anchors in zip(
        graph.head.feature_sources, graph.head.anchors_per_location
    ):
        channels = _source_channels(graph, index)
        for per_anchor in (class_outputs_per_anchor, 4):
            p, m = _predictor_costs(channels, tap_side, anchors * per_anchor, graph.head.head_style)
            params += p
            macs += m
    return params, macs


def count_params(graph: ArchitectureGraph) -> int:
    """Total trainable parameters of backbone, extras, and prediction head."""
    return _graph_costs(graph)[0]


def count_macs(graph: ArchitectureGraph) -> int:
    """Total multiply-accumulate operations for one forward pass."""
    return _graph_costs(graph)[1]


def feature_source_channels(graph: ArchitectureGraph) -> tuple[int, ...]:
    """Channel width seen by the predictors at each feature source."""
    return tuple(_source_channels(graph, index) for index, _ in graph.head.feature_sources)


def graph_to_json(graph: ArchitectureGraph) -> dict:
    """A plain-dict description of the graph, suitable for json.dumps.

    Layout: ``theta`` and ``num_classes`` at the top level; ``layers`` as a
    list of objects with kind/kernel/in_channels/out_channels/stride/
    expansion/has_batchnorm/has_bias/out_side; ``head`` with style,
    feature_sources as [index, side] pairs, and anchors_per_location.
    """
    layers = []
    side = graph.theta.resolution
    for layer in graph.layers:
        side = _ceil_div(side, layer.stride)
        layers.append(
            {
                "kind": layer.kind,
                "kernel": layer.kernel,
                "in_channels": layer.in_channels,
                "out_channels": layer.out_channels,
                "stride": layer.stride,
                "expansion": layer.expansion,
                "has_batchnorm": layer.has_batchnorm,
                "has_bias": layer.has_bias,
                "out_side": side,
            }
        )
    return {
        "theta": {"alpha": graph.theta.alpha, "resolution": graph.theta.resolution},
        "num_classes": graph.num_classes,
        "layers": layers,
        "head": {
            "style": graph.head.head_style,
            "feature_sources": [[i, s] for i, s in graph.head.feature_sources],
            "anchors_per_location": list(graph.head.anchors_per_location),
        },
    }
