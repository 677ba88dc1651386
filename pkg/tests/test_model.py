"""Graph construction, channel rounding, and closed-form counting."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

import _param_oracle
from archdse import (
    ArchitectureGraph,
    LayerSpec,
    ResolutionTooSmall,
    SSDHeadSpec,
    Theta,
    ValidationError,
    build_graph,
    count_macs,
    count_params,
    feature_source_channels,
    graph_to_json,
    scale_channels,
)
from archdse.search import DEFAULT_ALPHAS, DEFAULT_RESOLUTIONS


def _bare_head():
    return SSDHeadSpec(feature_sources=(), anchors_per_location=())


def _single_layer_graph(layer, resolution=224):
    theta = Theta(alpha=1.0, resolution=resolution)
    return ArchitectureGraph((layer,), _bare_head(), theta, num_classes=21)


class TestScaleChannels:
    def test_width_one_keeps_multiples_of_eight(self):
        assert scale_channels(32, 1.0) == 32
        assert scale_channels(1280, 1.0) == 1280

    def test_rounds_to_divisor_grid(self):
        assert scale_channels(32, 1.3) == 40
        assert scale_channels(96, 1.3) == 128

    def test_never_drops_below_divisor(self):
        assert scale_channels(16, 0.35) == 8
        assert scale_channels(8, 0.1) == 8

    def test_guard_prevents_large_rounding_loss(self):
        # 18 rounds down to 16, which is below 90 percent of 18, so the
        # rule bumps the result up one step.
        assert scale_channels(18, 1.0) == 24

    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(ValidationError):
            scale_channels(32, 0.0)
        with pytest.raises(ValidationError):
            scale_channels(32, -1.5)

    @given(st.integers(1, 4096), st.floats(0.05, 4.0))
    def test_always_a_positive_multiple_of_eight(self, base, alpha):
        value = scale_channels(base, alpha)
        assert value >= 8
        assert value % 8 == 0

    @given(st.integers(1, 4096), st.floats(0.05, 4.0), st.floats(0.05, 4.0))
    def test_monotone_in_alpha(self, base, a, b):
        lo, hi = sorted((a, b))
        assert scale_channels(base, lo) <= scale_channels(base, hi)

    @given(st.integers(1, 512))
    def test_multiples_of_eight_are_fixed_points_at_width_one(self, k):
        assert scale_channels(8 * k, 1.0) == 8 * k


class TestTheta:
    def test_rho_is_relative_to_base_resolution(self):
        assert Theta(1.0, 224).rho == 1.0
        assert Theta(1.0, 112).rho == 0.5

    def test_rejects_resolution_below_minimum(self):
        with pytest.raises(ResolutionTooSmall):
            Theta(1.0, 8)
        with pytest.raises(ResolutionTooSmall):
            Theta(1.0, 31)
        assert Theta(1.0, 32).resolution == 32

    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(ValidationError):
            Theta(0.0, 224)
        with pytest.raises(ValidationError):
            Theta(-0.5, 224)

    def test_rejects_non_integer_resolution(self):
        with pytest.raises(ValidationError):
            Theta(1.0, 224.0)


class TestBuildGraph:
    def test_layer_and_source_counts(self):
        graph = build_graph(Theta(1.0, 224))
        # stem + 17 inverted residuals + final 1x1 + four two-layer extras
        assert len(graph.layers) == 27
        assert len(graph.head.feature_sources) == 6
        assert graph.head.anchors_per_location == (3, 6, 6, 6, 6, 6)

    def test_feature_source_channels_at_width_one(self):
        graph = build_graph(Theta(1.0, 224))
        assert feature_source_channels(graph) == (576, 1280, 512, 256, 256, 128)

    def test_feature_source_channels_at_width_1_3(self):
        graph = build_graph(Theta(1.3, 224))
        assert feature_source_channels(graph) == (768, 1664, 664, 336, 336, 168)

    def test_feature_source_sides_at_224(self):
        graph = build_graph(Theta(1.0, 224))
        sides = tuple(side for _, side in graph.head.feature_sources)
        assert sides == (14, 7, 4, 2, 1, 1)

    def test_feature_source_sides_at_96(self):
        graph = build_graph(Theta(1.0, 96))
        sides = tuple(side for _, side in graph.head.feature_sources)
        assert sides == (6, 3, 2, 1, 1, 1)

    def test_all_channel_widths_on_divisor_grid(self):
        for alpha in DEFAULT_ALPHAS:
            graph = build_graph(Theta(alpha, 224))
            for layer in graph.layers:
                assert layer.out_channels % 8 == 0

    def test_adjacent_layers_agree_on_channels(self):
        graph = build_graph(Theta(0.75, 160))
        for prev, layer in zip(graph.layers, graph.layers[1:]):
            assert layer.in_channels == prev.out_channels

    def test_small_resolution_rejected(self):
        with pytest.raises(ResolutionTooSmall):
            build_graph(Theta(1.0, 8))

    def test_rejects_bad_num_classes(self):
        with pytest.raises(ValidationError):
            build_graph(Theta(1.0, 224), num_classes=0)

    def test_rejects_unknown_head_style(self):
        with pytest.raises(ValidationError):
            build_graph(Theta(1.0, 224), head_style="yolo")

    def test_custom_anchor_counts_must_match_sources(self):
        with pytest.raises(ValidationError):
            build_graph(Theta(1.0, 224), anchors_per_location=(6, 6))

    def test_expansion_one_block_has_no_expand_stage(self):
        graph = build_graph(Theta(1.0, 224))
        first_block = graph.layers[1]
        assert first_block.kind == "inverted_residual"
        assert first_block.expansion == 1
        assert first_block.hidden_channels == first_block.in_channels


class TestCountParams:
    def test_empty_graph_counts_zero(self):
        theta = Theta(1.0, 224)
        graph = ArchitectureGraph((), _bare_head(), theta, num_classes=21)
        assert count_params(graph) == 0

    def test_plain_conv_without_batchnorm(self):
        layer = LayerSpec(
            kind="standard_conv",
            kernel=3,
            in_channels=3,
            out_channels=8,
            stride=2,
            has_batchnorm=False,
        )
        assert count_params(_single_layer_graph(layer)) == 216

    def test_depthwise_separable_with_batchnorm(self):
        layer = LayerSpec(
            kind="depthwise_separable_conv",
            kernel=3,
            in_channels=32,
            out_channels=64,
        )
        # 288 depthwise weights + 64 bn + 2048 pointwise + 128 bn
        assert count_params(_single_layer_graph(layer)) == 2528

    def test_matches_spreadsheet_at_reference_widths(self):
        for width in (1.0, 1.3):
            graph = build_graph(Theta(width, 224))
            assert count_params(graph) == _param_oracle.EXPECTED_PARAMS[width]
            assert count_params(graph) == _param_oracle.spreadsheet_params(width)

    def test_invariant_to_resolution(self):
        baseline = count_params(build_graph(Theta(1.0, 224)))
        for resolution in DEFAULT_RESOLUTIONS:
            assert count_params(build_graph(Theta(1.0, resolution))) == baseline

    def test_monotone_in_alpha(self):
        totals = [count_params(build_graph(Theta(a, 224))) for a in DEFAULT_ALPHAS]
        assert totals == sorted(totals)
        assert len(set(totals)) == len(totals)

    def test_standard_head_is_heavier_than_lightweight_head(self):
        theta = Theta(1.0, 224)
        lite = count_params(build_graph(theta, head_style="ssdlite"))
        full = count_params(build_graph(theta, head_style="ssd"))
        assert full > lite


class TestCountMacs:
    def test_plain_conv_example(self):
        layer = LayerSpec(
            kind="standard_conv",
            kernel=3,
            in_channels=3,
            out_channels=8,
            stride=2,
            has_batchnorm=False,
        )
        # 216 weights applied over a 112x112 output map
        assert count_macs(_single_layer_graph(layer)) == 2_709_504

    def test_exact_quadratic_scaling_for_single_conv(self):
        layer = LayerSpec(
            kind="standard_conv",
            kernel=3,
            in_channels=3,
            out_channels=8,
            stride=2,
            has_batchnorm=False,
        )
        at_224 = count_macs(_single_layer_graph(layer, resolution=224))
        at_448 = count_macs(_single_layer_graph(layer, resolution=448))
        assert at_448 == 4 * at_224

    def test_matches_spreadsheet_at_reference_points(self):
        for (width, resolution), expected in _param_oracle.EXPECTED_MACS.items():
            graph = build_graph(Theta(width, resolution))
            assert count_macs(graph) == expected
            assert count_macs(graph) == _param_oracle.spreadsheet_macs(width, resolution)

    def test_halving_resolution_roughly_quarters_macs(self):
        # Ceiling division on odd feature sides keeps this away from an
        # exact factor of four; the ratio stays in a narrow window.
        at_224 = count_macs(build_graph(Theta(1.0, 224)))
        at_112 = count_macs(build_graph(Theta(1.0, 112)))
        assert 3.4 <= at_224 / at_112 <= 4.0

    def test_doubling_resolution_roughly_quadruples_macs(self):
        at_224 = count_macs(build_graph(Theta(1.0, 224)))
        at_448 = count_macs(build_graph(Theta(1.0, 448)))
        assert 3.4 <= at_448 / at_224 <= 4.0

    def test_monotone_in_resolution(self):
        totals = [count_macs(build_graph(Theta(1.0, r))) for r in DEFAULT_RESOLUTIONS]
        assert totals == sorted(totals)


def test_graph_to_json_is_serializable_and_complete():
    graph = build_graph(Theta(1.0, 224))
    payload = graph_to_json(graph)
    text = json.dumps(payload)
    parsed = json.loads(text)
    assert parsed["theta"] == {"alpha": 1.0, "resolution": 224}
    assert parsed["num_classes"] == 21
    assert len(parsed["layers"]) == 27
    assert parsed["layers"][-1]["out_side"] == 1
    assert len(parsed["head"]["feature_sources"]) == 6
    assert parsed["head"]["style"] == "ssdlite"


def test_layer_spec_rejects_batchnorm_with_bias():
    with pytest.raises(ValidationError):
        LayerSpec(
            kind="standard_conv",
            kernel=3,
            in_channels=8,
            out_channels=8,
            has_batchnorm=True,
            has_bias=True,
        )


def test_layer_spec_rejects_bad_stride():
    with pytest.raises(ValidationError):
        LayerSpec(kind="standard_conv", kernel=3, in_channels=8, out_channels=8, stride=3)
