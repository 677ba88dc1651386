"""Metric surfaces over the grid and their CSV round-trip."""

import pytest

from archdse import (
    EvaluationRecord,
    EvaluatorConfig,
    FailureRecord,
    NetScoreWeights,
    ParseError,
    RunLedger,
    ScoredRecord,
    SearchSpace,
    SurfaceGrid,
    Theta,
    ValidationError,
    build_surface,
    explore,
    modified_netscore,
    surface_from_csv,
    surface_to_csv,
)

DEFAULT = NetScoreWeights()
SPACE = SearchSpace((0.5, 1.0), (160, 224))


def _scored(alpha, resolution, accuracy, params_m=3.0, runtime_s=0.2):
    record = EvaluationRecord(
        theta=Theta(alpha, resolution),
        accuracy=accuracy,
        params_m=params_m,
        runtime_s=runtime_s,
        source="measured_file",
    )
    return ScoredRecord(record, modified_netscore(record, DEFAULT))


def _full_ledger():
    ledger = RunLedger(DEFAULT, SPACE)
    ledger.append(_scored(0.5, 160, 18.5, params_m=1.25, runtime_s=0.0625))
    ledger.append(_scored(1.0, 160, 22.25, params_m=2.5, runtime_s=0.125))
    ledger.append(_scored(0.5, 224, 20.0, params_m=1.25, runtime_s=0.09375))
    ledger.append(_scored(1.0, 224, 26.5, params_m=3.5, runtime_s=0.1875))
    return ledger


def test_map_surface_golden_csv():
    text = surface_to_csv(build_surface(_full_ledger(), "map"))
    assert text == "alpha,160,224\n0.5,18.5,20.0\n1.0,22.25,26.5\n"


def test_runtime_surface_golden_csv():
    text = surface_to_csv(build_surface(_full_ledger(), "cpu_time_s"))
    assert text == "alpha,160,224\n0.5,0.0625,0.09375\n1.0,0.125,0.1875\n"


def test_params_surface_golden_csv():
    text = surface_to_csv(build_surface(_full_ledger(), "params_m"))
    assert text == "alpha,160,224\n0.5,1.25,1.25\n1.0,2.5,3.5\n"


def test_netscore_surface_matches_fresh_scoring():
    ledger = _full_ledger()
    grid = build_surface(ledger, "netscore")
    for (alpha, resolution), scored in ledger.successes().items():
        i = SPACE.resolutions.index(resolution)
        j = SPACE.alphas.index(alpha)
        assert grid.values[i][j] == modified_netscore(scored.record, DEFAULT)


def test_missing_point_leaves_an_empty_cell():
    ledger = RunLedger(DEFAULT, SPACE)
    ledger.append(_scored(0.5, 160, 18.5))
    ledger.append(FailureRecord(Theta(1.0, 160), "timeout", ""))
    ledger.append(_scored(0.5, 224, 20.0))
    ledger.append(_scored(1.0, 224, 26.5))
    text = surface_to_csv(build_surface(ledger, "map"))
    assert text == "alpha,160,224\n0.5,18.5,20.0\n1.0,,26.5\n"

    grid = surface_from_csv(text, "map")
    assert grid.values == ((18.5, None), (20.0, 26.5))


def test_round_trip_is_exact_for_full_precision_values():
    ledger = explore(SPACE, EvaluatorConfig(mode="surrogate"), DEFAULT)
    for metric in ("map", "cpu_time_s", "netscore", "params_m"):
        grid = build_surface(ledger, metric)
        again = surface_from_csv(surface_to_csv(grid), metric)
        assert again == grid


def test_surface_covers_unexplored_space_with_gaps():
    ledger = RunLedger(DEFAULT, SPACE)
    ledger.append(_scored(1.0, 224, 26.5))
    grid = build_surface(ledger, "map")
    assert grid.values == ((None, None), (None, 26.5))


def test_build_surface_rejects_unknown_metric():
    with pytest.raises(ValidationError):
        build_surface(_full_ledger(), "flops")


def test_grid_shape_is_validated():
    with pytest.raises(ValidationError):
        SurfaceGrid((0.5, 1.0), (160, 224), ((1.0, 2.0),), "map")
    with pytest.raises(ValidationError):
        SurfaceGrid((0.5, 1.0), (160,), ((1.0,),), "map")
    with pytest.raises(ValidationError):
        SurfaceGrid((0.5,), (160,), ((1.0,),), "speed")


class TestSurfaceFromCsv:
    def test_rejects_missing_alpha_header(self):
        with pytest.raises(ParseError, match="alpha"):
            surface_from_csv("a,160\n0.5,18.5\n", "map")

    def test_rejects_non_integer_resolution_header(self):
        with pytest.raises(ParseError, match="resolution"):
            surface_from_csv("alpha,one-sixty\n0.5,18.5\n", "map")

    def test_reports_row_of_a_short_row(self):
        with pytest.raises(ParseError, match="row 2"):
            surface_from_csv("alpha,160,224\n0.5,18.5,20.0\n1.0,22.25\n", "map")

    def test_reports_row_of_a_bad_cell(self):
        with pytest.raises(ParseError, match="row 1"):
            surface_from_csv("alpha,160\nhalf,18.5\n", "map")
