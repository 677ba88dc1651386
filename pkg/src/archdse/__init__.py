"""Design-space exploration for compact detection networks.

Scores (width multiplier, input resolution) design points of a MobileNetV2
backbone with an SSD-style head on a decibel trade-off scale, counts their
parameters and MACs analytically, sweeps a grid of candidates against a
pluggable evaluation source (results file, external process, or built-in
surrogate), persists outcomes to a resumable JSON-lines ledger, and picks the
best point deterministically.
"""

from .errors import (
    ArchDseError,
    EmptyLedger,
    EvaluationError,
    EvaluationTimeout,
    EvaluatorError,
    LedgerError,
    NonPositiveInput,
    ParseError,
    ProcessError,
    ProtocolError,
    ResolutionTooSmall,
    ValidationError,
)
from .model import (
    BASE_RESOLUTION,
    CHANNEL_DIVISOR,
    DEFAULT_ANCHORS_PER_LOCATION,
    MIN_RESOLUTION,
    ArchitectureGraph,
    LayerSpec,
    SSDHeadSpec,
    Theta,
    build_graph,
    count_macs,
    count_params,
    feature_source_channels,
    graph_to_json,
    scale_channels,
)
from .scoring import (
    EvaluationRecord,
    NetScoreWeights,
    ScoredRecord,
    modified_netscore,
    netscore_values,
    score_all,
)
from .evaluators import (
    PROTOCOL_VERSION,
    RESULTS_HEADER,
    TIMEOUT_ENV_VAR,
    EvaluatorConfig,
    ProcessEvaluator,
    SurrogateParams,
    analytic_params_m,
    evaluate_external,
    ingest_results_file,
    surrogate_evaluate,
)
from .search import (
    DEFAULT_ALPHAS,
    DEFAULT_RESOLUTIONS,
    FailureRecord,
    RunLedger,
    SearchSpace,
    default_search_space,
    explore,
    generate_grid,
    select_best,
)
from .surfaces import SURFACE_METRICS, SurfaceGrid, build_surface, surface_from_csv, surface_to_csv

__version__ = "0.1.0"

__all__ = [
    "ArchDseError",
    "ValidationError",
    "NonPositiveInput",
    "ResolutionTooSmall",
    "ParseError",
    "EvaluationError",
    "EvaluationTimeout",
    "ProtocolError",
    "ProcessError",
    "EvaluatorError",
    "LedgerError",
    "EmptyLedger",
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
    "NetScoreWeights",
    "EvaluationRecord",
    "ScoredRecord",
    "netscore_values",
    "modified_netscore",
    "score_all",
    "SurrogateParams",
    "EvaluatorConfig",
    "ingest_results_file",
    "surrogate_evaluate",
    "evaluate_external",
    "ProcessEvaluator",
    "analytic_params_m",
    "RESULTS_HEADER",
    "PROTOCOL_VERSION",
    "TIMEOUT_ENV_VAR",
    "SearchSpace",
    "FailureRecord",
    "RunLedger",
    "generate_grid",
    "explore",
    "select_best",
    "default_search_space",
    "DEFAULT_ALPHAS",
    "DEFAULT_RESOLUTIONS",
    "SurfaceGrid",
    "build_surface",
    "surface_to_csv",
    "surface_from_csv",
    "SURFACE_METRICS",
    "__version__",
]
