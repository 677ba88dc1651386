"""Evaluation sources: results files, external processes, built-in surrogate.

Three ways to obtain (mAP, runtime) for a design point:

* ``ingest_results_file`` reads a CSV of measurements with the header
  ``alpha,resolution,map,cpu_time_s,params_m`` (the params_m column, or any
  individual cell in it, may be omitted and is then filled from the analytic
  parameter count).
* ``evaluate_external`` speaks a line-delimited JSON protocol with a child
  process: one UTF-8 request line out, one response line back. Request:
  ``{"v": 1, "alpha": ..., "resolution": ..., "num_classes": ..., "metadata":
  {...}}``. Response: ``{"map": ..., "cpu_time_s": ..., "params_m": ...}``
  with params_m optional, or ``{"error": "..."}``. The child inherits the
  parent environment plus ``DSE_REQUEST_TIMEOUT_S``.
* ``surrogate_evaluate`` is a deterministic closed-form stand-in with
  saturating accuracy and linear runtime, useful for exercising the search
  end-to-end without a training pipeline.
"""

from __future__ import annotations

import csv
import json
import math
import os
import queue
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import (
    EvaluationTimeout,
    EvaluatorError,
    ParseError,
    ProcessError,
    ProtocolError,
    ValidationError,
)
from .model import Theta, build_graph, count_macs, count_params
from .scoring import EvaluationRecord

__all__ = [
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
]

RESULTS_HEADER = ("alpha", "resolution", "map", "cpu_time_s", "params_m")
PROTOCOL_VERSION = 1
TIMEOUT_ENV_VAR = "DSE_REQUEST_TIMEOUT_S"
# How long we wait for a child to die after a kill, or to exit after EOF.
KILL_GRACE_S = 2.0

EVALUATOR_MODES = ("surrogate", "file", "process")
RUNTIME_MODELS = ("linear", "macs")


@dataclass(frozen=True)
class SurrogateParams:
    """Closed-form surrogate coefficients.

    Accuracy saturates in both knobs: a_max * (1 - exp(-c_alpha * alpha)) *
    (1 - exp(-c_rho * rho)) with rho = resolution / 224. Runtime is linear by
    default, r0 + k_alpha * alpha + k_rho * rho; set runtime_model to "macs"
    for a MAC-proportional alternative, r0 + s_per_gmac * (MACs / 1e9).
    """

    a_max: float = 28.0
    c_alpha: float = 3.0
    c_rho: float = 4.0
    r0: float = 0.02
    k_alpha: float = 0.08
    k_rho: float = 0.10
    runtime_model: str = "linear"
    s_per_gmac: float = 0.2

    def __post_init__(self):
        for name in ("a_max", "c_alpha", "c_rho", "r0", "k_alpha", "k_rho", "s_per_gmac"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be a positive finite real, got {value!r}")
        if self.a_max > 100:
            raise ValidationError("a_max is a mAP ceiling in percent and must be <= 100")
        if self.runtime_model not in RUNTIME_MODELS:
            raise ValidationError(f"runtime_model must be one of {RUNTIME_MODELS}")


@dataclass(frozen=True)
class EvaluatorConfig:
    """How to obtain evaluations during a search run.

    mode "file" requires file_path, mode "process" requires a non-empty
    command; the surrogate needs neither. num_classes and head_style feed the
    wire requests and the analytic parameter fill.
    """

    mode: str
    file_path: str | Path | None = None
    command: tuple[str, ...] | None = None
    timeout_s: float = 30.0
    request_metadata: Mapping[str, object] = field(default_factory=dict)
    num_classes: int = 21
    head_style: str = "ssdlite"
    surrogate: SurrogateParams = field(default_factory=SurrogateParams)

    def __post_init__(self):
        if self.mode not in EVALUATOR_MODES:
            raise ValidationError(f"mode must be one of {EVALUATOR_MODES}, got {self.mode!r}")
        if self.mode == "file" and self.file_path is None:
            raise ValidationError("file mode requires file_path")
        if self.mode == "process" and not self.command:
            raise ValidationError("process mode requires a non-empty command")
        if self.command is not None and not isinstance(self.command, tuple):
            object.__setattr__(self, "command", tuple(self.command))
        if not (self.timeout_s > 0 and math.isfinite(self.timeout_s)):
            raise ValidationError(f"timeout_s must be positive, got {self.timeout_s!r}")
        if self.num_classes < 1:
            raise ValidationError("num_classes must be >= 1")


def analytic_params_m(theta: Theta, num_classes: int = 21, head_style: str = "ssdlite") -> float:
    """Parameter count in millions from the closed-form graph walk."""
    return count_params(build_graph(theta, num_classes=num_classes, head_style=head_style)) / 1e6


def surrogate_evaluate(
    theta: Theta,
    params: SurrogateParams = SurrogateParams(),
    num_classes: int = 21,
    head_style: str = "ssdlite",
) -> EvaluationRecord:
    """Deterministic closed-form evaluation of one design point."""
    rho = theta.rho
    accuracy = (
        params.a_max
        * (1.0 - math.exp(-params.c_alpha * theta.alpha))
        * (1.0 - math.exp(-params.c_rho * rho))
    )
    graph = build_graph(theta, num_classes=num_classes, head_style=head_style)
    if params.runtime_model == "linear":
        runtime = params.r0 + params.k_alpha * theta.alpha + params.k_rho * rho
    else:
        runtime = params.r0 + params.s_per_gmac * (count_macs(graph) / 1e9)
    return EvaluationRecord(
        theta=theta,
        accuracy=accuracy,
        params_m=count_params(graph) / 1e6,
        runtime_s=runtime,
        source="surrogate",
    )


def _parse_resolution(cell: str) -> int:
    value = float(cell)
    if not value.is_integer():
        raise ValueError(f"resolution must be integral, got {cell!r}")
    return int(value)


def ingest_results_file(
    path: str | Path,
    num_classes: int = 21,
    head_style: str = "ssdlite",
) -> tuple[EvaluationRecord, ...]:
    """Read measured results from a CSV file.

    The header must be exactly ``alpha,resolution,map,cpu_time_s,params_m``
    or the same without the trailing params_m column. Missing or empty
    params_m cells are filled from the analytic count. Raises ParseError with
    the offending row number for malformed content and ValidationError for
    out-of-domain values (data rows are numbered from 1).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("results file is empty, expected a header row")
    header = tuple(rows[0])
    if header not in (RESULTS_HEADER, RESULTS_HEADER[:4]):
        raise ParseError(
            f"header must be {','.join(RESULTS_HEADER)} (params_m optional), "
            f"got {','.join(header)!r}"
        )

    records = []
    for row_number, row in enumerate(rows[1:], start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(
                f"expected {len(header)} columns, got {len(row)}", row=row_number
            )
        try:
            alpha = float(row[0])
            resolution = _parse_resolution(row[1])
            accuracy = float(row[2])
            runtime_s = float(row[3])
            params_cell = row[4].strip() if len(row) == 5 else ""
            params_m = float(params_cell) if params_cell else None
        except ValueError as exc:
            raise ParseError(str(exc), row=row_number) from None
        try:
            theta = Theta(alpha, resolution)
            if params_m is None:
                params_m = analytic_params_m(theta, num_classes, head_style)
            records.append(
                EvaluationRecord(
                    theta=theta,
                    accuracy=accuracy,
                    params_m=params_m,
                    runtime_s=runtime_s,
                    source="measured_file",
                )
            )
        except ValidationError as exc:
            raise type(exc)(f"row {row_number}: {exc}") from None
        except Exception as exc:  # Theta viability errors carry row context too
            raise ValidationError(f"row {row_number}: {exc}") from None
    return tuple(records)


def _request_line(theta: Theta, config: EvaluatorConfig) -> str:
    request = {
        "v": PROTOCOL_VERSION,
        "alpha": theta.alpha,
        "resolution": theta.resolution,
        "num_classes": config.num_classes,
        "metadata": dict(config.request_metadata),
    }
    return json.dumps(request) + "\n"


class ProcessEvaluator:
    """Client for one external evaluator child process.

    Holds the child for its lifetime, so many requests can be served by one
    process. A background thread pumps the child's stdout into a queue; that
    is what makes per-request timeouts possible without platform-specific
    select logic. Use as a context manager, or call close() when done.
    """

    def __init__(self, config: EvaluatorConfig):
        if config.mode != "process":
            raise ValidationError("ProcessEvaluator requires an EvaluatorConfig in process mode")
        self._config = config
        env = dict(os.environ)
        env[TIMEOUT_ENV_VAR] = str(config.timeout_s)
        try:
            self._proc = subprocess.Popen(
                list(config.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                env=env,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ProcessError(f"could not launch evaluator {config.command!r}: {exc}") from exc
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self):
        try:
            for line in self._proc.stdout:
                self._lines.put(line)
        finally:
            self._lines.put(None)

    def _kill(self):
        if self._proc.poll() is None:
            self._proc.kill()
        try:
            self._proc.wait(timeout=KILL_GRACE_S)
        except subprocess.TimeoutExpired:
            pass

    def _exit_status(self) -> int | None:
        try:
            return self._proc.wait(timeout=KILL_GRACE_S)
        except subprocess.TimeoutExpired:
            return None

    def evaluate(self, theta: Theta) -> EvaluationRecord:
        """Send one request, wait for one response, build a record.

        Raises EvaluationTimeout if no response arrives within timeout_s (the
        child is killed; total blocking is bounded by timeout_s plus a short
        grace interval), ProtocolError for malformed or missing responses,
        ProcessError if the child died or exited nonzero, and EvaluatorError
        if the child answered with an explicit error object.
        """
        try:
            self._proc.stdin.write(_request_line(theta, self._config))
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            status = self._exit_status()
            raise ProcessError(
                f"evaluator terminated (exit status {status}) before accepting the request"
            ) from None

        try:
            raw = self._lines.get(timeout=self._config.timeout_s)
        except queue.Empty:
            self._kill()
            raise EvaluationTimeout(
                f"no response within {self._config.timeout_s} s"
            ) from None
        if raw is None:
            status = self._exit_status()
            if status not in (0, None):
                raise ProcessError(f"evaluator exited with status {status} before responding")
            raise ProtocolError("evaluator closed its output stream without responding")

        try:
            payload = json.loads(raw)
        except json.JSONDecodeError:
            raise ProtocolError(f"response is not valid JSON: {raw.strip()!r}") from None
        if not isinstance(payload, dict):
            raise ProtocolError(f"response must be a JSON object, got {raw.strip()!r}")
        if "error" in payload:
            raise EvaluatorError(str(payload["error"]))

        values = {}
        for key in ("map", "cpu_time_s"):
            value = payload.get(key)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ProtocolError(f"response is missing a numeric {key!r} field: {raw.strip()!r}")
            values[key] = float(value)
        params_m = payload.get("params_m")
        if params_m is not None and (isinstance(params_m, bool) or not isinstance(params_m, (int, float))):
            raise ProtocolError(f"params_m must be numeric when present: {raw.strip()!r}")
        if params_m is None:
            params_m = analytic_params_m(theta, self._config.num_classes, self._config.head_style)

        return EvaluationRecord(
            theta=theta,
            accuracy=values["map"],
            params_m=float(params_m),
            runtime_s=values["cpu_time_s"],
            source="external_process",
            metadata=dict(self._config.request_metadata),
        )

    def close(self):
        """Signal end-of-input and reap the child."""
        if self._proc.stdin and not self._proc.stdin.closed:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
        try:
            self._proc.wait(timeout=KILL_GRACE_S)
        except subprocess.TimeoutExpired:
            self._kill()
        self._reader.join(timeout=KILL_GRACE_S)

    def __enter__(self) -> "ProcessEvaluator":
        return self

    def __exit__(self, *exc_info):
        self.close()


def evaluate_external(theta: Theta, config: EvaluatorConfig) -> EvaluationRecord:
    """One-shot external evaluation: spawn, request, respond, reap."""
    with ProcessEvaluator(config) as evaluator:
        return evaluator.evaluate(theta)
