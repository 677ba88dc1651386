"""Grid enumeration, run ledger persistence, exploration, and selection.

A search run walks the Cartesian product of widths and resolutions, obtains
an evaluation for each point from the configured source, scores it, and
appends the outcome to a run ledger. The ledger is append-only and optionally
backed by a JSON-lines file whose first line is a header carrying the schema
version, the scoring weights, and the search space; every later line is one
success or failure entry in arrival order. Re-running a search against an
existing ledger skips the points that already succeeded, which is what makes
interrupted runs resumable.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    EmptyLedger,
    EvaluationTimeout,
    EvaluatorError,
    LedgerError,
    ProcessError,
    ProtocolError,
    ValidationError,
)
from .evaluators import EvaluatorConfig, evaluate_external, ingest_results_file, surrogate_evaluate
from .model import Theta
from .scoring import EvaluationRecord, NetScoreWeights, ScoredRecord, modified_netscore

__all__ = [
    "SearchSpace",
    "FailureRecord",
    "RunLedger",
    "generate_grid",
    "explore",
    "select_best",
    "default_search_space",
    "DEFAULT_ALPHAS",
    "DEFAULT_RESOLUTIONS",
    "LEDGER_SCHEMA_VERSION",
]

DEFAULT_ALPHAS = (0.35, 0.5, 0.75, 1.0, 1.15, 1.3)
DEFAULT_RESOLUTIONS = (96, 128, 160, 192, 220, 224)

LEDGER_SCHEMA_VERSION = 1

# ledger failure kinds, one per catchable evaluation error plus the file-mode
# case of a grid point with no row in the results table
FAILURE_KINDS = ("timeout", "protocol", "process", "evaluator", "validation", "missing_result")


@dataclass(frozen=True)
class SearchSpace:
    """The candidate grid: widths and resolutions, each strictly increasing."""

    alphas: tuple[float, ...]
    resolutions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(self.alphas))
        object.__setattr__(self, "resolutions", tuple(self.resolutions))
        if not self.alphas or not self.resolutions:
            raise ValidationError("search space must have at least one alpha and one resolution")
        if any(b <= a for a, b in zip(self.alphas, self.alphas[1:])):
            raise ValidationError("alphas must be strictly increasing")
        if any(b <= a for a, b in zip(self.resolutions, self.resolutions[1:])):
            raise ValidationError("resolutions must be strictly increasing")


def default_search_space() -> SearchSpace:
    return SearchSpace(DEFAULT_ALPHAS, DEFAULT_RESOLUTIONS)


def generate_grid(space: SearchSpace) -> tuple[Theta, ...]:
    """Cartesian product in resolution-major order (alphas cycle fastest)."""
    return tuple(Theta(alpha, resolution) for resolution in space.resolutions for alpha in space.alphas)


@dataclass(frozen=True)
class FailureRecord:
    """A design point whose evaluation failed; the search carried on."""

    theta: Theta
    error_kind: str
    message: str

    def __post_init__(self):
        if self.error_kind not in FAILURE_KINDS:
            raise ValidationError(f"error_kind must be one of {FAILURE_KINDS}, got {self.error_kind!r}")


def _theta_key(theta: Theta) -> tuple[float, int]:
    return (theta.alpha, theta.resolution)


def _entry_to_json(entry: ScoredRecord | FailureRecord) -> dict:
    if isinstance(entry, ScoredRecord):
        record = entry.record
        return {
            "kind": "success",
            "alpha": record.theta.alpha,
            "resolution": record.theta.resolution,
            "map": record.accuracy,
            "params_m": record.params_m,
            "cpu_time_s": record.runtime_s,
            "source": record.source,
            "metadata": dict(record.metadata),
            "score": entry.score,
        }
    return {
        "kind": "failure",
        "alpha": entry.theta.alpha,
        "resolution": entry.theta.resolution,
        "error": entry.error_kind,
        "message": entry.message,
    }


def _entry_from_json(obj: dict, line_number: int) -> ScoredRecord | FailureRecord:
    try:
        theta = Theta(obj["alpha"], obj["resolution"])
        if obj["kind"] == "success":
            record = EvaluationRecord(
                theta=theta,
                accuracy=obj["map"],
                params_m=obj["params_m"],
                runtime_s=obj["cpu_time_s"],
                source=obj["source"],
                metadata=obj.get("metadata", {}),
            )
            return ScoredRecord(record, float(obj["score"]))
        if obj["kind"] == "failure":
            return FailureRecord(theta, obj["error"], obj.get("message", ""))
    except LedgerError:
        raise
    except (KeyError, TypeError, ValidationError) as exc:
        raise LedgerError(f"ledger line {line_number}: bad entry ({exc})") from None
    raise LedgerError(f"ledger line {line_number}: unknown entry kind {obj.get('kind')!r}")


class RunLedger:
    """Append-only evaluation outcomes for one search run.

    In-memory always; persisted as JSON lines when a path is given. The file
    starts with a header line and grows by exactly one line per appended
    entry, flushed immediately, so a crash loses at most the line being
    written. load() drops a torn final line (truncating the file back to the
    last complete entry); malformed interior lines raise LedgerError.
    """

    def __init__(
        self,
        weights: NetScoreWeights,
        space: SearchSpace,
        path: str | Path | None = None,
    ):
        self.weights = weights
        self.space = space
        self.entries: list[ScoredRecord | FailureRecord] = []
        self.path = Path(path) if path is not None else None
        if self.path is not None and (not self.path.exists() or self.path.stat().st_size == 0):
            self._write_header()

    def _header_json(self) -> dict:
        return {
            "schema_version": LEDGER_SCHEMA_VERSION,
            "weights": {
                "kappa": self.weights.kappa,
                "beta": self.weights.beta,
                "gamma": self.weights.gamma,
            },
            "space": {
                "alphas": list(self.space.alphas),
                "resolutions": list(self.space.resolutions),
            },
        }

    def _write_header(self):
        try:
            with self.path.open("w", encoding="utf-8") as fh:
                fh.write(json.dumps(self._header_json()) + "\n")
                fh.flush()
        except OSError as exc:
            raise LedgerError(f"could not write ledger header to {self.path}: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "RunLedger":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise LedgerError(f"could not read ledger {path}: {exc}") from exc
        lines = text.splitlines()
        if not lines:
            raise LedgerError(f"ledger {path} is empty, expected a header line")
        try:
            header = json.loads(lines[0])
            version = header["schema_version"]
            weights = NetScoreWeights(**header["weights"])
            space = SearchSpace(tuple(header["space"]["alphas"]), tuple(header["space"]["resolutions"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValidationError) as exc:
            raise LedgerError(f"ledger {path} has a bad header line: {exc}") from None
        if version != LEDGER_SCHEMA_VERSION:
            raise LedgerError(
                f"ledger {path} has schema version {version!r}, expected {LEDGER_SCHEMA_VERSION}"
            )

        ledger = cls(weights, space, path)
        good_lines = [lines[0]]
        for line_number, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                if line_number == len(lines):
                    # torn tail from a crash mid-append; drop it
                    path.write_text("\n".join(good_lines) + "\n", encoding="utf-8")
                    break
                raise LedgerError(f"ledger line {line_number}: invalid JSON") from None
            ledger.entries.append(_entry_from_json(obj, line_number))
            good_lines.append(line)
        return ledger

    @classmethod
    def open(cls, path: str | Path, weights: NetScoreWeights, space: SearchSpace) -> "RunLedger":
        """Load an existing ledger file, or create a fresh one with a header."""
        path = Path(path)
        if path.exists() and path.stat().st_size > 0:
            return cls.load(path)
        return cls(weights, space, path)

    def append(self, entry: ScoredRecord | FailureRecord):
        if not isinstance(entry, (ScoredRecord, FailureRecord)):
            raise ValidationError(f"ledger entries are ScoredRecord or FailureRecord, got {type(entry)!r}")
        self.entries.append(entry)
        if self.path is not None:
            try:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(_entry_to_json(entry)) + "\n")
                    fh.flush()
            except OSError as exc:
                raise LedgerError(f"could not append to ledger {self.path}: {exc}") from exc

    def successes(self) -> dict[tuple[float, int], ScoredRecord]:
        """Latest successful entry per design point, keyed by (alpha, resolution)."""
        out: dict[tuple[float, int], ScoredRecord] = {}
        for entry in self.entries:
            if isinstance(entry, ScoredRecord):
                out[_theta_key(entry.record.theta)] = entry
        return out

    def failures(self) -> dict[tuple[float, int], FailureRecord]:
        """Latest failure per design point that never succeeded."""
        done = self.successes()
        out: dict[tuple[float, int], FailureRecord] = {}
        for entry in self.entries:
            if isinstance(entry, FailureRecord) and _theta_key(entry.theta) not in done:
                out[_theta_key(entry.theta)] = entry
        return out


def _check_ledger_matches(ledger: RunLedger, weights: NetScoreWeights, space: SearchSpace):
    if ledger.weights != weights:
        raise LedgerError(
            f"ledger weights {ledger.weights} do not match requested weights {weights}"
        )
    if ledger.space != space:
        raise LedgerError("ledger search space does not match the requested space")


def explore(
    space: SearchSpace,
    evaluator: EvaluatorConfig,
    weights: NetScoreWeights,
    ledger: RunLedger | None = None,
    workers: int = 1,
) -> RunLedger:
    """Evaluate and score every grid point that is not already successful.

    Evaluator failures become FailureRecords and the sweep continues; only
    ledger I/O failures abort. Failed points are retried on a later run,
    successful ones are skipped. workers > 1 runs that many evaluator child
    processes concurrently (process mode only); entries are still appended in
    grid order.
    """
    if ledger is None:
        ledger = RunLedger(weights, space)
    elif ledger.entries:
        _check_ledger_matches(ledger, weights, space)
    else:
        ledger.weights = weights
        ledger.space = space
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")

    done = set(ledger.successes())
    todo = [theta for theta in generate_grid(space) if _theta_key(theta) not in done]

    if evaluator.mode == "file":
        table = {
            _theta_key(record.theta): record
            for record in ingest_results_file(
                evaluator.file_path, evaluator.num_classes, evaluator.head_style
            )
        }

        def run_one(theta: Theta) -> ScoredRecord | FailureRecord:
            record = table.get(_theta_key(theta))
            if record is None:
                return FailureRecord(
                    theta, "missing_result", "no row for this design point in the results file"
                )
            return ScoredRecord(record, modified_netscore(record, weights))

    elif evaluator.mode == "surrogate":

        def run_one(theta: Theta) -> ScoredRecord | FailureRecord:
            record = surrogate_evaluate(
                theta, evaluator.surrogate, evaluator.num_classes, evaluator.head_style
            )
            return ScoredRecord(record, modified_netscore(record, weights))

    else:  # process

        def run_one(theta: Theta) -> ScoredRecord | FailureRecord:
            try:
                record = evaluate_external(theta, evaluator)
            except EvaluationTimeout as exc:
                return FailureRecord(theta, "timeout", str(exc))
            except ProtocolError as exc:
                return FailureRecord(theta, "protocol", str(exc))
            except ProcessError as exc:
                return FailureRecord(theta, "process", str(exc))
            except EvaluatorError as exc:
                return FailureRecord(theta, "evaluator", str(exc))
            except ValidationError as exc:
                return FailureRecord(theta, "validation", str(exc))
            return ScoredRecord(record, modified_netscore(record, weights))

    if workers > 1 and evaluator.mode == "process":
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for entry in pool.map(run_one, todo):
                ledger.append(entry)
    else:
        for theta in todo:
            ledger.append(run_one(theta))
    return ledger


def select_best(ledger: RunLedger) -> ScoredRecord:
    """The highest-scoring successful entry.

    Exact score ties break deterministically: smaller params_m wins, then
    smaller runtime_s, then smaller alpha, then smaller resolution. Raises
    EmptyLedger when there is nothing to select from.
    """
    candidates = ledger.successes().values()
    if not candidates:
        raise EmptyLedger("ledger holds no successful evaluations")

    def preference(scored: ScoredRecord):
        record = scored.record
        return (
            -scored.score,
            record.params_m,
            record.runtime_s,
            record.theta.alpha,
            record.theta.resolution,
        )

    return min(candidates, key=preference)
