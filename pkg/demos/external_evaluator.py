"""
Plugging in an external evaluator process
=========================================

Real measurements come from outside: the engine launches an evaluator
command, writes one JSON request per line, and reads one response per line.
Here the evaluator is the bundled replay adapter serving a small table of
pretend measurements, including a hole in the grid to show failure handling.
"""

import sys
import tempfile
from pathlib import Path

from archdse import EvaluatorConfig, NetScoreWeights, SearchSpace, explore, select_best

ADAPTER = Path(__file__).resolve().parents[1] / "adapter" / "src" / "evaladapter" / "server.py"

workdir = Path(tempfile.mkdtemp(prefix="external_evaluator_"))

# The measured results table: one design point is deliberately missing.
table = workdir / "measurements.csv"
table.write_text(
    "alpha,resolution,map,cpu_time_s,params_m\n"
    "0.5,160,16.1,0.057,\n"
    "1.0,160,19.8,0.084,\n"
    "1.0,224,22.1,0.131,3.47\n",
    encoding="utf-8",
)

space = SearchSpace(alphas=(0.5, 1.0), resolutions=(160, 224))
weights = NetScoreWeights()

config = EvaluatorConfig(
    mode="process",
    command=(sys.executable, str(ADAPTER), "replay", "--table", str(table)),
    timeout_s=30.0,
)

ledger = explore(space, config, weights)
print(f"grid points: {len(ledger.entries)}, "
      f"successes: {len(ledger.successes())}, failures: {len(ledger.failures())}")

for key, failure in ledger.failures().items():
    print(f"  failed {key}: {failure.error_kind} ({failure.message})")

best = select_best(ledger)
print(f"best available point: alpha={best.record.theta.alpha} "
      f"resolution={best.record.theta.resolution} score={best.score:.4f}")

# The same table read directly, skipping the subprocess, lands on the same
# numbers; the wire protocol adds nothing and loses nothing.
file_ledger = explore(space, EvaluatorConfig(mode="file", file_path=table), weights)
agreement = all(
    file_ledger.successes()[key].score == scored.score
    for key, scored in ledger.successes().items()
)
print("file-mode scores match process-mode scores:", agreement)
