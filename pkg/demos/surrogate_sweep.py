"""
Sweeping the design grid with the built-in surrogate
====================================================

A full exploration without any training pipeline: the surrogate supplies
plausible accuracy and runtime numbers, the engine scores every grid point,
persists a resumable ledger, and reports the winner plus plottable surfaces.
"""

import tempfile
from pathlib import Path

from archdse import (
    EvaluatorConfig,
    NetScoreWeights,
    RunLedger,
    build_surface,
    default_search_space,
    explore,
    select_best,
    surface_to_csv,
)

workdir = Path(tempfile.mkdtemp(prefix="surrogate_sweep_"))
ledger_path = workdir / "run.jsonl"

space = default_search_space()
weights = NetScoreWeights()
config = EvaluatorConfig(mode="surrogate")

ledger = RunLedger.open(ledger_path, weights, space)
explore(space, config, weights, ledger)
print(f"evaluated {len(ledger.entries)} design points")

best = select_best(ledger)
theta = best.record.theta
print(f"best point: alpha={theta.alpha} resolution={theta.resolution}")
print(f"  score {best.score:.4f} dB at map={best.record.accuracy:.2f}, "
      f"params_m={best.record.params_m:.3f}, cpu_time_s={best.record.runtime_s:.3f}")

# Because the ledger is on disk, running explore again is free: every point
# is already successful, so nothing is re-evaluated.
before = len(ledger.entries)
explore(space, config, weights, RunLedger.load(ledger_path))
print(f"re-run added {len(RunLedger.load(ledger_path).entries) - before} entries")

# Export the metric surfaces that heatmap tools plot directly.
for metric in ("map", "cpu_time_s", "netscore"):
    out = workdir / f"{metric}_surface.csv"
    out.write_text(surface_to_csv(build_surface(ledger, metric)), encoding="utf-8")
    print("wrote", out)

print("\nnetscore surface, alphas down the side and resolutions across:")
print(surface_to_csv(build_surface(ledger, "netscore")))
