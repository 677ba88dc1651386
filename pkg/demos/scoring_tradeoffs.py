"""
Scoring accuracy against size and speed
=======================================

The score is a decibel-scale figure of merit: 20 * (kappa*log10(a)
- beta*log10(p) - gamma*log10(r)) for accuracy a (mAP percent), size p
(million parameters), and runtime r (CPU seconds). Bigger is better.
"""

from archdse import EvaluationRecord, NetScoreWeights, Theta, modified_netscore, netscore_values

weights = NetScoreWeights()  # kappa=1.0, beta=0.45, gamma=0.2

# A model with 10 percent mAP, one million parameters, one second per image
# scores exactly 20 dB; the denominators contribute nothing at 1.0.
print("baseline (10, 1.0, 1.0):", netscore_values(10.0, 1.0, 1.0, weights))

# The exponents turn multiplicative changes into fixed additive steps.
base = netscore_values(8.0, 2.0, 0.1, weights)
print("\ndecade steps from an (8, 2.0, 0.1) operating point:")
print("  10x the parameters:", netscore_values(8.0, 20.0, 0.1, weights) - base, "dB")
print("  10x the runtime:   ", netscore_values(8.0, 2.0, 1.0, weights) - base, "dB")
print("  10x the accuracy:  ", netscore_values(80.0, 2.0, 0.1, weights) - base, "dB")

# Two candidate detectors. The second is more accurate but pays for it with
# four times the parameters and double the latency; the score says whether
# the accuracy bought enough.
small = EvaluationRecord(
    theta=Theta(0.5, 160),
    accuracy=16.1,
    params_m=1.54,
    runtime_s=0.057,
    source="measured_file",
)
large = EvaluationRecord(
    theta=Theta(1.3, 224),
    accuracy=22.1,
    params_m=6.42,
    runtime_s=0.129,
    source="measured_file",
)

print("\nsmall detector:", round(modified_netscore(small, weights), 4), "dB")
print("large detector:", round(modified_netscore(large, weights), 4), "dB")

# How much the verdict depends on what you care about: weighting runtime
# harder flips preferences toward the small model, discounting size favors
# the large one.
for label, w in [
    ("default", NetScoreWeights()),
    ("runtime-heavy", NetScoreWeights(kappa=1.0, beta=0.45, gamma=1.0)),
    ("size-blind", NetScoreWeights(kappa=1.0, beta=0.0, gamma=0.2)),
]:
    s = modified_netscore(small, w)
    l = modified_netscore(large, w)
    winner = "small" if s > l else "large"
    print(f"{label:>14}: small={s:7.4f}  large={l:7.4f}  -> {winner}")
