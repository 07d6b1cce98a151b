"""Random small instances checked against exhaustive retraining."""
from collections import Counter

from poison_proof.oracle import soundness_sweep

report = soundness_sweep(seed=0, trials=200)
print(f"{report.trials} instances, {len(report.violations)} violations")
print("abstract verdicts that hold at n but not at a smaller n:", report.abstract_antitone_gaps or "none")
print(Counter(v.kind for v in report.violations) or "all checks passed")
