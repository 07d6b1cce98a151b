"""The 13-point black/white example, concrete and abstract.

A depth-1 tree splits at x <= 21/2.  The input 5 lands on the left (7 white,
2 black) and is called white.  Is that still true if any two training points
are removed?  The oracle retrains 92 times to find out; the abstract learner
tries to answer from one symbolic run.
"""
from fractions import Fraction

from poison_proof import AbstractTrainingSet, verify
from poison_proof.abstract import analyze_split
from poison_proof.learner import best_split, dtrace, score
from poison_proof.oracle import brute_force_verify
from poison_proof.toy import black_white, point

T = black_white()
names = T.schema.class_names
phi = best_split(T)
print("best split:", phi, " score:", score(T, phi))

for v in (5, 18):
    t = dtrace(T, point(v), 1)
    print(f"x={v}: label {names[t.label]}, posterior {[str(p) for p in t.posterior]}")

report = brute_force_verify(T, point(5), 2, 1)
print(f"\noracle, n=2: robust={report.robust} over {report.datasets_checked} training sets")

# Which symbolic splits survive at n=2?  Each score is an interval over all
# 92 training sets; a split stays a candidate if its lower bound reaches the
# smallest upper bound.
split = analyze_split(AbstractTrainingSet.from_set(T, 2))
for rho, iv in split.scores.items():
    mark = "*" if rho in split.chosen else " "
    print(f"  {mark} {str(rho):<22} score in [{float(iv.lo):.3f}, {float(iv.hi):.3f}]")

for n in (0, 1, 2):
    for dom in ("box", "disjuncts"):
        out = verify(T, point(5), n, 1, dom)
        post = ", ".join(f"[{Fraction(iv.lo)}, {Fraction(iv.hi)}]" for iv in out.posterior)
        print(f"verify n={n} {dom:<9}: {out.verdict:<7} posterior ({post})")

# The candidate x <= [4,7) keeps x=5 in its "maybe" zone, and its right side
# (7..14: four white, four black) cannot be decided, so n >= 1 stays unknown
# even though every concrete run says white.
