"""Abstract transformers on small inputs: class probabilities and the cost of joining."""
from poison_proof import AbstractTrainingSet, Threshold
from poison_proof.abstract import NAIVE, OPTIMAL, cprob_abs, ent_abs, filter_abs, filter_branches
from poison_proof.learner import restrict
from poison_proof.toy import black_white, point

left = restrict(black_white(), Threshold(0, 10))  # 7 white, 2 black

for n in range(4):
    A = AbstractTrainingSet.from_set(left, n)
    print(f"n={n}  naive {cprob_abs(A, NAIVE)}  optimal {cprob_abs(A, OPTIMAL)}  gini {ent_abs(A)}")

# Two candidate splits that send x=4 to different sides.  Joining the two
# results into one abstract set forgets which side was taken: the slack
# jumps from 1 to 5.  Keeping them as separate disjuncts does not.
A = AbstractTrainingSet.from_set(left, 1)
preds = {Threshold(0, 3), Threshold(0, 4)}
print("\nbox:      ", filter_abs(A, preds, point(4)))
print("disjuncts:", filter_branches(A, preds, point(4)))
