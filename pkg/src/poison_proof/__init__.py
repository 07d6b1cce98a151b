"""Prove decision-tree predictions robust to removal of up to n training elements."""
from .abstract import (BOX, DISJUNCTS, NAIVE, OPTIMAL, Limits, VerificationOutcome, best_split_abs,
                       branch_zero_entropy, candidate_predicates_abs, cprob_abs, dtrace_abs, ent_abs,
                       filter_abs, filter_branches, pure, score_abs, size_abs, verify)
from .dataset import (DatasetError, Example, FeatureSchema, TrainingSet, load_csv, load_mnist_idx,
                      train_test_split)
from .domain import NULL, AbstractTrainingSet, SymbolicThreshold, Threshold, Truth, gamma_count
from .interval import Interval, dominates
from .learner import LearnerConfig, Trace, best_split, cprob, dtrace, ent, score

__version__ = "0.1.0"
