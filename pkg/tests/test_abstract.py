from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from helpers import abstract_sets, half_points, members, one_dim, small_sets
from poison_proof.abstract import (BOX, DISJUNCTS, NAIVE, OPTIMAL, Limits, analyze_split, best_split_abs,
                                   branch_zero_entropy, candidate_predicates_abs, cprob_abs, dtrace_abs, ent_abs,
                                   filter_abs, filter_branches, minimal_candidates, pure, score_abs, size_abs,
                                   verify)
from poison_proof.dataset import Example
from poison_proof.domain import NULL, AbstractTrainingSet, SymbolicThreshold, Threshold
from poison_proof.interval import Interval
from poison_proof.learner import best_split, candidate_predicates, cprob, dtrace, ent, restrict, score
from poison_proof.oracle import brute_force_verify
from poison_proof.toy import BLACK, WHITE, point

LEFT = Threshold(0, 10)


@pytest.fixture
def left(bw):
    return restrict(bw, LEFT)


def at(T, n):
    return AbstractTrainingSet.from_set(T, n)


def test_size(bw):
    assert size_abs(at(bw, 2)) == Interval(11, 13)
    assert size_abs(at(bw, 0)) == Interval(13)
    assert size_abs(at(bw, 13)) == Interval(0, 13)


def test_cprob_running_example(left):
    assert cprob_abs(at(left, 2), NAIVE) == (Interval(F(5, 9), 1), Interval(0, F(2, 7)))
    assert cprob_abs(at(left, 2), OPTIMAL) == (Interval(F(5, 7), 1), Interval(0, F(2, 7)))
    assert sum(1 for _ in members(at(left, 2))) == 46
    for i in range(2):
        vals = [cprob(T)[i] for T in members(at(left, 2))]
        assert cprob_abs(at(left, 2))[i] == Interval(min(vals), max(vals))


def test_cprob_degenerate(bw, left):
    for mode in (NAIVE, OPTIMAL):
        assert cprob_abs(at(left, 0), mode) == (Interval(F(7, 9)), Interval(F(2, 9)))
        assert cprob_abs(at(bw, 13), mode) == (Interval(0, 1), Interval(0, 1))


def test_ent_examples(bw, left):
    assert ent_abs(at(restrict(bw, LEFT, False), 0)) == Interval(0)
    assert ent_abs(at(left, 0)) == Interval(F(28, 81))
    # clamped to the attainable Gini range for two classes
    assert ent_abs(at(left, 9)).hi == F(1, 2)


def test_score_zero_slack(bw):
    assert score_abs(at(bw, 0), LEFT) == Interval(F(28, 9))


def test_symbolic_candidates(bw):
    tiles = candidate_predicates_abs(at(bw, 2))
    bounds = [(int(r.lower), int(r.upper)) for r in tiles]
    assert bounds == [(0, 1), (1, 2), (2, 3), (3, 4), (4, 7)] + [(v, v + 1) for v in range(7, 14)]
    assert len(tiles) == len(candidate_predicates(bw))


def test_minimal_interval_selection():
    names = "abcd"
    scores = dict(zip(names, [Interval(1, 3), Interval(2, 5), Interval(F(5, 2), 6), Interval(4, 7)]))
    assert minimal_candidates(scores, names) == ["a", "b", "c"]


def test_best_split_examples(bw):
    assert best_split_abs(at(one_dim([2], [0]), 0)) == {NULL}
    chosen = best_split_abs(at(bw, 2))
    assert any(isinstance(p, SymbolicThreshold) and p.covers(Threshold(0, F(21, 2))) for p in chosen)
    assert NULL not in chosen
    assert best_split_abs(at(bw, 0)) == {SymbolicThreshold(0, 10, 11)}


def test_best_split_allows_null_when_a_side_can_vanish():
    T = one_dim([0, 1], [0, 1])
    # removing either element leaves a single point with no split
    assert best_split_abs(at(T, 1)) == {SymbolicThreshold(0, 0, 1), NULL}


def test_filter_examples(bw, left):
    assert filter_abs(at(bw, 2), {LEFT}, point(4)) == at(left, 2)
    A = at(left, 1)
    preds = {Threshold(0, 3), Threshold(0, 4)}
    J = filter_abs(A, preds, point(4))
    assert J.size == 9 and J.n == 5
    parts = filter_branches(A, preds, point(4))
    assert [(p.size, p.n) for p in parts] == [(5, 1), (5, 1)]
    exact = filter_abs(at(bw, 0), {LEFT}, point(18))
    assert exact == at(restrict(bw, LEFT, False), 0)
    with pytest.raises(ValueError):
        filter_abs(A, {NULL}, point(4))


def test_pure_and_zero_entropy_branch(left):
    whites = left.subset(left.labels == WHITE)
    assert pure(at(left, 2), WHITE) == at(whites, 0)
    assert pure(at(left, 2), BLACK) is None
    only = at(whites, 1)
    assert pure(only, WHITE) == only
    then, other = branch_zero_entropy(at(left, 2))
    assert then == at(whites, 0) and other == at(left, 2)
    then, other = branch_zero_entropy(at(left, 1))
    assert then is None and other == at(left, 1)
    assert branch_zero_entropy(only) == (only, only)


def test_dtrace_abs_running_example(bw):
    out = dtrace_abs(at(bw, 0), point(18), 1, BOX)
    assert out.robust and out.label == BLACK
    assert out.posterior == (Interval(0), Interval(1))
    out = dtrace_abs(at(bw, 2), point(5), 1, DISJUNCTS)
    # every concrete run says white; the abstraction must at least allow it
    assert brute_force_verify(bw, point(5), 2, 1).robust
    assert WHITE in out.candidates


def test_verify_contract(bw):
    out = verify(bw, point(5), 13, 1)
    assert not out.robust and out.posterior == (Interval(0, 1), Interval(0, 1))
    assert verify(bw, point(18), 0, 2, BOX).label == BLACK
    with pytest.raises(ValueError):
        verify(bw, point(5), 14, 1)
    with pytest.raises(ValueError):
        verify(bw.subset([False] * 13), point(5), 0, 1)


def test_outcome_json(bw):
    j = verify(bw, point(18), 0, 1).to_json()
    assert j["verdict"] == "robust" and j["label"] == BLACK
    assert j["posterior"] == [["0/1", "0/1"], ["1/1", "1/1"]]
    assert {"elapsedMs", "peakDisjuncts", "terminalsCount"} <= j.keys()
    j = verify(bw, point(5), 13, 1).to_json()
    assert j["candidates"] == [0, 1] and "label" not in j


def test_limits_give_unknown(bw):
    out = verify(bw, point(5), 2, 3, DISJUNCTS, limits=Limits(max_disjuncts=1))
    assert not out.robust and out.limit_exceeded == "memory"
    assert out.candidates == {0, 1}
    out = verify(bw, point(5), 2, 3, limits=Limits(timeout_s=0))
    assert out.limit_exceeded == "timeout"
    out = verify(bw, point(5), 2, 3, limits=Limits(max_memory_bytes=1))
    assert out.limit_exceeded == "memory"


def test_zero_slack_on_a_training_point_is_exact(bw):
    # The test point's twin survives every filter, so no predicate evaluates to
    # "maybe"; with a unique best split the run is the concrete one.
    for v in [0, 1, 2, 3, 4, 7, 8, 9, 10, 11, 12, 13, 14]:
        for domain in (BOX, DISJUNCTS):
            out = verify(bw, point(v), 0, 1, domain)
            assert out.robust and out.label == dtrace(bw, point(v), 1).label


# -- properties against enumeration ----------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(abstract_sets(max_size=9), st.sampled_from([NAIVE, OPTIMAL]))
def test_cprob_and_ent_contain_members(A, mode):
    cp, e = cprob_abs(A, mode), ent_abs(A, mode)
    opt = cprob_abs(A, OPTIMAL)
    nai = cprob_abs(A, NAIVE)
    assert all(o.within(n) for o, n in zip(opt, nai))
    for T in members(A):
        if len(T) == 0:
            continue
        assert all(p in iv for p, iv in zip(cprob(T), cp))
        assert ent(T) in e


@settings(max_examples=60, deadline=None)
@given(abstract_sets(max_size=8, max_n=2).filter(lambda A: A.n < A.size))
def test_optimal_cprob_is_exact(A):
    got = cprob_abs(A, OPTIMAL)
    probs = [cprob(T) for T in members(A)]
    for i, iv in enumerate(got):
        assert iv == Interval(min(p[i] for p in probs), max(p[i] for p in probs))


@settings(max_examples=50, deadline=None)
@given(abstract_sets(max_size=10, max_n=2), st.sampled_from([NAIVE, OPTIMAL]))
def test_split_sound(A, mode):
    split = analyze_split(A, mode)
    tiles = list(split.scores)
    for T in members(A):
        if len(T) == 0:
            continue
        for phi in candidate_predicates(T):
            rho = [r for r in tiles if r.covers(phi)]
            if not len(restrict(T, phi)) or not len(restrict(T, phi, False)):
                continue
            assert len(rho) == 1
            assert score(T, phi) in split.scores[rho[0]]
            assert score(T, phi) in score_abs(A, rho[0], mode)
        phi = best_split(T)
        if phi is NULL:
            assert NULL in split.chosen
        else:
            assert any(r.covers(phi) for r in split.chosen if r is not NULL)


@settings(max_examples=40, deadline=None)
@given(abstract_sets(max_size=8, max_n=2), st.data())
def test_monotone_in_slack(A, data):
    if A.n + 1 > A.size:
        return
    B = AbstractTrainingSet(A.root, A.mask, A.n + 1)
    assert A <= B
    for mode in (NAIVE, OPTIMAL):
        # the naive quotient can leave [0, 1] just before the n = |T| corner case
        if mode == OPTIMAL or B.n < B.size:
            assert all(a.within(b) for a, b in zip(cprob_abs(A, mode), cprob_abs(B, mode)))
        assert ent_abs(A, mode).within(ent_abs(B, mode))
        assert size_abs(A).within(size_abs(B))
        sa, sb = analyze_split(A, mode), analyze_split(B, mode)
        assert sa.chosen <= sb.chosen
        for rho, iv in sa.scores.items():
            assert iv.within(sb.scores[rho])
    x = Example(tuple(data.draw(half_points(5)) for _ in range(A.root.schema.feature_count)))
    preds = [r for r in candidate_predicates_abs(A)]
    for r in preds:
        for side in (True, False):
            assert A.restrict(r, side) <= B.restrict(r, side)
    if preds:
        assert filter_abs(A, preds, x) <= filter_abs(B, preds, x)


@settings(max_examples=40, deadline=None)
@given(small_sets(max_size=9, max_features=2), st.integers(0, 2), st.integers(1, 3), st.data())
def test_dtrace_abs_sound(T, n, depth, data):
    n = min(n, len(T) - 1)
    x = Example(tuple(data.draw(half_points(5)) for _ in range(T.schema.feature_count)))
    A = at(T, n)
    labels = {dtrace(S, x, depth).label for S in members(A)}
    results = {}
    for domain in (BOX, DISJUNCTS):
        for mode in (NAIVE, OPTIMAL):
            out = dtrace_abs(A, x, depth, domain, mode)
            results[domain, mode] = out.robust
            assert labels <= out.candidates
            if out.robust:
                assert labels == {out.label}
            # growth of the disjunct list stays within the branching bound
            width = len(candidate_predicates(T)) + 1
            for prev, cur in zip(out.live_counts, out.live_counts[1:]):
                assert cur <= width * prev * 2
    for mode in (NAIVE, OPTIMAL):
        assert not results[BOX, mode] or results[DISJUNCTS, mode]
