import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frameorder.errors import DegenerateDistributionError, InsufficientSamplesError
from frameorder.partition import (
    QUADRANTS,
    find_token_balanced_threshold,
    partition_quadrants,
    read_partition_report,
    two_way_partition,
    write_partition_report,
)
from frameorder.scorer import ScoredSample

from oracles import exhaustive_balanced_threshold


def _scored(id, ppl, pd, tokens=1):
    return ScoredSample(id=id, token_count=tokens, ppl_strong=ppl, ppl_weak=1.0, pd=pd)


# ---------------------------------------------------------------------------
# find_token_balanced_threshold
# ---------------------------------------------------------------------------


def test_threshold_worked_example():
    pairs = [(1, 5), (2, 3), (3, 2), (4, 6)]
    assert find_token_balanced_threshold(pairs) == 2  # low {1,2}=8 vs high {3,4}=8
    assert exhaustive_balanced_threshold(pairs) == 2


def test_threshold_two_equal_samples():
    assert find_token_balanced_threshold([(1, 3), (2, 3)]) == 1


def test_threshold_identical_values_degenerates():
    assert find_token_balanced_threshold([(5, 1), (5, 1), (5, 9)]) == 5


def test_threshold_insufficient_samples():
    with pytest.raises(InsufficientSamplesError):
        find_token_balanced_threshold([(1, 10)])
    with pytest.raises(InsufficientSamplesError):
        find_token_balanced_threshold([])


_pairs_st = st.lists(
    st.tuples(
        st.floats(min_value=-100, max_value=100, allow_nan=False),
        st.integers(min_value=1, max_value=1000),
    ),
    min_size=2,
    max_size=60,
)


@settings(max_examples=200)
@given(_pairs_st)
def test_threshold_matches_exhaustive_oracle(pairs):
    assert find_token_balanced_threshold(pairs) == exhaustive_balanced_threshold(pairs)


@settings(max_examples=100)
@given(_pairs_st)
def test_threshold_order_invariant(pairs):
    shuffled = list(pairs)
    random.Random(7).shuffle(shuffled)
    assert find_token_balanced_threshold(pairs) == find_token_balanced_threshold(shuffled)


# ---------------------------------------------------------------------------
# two_way_partition
# ---------------------------------------------------------------------------

_GRID = [
    _scored("s1", ppl=1.0, pd=0.1),
    _scored("s2", ppl=1.0, pd=0.9),
    _scored("s3", ppl=9.0, pd=0.1),
    _scored("s4", ppl=9.0, pd=0.9),
]


def test_two_way_by_ppl_on_grid():
    split = two_way_partition(_GRID, "ppl")
    assert set(split.low_ids) == {"s1", "s2"}
    assert set(split.high_ids) == {"s3", "s4"}


def test_two_way_identical_values_degenerate():
    same = [_scored(f"s{i}", ppl=2.0, pd=0.5) for i in range(4)]
    with pytest.raises(DegenerateDistributionError):
        two_way_partition(same, "pd")


def test_two_way_balance_bound_random():
    rng = random.Random(3)
    scored = [
        _scored(f"s{i}", ppl=rng.random(), pd=rng.random(), tokens=rng.randint(1, 500))
        for i in range(100)
    ]
    split = two_way_partition(scored, "ppl")
    tokens = {s.id: s.token_count for s in scored}
    low = sum(tokens[i] for i in split.low_ids)
    high = sum(tokens[i] for i in split.high_ids)
    max_tok = max(tokens.values())
    assert abs(low - high) <= max_tok
    # and the threshold is exactly what the exhaustive scan picks
    pairs = [(s.ppl_strong, s.token_count) for s in scored]
    assert split.threshold == exhaustive_balanced_threshold(pairs)


# ---------------------------------------------------------------------------
# partition_quadrants
# ---------------------------------------------------------------------------


def test_quadrants_on_grid():
    part = partition_quadrants(_GRID)
    assert part.labels == {"s1": "Q1", "s2": "Q2", "s3": "Q3", "s4": "Q4"}
    assert all(part.token_totals[q] == 1 for q in QUADRANTS)


def test_quadrants_unit_weights_split_evenly():
    rng = random.Random(11)
    scored = [_scored(f"s{i:04d}", ppl=rng.random(), pd=rng.random()) for i in range(1000)]
    part = partition_quadrants(scored)
    counts = {q: 0 for q in QUADRANTS}
    for q in part.labels.values():
        counts[q] += 1
    for q in QUADRANTS:
        assert abs(counts[q] - 250) <= 1


def test_quadrants_identical_ppl_degenerate():
    scored = [_scored(f"s{i}", ppl=5.0, pd=i * 0.1) for i in range(10)]
    with pytest.raises(DegenerateDistributionError):
        partition_quadrants(scored)


def test_quadrants_too_few_samples():
    with pytest.raises(InsufficientSamplesError):
        partition_quadrants(_GRID[:3])


def test_quadrants_dominant_sample_degenerate():
    # one sample holding most of the token mass isolates itself on one side
    # of the ppl split, leaving too little to split by pd
    scored = [
        _scored("big", ppl=1.0, pd=0.5, tokens=9000),
        _scored("s1", ppl=2.0, pd=0.1, tokens=10),
        _scored("s2", ppl=3.0, pd=0.9, tokens=10),
        _scored("s3", ppl=4.0, pd=0.4, tokens=10),
    ]
    with pytest.raises(DegenerateDistributionError):
        partition_quadrants(scored)


def test_labels_exhaustive_exclusive_and_threshold_consistent():
    rng = random.Random(5)
    scored = [
        _scored(f"s{i}", ppl=rng.uniform(1, 50), pd=rng.uniform(-1, 1), tokens=rng.randint(1, 200))
        for i in range(300)
    ]
    part = partition_quadrants(scored)
    assert set(part.labels) == {s.id for s in scored}
    t = part.thresholds
    for s in scored:
        q = part.labels[s.id]
        if s.ppl_strong <= t.ppl_split:
            assert q == ("Q2" if s.pd > t.pd_split_low_ppl else "Q1")
        else:
            assert q == ("Q4" if s.pd > t.pd_split_high_ppl else "Q3")
    total = sum(s.token_count for s in scored)
    max_tok = max(s.token_count for s in scored)
    for q in QUADRANTS:
        assert abs(part.token_totals[q] - total / 4) <= max_tok


def test_monotone_consistency_in_pd():
    rng = random.Random(13)
    scored = [
        _scored(f"s{i}", ppl=rng.uniform(1, 50), pd=rng.uniform(-1, 1), tokens=rng.randint(1, 50))
        for i in range(120)
    ]
    base = partition_quadrants(scored)
    high_pd = {"Q2", "Q4"}
    victim = next(s for s in scored if base.labels[s.id] in high_pd)
    raised = [
        s if s.id != victim.id else _scored(victim.id, victim.ppl_strong, victim.pd + 0.5, victim.token_count)
        for s in scored
    ]
    moved = partition_quadrants(raised)
    # raising pd never demotes the sample to a low-pd quadrant
    assert moved.labels[victim.id] in high_pd


def test_partition_determinism_across_runs():
    rng = random.Random(17)
    scored = [
        _scored(f"s{i}", ppl=rng.uniform(1, 9), pd=rng.uniform(0, 1), tokens=rng.randint(1, 99))
        for i in range(80)
    ]
    first = partition_quadrants(scored)
    second = partition_quadrants(scored)
    assert first.labels == second.labels
    assert first.thresholds == second.thresholds


def test_partition_report_round_trip(tmp_path):
    part = partition_quadrants(_GRID)
    path = tmp_path / "partition.jsonl"
    write_partition_report(part, path)
    back = read_partition_report(path)
    assert back.labels == part.labels
    assert back.thresholds == part.thresholds
    assert back.token_totals == part.token_totals
    first = path.read_bytes()
    write_partition_report(part, path)
    assert path.read_bytes() == first
