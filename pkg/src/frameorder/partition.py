"""Token-balanced thresholding and quadrant assignment.

The split value for a population is the candidate threshold (a sample value)
whose induced two-way split has the most equal token totals on the two sides;
ties go to the smaller low side. Samples exactly at a threshold go low.

Quadrants are built by splitting first on ppl, then splitting each ppl half
independently on pd:

    Q1  low ppl,  low pd        Q2  low ppl,  high pd
    Q3  high ppl, low pd        Q4  high ppl, high pd

With generic value distributions each quadrant's token total lands within one
maximal sample of a quarter of the corpus.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import canonical_json, _iter_lines, _parse_json_line
from .errors import (
    CorpusFormatError,
    DegenerateDistributionError,
    InsufficientSamplesError,
)
from .scorer import ScoredSample

QUADRANTS = ("Q1", "Q2", "Q3", "Q4")


@dataclass(frozen=True, slots=True)
class Thresholds:
    ppl_split: float
    pd_split_low_ppl: float
    pd_split_high_ppl: float


@dataclass(frozen=True, slots=True)
class QuadrantPartition:
    thresholds: Thresholds
    labels: dict  # id -> "Q1".."Q4", corpus order preserved
    token_totals: dict  # quadrant -> token total

    def ids_for(self, quadrant: str) -> list[str]:
        return [i for i, q in self.labels.items() if q == quadrant]


@dataclass(frozen=True, slots=True)
class TwoWaySplit:
    metric: str  # "ppl" or "pd"
    threshold: float
    low_ids: tuple[str, ...]
    high_ids: tuple[str, ...]


def find_token_balanced_threshold(samples: Sequence[tuple[float, int]]) -> float:
    """Weighted-median split value over (value, token_weight) pairs.

    Scans every candidate threshold (each distinct value; '<= goes low') and
    returns the one minimizing |tokens_low - tokens_high|, preferring the
    smaller low side on ties.
    """
    if len(samples) < 2:
        raise InsufficientSamplesError(f"need at least 2 samples to split, got {len(samples)}")
    values = np.asarray([v for v, _ in samples], dtype=np.float64)
    weights = np.asarray([w for _, w in samples], dtype=np.int64)
    total = int(weights.sum())
    if total < 2:
        raise InsufficientSamplesError(f"need total token weight >= 2, got {total}")
    return _threshold_from_arrays(values, weights, total)


def _threshold_from_arrays(values: np.ndarray, weights: np.ndarray, total: int) -> float:
    order = np.argsort(values, kind="stable")
    sorted_values = values[order]
    cum = np.cumsum(weights[order])
    # last index of each distinct value = cumulative weight at that candidate
    is_boundary = np.empty(len(sorted_values), dtype=bool)
    is_boundary[:-1] = sorted_values[:-1] != sorted_values[1:]
    is_boundary[-1] = True
    candidates = sorted_values[is_boundary]
    cum_at = cum[is_boundary]
    imbalance = np.abs(2 * cum_at - total)
    return float(candidates[int(np.argmin(imbalance))])


def two_way_partition(scored: Sequence[ScoredSample], metric: str) -> TwoWaySplit:
    """Token-balanced two-way split of scored samples by ppl or pd."""
    if metric == "ppl":
        values = [s.ppl_strong for s in scored]
    elif metric == "pd":
        values = [s.pd for s in scored]
    else:
        raise ValueError(f"unknown metric {metric!r}")
    threshold = find_token_balanced_threshold(
        [(v, s.token_count) for v, s in zip(values, scored)]
    )
    low = tuple(s.id for v, s in zip(values, scored) if v <= threshold)
    high = tuple(s.id for v, s in zip(values, scored) if v > threshold)
    if not high:
        raise DegenerateDistributionError(
            f"all {metric} values fall at or below the balanced threshold "
            f"{threshold}; cannot form a two-way split"
        )
    return TwoWaySplit(metric=metric, threshold=threshold, low_ids=low, high_ids=high)


def partition_quadrants(scored: Sequence[ScoredSample]) -> QuadrantPartition:
    """Assign each scored sample one of Q1..Q4 with token-balanced thresholds.

    The ppl threshold balances the whole corpus; each ppl half then gets its
    own pd threshold (the two usually differ only slightly). Degenerate
    distributions that would leave a quadrant empty abort with a diagnostic,
    since downstream scheduling needs four non-empty sources.
    """
    n = len(scored)
    if n < 4:
        raise InsufficientSamplesError(f"need at least 4 samples to form quadrants, got {n}")

    ppl = np.asarray([s.ppl_strong for s in scored], dtype=np.float64)
    pd = np.asarray([s.pd for s in scored], dtype=np.float64)
    weights = np.asarray([s.token_count for s in scored], dtype=np.int64)
    total = int(weights.sum())

    ppl_split = _threshold_from_arrays(ppl, weights, total)
    low_mask = ppl <= ppl_split
    if not low_mask.any() or low_mask.all():
        raise DegenerateDistributionError(
            "ppl split leaves one side empty (are all ppl values identical?)"
        )

    pd_splits = {}
    for side, mask in (("low", low_mask), ("high", ~low_mask)):
        side_pd = pd[mask]
        side_w = weights[mask]
        if len(side_pd) < 2:
            raise DegenerateDistributionError(
                f"{side}-ppl half has only {len(side_pd)} sample(s); cannot split by pd"
            )
        split = _threshold_from_arrays(side_pd, side_w, int(side_w.sum()))
        if (side_pd > split).sum() == 0:
            raise DegenerateDistributionError(
                f"pd split of the {side}-ppl half leaves its high-pd quadrant empty"
            )
        pd_splits[side] = split

    thresholds = Thresholds(
        ppl_split=ppl_split,
        pd_split_low_ppl=pd_splits["low"],
        pd_split_high_ppl=pd_splits["high"],
    )

    high_pd = np.where(low_mask, pd > thresholds.pd_split_low_ppl, pd > thresholds.pd_split_high_ppl)
    # Q1/Q2 low ppl, Q3/Q4 high ppl; even index = low pd
    codes = np.where(low_mask, np.where(high_pd, 1, 0), np.where(high_pd, 3, 2))
    labels = {s.id: QUADRANTS[c] for s, c in zip(scored, codes)}
    token_totals = {
        q: int(weights[codes == c].sum()) for c, q in enumerate(QUADRANTS)
    }
    for q, t in token_totals.items():
        if t == 0:
            raise DegenerateDistributionError(f"quadrant {q} is empty after splitting")
    return QuadrantPartition(thresholds=thresholds, labels=labels, token_totals=token_totals)


# ---------------------------------------------------------------------------
# Partition report file
# ---------------------------------------------------------------------------


def write_partition_report(partition: QuadrantPartition, path) -> None:
    header = {
        "ppl_split": partition.thresholds.ppl_split,
        "pd_split_low_ppl": partition.thresholds.pd_split_low_ppl,
        "pd_split_high_ppl": partition.thresholds.pd_split_high_ppl,
        "token_totals": partition.token_totals,
    }
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(canonical_json(header) + "\n")
        for sample_id, quadrant in partition.labels.items():
            fh.write(canonical_json({"id": sample_id, "quadrant": quadrant}) + "\n")


def read_partition_report(path) -> QuadrantPartition:
    lines = _iter_lines(path)
    try:
        header_no, header_line = next(lines)
    except StopIteration:
        raise CorpusFormatError(path, 0, "empty partition report")
    header = _parse_json_line(path, header_no, header_line)
    try:
        thresholds = Thresholds(
            ppl_split=float(header["ppl_split"]),
            pd_split_low_ppl=float(header["pd_split_low_ppl"]),
            pd_split_high_ppl=float(header["pd_split_high_ppl"]),
        )
        token_totals = {q: int(v) for q, v in header["token_totals"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusFormatError(path, header_no, f"bad partition header: {exc}") from exc
    labels = {}
    for line_no, line in lines:
        obj = _parse_json_line(path, line_no, line)
        quadrant = obj.get("quadrant")
        if quadrant not in QUADRANTS:
            raise CorpusFormatError(path, line_no, f"unknown quadrant {quadrant!r}")
        labels[obj["id"]] = quadrant
    return QuadrantPartition(thresholds=thresholds, labels=labels, token_totals=token_totals)
