"""Batch-schedule construction: S-shape mixing, merge plans, stage orders.

The ordering pipeline is a double loop. Quadrant pairs sharing a ppl side are
merged first (Q3+Q4 and Q1+Q2, shuffled within each quadrant), then the two
halves are merged in sequence-preserving mode, yielding the four-stage order
Q3 -> Q4 -> Q1 -> Q2 with smooth transitions. Each merge draws a decaying
share of every batch from its first source:

    f(p) = 1 / (1 + exp(a * (p - 0.5))),  p = i / m for batch i of m

with steepness a = 35 by default (sharp transitions; the proportion function
is only used for smoothing at stage boundaries, not as a soft curriculum).

Integerizing f(p)*N is exact bookkeeping, because per-batch rounding drifts
and fractional slice bounds strand samples. The rules below are part of the
manifest reproducibility contract:

* cumulative targets: after batch i the first source has contributed
  ceil(sum_{j<=i} f(j/m)*N - 1e-9) samples (the slack only absorbs float
  noise at integer boundaries);
* drain rule: when the schedule stops drawing from the first source (its
  scheduled take is 0 and the schedule's remaining ideal mass is below half
  a sample), the source's leftovers flow into the current batch rather than
  dangling to the end, keeping late batches pure;
* exhaustion: a batch never takes more than a source has left, and when one
  source runs dry the other fills all remaining capacity;
* the final batch is short when (|D1|+|D2|) mod N != 0 -- every sample is
  ordered, none are dropped or duplicated.

Before any clamp or drain fires, the cumulative take deviates from the ideal
cumulative sum by strictly less than one sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .errors import (
    EmptyQuadrantError,
    IdUniverseMismatchError,
    LengthMismatchError,
    MissingSplitError,
)
from .manifest import STAGE_ORDER, Batch, OrderedManifest, batches_from_labelled
from .partition import QuadrantPartition, TwoWaySplit
from .rng import derive_seeds, fisher_yates

_ROUND_SLACK = 1e-9
_DRAIN_RESIDUAL = 0.5


@dataclass(frozen=True, slots=True)
class SShapeParams:
    """Steepness of the logistic stage-transition curve."""

    a: float = 35.0

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError(f"steepness must be positive, got {self.a}")


def s_shape(p: float, params: SShapeParams = SShapeParams()) -> float:
    """Proportion of a batch drawn from the first source at completion p.

    f(p) = 1/(1 + exp(a*(p - 0.5))): strictly decreasing, f(0.5) = 0.5,
    f(p) + f(1-p) = 1.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"completion ratio must be in [0, 1], got {p}")
    u = params.a * (p - 0.5)
    if u > 700.0:
        return 0.0
    if u < -700.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(u))


@dataclass(frozen=True, slots=True)
class MergePlan:
    batch_size: int
    total_steps: int
    d1_takes: tuple[int, ...]
    random_sample: bool
    seed: int
    n1: int
    n2: int

    def batch_sizes(self) -> list[int]:
        total = self.n1 + self.n2
        m = self.total_steps
        return [
            self.batch_size if i < m - 1 else total - self.batch_size * (m - 1)
            for i in range(m)
        ]


def ideal_cumulative_takes(n1: int, n2: int, batch_size: int, params: SShapeParams) -> list[float]:
    """Prefix sums of f(i/m)*N: the real-valued draw schedule for D1."""
    total = n1 + n2
    m = math.ceil(total / batch_size)
    out = []
    acc = 0.0
    for i in range(1, m + 1):
        acc += s_shape(i / m, params) * batch_size
        out.append(acc)
    return out


def plan_merge(
    n1: int,
    n2: int,
    batch_size: int,
    params: SShapeParams = SShapeParams(),
    random_sample: bool = False,
    seed: int = 0,
) -> MergePlan:
    """Integer per-batch draws from D1 following the S-shape schedule."""
    if n1 < 0 or n2 < 0 or n1 + n2 < 1:
        raise ValueError("need at least one sample across both sources")
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    total = n1 + n2
    m = math.ceil(total / batch_size)
    cumulative = ideal_cumulative_takes(n1, n2, batch_size, params)
    ideal_final = cumulative[-1]

    takes = []
    taken1 = 0
    taken2 = 0
    for i in range(1, m + 1):
        size = batch_size if i < m else total - batch_size * (m - 1)
        target = math.ceil(cumulative[i - 1] - _ROUND_SLACK)
        s = max(0, target - taken1)
        if s == 0 and (ideal_final - cumulative[i - 1]) < _DRAIN_RESIDUAL:
            s = n1 - taken1
        s = max(s, size - (n2 - taken2))  # second source cannot cover the rest
        s = min(s, size, n1 - taken1)
        takes.append(s)
        taken1 += s
        taken2 += size - s
    assert taken1 == n1 and taken2 == n2
    return MergePlan(
        batch_size=batch_size,
        total_steps=m,
        d1_takes=tuple(takes),
        random_sample=random_sample,
        seed=seed,
        n1=n1,
        n2=n2,
    )


def merge_datasets(d1: Sequence, d2: Sequence, plan: MergePlan) -> list:
    """Interleave two sources batch-by-batch according to a merge plan.

    With ``plan.random_sample`` each source is first shuffled with its own
    child seed (two consecutive seeds derived from ``plan.seed``); otherwise
    sources are consumed in the given order, which is what preserves stage
    order when merging already-ordered halves. Items are opaque; callers
    usually pass (sample_id, stage_label) pairs.
    """
    if len(d1) != plan.n1 or len(d2) != plan.n2:
        raise LengthMismatchError(
            f"plan expects sources of {plan.n1}/{plan.n2} samples, got {len(d1)}/{len(d2)}"
        )
    d1 = list(d1)
    d2 = list(d2)
    if plan.random_sample:
        seed1, seed2 = derive_seeds(plan.seed, 2)
        fisher_yates(d1, seed1)
        fisher_yates(d2, seed2)
    out = []
    l = 0
    r = 0
    for take, size in zip(plan.d1_takes, plan.batch_sizes()):
        out.extend(d1[l : l + take])
        l += take
        out.extend(d2[r : r + size - take])
        r += size - take
    return out


def _merge(items1, items2, batch_size, params, random_sample, seed):
    plan = plan_merge(
        len(items1), len(items2), batch_size, params, random_sample=random_sample, seed=seed
    )
    return merge_datasets(items1, items2, plan)


# ---------------------------------------------------------------------------
# Schedule builders
# ---------------------------------------------------------------------------


def _quadrant_items(partition: QuadrantPartition, quadrant: str) -> list[tuple[str, str]]:
    items = [(i, q) for i, q in partition.labels.items() if q == quadrant]
    if not items:
        raise EmptyQuadrantError(f"quadrant {quadrant} has no samples")
    return items


def build_frame(
    partition: QuadrantPartition,
    batch_size: int,
    params: SShapeParams = SShapeParams(),
    seed: int = 0,
) -> OrderedManifest:
    """Construct the four-stage ordered manifest Q3 -> Q4 -> Q1 -> Q2.

    The high-ppl and low-ppl halves are merged independently with per-quadrant
    shuffles (child seeds derived from ``seed`` in order: high half, low
    half), then concatenated through one sequence-preserving merge.
    """
    q3 = _quadrant_items(partition, "Q3")
    q4 = _quadrant_items(partition, "Q4")
    q1 = _quadrant_items(partition, "Q1")
    q2 = _quadrant_items(partition, "Q2")
    seed34, seed12 = derive_seeds(seed, 2)
    s34 = _merge(q3, q4, batch_size, params, True, seed34)
    s12 = _merge(q1, q2, batch_size, params, True, seed12)
    final = _merge(s34, s12, batch_size, params, False, seed)
    return batches_from_labelled(final, batch_size, "frame", seed)


def _build_q3_q1_q4_q2(partition, batch_size, params, seed):
    # pd-priority double loop: low-pd quadrants first, then high-pd.
    q3 = _quadrant_items(partition, "Q3")
    q1 = _quadrant_items(partition, "Q1")
    q4 = _quadrant_items(partition, "Q4")
    q2 = _quadrant_items(partition, "Q2")
    seed31, seed42 = derive_seeds(seed, 2)
    s31 = _merge(q3, q1, batch_size, params, True, seed31)
    s42 = _merge(q4, q2, batch_size, params, True, seed42)
    final = _merge(s31, s42, batch_size, params, False, seed)
    return batches_from_labelled(final, batch_size, "q3_q1_q4_q2", seed)


_TWO_STAGE = {
    # schedule -> (metric, first stage is the high side?)
    "two_stage_ppl_h2l": ("ppl", True),
    "two_stage_ppl_l2h": ("ppl", False),
    "two_stage_pd_l2h": ("pd", False),
    "two_stage_pd_h2l": ("pd", True),
}

_PPL_HIGH_QUADRANTS = ("Q3", "Q4")
_PD_HIGH_QUADRANTS = ("Q2", "Q4")

SplitSource = Union[QuadrantPartition, TwoWaySplit, Sequence[str]]


def _two_stage_halves(source: SplitSource, metric: str) -> tuple[list[str], list[str]]:
    """(low ids, high ids) for a metric, from a split or a quadrant partition."""
    if isinstance(source, TwoWaySplit):
        if source.metric != metric:
            raise MissingSplitError(
                f"schedule needs a {metric} split, got a {source.metric} split"
            )
        return list(source.low_ids), list(source.high_ids)
    if isinstance(source, QuadrantPartition):
        high_set = _PPL_HIGH_QUADRANTS if metric == "ppl" else _PD_HIGH_QUADRANTS
        low = [i for i, q in source.labels.items() if q not in high_set]
        high = [i for i, q in source.labels.items() if q in high_set]
        return low, high
    raise MissingSplitError(f"two-stage {metric} schedule needs a split or partition")


def build_ablation(
    source: SplitSource,
    schedule: str,
    batch_size: int,
    params: SShapeParams = SShapeParams(),
    seed: int = 0,
) -> OrderedManifest:
    """Build any supported schedule's manifest.

    Two-stage schedules are a single smoothed merge over the two halves
    (shuffled within each half); ``random`` is one seeded shuffle of the whole
    corpus; ``q3_q1_q4_q2`` mirrors the main double loop with pd-side grouping.
    """
    if schedule == "frame":
        if not isinstance(source, QuadrantPartition):
            raise MissingSplitError("frame schedule needs a quadrant partition")
        return build_frame(source, batch_size, params, seed)
    if schedule == "q3_q1_q4_q2":
        if not isinstance(source, QuadrantPartition):
            raise MissingSplitError("q3_q1_q4_q2 schedule needs a quadrant partition")
        return _build_q3_q1_q4_q2(source, batch_size, params, seed)
    if schedule in _TWO_STAGE:
        metric, high_first = _TWO_STAGE[schedule]
        low, high = _two_stage_halves(source, metric)
        if not low or not high:
            raise MissingSplitError(f"{schedule} needs both halves non-empty")
        lo_items = [(i, f"{metric}_low") for i in low]
        hi_items = [(i, f"{metric}_high") for i in high]
        first, second = (hi_items, lo_items) if high_first else (lo_items, hi_items)
        merged = _merge(first, second, batch_size, params, True, seed)
        return batches_from_labelled(merged, batch_size, schedule, seed)
    if schedule == "random":
        if isinstance(source, QuadrantPartition):
            ids = list(source.labels)
        elif isinstance(source, TwoWaySplit):
            ids = list(source.low_ids) + list(source.high_ids)
        else:
            ids = list(source)
        if not ids:
            raise MissingSplitError("random schedule needs at least one sample")
        fisher_yates(ids, seed)
        return batches_from_labelled(
            [(i, "random") for i in ids], batch_size, "random", seed
        )
    raise ValueError(f"unknown schedule {schedule!r}")


# ---------------------------------------------------------------------------
# Stage-constraint verification
# ---------------------------------------------------------------------------

# (ppl side, pd side); 1 = high, 0 = low, None = undefined for this label
_STAGE_SIDES: dict[str, tuple[Optional[int], Optional[int]]] = {
    "Q1": (0, 0),
    "Q2": (0, 1),
    "Q3": (1, 0),
    "Q4": (1, 1),
    "ppl_low": (0, None),
    "ppl_high": (1, None),
    "pd_low": (None, 0),
    "pd_high": (None, 1),
}

DEFAULT_SEPARATION_MARGIN = 0.1


@dataclass(frozen=True, slots=True)
class BoundaryCheck:
    from_stage: str
    to_stage: str
    ppl_status: str  # satisfied | broken | unsatisfied | not_applicable
    pd_status: str
    separation_ok: bool
    vacuous: bool
    intentional_break: Optional[str]  # "ppl" or "pd" when composition breaks it

    def to_dict(self) -> dict:
        return {
            "from_stage": self.from_stage,
            "to_stage": self.to_stage,
            "ppl_status": self.ppl_status,
            "pd_status": self.pd_status,
            "separation_ok": self.separation_ok,
            "vacuous": self.vacuous,
            "intentional_break": self.intentional_break,
        }


@dataclass(frozen=True, slots=True)
class StageConstraintReport:
    schedule: str
    stage_order: tuple[str, ...]
    boundaries: tuple[BoundaryCheck, ...]
    mean_batch_index: dict = field(default_factory=dict)

    @property
    def intentional_breaks(self) -> list[tuple[str, str]]:
        return [
            (f"{b.from_stage}->{b.to_stage}", b.intentional_break)
            for b in self.boundaries
            if b.intentional_break is not None
        ]

    def to_dict(self) -> dict:
        return {
            "schedule": self.schedule,
            "stage_order": list(self.stage_order),
            "boundaries": [b.to_dict() for b in self.boundaries],
            "mean_batch_index": dict(sorted(self.mean_batch_index.items())),
        }

    def summary_lines(self) -> list[str]:
        lines = [f"schedule {self.schedule}: stages {' -> '.join(self.stage_order)}"]
        for b in self.boundaries:
            marks = []
            for name, status in (("PPL", b.ppl_status), ("PD", b.pd_status)):
                if status == "not_applicable":
                    continue
                note = " (intentional)" if b.intentional_break == name.lower() and status == "broken" else ""
                marks.append(f"{name} {status}{note}")
            lines.append(f"  {b.from_stage} -> {b.to_stage}: " + "; ".join(marks))
        return lines


def verify_stage_constraints(
    manifest: OrderedManifest,
    partition: QuadrantPartition,
    separation_margin: float = DEFAULT_SEPARATION_MARGIN,
) -> StageConstraintReport:
    """Check the stage-ordering constraints a manifest realizes.

    At each adjacent stage boundary two constraints are evaluated: ppl must
    not increase and pd must not decrease from one stage to the next. A
    boundary is *satisfied* when the stage sides respect the relation and the
    stages are actually separated in the batch stream (difference of mean
    batch indices above ``separation_margin`` of the schedule length),
    *broken* when the schedule's own composition violates the side relation
    (the deliberate pd break at the Q4 -> Q1 boundary, or the mirrored ppl
    break in the alternative order), and *unsatisfied* when stage separation
    never materialized (e.g. a random manifest). Random-schedule manifests
    are evaluated against the reference Q3 -> Q4 -> Q1 -> Q2 ordering.
    """
    manifest_ids = manifest.sample_ids()
    if set(manifest_ids) != set(partition.labels):
        raise IdUniverseMismatchError(
            "manifest and partition cover different sample ids"
        )

    if manifest.schedule == "random":
        stage_order = STAGE_ORDER["frame"]
        means = _quadrant_means(manifest, partition)
    else:
        stage_order = STAGE_ORDER[manifest.schedule]
        means = manifest.stage_mean_batch_index()

    threshold = separation_margin * max(0, len(manifest.batches) - 1)
    boundaries = []
    for a, b in zip(stage_order, stage_order[1:]):
        vacuous = a not in means or b not in means
        if vacuous:
            boundaries.append(
                BoundaryCheck(a, b, "satisfied", "satisfied", True, True, None)
            )
            continue
        separated = (means[b] - means[a]) > threshold
        ppl_status, ppl_break = _constraint_status(a, b, axis=0, separated=separated)
        pd_status, pd_break = _constraint_status(a, b, axis=1, separated=separated)
        intentional = "ppl" if ppl_break else ("pd" if pd_break else None)
        boundaries.append(
            BoundaryCheck(a, b, ppl_status, pd_status, separated, False, intentional)
        )
    return StageConstraintReport(
        schedule=manifest.schedule,
        stage_order=stage_order,
        boundaries=tuple(boundaries),
        mean_batch_index=means,
    )


def _constraint_status(a: str, b: str, axis: int, separated: bool) -> tuple[str, bool]:
    side_a = _STAGE_SIDES[a][axis]
    side_b = _STAGE_SIDES[b][axis]
    if side_a is None or side_b is None:
        return "not_applicable", False
    ok = side_a >= side_b if axis == 0 else side_a <= side_b
    if not ok:
        return "broken", True
    return ("satisfied" if separated else "unsatisfied"), False


def _quadrant_means(manifest: OrderedManifest, partition: QuadrantPartition) -> dict:
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for batch in manifest.batches:
        for sample_id in batch.sample_ids:
            q = partition.labels[sample_id]
            sums[q] = sums.get(q, 0.0) + batch.batch_index
            counts[q] = counts.get(q, 0) + 1
    return {q: sums[q] / counts[q] for q in sums}
