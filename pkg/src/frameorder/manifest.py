"""Ordered-manifest data model and file format.

A manifest is the offline contract handed to a trainer: every sample id
exactly once, grouped into fixed-size batches (the final batch may be short),
with per-batch counts of which curriculum stage each sample came from.

File format (JSON Lines, sorted keys):

    {"batch_size": N, "schedule": "...", "seed": ..., "version": 1}
    {"batch_index": 0, "sample_ids": [...], "source_counts": {"Q3": 10}}
    ...
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .corpus import canonical_json, _iter_lines, _parse_json_line
from .errors import CorpusFormatError, InvalidManifestError

MANIFEST_VERSION = 1

# Stage labels per schedule, in scheduled order.
STAGE_ORDER: dict[str, tuple[str, ...]] = {
    "frame": ("Q3", "Q4", "Q1", "Q2"),
    "q3_q1_q4_q2": ("Q3", "Q1", "Q4", "Q2"),
    "two_stage_ppl_h2l": ("ppl_high", "ppl_low"),
    "two_stage_ppl_l2h": ("ppl_low", "ppl_high"),
    "two_stage_pd_l2h": ("pd_low", "pd_high"),
    "two_stage_pd_h2l": ("pd_high", "pd_low"),
    "random": ("random",),
}

SCHEDULES = tuple(STAGE_ORDER)


@dataclass(frozen=True, slots=True)
class Batch:
    batch_index: int
    sample_ids: tuple[str, ...]
    source_counts: dict  # stage label -> count, nonzero entries only


@dataclass(frozen=True, slots=True)
class OrderedManifest:
    batches: tuple[Batch, ...]
    batch_size: int
    schedule: str
    seed: int

    def sample_ids(self) -> list[str]:
        return [i for b in self.batches for i in b.sample_ids]

    def validate(self) -> None:
        """Check structural invariants; raises InvalidManifestError."""
        if self.schedule not in STAGE_ORDER:
            raise InvalidManifestError(f"unknown schedule {self.schedule!r}")
        if self.batch_size < 1:
            raise InvalidManifestError(f"batch_size must be >= 1, got {self.batch_size}")
        valid_labels = set(STAGE_ORDER[self.schedule])
        seen: set[str] = set()
        for pos, batch in enumerate(self.batches):
            if batch.batch_index != pos:
                raise InvalidManifestError(
                    f"batch_index {batch.batch_index} at position {pos}"
                )
            if pos < len(self.batches) - 1 and len(batch.sample_ids) != self.batch_size:
                raise InvalidManifestError(
                    f"batch {pos} has {len(batch.sample_ids)} samples, expected {self.batch_size}"
                )
            if len(batch.sample_ids) > self.batch_size or not batch.sample_ids:
                raise InvalidManifestError(f"batch {pos} has a bad sample count")
            for label in batch.source_counts:
                if label not in valid_labels:
                    raise InvalidManifestError(
                        f"batch {pos} has unknown stage label {label!r} for schedule {self.schedule!r}"
                    )
            if sum(batch.source_counts.values()) != len(batch.sample_ids):
                raise InvalidManifestError(f"batch {pos} source_counts do not add up")
            for i in batch.sample_ids:
                if i in seen:
                    raise InvalidManifestError(f"sample id {i!r} appears more than once")
                seen.add(i)

    def stage_mean_batch_index(self) -> dict:
        """Mean batch index per stage label, from per-batch source counts."""
        sums: dict[str, float] = {}
        counts: dict[str, int] = {}
        for batch in self.batches:
            for label, c in batch.source_counts.items():
                sums[label] = sums.get(label, 0.0) + batch.batch_index * c
                counts[label] = counts.get(label, 0) + c
        return {label: sums[label] / counts[label] for label in sums}


def batches_from_labelled(
    labelled: Sequence[tuple[str, str]], batch_size: int, schedule: str, seed: int
) -> OrderedManifest:
    """Chunk a (sample_id, stage_label) sequence into a manifest."""
    batches = []
    for start in range(0, len(labelled), batch_size):
        chunk = labelled[start : start + batch_size]
        counts: dict[str, int] = {}
        for _, label in chunk:
            counts[label] = counts.get(label, 0) + 1
        batches.append(
            Batch(
                batch_index=start // batch_size,
                sample_ids=tuple(i for i, _ in chunk),
                source_counts=counts,
            )
        )
    manifest = OrderedManifest(
        batches=tuple(batches), batch_size=batch_size, schedule=schedule, seed=seed
    )
    manifest.validate()
    return manifest


def write_manifest(manifest: OrderedManifest, path) -> None:
    manifest.validate()
    header = {
        "version": MANIFEST_VERSION,
        "batch_size": manifest.batch_size,
        "schedule": manifest.schedule,
        "seed": manifest.seed,
    }
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(canonical_json(header) + "\n")
        for batch in manifest.batches:
            fh.write(
                canonical_json(
                    {
                        "batch_index": batch.batch_index,
                        "sample_ids": list(batch.sample_ids),
                        "source_counts": batch.source_counts,
                    }
                )
                + "\n"
            )


def read_manifest(path) -> OrderedManifest:
    lines = _iter_lines(path)
    try:
        header_no, header_line = next(lines)
    except StopIteration:
        raise CorpusFormatError(path, 0, "empty manifest file")
    header = _parse_json_line(path, header_no, header_line)
    try:
        version = int(header["version"])
        batch_size = int(header["batch_size"])
        schedule = str(header["schedule"])
        seed = int(header["seed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusFormatError(path, header_no, f"bad manifest header: {exc}") from exc
    if version != MANIFEST_VERSION:
        raise InvalidManifestError(f"unsupported manifest version {version}")
    batches = []
    for line_no, line in lines:
        obj = _parse_json_line(path, line_no, line)
        try:
            batches.append(
                Batch(
                    batch_index=int(obj["batch_index"]),
                    sample_ids=tuple(str(i) for i in obj["sample_ids"]),
                    source_counts={str(k): int(v) for k, v in obj["source_counts"].items()},
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusFormatError(path, line_no, f"bad batch record: {exc}") from exc
    manifest = OrderedManifest(
        batches=tuple(batches), batch_size=batch_size, schedule=schedule, seed=seed
    )
    manifest.validate()
    return manifest
