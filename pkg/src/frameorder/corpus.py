"""Corpus ingestion, tokenization, and score-file round trips.

All on-disk artifacts are JSON Lines with sorted keys, compact separators,
UTF-8, one record per line. That canonical form is what makes byte-identical
reruns and golden tests possible, so every writer in the package goes through
:func:`canonical_json`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from .errors import (
    CorpusFormatError,
    DuplicateIdError,
    EmptyTextError,
)

# ---------------------------------------------------------------------------
# Tokenizers
# ---------------------------------------------------------------------------

TOKENIZERS: dict[str, Callable[[str], int]] = {
    "whitespace": lambda text: len(text.split()),
    "bytes": lambda text: len(text.encode("utf-8")),
}

DEFAULT_TOKENIZER = "whitespace"


def count_tokens(text: str, tokenizer: str = DEFAULT_TOKENIZER) -> int:
    """Count tokens in ``text`` under the named tokenizer.

    The default splits on runs of whitespace; ``bytes`` counts UTF-8 bytes.
    Raises EmptyTextError for text that is empty after trimming.
    """
    if not text.strip():
        raise EmptyTextError("cannot count tokens of empty text")
    return TOKENIZERS[tokenizer](text)


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class SampleRecord:
    """One corpus document: identity, token mass, optional text/domain."""

    id: str
    token_count: int
    text: Optional[str] = None
    domain: Optional[str] = None

    def __post_init__(self):
        if self.token_count < 1:
            raise CorpusFormatError("<record>", 0, f"token_count must be >= 1 for id {self.id!r}")


@dataclass(frozen=True, slots=True)
class Corpus:
    samples: tuple[SampleRecord, ...]
    total_tokens: int = field(default=0)

    @classmethod
    def from_samples(cls, samples: Iterable[SampleRecord]) -> "Corpus":
        samples = tuple(samples)
        seen = set()
        for s in samples:
            if s.id in seen:
                raise DuplicateIdError(s.id)
            seen.add(s.id)
        return cls(samples=samples, total_tokens=sum(s.token_count for s in samples))

    def __len__(self) -> int:
        return len(self.samples)

    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    def has_text(self) -> bool:
        return all(s.text is not None for s in self.samples)


@dataclass(frozen=True, slots=True)
class ScoreRecord:
    """Perplexities for one sample under the strong/weak reference pair."""

    id: str
    ppl_strong: float
    ppl_weak: float


# ---------------------------------------------------------------------------
# Canonical serialization
# ---------------------------------------------------------------------------


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def _iter_lines(path) -> Iterator[tuple[int, str]]:
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line.strip():
                yield line_no, line


def _parse_json_line(path, line_no: int, line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(path, line_no, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise CorpusFormatError(path, line_no, "expected a JSON object")
    return obj


# ---------------------------------------------------------------------------
# Corpus files
# ---------------------------------------------------------------------------

_TSV_COLUMNS = ("id", "token_count", "text", "domain")


def _records_from_jsonl(path, tokenizer: str) -> Iterator[SampleRecord]:
    for line_no, line in _iter_lines(path):
        obj = _parse_json_line(path, line_no, line)
        yield _record_from_fields(path, line_no, obj, tokenizer)


def _records_from_tsv(path, tokenizer: str) -> Iterator[SampleRecord]:
    lines = _iter_lines(path)
    try:
        header_no, header = next(lines)
    except StopIteration:
        return
    columns = header.split("\t")
    unknown = [c for c in columns if c not in _TSV_COLUMNS]
    if unknown or "id" not in columns:
        raise CorpusFormatError(path, header_no, f"bad TSV header {columns!r}; expected subset of {_TSV_COLUMNS} including 'id'")
    for line_no, line in lines:
        cells = line.split("\t")
        if len(cells) != len(columns):
            raise CorpusFormatError(path, line_no, f"expected {len(columns)} columns, got {len(cells)}")
        obj = {k: v for k, v in zip(columns, cells) if v != ""}
        if "token_count" in obj:
            try:
                obj["token_count"] = int(obj["token_count"])
            except ValueError:
                raise CorpusFormatError(path, line_no, f"token_count is not an integer: {obj['token_count']!r}")
        yield _record_from_fields(path, line_no, obj, tokenizer)


def _record_from_fields(path, line_no: int, obj: dict, tokenizer: str) -> SampleRecord:
    sample_id = obj.get("id")
    if not isinstance(sample_id, str) or not sample_id:
        raise CorpusFormatError(path, line_no, "missing or non-string 'id'")
    text = obj.get("text")
    if text is not None and not isinstance(text, str):
        raise CorpusFormatError(path, line_no, "'text' must be a string")
    token_count = obj.get("token_count")
    if token_count is None:
        if text is None:
            raise CorpusFormatError(path, line_no, f"record {sample_id!r} has neither token_count nor text")
        try:
            token_count = count_tokens(text, tokenizer)
        except EmptyTextError:
            raise CorpusFormatError(path, line_no, f"record {sample_id!r} has empty text and no token_count")
    if not isinstance(token_count, int) or isinstance(token_count, bool):
        raise CorpusFormatError(path, line_no, f"token_count must be an integer, got {token_count!r}")
    if token_count < 1:
        raise CorpusFormatError(path, line_no, f"token_count must be >= 1, got {token_count}")
    domain = obj.get("domain")
    if domain is not None and not isinstance(domain, str):
        raise CorpusFormatError(path, line_no, "'domain' must be a string")
    return SampleRecord(id=sample_id, token_count=token_count, text=text, domain=domain)


def load_corpus(
    path,
    format: str = "jsonl",
    tokenizer: str = DEFAULT_TOKENIZER,
    retain_text: bool = True,
) -> Corpus:
    """Load a corpus file in record order.

    ``token_count`` is taken from the file when present (pre-tokenized corpora
    are accepted as data); otherwise it is computed from ``text`` with the
    configured tokenizer. With ``retain_text=False`` the text is dropped after
    counting, so memory stays proportional to metadata.
    """
    if format == "jsonl":
        records = _records_from_jsonl(path, tokenizer)
    elif format == "tsv":
        records = _records_from_tsv(path, tokenizer)
    else:
        raise ValueError(f"unknown corpus format {format!r}")

    samples: list[SampleRecord] = []
    seen: set[str] = set()
    total = 0
    for rec in records:
        if rec.id in seen:
            raise DuplicateIdError(rec.id)
        seen.add(rec.id)
        if not retain_text and rec.text is not None:
            rec = SampleRecord(id=rec.id, token_count=rec.token_count, text=None, domain=rec.domain)
        samples.append(rec)
        total += rec.token_count
    return Corpus(samples=tuple(samples), total_tokens=total)


def write_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for s in corpus.samples:
            obj = {"id": s.id, "token_count": s.token_count}
            if s.text is not None:
                obj["text"] = s.text
            if s.domain is not None:
                obj["domain"] = s.domain
            fh.write(canonical_json(obj) + "\n")


# ---------------------------------------------------------------------------
# Score files
# ---------------------------------------------------------------------------


def load_scores(path) -> list[ScoreRecord]:
    """Read a score file. A stored ``pd`` field, if any, is ignored: the
    difference score is always recomputed from the two perplexities."""
    records = []
    seen = set()
    for line_no, line in _iter_lines(path):
        obj = _parse_json_line(path, line_no, line)
        sample_id = obj.get("id")
        if not isinstance(sample_id, str) or not sample_id:
            raise CorpusFormatError(path, line_no, "missing or non-string 'id'")
        if sample_id in seen:
            raise DuplicateIdError(sample_id)
        seen.add(sample_id)
        try:
            strong = float(obj["ppl_strong"])
            weak = float(obj["ppl_weak"])
        except (KeyError, TypeError, ValueError):
            raise CorpusFormatError(path, line_no, f"record {sample_id!r} needs numeric ppl_strong and ppl_weak")
        records.append(ScoreRecord(id=sample_id, ppl_strong=strong, ppl_weak=weak))
    return records


def write_scores(scored, path) -> None:
    """Write score records (anything with id/ppl_strong/ppl_weak/pd attrs)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for s in scored:
            obj = {"id": s.id, "ppl_strong": s.ppl_strong, "ppl_weak": s.ppl_weak}
            pd = getattr(s, "pd", None)
            if pd is not None:
                obj["pd"] = pd
            fh.write(canonical_json(obj) + "\n")
