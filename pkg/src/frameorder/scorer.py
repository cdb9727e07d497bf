"""Per-sample perplexity scoring and the weak/strong difference score.

The difference score for a sample is

    pd = (ppl_weak - ppl_strong) / ppl_weak

i.e. how much better the stronger reference model fits the sample, relative
to the weak model. It is scale-invariant, always < 1, and negative when the
weak model happens to fit better.

Reference models here are add-k-smoothed n-gram models: a cheap stand-in pair
with a real capacity gap (default order 1 vs order 3). Scores produced by
external models can be attached instead; either way pd is recomputed from the
two perplexities and never trusted from input files.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus, SampleRecord, ScoreRecord
from .errors import (
    MissingScoresError,
    MissingTextError,
    NonPositivePerplexityError,
    UnknownScoreIdError,
)

_BOS = "\x00bos"  # context padding marker; never part of the vocabulary

DEFAULT_WEAK_ORDER = 1
DEFAULT_STRONG_ORDER = 3
DEFAULT_SMOOTHING_K = 0.1


@dataclass(frozen=True, slots=True)
class ScoredSample:
    id: str
    token_count: int
    ppl_strong: float
    ppl_weak: float
    pd: float


def compute_pd(ppl_weak: float, ppl_strong: float) -> float:
    """(ppl_weak - ppl_strong) / ppl_weak; both inputs must be positive."""
    if ppl_weak <= 0 or ppl_strong <= 0:
        raise NonPositivePerplexityError(
            f"perplexities must be positive, got weak={ppl_weak}, strong={ppl_strong}"
        )
    return (ppl_weak - ppl_strong) / ppl_weak


class NgramModel:
    """Add-k-smoothed n-gram model over whitespace tokens.

    Probabilities condition on the previous ``order - 1`` tokens (documents
    are padded with a begin marker, which is never predicted). The vocabulary
    is the set of training token types; for any context,

        p(w | ctx) = (count(ctx, w) + k) / (count(ctx, *) + k * V)

    which sums to 1 over the vocabulary. Unseen tokens score with count 0.
    A model constructed with empty counts over an explicit vocabulary is the
    uniform model: every token scores 1/V.
    """

    def __init__(self, order: int, vocab: frozenset[str], counts: dict, smoothing_k: float):
        if order < 1:
            raise ValueError("order must be >= 1")
        if smoothing_k <= 0:
            raise ValueError("smoothing_k must be positive")
        if not vocab:
            raise ValueError("vocabulary must be non-empty")
        self.order = order
        self.vocab = vocab
        self.vocab_size = len(vocab)
        self.counts = counts  # context tuple -> Counter of next tokens
        self.context_totals = {ctx: sum(c.values()) for ctx, c in counts.items()}
        self.smoothing_k = smoothing_k

    @classmethod
    def uniform(cls, vocab_size: int, order: int = 1, smoothing_k: float = 1.0) -> "NgramModel":
        vocab = frozenset(f"w{i}" for i in range(vocab_size))
        return cls(order=order, vocab=vocab, counts={}, smoothing_k=smoothing_k)

    def log_prob(self, context: tuple, token: str) -> float:
        counter = self.counts.get(context)
        k = self.smoothing_k
        if counter is None:
            return math.log(1.0 / self.vocab_size)
        num = counter.get(token, 0) + k
        den = self.context_totals[context] + k * self.vocab_size
        return math.log(num) - math.log(den)

    def sequence_log_likelihood(self, tokens: Sequence[str]) -> float:
        pad = (_BOS,) * (self.order - 1)
        padded = pad + tuple(tokens)
        n = self.order
        total = 0.0
        for t in range(len(tokens)):
            context = padded[t : t + n - 1]
            total += self.log_prob(context, padded[t + n - 1])
        return total


def train_ngram(corpus: Corpus, order: int, smoothing_k: float = DEFAULT_SMOOTHING_K) -> NgramModel:
    """Train an add-k n-gram model on a text-bearing corpus.

    Deterministic: counts accumulate in corpus order, vocabulary is a set of
    token types. The vocabulary size is the number of distinct training types.
    """
    if not corpus.has_text():
        raise MissingTextError("n-gram training requires a corpus that retains text")
    vocab: set[str] = set()
    counts: dict[tuple, Counter] = {}
    pad = (_BOS,) * (order - 1)
    for sample in corpus.samples:
        tokens = sample.text.split()
        vocab.update(tokens)
        padded = pad + tuple(tokens)
        for t in range(len(tokens)):
            context = padded[t : t + order - 1]
            counter = counts.get(context)
            if counter is None:
                counter = counts[context] = Counter()
            counter[padded[t + order - 1]] += 1
    if not vocab:
        raise MissingTextError("corpus has no tokens to train on")
    return NgramModel(order=order, vocab=frozenset(vocab), counts=counts, smoothing_k=smoothing_k)


def ppl(model: NgramModel, sample: SampleRecord) -> float:
    """Perplexity of a sample: exp(-(1/T) * sum log p(token | context)).

    T is the number of whitespace tokens in the sample text. Accumulation is
    in log domain so long documents cannot underflow.
    """
    if sample.text is None:
        raise MissingTextError(f"sample {sample.id!r} has no text to score")
    tokens = sample.text.split()
    if not tokens:
        raise MissingTextError(f"sample {sample.id!r} has empty text")
    ll = model.sequence_log_likelihood(tokens)
    return math.exp(-ll / len(tokens))


def score_corpus(
    corpus: Corpus,
    weak: NgramModel,
    strong: NgramModel,
    threads: int = 1,
) -> list[ScoredSample]:
    """Score every sample under both models, preserving corpus order.

    Scoring is independent per sample; with threads > 1 a pool is used and
    results are gathered in input order, so output is identical either way.
    """

    def one(sample: SampleRecord) -> ScoredSample:
        w = ppl(weak, sample)
        s = ppl(strong, sample)
        return ScoredSample(
            id=sample.id,
            token_count=sample.token_count,
            ppl_strong=s,
            ppl_weak=w,
            pd=compute_pd(w, s),
        )

    if threads > 1 and len(corpus) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, corpus.samples))
    return [one(s) for s in corpus.samples]


def attach_external_scores(
    corpus: Corpus,
    scores: Iterable[ScoreRecord],
    strict: bool = False,
    warn=None,
) -> list[ScoredSample]:
    """Join external score records onto the corpus by id.

    Every corpus id must be scored exactly once. Score records for unknown
    ids are a warning by default and an error under ``strict``. The pd field
    is recomputed from the two perplexities.
    """
    by_id: dict[str, ScoreRecord] = {r.id: r for r in scores}
    corpus_ids = set(corpus.ids())
    missing = [s.id for s in corpus.samples if s.id not in by_id]
    if missing:
        raise MissingScoresError(missing)
    extra = sorted(set(by_id) - corpus_ids)
    if extra:
        if strict:
            raise UnknownScoreIdError(extra)
        if warn is not None:
            warn(f"ignoring {len(extra)} score record(s) for ids not in corpus")
    out = []
    for sample in corpus.samples:
        rec = by_id[sample.id]
        out.append(
            ScoredSample(
                id=sample.id,
                token_count=sample.token_count,
                ppl_strong=rec.ppl_strong,
                ppl_weak=rec.ppl_weak,
                pd=compute_pd(rec.ppl_weak, rec.ppl_strong),
            )
        )
    return out


def scored_by_id(scored: Sequence[ScoredSample]) -> Mapping[str, ScoredSample]:
    return {s.id: s for s in scored}
