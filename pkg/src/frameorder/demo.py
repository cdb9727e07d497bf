"""Bundled synthetic demo corpus.

100 license-free documents over four domains with deliberately different
statistical texture, so the built-in order-1/order-3 scorer pair spreads them
across the ppl/pd plane:

* ``common``  frequent words, no phrase structure: easy for both models
* ``chant``   repeated phrases over common words: easy only for the strong model
* ``gibber``  near-uniform rare words: hard for both models alike
* ``lore``    phrases built from rare words: hard, harder still for the weak model

The generator is fully self-contained (SplitMix64 only), so the bundled file
can be regenerated byte-for-byte. ``python -m frameorder.demo out.jsonl``
writes a copy.
"""

from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

from .corpus import Corpus, SampleRecord, write_corpus
from .rng import SplitMix64

DEMO_SEED = 20240801
DEMO_DOCS = 100

_SYLLABLES = (
    "ba", "ri", "to", "na", "vel", "mu", "sor", "ke", "li", "dan",
    "fo", "gra", "pel", "ti", "zu", "mor", "sa", "wen", "ulo", "chi",
)


def _word(rng: SplitMix64, min_syl: int, max_syl: int) -> str:
    n = min_syl + rng.next_below(max_syl - min_syl + 1)
    return "".join(_SYLLABLES[rng.next_below(len(_SYLLABLES))] for _ in range(n))


def _zipf_pick(rng: SplitMix64, pool: list[str]) -> str:
    # squared uniform biases toward the head of the pool
    u = rng.next_below(1_000_000) / 1_000_000.0
    return pool[int(u * u * len(pool))]


def _build_pools(rng: SplitMix64) -> dict:
    common = []
    while len(common) < 50:
        w = _word(rng, 1, 2)
        if w not in common:
            common.append(w)
    rare = []
    while len(rare) < 400:
        w = _word(rng, 2, 4)
        if w not in common and w not in rare:
            rare.append(w)
    chant_phrases = [
        tuple(_zipf_pick(rng, common) for _ in range(3 + rng.next_below(4)))
        for _ in range(30)
    ]
    lore_phrases = [
        tuple(rare[rng.next_below(len(rare))] for _ in range(3 + rng.next_below(4)))
        for _ in range(40)
    ]
    return {
        "common": common,
        "rare": rare,
        "chant": chant_phrases,
        "lore": lore_phrases,
    }


def _doc_common(rng, pools, length):
    return [_zipf_pick(rng, pools["common"]) for _ in range(length)]


def _doc_chant(rng, pools, length):
    words: list[str] = []
    while len(words) < length:
        words.extend(pools["chant"][rng.next_below(len(pools["chant"]))])
    return words[:length]


def _doc_gibber(rng, pools, length):
    return [pools["rare"][rng.next_below(len(pools["rare"]))] for _ in range(length)]


def _doc_lore(rng, pools, length):
    words: list[str] = []
    while len(words) < length:
        words.extend(pools["lore"][rng.next_below(len(pools["lore"]))])
    return words[:length]


_DOMAINS = (
    ("common", _doc_common),
    ("chant", _doc_chant),
    ("gibber", _doc_gibber),
    ("lore", _doc_lore),
)


def generate_demo_samples(seed: int = DEMO_SEED, n_docs: int = DEMO_DOCS) -> list[SampleRecord]:
    rng = SplitMix64(seed)
    pools = _build_pools(rng)
    samples = []
    for i in range(n_docs):
        domain, maker = _DOMAINS[i % len(_DOMAINS)]
        length = 30 + rng.next_below(121)
        text = " ".join(maker(rng, pools, length))
        samples.append(
            SampleRecord(
                id=f"demo-{i:04d}",
                token_count=len(text.split()),
                text=text,
                domain=domain,
            )
        )
    return samples


def generate_demo_corpus(seed: int = DEMO_SEED, n_docs: int = DEMO_DOCS) -> Corpus:
    return Corpus.from_samples(generate_demo_samples(seed, n_docs))


def bundled_demo_path() -> Path:
    """Path of the demo corpus file shipped inside the package."""
    return Path(resources.files("frameorder") / "data" / "demo_corpus.jsonl")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    out = Path(argv[0]) if argv else Path("demo_corpus.jsonl")
    write_corpus(generate_demo_corpus(), out)
    print(f"wrote {out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
