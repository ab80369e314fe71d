"""UniMorph corpus handling: parsing, alphabets, feature vocabularies, metrics.

The on-disk format is tab-separated UTF-8 with LF line endings:
``lemma<TAB>form<TAB>feat;feat;...`` for training/gold data and
``lemma<TAB>feat;feat;...`` for covered test files where the target form
is withheld.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

# First private-use codepoint; reserved symbols escalate from here when the
# defaults collide with data.
_PUA_START = 0xE000
_PUA_END = 0xF8FF

DEFAULT_GAP = "#"


class CorpusError(ValueError):
    """Raised for malformed corpus files or metric misuse."""


@dataclass(frozen=True)
class InflectionSample:
    """One lemma / target / feature-set triple.

    ``target`` is None for covered test data.  Features keep file order.
    """

    lemma: str
    target: Optional[str]
    features: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.lemma:
            raise CorpusError("lemma must be non-empty")
        if self.target is not None and not self.target:
            raise CorpusError("target, when present, must be non-empty")
        if not self.features:
            raise CorpusError("features must be non-empty")
        for tag in self.features:
            if not tag or "\t" in tag or ";" in tag:
                raise CorpusError(f"invalid feature tag: {tag!r}")


@dataclass(frozen=True)
class Alphabet:
    """Ordered symbol inventory plus the reserved control symbols.

    ``symbols`` is codepoint-ascending and never contains a reserved symbol.
    """

    symbols: tuple[str, ...]
    gap: str = DEFAULT_GAP
    sentinel: str = chr(_PUA_START)
    bos: str = chr(_PUA_START + 1)

    def __post_init__(self) -> None:
        reserved = {self.gap, self.sentinel, self.bos}
        if len(reserved) != 3:
            raise CorpusError("reserved symbols must be distinct")
        if reserved & set(self.symbols):
            raise CorpusError("reserved symbol collides with data symbols")
        if list(self.symbols) != sorted(set(self.symbols)):
            raise CorpusError("symbols must be unique and codepoint-ascending")

    def __contains__(self, symbol: str) -> bool:
        return symbol in set(self.symbols)

    def index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}


@dataclass(frozen=True)
class FeatureVocab:
    """Feature tags with dense contiguous indices."""

    tags: tuple[str, ...]
    index: dict[str, int] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if len(set(self.tags)) != len(self.tags):
            raise CorpusError("duplicate feature tags")
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tags)})

    def __len__(self) -> int:
        return len(self.tags)


def parse_unimorph(document: str, covered: bool = False) -> list[InflectionSample]:
    """Parse UniMorph TSV text into samples, one per non-empty line.

    ``covered=True`` expects 2 columns (lemma, features), otherwise 3
    (lemma, target, features).  Raises CorpusError naming the offending
    line on any column-count mismatch.
    """
    want = 2 if covered else 3
    samples = []
    for lineno, line in enumerate(document.split("\n"), start=1):
        line = line.rstrip("\r")  # tolerate CRLF input
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != want:
            raise CorpusError(
                f"line {lineno}: expected {want} tab-separated columns, got {len(cols)}"
            )
        features = tuple(cols[-1].split(";"))
        try:
            if covered:
                samples.append(InflectionSample(cols[0], None, features))
            else:
                samples.append(InflectionSample(cols[0], cols[1], features))
        except CorpusError as exc:
            raise CorpusError(f"line {lineno}: {exc}") from None
    return samples


def read_unimorph(path: str, covered: bool = False) -> list[InflectionSample]:
    with open(path, encoding="utf-8") as handle:
        return parse_unimorph(handle.read(), covered=covered)


def serialize_samples(samples: Iterable[InflectionSample]) -> str:
    """Inverse of parse_unimorph for 3-column data (2-column when covered)."""
    lines = []
    for s in samples:
        feats = ";".join(s.features)
        if s.target is None:
            lines.append(f"{s.lemma}\t{feats}")
        else:
            lines.append(f"{s.lemma}\t{s.target}\t{feats}")
    return "".join(line + "\n" for line in lines)


def _pick_reserved(taken: set[str], preferred: str) -> str:
    if preferred not in taken:
        return preferred
    for cp in range(_PUA_START, _PUA_END + 1):
        if chr(cp) not in taken:
            return chr(cp)
    raise CorpusError("no free private-use codepoint for reserved symbol")


def extract_alphabet(samples: Sequence[InflectionSample]) -> Alphabet:
    """Union of all lemma/target codepoints, sorted ascending.

    Reserved symbols default to ``#`` (gap) and the first private-use
    codepoints; any that collide with the data escalate to the next free
    private-use codepoint so the invariants always hold.
    """
    if not samples:
        raise CorpusError("cannot build alphabet from zero samples")
    chars: set[str] = set()
    for s in samples:
        chars.update(s.lemma)
        if s.target is not None:
            chars.update(s.target)
    taken = set(chars)
    gap = _pick_reserved(taken, DEFAULT_GAP)
    taken.add(gap)
    sentinel = _pick_reserved(taken, chr(_PUA_START))
    taken.add(sentinel)
    bos = _pick_reserved(taken, chr(_PUA_START + 1))
    return Alphabet(tuple(sorted(chars)), gap=gap, sentinel=sentinel, bos=bos)


def extract_feature_vocab(samples: Sequence[InflectionSample]) -> FeatureVocab:
    """Union of all feature tags, sorted lexicographically, densely indexed."""
    if not samples:
        raise CorpusError("cannot build feature vocab from zero samples")
    tags: set[str] = set()
    for s in samples:
        tags.update(s.features)
    return FeatureVocab(tuple(sorted(tags)))


def target_symbols(samples: Sequence[InflectionSample]) -> tuple[str, ...]:
    """Codepoints occurring in any target form, sorted ascending.

    This is the emittable inventory for the action vocabulary.
    """
    chars: set[str] = set()
    for s in samples:
        if s.target is not None:
            chars.update(s.target)
    return tuple(sorted(chars))


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insert/delete/substitute) on codepoints."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[len(b)]


def _check_paired(predictions: Sequence[str], golds: Sequence[str]) -> None:
    if len(predictions) != len(golds):
        raise CorpusError(
            f"length mismatch: {len(predictions)} predictions vs {len(golds)} golds"
        )
    if not predictions:
        raise CorpusError("cannot score empty lists")


def accuracy(predictions: Sequence[str], golds: Sequence[str]) -> float:
    """Exact-string-match fraction in [0, 1]."""
    _check_paired(predictions, golds)
    hits = sum(p == g for p, g in zip(predictions, golds))
    return hits / len(predictions)


def avg_levenshtein(predictions: Sequence[str], golds: Sequence[str]) -> float:
    """Mean unit-cost edit distance over the pairs."""
    _check_paired(predictions, golds)
    total = sum(levenshtein(p, g) for p, g in zip(predictions, golds))
    return total / len(predictions)


def split_dev(
    samples: Sequence[InflectionSample], fraction: float, seed: int
) -> tuple[list[InflectionSample], list[InflectionSample]]:
    """Deterministic train/dev split used when no dev file is provided.

    Shuffles under ``seed`` and takes the last ceil(fraction * n) samples
    as the dev set.
    """
    if not 0.0 < fraction < 1.0:
        raise CorpusError("fraction must be strictly between 0 and 1")
    if len(samples) < 2:
        raise CorpusError("need at least 2 samples to split")
    order = list(samples)
    random.Random(seed).shuffle(order)
    # epsilon guards against float fuzz pushing exact products past the ceiling
    n_dev = math.ceil(len(order) * fraction - 1e-9)
    n_dev = min(max(n_dev, 1), len(order) - 1)
    return order[:-n_dev], order[-n_dev:]
