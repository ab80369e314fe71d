"""Training-data enhancement for low-resource settings.

Samples sharing one feature set are aligned pairwise; positions where the
pair agrees survive into a template, everything else becomes a gap.  Gaps
are then refilled: positions linked between lemma and form templates get
one shared letter drawn from the global letter frequencies, remaining
gaps are resolved left-to-right with an n-gram language model whose
contexts contain exactly one unknown position, falling back to unigram
draws when no context matches.  The result is artificial samples that
exercise the same inflection pattern as the originals.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .alignment import align
from .corpus import DEFAULT_GAP, InflectionSample
from .patches import EMPTY_TABLE

DEFAULT_N_MAX = 5
DEFAULT_FACTOR = 1
MAX_FACTOR = 5

# unknown-position marker inside language-model contexts
GAP_MARK = "?"


class EnhancerError(ValueError):
    """Raised on invalid enhancement parameters or sample groups."""


def weighted_choice(rng, counts: Counter) -> str:
    """Frequency-proportional draw; letters are scanned in sorted order.

    Uses a single rng.random() per draw, which keeps stubbing the rng in
    tests straightforward.
    """
    total = sum(counts.values())
    if total <= 0:
        raise EnhancerError("cannot sample from an empty distribution")
    u = rng.random() * total
    acc = 0
    letters = sorted(counts)
    for letter in letters:
        acc += counts[letter]
        if u < acc:
            return letter
    return letters[-1]


@dataclass
class GapNGramModel:
    """Frequency table over n-gram contexts with one gap position each."""

    counts: dict[str, Counter]
    letter_freqs: Counter
    n_max: int

    def probability(self, context: str, letter: str) -> float:
        """Relative frequency of ``letter`` under ``context``; 0 if unseen."""
        bucket = self.counts.get(context)
        if not bucket:
            return 0.0
        return bucket[letter] / sum(bucket.values())

    def fill(self, chars: Sequence[str], pos: int, rng, gap: str = DEFAULT_GAP) -> str:
        """Pick a letter for position ``pos`` of a partially-filled word.

        Tries the longest contexts first, shifting the window left to
        right within each n; the first context present in the model wins.
        Windows touching an unresolved gap can never match a model key.
        Falls back to the global letter frequencies.
        """
        word = "".join(chars)
        for n in range(self.n_max, 1, -1):
            lo = max(0, pos - n + 1)
            hi = min(pos, len(word) - n)
            for start in range(lo, hi + 1):
                window = word[start : start + n]
                rel = pos - start
                context = window[:rel] + GAP_MARK + window[rel + 1 :]
                if gap in context:
                    continue
                bucket = self.counts.get(context)
                if bucket:
                    return weighted_choice(rng, bucket)
        return weighted_choice(rng, self.letter_freqs)


def build_lm(samples: Sequence[InflectionSample], n_max: int = DEFAULT_N_MAX) -> GapNGramModel:
    """Count every window of length 2..n_max with each position gapped in turn.

    Both lemmas and target forms contribute.
    """
    if not samples:
        raise EnhancerError("cannot build a language model from zero samples")
    counts: dict[str, Counter] = {}
    letter_freqs: Counter = Counter()
    words = []
    for s in samples:
        words.append(s.lemma)
        if s.target is not None:
            words.append(s.target)
    for word in words:
        letter_freqs.update(word)
        for n in range(2, n_max + 1):
            for start in range(len(word) - n + 1):
                window = word[start : start + n]
                for rel in range(n):
                    context = window[:rel] + GAP_MARK + window[rel + 1 :]
                    counts.setdefault(context, Counter())[window[rel]] += 1
    return GapNGramModel(counts, letter_freqs, n_max)


@dataclass(frozen=True)
class TemplatePair:
    """Lemma/form templates with gaps, plus the positions filled in lockstep."""

    lemma_template: str
    form_template: str
    features: tuple[str, ...]
    shared_gap_links: tuple[tuple[int, int], ...]
    gap: str = DEFAULT_GAP


def _template(a_aligned: str, b_aligned: str, gap: str) -> str:
    return "".join(
        ca if ca == cb and ca != gap else gap
        for ca, cb in zip(a_aligned, b_aligned)
    )


def pair_template(
    p1: InflectionSample,
    p2: InflectionSample,
    gap: str = DEFAULT_GAP,
) -> TemplatePair:
    """Align two same-feature samples and keep only their common characters.

    Alignment is plain Levenshtein (no patch table), so enhancement can
    run before any glyph work.  The first min(k, l) gaps of lemma and
    form templates are linked: they receive identical letters later.
    """
    if p1.features != p2.features:
        raise EnhancerError("samples in a pair must share the same features")
    if p1.target is None or p2.target is None:
        raise EnhancerError("both samples in a pair need target forms")
    lemma_pair = align(p1.lemma, p2.lemma, EMPTY_TABLE, gap)
    form_pair = align(p1.target, p2.target, EMPTY_TABLE, gap)
    lemma_template = _template(lemma_pair.lemma_aligned, lemma_pair.target_aligned, gap)
    form_template = _template(form_pair.lemma_aligned, form_pair.target_aligned, gap)
    lemma_gaps = [i for i, c in enumerate(lemma_template) if c == gap]
    form_gaps = [i for i, c in enumerate(form_template) if c == gap]
    links = tuple(zip(lemma_gaps, form_gaps))
    return TemplatePair(lemma_template, form_template, p1.features, links, gap)


def generate(
    template: TemplatePair,
    lm: GapNGramModel,
    rng,
    count: int = 1,
) -> list[InflectionSample]:
    """Instantiate a template ``count`` times.

    Linked gaps first (shared letters, unigram-distributed), then the
    leftover gaps of the lemma and of the form, each left-to-right
    against the partially-filled word so earlier fills feed later
    contexts.
    """
    if count < 1:
        raise EnhancerError("count must be at least 1")
    gap = template.gap
    out = []
    for _ in range(count):
        lemma_chars = list(template.lemma_template)
        form_chars = list(template.form_template)
        for li, fi in template.shared_gap_links:
            letter = weighted_choice(rng, lm.letter_freqs)
            lemma_chars[li] = letter
            form_chars[fi] = letter
        for chars in (lemma_chars, form_chars):
            for pos, char in enumerate(chars):
                if char == gap:
                    chars[pos] = lm.fill(chars, pos, rng, gap)
        lemma = "".join(lemma_chars)
        form = "".join(form_chars)
        if not lemma or not form:
            continue
        out.append(InflectionSample(lemma, form, template.features))
    return out


def enhance(
    samples: Sequence[InflectionSample],
    factor: int = DEFAULT_FACTOR,
    min_support: int = 1,
    rng=None,
    gap: str = DEFAULT_GAP,
    n_max: int = DEFAULT_N_MAX,
) -> list[InflectionSample]:
    """Hallucinate ``factor`` artificial samples per same-feature pair.

    Samples are grouped by exact feature list; every unordered pair in a
    group yields one template, kept when its template recurs in at least
    ``min_support`` pairs.  Exact duplicates of real samples are dropped.
    Deterministic for a given rng seed.
    """
    if not 1 <= factor <= MAX_FACTOR:
        raise EnhancerError(f"factor must be in 1..{MAX_FACTOR}")
    if min_support < 1:
        raise EnhancerError("min_support must be at least 1")
    if rng is None:
        raise EnhancerError("an rng (e.g. random.Random(seed)) is required")

    lm = build_lm(samples, n_max)
    groups: dict[tuple[str, ...], list[InflectionSample]] = {}
    for s in samples:
        if s.target is not None:
            groups.setdefault(s.features, []).append(s)

    templates: list[TemplatePair] = []
    for members in groups.values():
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                templates.append(pair_template(members[i], members[j], gap))

    support = Counter(
        (t.features, t.lemma_template, t.form_template) for t in templates
    )
    real = {(s.lemma, s.target, s.features) for s in samples}
    out: list[InflectionSample] = []
    for template in templates:
        if support[(template.features, template.lemma_template, template.form_template)] < min_support:
            continue
        for artificial in generate(template, lm, rng, factor):
            key = (artificial.lemma, artificial.target, artificial.features)
            if key not in real and gap not in artificial.lemma + (artificial.target or ""):
                out.append(artificial)
    return out
