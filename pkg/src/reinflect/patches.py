"""Patch equivalence classes from glyph-bitmap XOR diffs.

A patch is a shortcut between two graphically similar characters (acute
accent, umlaut dots, ...).  Two rendered glyphs are compared with an
element-wise XOR; diffs that connect characters sharing the same base
letter and that stay under an ink threshold become patch candidates.
Candidates whose XOR patterns are bit-identical collapse into one
equivalence class, usable as a single numeric transducer action.  The
pixel data is discarded once classes are built; what remains is a lookup
table (symbol, patch_id) -> result that is symmetric by construction, so
applying the same patch twice returns the original symbol.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .corpus import Alphabet
from .glyphs import GlyphBitmap, RenderConfig, ink_count, render_alphabet

DEFAULT_THRESHOLD = 0.30

# Unicode block ranges (inclusive) used for prepopulation: the Latin family,
# Greek and Cyrillic, which the default font renders without placeholders.
DEFAULT_RANGES: tuple[tuple[int, int], ...] = (
    (0x0021, 0x007E),  # Basic Latin (printable)
    (0x00A1, 0x00FF),  # Latin-1 Supplement (printable)
    (0x0100, 0x017F),  # Latin Extended-A
    (0x0180, 0x024F),  # Latin Extended-B
    (0x0370, 0x03FF),  # Greek and Coptic
    (0x0400, 0x04FF),  # Cyrillic
    (0x1E00, 0x1EFF),  # Latin Extended Additional
)

# Letters with no canonical decomposition that still ride on a Latin base.
_CONFUSABLE_BASES = {
    "ø": "o", "Ø": "O",   # ø Ø
    "ı": "i", "İ": "I",   # ı İ (İ decomposes, kept for safety)
    "đ": "d", "Đ": "D",   # đ Đ
    "ł": "l", "Ł": "L",   # ł Ł
}


class PatchError(ValueError):
    """Raised for inconsistent diffs or conflicting table entries."""


def parse_base_overrides(text: str) -> dict[str, str]:
    """User override file for BaseMap: ``char<TAB>base`` per line."""
    overrides = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2 or len(cols[0]) != 1 or len(cols[1]) != 1:
            raise PatchError(
                f"base overrides line {lineno}: expected char<TAB>base"
            )
        overrides[cols[0]] = cols[1]
    return overrides


class BaseMap:
    """Maps a character to its diacritic-stripped base character.

    Canonical decomposition first (dropping combining marks), then a small
    confusable fallback for non-decomposable letters like ``ø``, then user
    overrides.  Idempotent: base(base(c)) == base(c).
    """

    def __init__(self, overrides: Mapping[str, str] | None = None) -> None:
        self._overrides = dict(overrides or {})
        self._cache: dict[str, str] = {}

    def cache_key(self) -> tuple[tuple[str, str], ...]:
        return tuple(sorted(self._overrides.items()))

    def _step(self, char: str) -> str:
        if char in self._overrides:
            return self._overrides[char]
        if char in _CONFUSABLE_BASES:
            return _CONFUSABLE_BASES[char]
        decomposed = unicodedata.normalize("NFD", char)
        kept = [c for c in decomposed if not unicodedata.combining(c)]
        return kept[0] if kept else char

    def __call__(self, char: str) -> str:
        if char not in self._cache:
            seen = {char}
            cur = char
            while True:
                nxt = self._step(cur)
                if nxt == cur or nxt in seen:
                    break
                seen.add(nxt)
                cur = nxt
            self._cache[char] = cur
        return self._cache[char]


@dataclass(frozen=True)
class PatchDiff:
    """Element-wise XOR of two glyph bitmaps."""

    a: str
    b: str
    xor_bits: bytes
    weight: int

    def __post_init__(self) -> None:
        if self.weight != sum(self.xor_bits):
            raise PatchError("weight must equal the set-pixel count of xor_bits")


def diff(a: GlyphBitmap, b: GlyphBitmap) -> PatchDiff:
    """XOR two bitmaps of identical dimensions."""
    if (a.width, a.height) != (b.width, b.height):
        raise PatchError(
            f"dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    xor_bits = bytes(x ^ y for x, y in zip(a.bits, b.bits))
    return PatchDiff(a.char, b.char, xor_bits, sum(xor_bits))


def is_candidate(
    a: GlyphBitmap,
    b: GlyphBitmap,
    d: PatchDiff,
    base: BaseMap,
    threshold: float = DEFAULT_THRESHOLD,
) -> bool:
    """True iff the pair may form a patch.

    Requires distinct characters on the same base letter whose diff is
    non-empty but stays under ``threshold`` times the larger glyph's ink.
    Pairs like (x, m) fail the base test and would add nothing over a
    plain EMIT anyway.
    """
    if a.char == b.char:
        return False
    if base(a.char) != base(b.char):
        return False
    limit = threshold * max(ink_count(a), ink_count(b), 1)
    return 0 < d.weight <= limit


@dataclass(frozen=True)
class PatchTable:
    """Lookup table (symbol, patch_id) -> result symbol.

    Entries are symmetric ((s,k)->r iff (r,k)->s), never map a symbol to
    itself, and patch ids are dense 0..class_count-1.
    """

    entries: dict[tuple[str, int], str]
    class_count: int
    _pairs: dict[tuple[str, str], int] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        seen_ids = set()
        pairs: dict[tuple[str, str], int] = {}
        for (symbol, patch_id), result in self.entries.items():
            if result == symbol:
                raise PatchError(f"entry maps {symbol!r} to itself")
            if not 0 <= patch_id < self.class_count:
                raise PatchError(f"patch id {patch_id} out of range")
            if self.entries.get((result, patch_id)) != symbol:
                raise PatchError(
                    f"missing symmetric partner for ({symbol!r}, {patch_id})"
                )
            if (symbol, result) in pairs:
                raise PatchError(
                    f"pair ({symbol!r}, {result!r}) appears under two patch ids"
                )
            pairs[(symbol, result)] = patch_id
            seen_ids.add(patch_id)
        if seen_ids != set(range(self.class_count)):
            raise PatchError("patch ids are not dense")
        object.__setattr__(self, "_pairs", pairs)

    def __len__(self) -> int:
        return len(self.entries)


EMPTY_TABLE = PatchTable({}, 0)


def apply(table: PatchTable, symbol: str, patch_id: int) -> Optional[str]:
    """Partial function: the patched symbol, or None where undefined."""
    return table.entries.get((symbol, patch_id))


def find_patch(table: PatchTable, a: str, b: str) -> Optional[int]:
    """The patch id transforming a into b, or None."""
    return table._pairs.get((a, b))


def build_classes(
    candidates: Sequence[tuple[str, str, PatchDiff]],
) -> list[list[tuple[str, str]]]:
    """Group candidate pairs into equivalence classes by bit-identical XOR.

    Class ids follow first appearance in a codepoint-sorted scan, so the
    numbering is deterministic for a given candidate set.
    """
    by_pattern: dict[bytes, list[tuple[str, str]]] = {}
    order: list[bytes] = []
    for a, b, d in sorted(candidates, key=lambda c: (c[0], c[1])):
        pair = (a, b) if a <= b else (b, a)
        bucket = by_pattern.get(d.xor_bits)
        if bucket is None:
            by_pattern[d.xor_bits] = [pair]
            order.append(d.xor_bits)
        elif pair not in bucket:
            bucket.append(pair)
    return [by_pattern[pattern] for pattern in order]


def build_table(classes: Sequence[Sequence[tuple[str, str]]]) -> PatchTable:
    """Arrange classes as the symmetric lookup table; pixel data is dropped."""
    entries: dict[tuple[str, int], str] = {}
    for patch_id, pairs in enumerate(classes):
        for a, b in pairs:
            for key, value in (((a, patch_id), b), ((b, patch_id), a)):
                existing = entries.get(key)
                if existing is not None and existing != value:
                    raise PatchError(
                        f"conflicting entries for {key!r}: "
                        f"{existing!r} vs {value!r}"
                    )
                entries[key] = value
    return PatchTable(entries, len(classes))


_prepopulate_cache: dict[tuple, PatchTable] = {}


def _renderable_chars(ranges: Iterable[tuple[int, int]]) -> set[str]:
    chars = set()
    for lo, hi in ranges:
        for cp in range(lo, hi + 1):
            if unicodedata.category(chr(cp))[0] not in ("C", "Z"):
                chars.add(chr(cp))
    return chars


def prepopulate(
    ranges: Sequence[tuple[int, int]],
    config: RenderConfig,
    base: BaseMap | None = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> PatchTable:
    """Run the full pipeline over Unicode ranges: render, diff, group, tabulate.

    Only pairs within one base-letter group are diffed.  The result is
    memoized per (ranges, render config, base map, threshold) since the
    computation is costly but reusable across languages.
    """
    base = base or BaseMap()
    key = (
        tuple(ranges),
        config.font_source,
        config.grid,
        config.point_size,
        tuple(sorted(config.overrides.items())),
        base.cache_key(),
        threshold,
    )
    cached = _prepopulate_cache.get(key)
    if cached is not None:
        return cached

    chars = _renderable_chars(ranges)
    if not chars:
        table = EMPTY_TABLE
        _prepopulate_cache[key] = table
        return table
    rendered = render_alphabet(chars, config)

    groups: dict[str, list[str]] = {}
    for char in sorted(rendered.bitmaps):
        groups.setdefault(base(char), []).append(char)

    candidates = []
    for members in groups.values():
        # the override map can render two codepoints identically (i and the
        # dotless i); keep one representative per distinct bitmap, else a
        # third glyph diffs equally against both and the table conflicts
        unique: list[str] = []
        seen_bits: set[bytes] = set()
        for char in members:
            bits = rendered.bitmaps[char].bits
            if bits not in seen_bits:
                seen_bits.add(bits)
                unique.append(char)
        for i, a in enumerate(unique):
            for b in unique[i + 1 :]:
                d = diff(rendered.bitmaps[a], rendered.bitmaps[b])
                if is_candidate(rendered.bitmaps[a], rendered.bitmaps[b], d, base, threshold):
                    candidates.append((a, b, d))

    table = build_table(build_classes(candidates))
    _prepopulate_cache[key] = table
    return table


def filter_for_alphabet(table: PatchTable, alphabet: Alphabet | Iterable[str]) -> PatchTable:
    """Keep whole classes for which the alphabet contains at least one example.

    A class survives iff some entry has both its symbol and its result in
    the alphabet; surviving classes keep all their rows (including symbols
    outside the alphabet) and are re-densified in ascending old-id order.
    """
    symbols = set(alphabet.symbols if isinstance(alphabet, Alphabet) else alphabet)
    observed = sorted(
        {
            patch_id
            for (symbol, patch_id), result in table.entries.items()
            if symbol in symbols and result in symbols
        }
    )
    remap = {old: new for new, old in enumerate(observed)}
    entries = {
        (symbol, remap[patch_id]): result
        for (symbol, patch_id), result in table.entries.items()
        if patch_id in remap
    }
    return PatchTable(entries, len(observed))


def serialize_table(table: PatchTable) -> str:
    """TSV rows ``symbol<TAB>patch_id<TAB>result`` sorted by (id, symbol)."""
    rows = sorted(table.entries.items(), key=lambda kv: (kv[0][1], kv[0][0]))
    return "".join(
        f"{symbol}\t{patch_id}\t{result}\n"
        for (symbol, patch_id), result in rows
    )


def parse_table(text: str) -> PatchTable:
    """Inverse of serialize_table; validates symmetry and dense ids."""
    entries: dict[tuple[str, int], str] = {}
    max_id = -1
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise PatchError(f"line {lineno}: expected 3 columns, got {len(cols)}")
        symbol, id_text, result = cols
        try:
            patch_id = int(id_text)
        except ValueError:
            raise PatchError(f"line {lineno}: bad patch id {id_text!r}") from None
        if len(symbol) != 1 or len(result) != 1:
            raise PatchError(f"line {lineno}: symbols must be single codepoints")
        if (symbol, patch_id) in entries:
            raise PatchError(f"line {lineno}: duplicate entry ({symbol!r}, {patch_id})")
        entries[(symbol, patch_id)] = result
        max_id = max(max_id, patch_id)
    return PatchTable(entries, max_id + 1)
