"""Fixed-grid monochrome glyph rendering.

Symbols are rasterized onto one shared pixel grid at a fixed pen position
with anti-aliasing disabled: the rasterizer's grayscale coverage is
thresholded at 0.5, so a pixel is set iff the glyph covers at least half
of it.  Pixel-exact reproducibility across symbols is what makes bitmap
XOR diffs meaningful, which is why only monospaced fonts make sense here.

The glyph source is pluggable: either a scalable font file (rendered via
Pillow/FreeType) or a directory of pre-rendered plain-PBM files named
``U+0061.pbm``.  The PBM path keeps everything downstream of rendering
bit-exact and platform-independent.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

from PIL import Image, ImageDraw, ImageFont
from fontTools.ttLib import TTFont

DEFAULT_GRID = (24, 32)
DEFAULT_POINT_SIZE = 14
# top-left pen position; identical for every glyph in a session
_PEN = (2, 2)
# coverage >= 0.5 on the 0..255 grayscale ramp
_THRESHOLD = 128

# Candidate monospace fonts with wide Unicode coverage, probed in order.
DEFAULT_FONT_CANDIDATES = (
    "/usr/share/fonts/truetype/dejavu/DejaVuSansMono.ttf",
    "/usr/share/fonts/dejavu/DejaVuSansMono.ttf",
    "/usr/local/share/fonts/DejaVuSansMono.ttf",
)


class GlyphError(ValueError):
    """Raised for unusable fonts or malformed bitmap payloads."""


def find_default_font() -> str | None:
    """Locate a usable default font (REINFLECT_FONT env var wins)."""
    env = os.environ.get("REINFLECT_FONT")
    if env and os.path.exists(env):
        return env
    for path in DEFAULT_FONT_CANDIDATES:
        if os.path.exists(path):
            return path
    return None


@dataclass(frozen=True)
class GlyphBitmap:
    """Monochrome pixel matrix for one symbol.

    ``bits`` is row-major, one byte per pixel, 1 = set/black.
    """

    char: str
    width: int
    height: int
    bits: bytes

    def __post_init__(self) -> None:
        if len(self.bits) != self.width * self.height:
            raise GlyphError(
                f"bit count {len(self.bits)} != {self.width}x{self.height}"
            )
        if any(b not in (0, 1) for b in self.bits):
            raise GlyphError("bits must be 0 or 1")

    def rows(self) -> list[bytes]:
        w = self.width
        return [self.bits[y * w : (y + 1) * w] for y in range(self.height)]


def default_overrides() -> dict[str, str]:
    # i keeps its dot under accents in most fonts, which would make i-based
    # patch diffs differ from every other base letter; rendering the dotless
    # form instead restores the shared diff pattern.
    return {"i": "ı"}


@dataclass(frozen=True)
class RenderConfig:
    """Rendering session parameters.

    ``font_source`` is either a scalable font file or a directory of
    ``U+XXXX.pbm`` files.
    """

    font_source: str
    grid: tuple[int, int] = DEFAULT_GRID
    point_size: int = DEFAULT_POINT_SIZE
    overrides: Mapping[str, str] = field(default_factory=default_overrides)

    def __post_init__(self) -> None:
        if self.grid[0] < 8 or self.grid[1] < 8:
            raise GlyphError("grid must be at least 8x8")
        if self.point_size < 1:
            raise GlyphError("point size must be positive")

    def resolve(self, char: str) -> str:
        """Apply the override map (idempotent: targets never remap)."""
        out = self.overrides.get(char, char)
        if self.overrides.get(out, out) != out:
            raise GlyphError(f"override chain detected at {char!r}")
        return out


@dataclass(frozen=True)
class RenderedAlphabet:
    """Result of one rendering session.

    ``bitmaps`` is keyed by the original (pre-override) character;
    ``placeholders`` lists characters the source cannot render, which are
    excluded from patch candidacy.
    """

    bitmaps: dict[str, GlyphBitmap]
    placeholders: frozenset[str]


@lru_cache(maxsize=8)
def _font_cmap(path: str) -> frozenset[int]:
    try:
        with TTFont(path, lazy=True, fontNumber=0) as font:
            return frozenset(font.getBestCmap().keys())
    except Exception as exc:
        raise GlyphError(f"cannot read font tables from {path}: {exc}") from exc


@lru_cache(maxsize=8)
def _load_font(path: str, point_size: int) -> ImageFont.FreeTypeFont:
    try:
        return ImageFont.truetype(path, point_size)
    except OSError as exc:
        raise GlyphError(f"cannot load font {path}: {exc}") from exc


def _rasterize(char: str, font: ImageFont.FreeTypeFont, grid: tuple[int, int]) -> bytes:
    w, h = grid
    img = Image.new("L", (w, h), 0)
    ImageDraw.Draw(img).text(_PEN, char, fill=255, font=font)
    return bytes(1 if v >= _THRESHOLD else 0 for v in img.tobytes())


def _render_from_font(chars: Iterable[str], config: RenderConfig) -> RenderedAlphabet:
    font = _load_font(config.font_source, config.point_size)
    cmap = _font_cmap(config.font_source)
    # .notdef reference: whatever the font draws for an unmapped codepoint
    notdef_probe = next(
        chr(cp) for cp in range(0xFDD0, 0x10FFFF) if cp not in cmap
    )
    notdef_bits = _rasterize(notdef_probe, font, config.grid)

    bitmaps: dict[str, GlyphBitmap] = {}
    placeholders = set()
    for char in sorted(set(chars)):
        glyph_char = config.resolve(char)
        missing = ord(glyph_char) not in cmap
        bits = notdef_bits if missing else _rasterize(glyph_char, font, config.grid)
        if missing or (bits == notdef_bits and any(notdef_bits)):
            placeholders.add(char)
            continue
        bitmaps[char] = GlyphBitmap(char, config.grid[0], config.grid[1], bits)
    return RenderedAlphabet(bitmaps, frozenset(placeholders))


def _render_from_dir(chars: Iterable[str], config: RenderConfig) -> RenderedAlphabet:
    bitmaps: dict[str, GlyphBitmap] = {}
    placeholders = set()
    for char in sorted(set(chars)):
        glyph_char = config.resolve(char)
        path = os.path.join(config.font_source, f"U+{ord(glyph_char):04X}.pbm")
        if not os.path.exists(path):
            placeholders.add(char)
            continue
        with open(path, encoding="ascii") as handle:
            bitmap = load_bitmap(handle.read(), char=char)
        if (bitmap.width, bitmap.height) != config.grid:
            raise GlyphError(
                f"{path}: grid {bitmap.width}x{bitmap.height} does not match "
                f"session grid {config.grid[0]}x{config.grid[1]}"
            )
        bitmaps[char] = bitmap
    return RenderedAlphabet(bitmaps, frozenset(placeholders))


def render_alphabet(chars: Iterable[str], config: RenderConfig) -> RenderedAlphabet:
    """Render every character onto the session grid, keyed by original char.

    Characters the source cannot render come back as placeholders instead
    of bitmaps; they must never enter patch candidacy.
    """
    chars = set(chars)
    if not chars:
        raise GlyphError("no characters to render")
    if os.path.isdir(config.font_source):
        return _render_from_dir(chars, config)
    return _render_from_font(chars, config)


def ink_count(bitmap: GlyphBitmap) -> int:
    """Number of set pixels."""
    return sum(bitmap.bits)


def save_bitmap(bitmap: GlyphBitmap) -> str:
    """Serialize to plain PBM (P1) text with the codepoint as a comment."""
    lines = [f"P1\n# U+{ord(bitmap.char):04X}\n{bitmap.width} {bitmap.height}\n"]
    for row in bitmap.rows():
        lines.append(" ".join(str(b) for b in row) + "\n")
    return "".join(lines)


def load_bitmap(text: str, char: str | None = None) -> GlyphBitmap:
    """Parse plain PBM (P1) text; inverse of save_bitmap.

    The codepoint comes from the ``# U+XXXX`` comment unless ``char`` is
    given explicitly.
    """
    tokens: list[str] = []
    comment_char = None
    for line in text.split("\n"):
        if "#" in line:
            body, _, comment = line.partition("#")
            comment = comment.strip()
            if comment.startswith("U+") and comment_char is None:
                try:
                    comment_char = chr(int(comment[2:], 16))
                except ValueError:
                    pass
            line = body
        tokens.extend(line.split())
    if not tokens or tokens[0] != "P1":
        raise GlyphError(f"expected plain PBM magic 'P1', got {tokens[:1]!r}")
    if len(tokens) < 3:
        raise GlyphError("truncated PBM header")
    try:
        width, height = int(tokens[1]), int(tokens[2])
    except ValueError as exc:
        raise GlyphError(f"bad PBM dimensions: {exc}") from None
    payload = tokens[3:]
    if len(payload) != width * height:
        raise GlyphError(
            f"expected {width * height} pixels, got {len(payload)}"
        )
    if any(tok not in ("0", "1") for tok in payload):
        raise GlyphError("PBM pixels must be 0 or 1")
    if char is None:
        char = comment_char
    if char is None:
        raise GlyphError("no codepoint comment in PBM and no char given")
    return GlyphBitmap(char, width, height, bytes(int(t) for t in payload))
