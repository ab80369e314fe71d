"""Morphological reinflection toolkit.

Transforms a lemma plus a morphological feature set into an inflected word
form via a learned sequence of transducer edit actions (COPY, MOVE, EMIT,
PATCH, EOW), where PATCH operations are equivalence classes of pixel-level
glyph differences (accents, umlauts, ...) derived from rendered bitmaps.
Includes a data enhancer that hallucinates extra training samples for
low-resource settings.
"""

__version__ = "0.1.0"
