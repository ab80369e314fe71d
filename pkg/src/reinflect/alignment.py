"""Patch-aware Levenshtein alignment of lemma and target.

Plain unit-cost edit distance, except that two symbols connected by a
patch count as equal (cost 0).  This biases the minimal alignments toward
positions a transducer can handle with COPY and PATCH instead of EMIT.
Among equal-cost alignments the backtrace prefers, in order: diagonal
(match/patch/substitute), deletion from the lemma (gap in the target),
insertion into the target (gap in the lemma).  The order is what makes
derived oracles reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import DEFAULT_GAP
from .patches import PatchTable, find_patch


class AlignmentError(ValueError):
    """Raised when inputs violate alignment preconditions."""


@dataclass(frozen=True)
class AlignedPair:
    """Gap-filled aligned strings of equal length."""

    lemma_aligned: str
    target_aligned: str
    gap: str
    cost: int

    def __post_init__(self) -> None:
        if len(self.lemma_aligned) != len(self.target_aligned):
            raise AlignmentError("aligned strings must have equal length")
        for cw, ct in zip(self.lemma_aligned, self.target_aligned):
            if cw == self.gap and ct == self.gap:
                raise AlignmentError("gap aligned to gap")

    def lemma(self) -> str:
        return self.lemma_aligned.replace(self.gap, "")

    def target(self) -> str:
        return self.target_aligned.replace(self.gap, "")


def sub_cost(a: str, b: str, table: PatchTable) -> int:
    """0 iff the symbols are equal or a patch transforms one into the other."""
    if a == b or find_patch(table, a, b) is not None:
        return 0
    return 1


def align(
    lemma: str, target: str, table: PatchTable, gap: str = DEFAULT_GAP
) -> AlignedPair:
    """Minimal-cost monotone alignment under the patch-aware metric.

    Costs: match/patch 0, substitution 1, insertion 1, deletion 1.
    """
    if not lemma or not target:
        raise AlignmentError("lemma and target must be non-empty")
    if gap in lemma or gap in target:
        raise AlignmentError(f"gap symbol {gap!r} occurs in the input")

    n, m = len(lemma), len(target)
    cost = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        cost[i][0] = i
    for j in range(1, m + 1):
        cost[0][j] = j
    for i in range(1, n + 1):
        row, prev = cost[i], cost[i - 1]
        cw = lemma[i - 1]
        for j in range(1, m + 1):
            row[j] = min(
                prev[j - 1] + sub_cost(cw, target[j - 1], table),
                prev[j] + 1,
                row[j - 1] + 1,
            )

    # backtrace from the end; preference order fixes the alignment among ties
    out_w: list[str] = []
    out_t: list[str] = []
    i, j = n, m
    while i > 0 or j > 0:
        if (
            i > 0
            and j > 0
            and cost[i][j] == cost[i - 1][j - 1] + sub_cost(lemma[i - 1], target[j - 1], table)
        ):
            out_w.append(lemma[i - 1])
            out_t.append(target[j - 1])
            i -= 1
            j -= 1
        elif i > 0 and cost[i][j] == cost[i - 1][j] + 1:
            out_w.append(lemma[i - 1])
            out_t.append(gap)
            i -= 1
        else:
            out_w.append(gap)
            out_t.append(target[j - 1])
            j -= 1
    return AlignedPair(
        "".join(reversed(out_w)), "".join(reversed(out_t)), gap, cost[n][m]
    )
