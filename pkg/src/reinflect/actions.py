"""Transducer actions: vocabulary, oracle derivation, and execution.

The transducer walks the input lemma left-to-right via an index pointer
and applies edit actions:

* EMIT s  — append s to the output, irrespective of the pointer symbol
* COPY    — append the pointer symbol
* PATCH k — apply patch k to the pointer symbol, append the result
* MOVE    — advance the pointer
* EOW     — stop; the current output is the inflected form

A sentinel position past the last lemma character keeps the pointer
attendable after the lemma is consumed.  At the sentinel the transducer
runs in damage-control mode: COPY and PATCH no longer write, MOVE is
discarded, and an EMIT of the character already at the end of the output
is dropped.  The last rule intentionally reproduces the shipped
behavior, clipped final characters and all; see derive_oracle's note.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

from .alignment import AlignedPair
from .patches import PatchTable, apply, find_patch

# hard ceiling on transducer steps, whatever the lemma length
MAX_STEP_CAP = 200


class TransducerError(ValueError):
    """Raised on malformed actions or stepping a finished state."""


class ActionKind(enum.Enum):
    EMIT = "EMIT"
    COPY = "COPY"
    PATCH = "PATCH"
    MOVE = "MOVE"
    EOW = "EOW"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    symbol: Optional[str] = None
    patch_id: Optional[int] = None

    def __post_init__(self) -> None:
        if (self.symbol is not None) != (self.kind is ActionKind.EMIT):
            raise TransducerError("symbol present iff kind is EMIT")
        if (self.patch_id is not None) != (self.kind is ActionKind.PATCH):
            raise TransducerError("patch_id present iff kind is PATCH")
        if self.symbol is not None and len(self.symbol) != 1:
            raise TransducerError("EMIT symbol must be one codepoint")
        if self.patch_id is not None and self.patch_id < 0:
            raise TransducerError("patch id must be non-negative")

    def token(self) -> str:
        """Textual form: COPY, MOVE, EOW, PATCH:7, EMIT:m.

        An emitted space is escaped as ``EMIT:\\s`` so token streams stay
        whitespace-separable.
        """
        if self.kind is ActionKind.EMIT:
            return "EMIT:\\s" if self.symbol == " " else f"EMIT:{self.symbol}"
        if self.kind is ActionKind.PATCH:
            return f"PATCH:{self.patch_id}"
        return self.kind.value


COPY = Action(ActionKind.COPY)
MOVE = Action(ActionKind.MOVE)
EOW = Action(ActionKind.EOW)


def emit(symbol: str) -> Action:
    return Action(ActionKind.EMIT, symbol=symbol)


def patch(patch_id: int) -> Action:
    return Action(ActionKind.PATCH, patch_id=patch_id)


def parse_action(token: str) -> Action:
    """Inverse of Action.token()."""
    if token == "COPY":
        return COPY
    if token == "MOVE":
        return MOVE
    if token == "EOW":
        return EOW
    if token == "EMIT:\\s":
        return emit(" ")
    if token.startswith("EMIT:") and len(token) == 6:
        return emit(token[5])
    if token.startswith("PATCH:"):
        try:
            return patch(int(token[6:]))
        except ValueError:
            pass
    raise TransducerError(f"unparseable action token {token!r}")


@dataclass(frozen=True)
class ActionVocab:
    """Dense, deterministic indexing of every action available to the model.

    Order: COPY, MOVE, EOW, then PATCH by ascending id, then EMIT by
    ascending codepoint.
    """

    actions: tuple[Action, ...]

    @classmethod
    def build(cls, patch_class_count: int, emit_symbols: Sequence[str]) -> "ActionVocab":
        fixed = (COPY, MOVE, EOW)
        patches_part = tuple(patch(k) for k in range(patch_class_count))
        emits = tuple(emit(s) for s in sorted(set(emit_symbols)))
        return cls(fixed + patches_part + emits)

    def __len__(self) -> int:
        return len(self.actions)

    def index(self) -> dict[Action, int]:
        return {a: i for i, a in enumerate(self.actions)}


@dataclass(frozen=True)
class TransducerState:
    """Immutable execution state.

    ``input`` is the lemma plus one sentinel character; ``pointer`` ranges
    over 0..len(lemma) inclusive, the maximum being the sentinel position.
    """

    input: str
    pointer: int
    output: str
    done: bool
    steps: int
    cap: int

    @property
    def at_sentinel(self) -> bool:
        return self.pointer == len(self.input) - 1

    @property
    def pointer_symbol(self) -> str:
        return self.input[self.pointer]


def default_step_cap(lemma_length: int) -> int:
    return min(MAX_STEP_CAP, 4 * lemma_length + 40)


def initial_state(lemma: str, sentinel: str, cap: Optional[int] = None) -> TransducerState:
    if sentinel in lemma:
        raise TransducerError("sentinel occurs in the lemma")
    if cap is None:
        cap = default_step_cap(len(lemma))
    return TransducerState(lemma + sentinel, 0, "", False, 0, cap)


def derive_oracle(aligned: AlignedPair, table: PatchTable) -> list[Action]:
    """Gold action sequence for an aligned lemma/target pair.

    Walks the aligned pair position by position: a gap on the lemma side
    emits the target character; a gap on the target side moves past the
    lemma character; equal characters copy; patchable characters patch;
    anything else emits and moves.  EOW terminates the sequence.

    Note: when the target appends a character equal to the then-last
    output character after the lemma is exhausted, the transducer's
    end-of-word handling will clip it on execution.  That clipping is the
    documented cost of the damage-control rules, not an oracle bug.
    """
    gap = aligned.gap
    actions: list[Action] = []
    for cw, ct in zip(aligned.lemma_aligned, aligned.target_aligned):
        if cw == gap:
            actions.append(emit(ct))
        elif ct == gap:
            actions.append(MOVE)
        elif cw == ct:
            actions.append(COPY)
            actions.append(MOVE)
        else:
            pid = find_patch(table, cw, ct)
            if pid is not None:
                actions.append(patch(pid))
            else:
                actions.append(emit(ct))
            actions.append(MOVE)
    actions.append(EOW)
    return actions


def step(state: TransducerState, action: Action, table: PatchTable) -> TransducerState:
    """Apply one action; total and deterministic on non-done states."""
    if state.done:
        raise TransducerError("cannot step a finished transducer")

    pointer = state.pointer
    output = state.output
    done = False

    if action.kind is ActionKind.EMIT:
        # at the sentinel, refuse to append the character already at the
        # end of the output (anti-runaway rule)
        if not (state.at_sentinel and output and output[-1] == action.symbol):
            output = output + action.symbol
    elif action.kind is ActionKind.COPY:
        if not state.at_sentinel:
            output = output + state.pointer_symbol
    elif action.kind is ActionKind.PATCH:
        if not state.at_sentinel:
            patched = apply(table, state.pointer_symbol, action.patch_id)
            if patched is not None:
                output = output + patched
    elif action.kind is ActionKind.MOVE:
        if not state.at_sentinel:
            pointer += 1
    elif action.kind is ActionKind.EOW:
        done = True

    steps = state.steps + 1
    if steps >= state.cap:
        done = True
    return TransducerState(state.input, pointer, output, done, steps, state.cap)


def run(
    lemma: str,
    actions: Sequence[Action],
    table: PatchTable,
    sentinel: str = "",
    cap: Optional[int] = None,
) -> str:
    """Execute an action sequence on a lemma and return the output string."""
    state = initial_state(lemma, sentinel, cap)
    for action in actions:
        if state.done:
            break
        state = step(state, action, table)
    return state.output


def valid_action_mask(
    state: TransducerState,
    vocab: ActionVocab,
    table: PatchTable,
    forbid_empty_eow: bool = False,
) -> list[bool]:
    """Per-action feasibility used to prune decoding.

    PATCH actions undefined at the current pointer symbol are masked out;
    EOW can optionally be masked while the output is still empty.  The
    end-of-word no-op rules are execution semantics, not masks.
    """
    mask = []
    for action in vocab.actions:
        if action.kind is ActionKind.PATCH:
            mask.append(apply(table, state.pointer_symbol, action.patch_id) is not None)
        elif action.kind is ActionKind.EOW and forbid_empty_eow and not state.output:
            mask.append(False)
        else:
            mask.append(True)
    return mask


def serialize_actions(actions: Sequence[Action]) -> str:
    """Space-separated action tokens, one sequence per line elsewhere."""
    return " ".join(a.token() for a in actions)


def parse_actions(text: str) -> list[Action]:
    return [parse_action(tok) for tok in text.split()] if text.strip() else []
