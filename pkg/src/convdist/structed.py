"""Structural reference metric over per-utterance act/slot annotations.

A conversation's action flow is one token per utterance: its act labels
joined with their slots, sorted. Distance is a classic unit-cost edit
distance over those tokens (insert/delete 1, mismatch substitution 2),
normalized by the longer flow, which bounds it to [0, 2]. Annotations are
consumed only here; the semantic measures never look at them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .editops import AlignmentResult, CostModel, edit_distance
from .errors import MeasureError, UnannotatedUtteranceError
from .model import Conversation

STRUCT_COSTS = CostModel.uniform(ins=1.0, del_=1.0, sub_mismatch=2.0)


@dataclass(frozen=True)
class ActionFlow:
    """Ordered flow tokens, one per utterance of the source conversation."""

    conversation_id: str
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


def flow_token(acts) -> str:
    """Token for one utterance: act_slot pairs, sorted, comma-joined.

    A pair is ``act_slot`` when the slot is present, bare ``act`` otherwise.
    Sorting is case-sensitive byte order, so annotation order never matters.
    """
    pairs = [a.act if a.slot is None else f"{a.act}_{a.slot}" for a in acts]
    return ",".join(sorted(pairs))


def action_flow(conv: Conversation) -> ActionFlow:
    tokens: list[str] = []
    for i, utt in enumerate(conv.utterances):
        if not utt.acts:
            raise UnannotatedUtteranceError(
                f"conversation {conv.id!r} utterance {i} has no act annotations"
            )
        tokens.append(flow_token(utt.acts))
    return ActionFlow(conversation_id=conv.id, tokens=tuple(tokens))


def flow_alignment(c1: Conversation, c2: Conversation) -> AlignmentResult:
    """Unnormalized token alignment between two action flows."""
    f1 = action_flow(c1)
    f2 = action_flow(c2)
    return edit_distance(f1.tokens, f2.tokens, STRUCT_COSTS)


def struct_ed(c1: Conversation, c2: Conversation) -> float:
    """Normalized structural edit distance in [0, 2]."""
    f1 = action_flow(c1)
    f2 = action_flow(c2)
    longest = max(len(f1), len(f2))
    if longest == 0:
        raise MeasureError("both action flows are empty; normalization undefined")
    result = edit_distance(f1.tokens, f2.tokens, STRUCT_COSTS)
    return result.distance / longest
