"""Turn-by-turn grounding state machine.

Provider contributions sit in a pending buffer until the partner accepts
them (explicitly or implicitly); only then are they committed to the shared
knowledge base. Content that first appears in a clarifying question is never
committed and never enters the pending buffer, since the provider has not
confirmed it yet.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

from .assessment import AssessmentOutcome, GraphOp, Verdict, commit
from .dialogue import Dialogue, GoldAnnotation, GroundingLabel, Role, Turn
from .knowledge import EMPTY_KNOWLEDGE, GroundedKnowledge

Labeler = Callable[[Sequence[Turn]], GroundingLabel]
Extractor = Callable[[Sequence[Turn]], GroundedKnowledge]


@dataclass(frozen=True)
class PendingContribution:
    """Presented but not yet accepted facts."""

    facts: GroundedKnowledge
    presented_at: int
    presenter: Role

    def __post_init__(self) -> None:
        if self.facts.is_empty:
            raise ValueError("pending contribution must carry facts")


@dataclass(frozen=True)
class HistoryEntry:
    turn_index: int
    label: GroundingLabel
    ops: tuple[GraphOp, ...] = ()


@dataclass(frozen=True)
class GroundingState:
    grounded: GroundedKnowledge = EMPTY_KNOWLEDGE
    pending: Optional[PendingContribution] = None
    history: tuple[HistoryEntry, ...] = ()


class FeedbackKind(enum.Enum):
    EXPLICIT_ACK = "explicit_ack"
    IMPLICIT_CONTINUE = "implicit_continue"
    CLARIFY_CONFLICT = "clarify_conflict"


_FEEDBACK_TEMPLATES = {
    FeedbackKind.EXPLICIT_ACK: "Thanks, got it.",
    FeedbackKind.IMPLICIT_CONTINUE: "Okay, what else can you tell me?",
    FeedbackKind.CLARIFY_CONFLICT: (
        "Hmm, that does not match what I noted earlier. Could you clarify?"
    ),
}


@dataclass(frozen=True)
class FeedbackAct:
    kind: FeedbackKind
    rendered: str


def choose_feedback(outcomes: list[AssessmentOutcome]) -> FeedbackAct:
    """Pick the response type for the most recent assessment.

    Any conflict asks for clarification; novel content continues the
    dialogue implicitly; pure (partial) matches acknowledge explicitly.
    """
    verdicts = {o.verdict for o in outcomes}
    if Verdict.CONFLICT in verdicts:
        kind = FeedbackKind.CLARIFY_CONFLICT
    elif Verdict.NOVEL in verdicts:
        kind = FeedbackKind.IMPLICIT_CONTINUE
    else:
        kind = FeedbackKind.EXPLICIT_ACK
    return FeedbackAct(kind, _FEEDBACK_TEMPLATES[kind])


def present(
    state: GroundingState, facts: GroundedKnowledge, turn: Turn
) -> GroundingState:
    """Stage presented facts in the pending buffer.

    A later presentation that corrects or enriches pending facts replaces
    the overlapping ones (provider self-correction); the committed knowledge
    is untouched.
    """
    if facts.is_empty:
        return state
    if state.pending is None:
        combined = facts
    else:
        combined, _, _ = commit(state.pending.facts, facts)
    return replace(
        state,
        pending=PendingContribution(combined, turn.index, turn.role),
    )


def observe_label(
    state: GroundingState,
    label: GroundingLabel,
    turn: Turn,
    turn_facts: GroundedKnowledge = EMPTY_KNOWLEDGE,
) -> GroundingState:
    """Advance the state machine with the grounding act of one turn.

    Explicit and implicit acts commit the pending contribution together with
    the facts extracted from the accepting turn itself. Clarification keeps
    the pending contribution staged and discards the turn's own facts: a
    clarifying question's content is unconfirmed. No-event turns only append
    to the history.
    """
    if label in (GroundingLabel.EXPLICIT, GroundingLabel.IMPLICIT):
        combined = state.pending.facts if state.pending is not None else EMPTY_KNOWLEDGE
        if not turn_facts.is_empty:
            combined, _, _ = commit(combined, turn_facts)
        grounded, _, ops = commit(state.grounded, combined)
        return replace(
            state,
            grounded=grounded,
            pending=None,
            history=state.history + (HistoryEntry(turn.index, label, tuple(ops)),),
        )
    # Clarification and no-event leave both grounded and pending content as-is.
    return replace(
        state,
        history=state.history + (HistoryEntry(turn.index, label),),
    )


@dataclass(frozen=True)
class TurnTrace:
    turn_index: int
    label: GroundingLabel
    facts: GroundedKnowledge
    ops: tuple[GraphOp, ...] = ()
    warning: Optional[str] = None


def process_dialogue(
    dialogue: Dialogue, labeler: Labeler, extractor: Extractor
) -> tuple[GroundingState, list[TurnTrace]]:
    """Run a dialogue through the engine with injected labeler/extractor.

    Provider turns whose extraction is non-empty count as presentations.
    A labeler or extractor failure downgrades the turn to no-event with
    empty facts and a warning in the trace.
    """
    state = GroundingState()
    trace: list[TurnTrace] = []
    history: list[Turn] = []
    for turn in dialogue.turns:
        history.append(turn)
        warning = None
        try:
            facts = extractor(history)
        except Exception as exc:
            facts, warning = EMPTY_KNOWLEDGE, f"extractor failed: {exc}"
        try:
            label = labeler(history)
        except Exception as exc:
            label, warning = GroundingLabel.NO_EVENT, f"labeler failed: {exc}"
        if warning is not None:
            label, facts = GroundingLabel.NO_EVENT, EMPTY_KNOWLEDGE
        if turn.role is Role.PROVIDER and not facts.is_empty:
            state = present(state, facts, turn)
        state = observe_label(state, label, turn, facts)
        trace.append(
            TurnTrace(turn.index, label, facts, state.history[-1].ops, warning)
        )
    return state, trace


def gold_labeler(annotations: list[GoldAnnotation]) -> Labeler:
    """A labeler replaying gold labels; unannotated turns are no-event."""
    by_turn = {a.turn_index: a.label for a in annotations}
    return lambda history: by_turn.get(history[-1].index, GroundingLabel.NO_EVENT)


def gold_extractor(annotations: list[GoldAnnotation]) -> Extractor:
    """An extractor replaying gold knowledge deltas."""
    by_turn = {a.turn_index: a.knowledge_delta for a in annotations}
    return lambda history: by_turn.get(history[-1].index, EMPTY_KNOWLEDGE)
