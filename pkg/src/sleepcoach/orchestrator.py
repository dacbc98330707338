"""Multi-agent conversation pipeline.

A turn flows coordinator-style: moderation gate, route classification,
then the specialized steps the routes call for (data insight, context-aware
activity recommendation, technique selection), and finally response
composition. Every recommendation leaves a PendingReward behind; when the
next night's sleep record arrives, attribute_rewards closes the loop by
feeding the normalized sleep score back into the bandit.

With mock ports and a fixed seed the whole pipeline is a pure function of
(session state, message, store contents, bandit state), which is what makes
transcripts reproducible across runs and restarts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from typing import Callable, Optional

from . import behavior
from .bandit import BanditModel
from .context import WeatherProvider, degraded_snapshot, featurize, fetch_context
from .datastore import Store
from .domain import ChatTurn, ContextSnapshot, Mode, Recommendation, Role, Session, SleepRecord
from .errors import APOLOGY, PortFailure, ProviderUnavailable, SleepCoachError, Unavailable
from .ports import LLMPort, MockLLMPort, ModerationPort, QuerySchema, ReplyParts

logger = logging.getLogger(__name__)

REFUSAL_REPLY = "I am sorry, I cannot help with that request."

DEFAULT_REWARD_WINDOW = timedelta(hours=24)

_REC_PATTERNS = ("recommend", "what should i do", "suggest")
_DATA_PATTERNS = (
    "my sleep", "last night", "hrv", "score", "efficiency", "trend",
    "average", "my data", "readiness", "heart rate", "stress",
    "how did i sleep", "slept", "time in bed",
)
_SMALLTALK = {
    "hello", "hi", "hey", "thanks", "thank you", "bye", "goodbye",
    "good morning", "good evening", "good night", "ok", "okay",
}


class AgentRoute(str, Enum):
    DATA_INSIGHT = "data_insight"
    RECOMMENDATION = "recommendation"
    TECHNIQUE_ONLY = "technique_only"
    DIRECT = "direct"


@dataclass
class PendingReward:
    """A recommendation awaiting its next-night sleep feedback."""

    rec_id: str
    user_id: str
    arm_name: str
    context_values: tuple
    issued_at: datetime
    expires_after: timedelta = DEFAULT_REWARD_WINDOW


@dataclass
class UserLoopState:
    """Mutable per-user recommendation-loop state (single-writer)."""

    user_id: str
    bandit: BanditModel
    pending: list = field(default_factory=list)
    recommendations: dict = field(default_factory=dict)
    adherence: list = field(default_factory=list)
    rec_counter: int = 0

    def next_rec_id(self) -> str:
        self.rec_counter += 1
        return f"{self.user_id}-r{self.rec_counter:04d}"


@dataclass
class Deps:
    """Everything a turn needs besides per-user state. now() is injectable
    so tests and replays control time."""

    store: Store
    llm: LLMPort
    moderation: ModerationPort
    weather: Optional[WeatherProvider]
    location: str
    now: Callable[[], datetime]
    temp_thresholds: tuple = (10.0, 20.0, 28.0)


@dataclass(frozen=True)
class TurnOutcome:
    turn: ChatTurn
    rec_id: Optional[str] = None


def _matches(lowered: str, patterns) -> bool:
    return any(p in lowered for p in patterns)


def _is_smalltalk(lowered: str) -> bool:
    normalized = lowered.strip(" .!?,")
    if normalized in _SMALLTALK:
        return True
    words = normalized.split()
    return len(words) <= 2 and bool(words) and words[0] in _SMALLTALK


def route(message: str, history: list, port: LLMPort, mode: Mode = Mode.COACH) -> frozenset:
    """Decide which specialized steps this message needs.

    Baseline mode knows only data lookups and direct replies; coach mode adds
    recommendations and technique-only turns. A live port gets first crack at
    classification; the shipped pattern rules are the mock path and fallback.
    """
    if not message.strip():
        raise ValueError("message must be non-empty")
    lowered = message.lower()
    if getattr(port, "live", False):
        try:
            label = port.classify(
                f"Which steps does this message need? Message: {message}",
                ["data", "recommendation", "both", "neither"],
            )
            wants_data = label in ("data", "both")
            wants_rec = label in ("recommendation", "both")
        except PortFailure:
            wants_data = _matches(lowered, _DATA_PATTERNS)
            wants_rec = _matches(lowered, _REC_PATTERNS)
    else:
        wants_data = _matches(lowered, _DATA_PATTERNS)
        wants_rec = _matches(lowered, _REC_PATTERNS)

    if mode is Mode.BASELINE:
        return frozenset({AgentRoute.DATA_INSIGHT} if wants_data else {AgentRoute.DIRECT})

    routes = set()
    if wants_data:
        routes.add(AgentRoute.DATA_INSIGHT)
    if wants_rec:
        routes.add(AgentRoute.RECOMMENDATION)
    if not routes:
        routes.add(AgentRoute.DIRECT if _is_smalltalk(lowered) else AgentRoute.TECHNIQUE_ONLY)
    return frozenset(routes)


def _format_fact(label: str, value: float, unit: str) -> str:
    number = f"{value:+.2f}" if "trend" in label else f"{value:.2f}"
    return f"{label}: {number} {unit}"


def data_insight(message: str, user_id: str, store: Store, port: LLMPort,
                 today) -> tuple:
    """Translate the message into an analytics query and run it.

    Any unavailable path collapses to the verbatim apology sentence.
    """
    schema = QuerySchema(user_id=user_id, today=today)
    try:
        if getattr(port, "live", False):
            try:
                query = port.to_query(message, schema)
            except PortFailure:
                query = MockLLMPort().to_query(message, schema)
        else:
            query = port.to_query(message, schema)
        result = store.run_query(query)
    except Unavailable as exc:
        return (str(exc),)
    return tuple(_format_fact(label, value, unit) for label, value, unit in result.facts)


def acquire_context(deps: Deps) -> ContextSnapshot:
    """Fetch environmental context, degrading to time-only when the weather
    provider is unreachable."""
    now = deps.now()
    if deps.weather is None:
        return degraded_snapshot(now.hour, now, deps.location)
    try:
        return fetch_context(deps.location, deps.weather)
    except ProviderUnavailable:
        logger.warning("weather provider unavailable; degrading to time-only context")
        return degraded_snapshot(now.hour, now, deps.location)


def recommend(state: UserLoopState, snapshot: ContextSnapshot, message: str,
              port: LLMPort, issued_at: datetime,
              temp_thresholds: tuple = (10.0, 20.0, 28.0)) -> Recommendation:
    """Pick an arm for the current context, tailor its wording, and record
    the pending reward."""
    vector = featurize(snapshot, temp_thresholds)
    arm = state.bandit.select(vector)
    try:
        text = port.tailor(arm, snapshot, message)
    except PortFailure:
        text = MockLLMPort().tailor(arm, snapshot, message)
    rec = Recommendation(
        rec_id=state.next_rec_id(),
        user_id=state.user_id,
        arm_name=arm.name,
        context_values=vector.values,
        issued_at=issued_at,
        tailored_text=text,
    )
    state.recommendations[rec.rec_id] = rec
    state.pending.append(PendingReward(
        rec_id=rec.rec_id,
        user_id=state.user_id,
        arm_name=arm.name,
        context_values=vector.values,
        issued_at=issued_at,
    ))
    return rec


def attribute_rewards(state: UserLoopState, new_sleep: SleepRecord) -> list:
    """Close the feedback loop for one newly ingested sleep record.

    A pending earns the night's normalized sleep score when it was issued
    before bedtime_start and within its expiry window; older pendings are
    dropped; pendings issued after bedtime_start wait for a later night.
    Each pending updates the bandit at most once.
    """
    applied = []
    remaining = []
    for pending in state.pending:
        age = new_sleep.bedtime_start - pending.issued_at
        if age <= timedelta(0):
            remaining.append(pending)  # issued after this night began
        elif age <= pending.expires_after:
            reward = min(1.0, max(0.0, new_sleep.sleep_score / 100.0))
            state.bandit.update(pending.arm_name, pending.context_values, reward)
            rec = state.recommendations.get(pending.rec_id)
            if rec is not None and not rec.reward_attributed:
                state.recommendations[pending.rec_id] = rec.mark_attributed()
            applied.append((pending.rec_id, reward))
        # else: expired, drop silently
    state.pending[:] = remaining
    return applied


def compose_response(parts: ReplyParts, port: LLMPort) -> str:
    try:
        return port.compose(parts)
    except PortFailure:
        return MockLLMPort().compose(parts)


def _next_timestamp(session: Session, now: datetime) -> datetime:
    """Keep session turns strictly ordered even on a coarse clock."""
    if session.turns and now <= session.turns[-1].timestamp:
        return session.turns[-1].timestamp + timedelta(microseconds=1)
    return now


def handle_turn(state: UserLoopState, session: Session, message: str, deps: Deps) -> TurnOutcome:
    """Run the full pipeline for one user message and append both turns.

    Moderation blocks produce a refusal turn; internal failures produce an
    apology turn; the session survives every path intact.
    """
    if not message.strip():
        raise ValueError("message must be non-empty")
    session.append_turn(ChatTurn(Role.USER, message, _next_timestamp(session, deps.now())))

    if not deps.moderation.allow(message):
        turn = ChatTurn(Role.ASSISTANT, REFUSAL_REPLY,
                        _next_timestamp(session, deps.now()))
        session.append_turn(turn)
        return TurnOutcome(turn)

    rec_id = None
    pending_before = len(state.pending)
    counter_before = state.rec_counter
    try:
        history = session.turns[:-1]
        routes = route(message, history, deps.llm, session.mode)

        facts: tuple = ()
        if AgentRoute.DATA_INSIGHT in routes:
            facts = data_insight(message, state.user_id, deps.store, deps.llm,
                                 deps.now().date())

        recommendation_text = None
        if AgentRoute.RECOMMENDATION in routes and session.mode is Mode.COACH:
            snapshot = acquire_context(deps)
            rec = recommend(state, snapshot, message, deps.llm, deps.now(),
                            deps.temp_thresholds)
            recommendation_text = rec.tailored_text
            rec_id = rec.rec_id

        techniques: frozenset = frozenset()
        technique_sentences: tuple = ()
        if session.mode is Mode.COACH and AgentRoute.DIRECT not in routes:
            selection = behavior.select_techniques(message, history, deps.llm)
            techniques = frozenset(selection.domains)
            technique_sentences = tuple(
                behavior.technique_guidance(d).example for d in selection.domains
            )

        text = compose_response(
            ReplyParts(
                message=message,
                facts=facts,
                recommendation=recommendation_text,
                technique_sentences=technique_sentences,
                direct=routes == {AgentRoute.DIRECT},
            ),
            deps.llm,
        )
        turn = ChatTurn(Role.ASSISTANT, text, _next_timestamp(session, deps.now()),
                        routes_taken=routes, techniques_used=techniques)
    except (SleepCoachError, ValueError) as exc:
        logger.exception("turn pipeline failed: %s", exc)
        # Undo any recommendation issued by the failed turn: it was never
        # delivered, so it must not wait for a reward.
        if rec_id is not None:
            state.recommendations.pop(rec_id, None)
        del state.pending[pending_before:]
        state.rec_counter = counter_before
        rec_id = None
        turn = ChatTurn(Role.ASSISTANT, APOLOGY, _next_timestamp(session, deps.now()))
    session.append_turn(turn)
    return TurnOutcome(turn, rec_id)
