"""Engagement metrics over session logs.

A "conversation" is the set of turns (user and assistant) a session holds
within one calendar day; a day counts as active when any session has at
least one user turn on it.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from datetime import date

from ..domain import Role
from ..errors import EmptyPhase


@dataclass(frozen=True)
class EngagementReport:
    active_ratio: float
    mean_turns: float
    active_days: int
    phase_days: int
    n_conversations: int


def engagement_metrics(sessions: list, phase_start: date, phase_end: date) -> EngagementReport:
    if phase_end < phase_start:
        raise EmptyPhase(f"phase ends {phase_end} before it starts {phase_start}")
    phase_days = (phase_end - phase_start).days + 1

    active: set[date] = set()
    conversation_sizes: Counter = Counter()
    for idx, session in enumerate(sessions):
        for turn in session.turns:
            day = turn.timestamp.date()
            if not phase_start <= day <= phase_end:
                continue
            conversation_sizes[(idx, day)] += 1
            if turn.role is Role.USER:
                active.add(day)

    n_conversations = len(conversation_sizes)
    mean_turns = (sum(conversation_sizes.values()) / n_conversations) if n_conversations else 0.0
    return EngagementReport(
        active_ratio=len(active) / phase_days,
        mean_turns=mean_turns,
        active_days=len(active),
        phase_days=phase_days,
        n_conversations=n_conversations,
    )
