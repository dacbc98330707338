"""Behavior-change framework: seven technique domains with definitions and
exemplar phrasing, plus selection logic for picking which domains a reply
should draw on.

The domain texts ship as reviewable data (data/techniques.json) rather than
being buried in prompt strings. Selection goes through the language-model
port when one is live; the deterministic keyword fallback below is both the
mock behavior and the safety net when a live port fails.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources

from .errors import PortFailure

SELECTION_CAP = 3  # max technique domains woven into one reply


class TechniqueDomain(str, Enum):
    CONSEQUENCES_AND_REINFORCEMENT = "consequences_and_reinforcement"
    FEEDBACK_AND_MONITORING = "feedback_and_monitoring"
    GOALS = "goals"
    KNOWLEDGE = "knowledge"
    ENVIRONMENTAL_CONTEXT_AND_RESOURCES = "environmental_context_and_resources"
    SKILLS_AND_CAPABILITIES = "skills_and_capabilities"
    EMOTIONAL_SUPPORT = "emotional_support"


@dataclass(frozen=True)
class Guidance:
    name: str
    definition: str
    example: str


@dataclass(frozen=True)
class TechniqueSelection:
    domains: tuple  # 1..SELECTION_CAP TechniqueDomain values, ordered
    rationale: str

    def __post_init__(self):
        if not 1 <= len(self.domains) <= SELECTION_CAP:
            raise ValueError(f"selection must hold 1-{SELECTION_CAP} domains")


def _load_table() -> dict:
    text = resources.files("sleepcoach").joinpath("data/techniques.json").read_text("utf-8")
    return {TechniqueDomain(key): Guidance(**entry) for key, entry in json.loads(text).items()}


_TABLE = _load_table()
assert len(_TABLE) == len(TechniqueDomain) == 7


def technique_guidance(domain: TechniqueDomain) -> Guidance:
    """Definition and exemplar phrasing for one technique domain."""
    return _TABLE[domain]


# Keyword rules, checked in priority order; first hits win up to the cap.
_KEYWORD_RULES = (
    (("goal", "target"), TechniqueDomain.GOALS),
    (("why", "reason"), TechniqueDomain.KNOWLEDGE),
    (("stress", "anxious", "anxiety", "sad", "worried"), TechniqueDomain.EMOTIONAL_SUPPORT),
    (("data", "score", "trend", "efficiency", "hrv", "average", "pattern", "monitor"),
     TechniqueDomain.FEEDBACK_AND_MONITORING),
    (("noise", "noisy", "light", "bedroom", "room", "temperature"),
     TechniqueDomain.ENVIRONMENTAL_CONTEXT_AND_RESOURCES),
    (("how can i", "how do i", "exercise", "practice", "routine", "technique"),
     TechniqueDomain.SKILLS_AND_CAPABILITIES),
)


def _rule_based_selection(message: str) -> TechniqueSelection:
    lowered = message.lower()
    picked = []
    matched_terms = []
    for needles, domain in _KEYWORD_RULES:
        if len(picked) >= SELECTION_CAP:
            break
        hit = next((n for n in needles if n in lowered), None)
        if hit is not None and domain not in picked:
            picked.append(domain)
            matched_terms.append(hit)
    if not picked:
        return TechniqueSelection((TechniqueDomain.KNOWLEDGE,),
                                  "no keyword match; defaulting to knowledge")
    return TechniqueSelection(tuple(picked), "keyword match: " + ", ".join(matched_terms))


def select_techniques(message: str, history: list, port=None) -> TechniqueSelection:
    """Pick 1-3 technique domains for the reply.

    Never fails outward: a live port that errors falls back to the keyword
    rules, and an empty rule result defaults to knowledge.
    """
    if not message.strip():
        raise ValueError("message must be non-empty")
    if port is not None and getattr(port, "live", False):
        labels = [d.value for d in TechniqueDomain]
        recent = " | ".join(t.text for t in history[-4:])
        prompt = (
            "Choose the single most fitting behavior-change technique for this "
            f"user message.\nRecent turns: {recent}\nMessage: {message}"
        )
        try:
            label = port.classify(prompt, labels)
            return TechniqueSelection((TechniqueDomain(label),), "selected by provider")
        except (PortFailure, ValueError):
            pass
    return _rule_based_selection(message)
