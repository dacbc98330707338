"""Pluggable provider ports: language model and moderation.

The orchestrator only ever talks to these interfaces. MockLLMPort is fully
deterministic (pure functions of its inputs) so offline runs and tests are
reproducible byte-for-byte; the live adapters speak a chat-completions-style
HTTP API and raise PortFailure on any trouble, which callers treat as a cue
to fall back to the mock behavior.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Optional, Protocol, Sequence

import requests

from .bandit import ArmId
from .context import TIME_PHRASES, bin_temperature, bin_time, map_weather
from .datastore import Aggregate, AnalyticsQuery, METRICS
from .domain import ContextSnapshot, DateRange
from .errors import PortFailure, Unavailable

DEFAULT_TIMEOUT = 30.0

# Canned reply for turns that route nowhere else: generic, mode-agnostic
# sleep advice that also works as a greeting response.
DIRECT_REPLY = (
    "Happy to help with your sleep health. Consistent bedtimes, a calm "
    "wind-down routine, and some daytime activity are the best foundations. "
    "You can ask about your recent sleep data or ask me to suggest an activity."
)

FACTS_HEADER = "Here's what your data shows:"


@dataclass(frozen=True)
class QuerySchema:
    """Context the port needs to ground a text-to-query translation."""

    user_id: str
    today: date


@dataclass(frozen=True)
class ReplyParts:
    """Sections the response composer assembles, in order."""

    message: str
    facts: tuple = ()
    recommendation: Optional[str] = None
    technique_sentences: tuple = ()
    direct: bool = False


class LLMPort(Protocol):
    live: bool

    def classify(self, prompt: str, labels: Sequence[str]) -> str: ...

    def to_query(self, message: str, schema: QuerySchema) -> AnalyticsQuery: ...

    def tailor(self, arm: ArmId, snapshot: ContextSnapshot, message: str) -> str: ...

    def compose(self, parts: ReplyParts) -> str: ...


class ModerationPort(Protocol):
    def allow(self, text: str) -> bool: ...


# ---------------------------------------------------------------------------
# Deterministic mock
# ---------------------------------------------------------------------------

# Metric phrases checked in order: specific names before the generic "sleep".
_METRIC_PATTERNS = (
    (("sleep score",), "sleep_score"),
    (("readiness",), "readiness_score"),
    (("efficiency", "efficient"), "efficiency"),
    (("hrv", "heart rate variability"), "average_hrv"),
    (("lowest heart rate",), "lowest_heart_rate"),
    (("heart rate",), "average_heart_rate"),
    (("stress",), "stress_level"),
    (("breath",), "average_breath"),
    (("time in bed",), "time_in_bed"),
    (("activity", "activities", "workout", "exercise"), "activity_count"),
    (("duration", "how long", "sleep", "slept"), "total_sleep_duration"),
    (("score",), "sleep_score"),
)

_AGG_PATTERNS = (
    (("trend", "over time", "improving", "getting better", "getting worse"), Aggregate.TREND),
    (("compare", "versus", " vs "), Aggregate.COMPARE_PERIODS),
    (("average", "mean", "typical"), Aggregate.MEAN),
    (("last night", "yesterday", "latest", "today", "this morning"), Aggregate.LATEST),
    (("maximum", "highest", "best"), Aggregate.MAX),
    (("minimum",), Aggregate.MIN),
)


def _first_match(lowered: str, patterns):
    for needles, result in patterns:
        if any(n in lowered for n in needles):
            return result
    return None


class MockLLMPort:
    """Rule-table provider: every method is a pure function of its inputs."""

    live = False

    def classify(self, prompt: str, labels: Sequence[str]) -> str:
        lowered = prompt.lower()
        for label in labels:
            if label.replace("_", " ") in lowered:
                return label
        return labels[0]

    def to_query(self, message: str, schema: QuerySchema) -> AnalyticsQuery:
        lowered = message.lower()
        metric = _first_match(lowered, _METRIC_PATTERNS)
        if metric is None:
            raise Unavailable()
        aggregate = _first_match(lowered, _AGG_PATTERNS)
        today = schema.today

        if aggregate is None:
            aggregate = Aggregate.MEAN
        if aggregate is Aggregate.LATEST:
            rng = DateRange(today - timedelta(days=1), today)
        elif "month" in lowered:
            rng = DateRange(today - timedelta(days=29), today)
        else:
            rng = DateRange(today - timedelta(days=6), today)

        compare = None
        if aggregate is Aggregate.COMPARE_PERIODS:
            span = rng.n_days
            compare = DateRange(rng.start - timedelta(days=span), rng.start - timedelta(days=1))
        return AnalyticsQuery(schema.user_id, metric, aggregate, rng, compare)

    def tailor(self, arm: ArmId, snapshot: ContextSnapshot, message: str) -> str:
        weather = map_weather(snapshot.weather_condition).name.lower()
        temp = bin_temperature(snapshot.temperature_c).name.lower()
        slot = TIME_PHRASES[bin_time(snapshot.local_hour)]
        text = f"Given it's {weather} and {temp}, a {arm.name} {slot} could help your sleep."
        if snapshot.degraded:
            text += " (Live weather was unavailable, so this leans on the time of day.)"
        return text

    def compose(self, parts: ReplyParts) -> str:
        sections = []
        if parts.facts:
            sections.append(FACTS_HEADER + "\n" + "\n".join(f"- {f}" for f in parts.facts))
        if parts.recommendation:
            sections.append(parts.recommendation)
        sections.extend(parts.technique_sentences)
        if not sections:
            return DIRECT_REPLY
        return "\n\n".join(sections)


class MockModerationPort:
    """Default-allow moderation with an optional deny-list hook."""

    def __init__(self, deny_terms: Sequence[str] = ()):
        self.deny_terms = tuple(t.lower() for t in deny_terms)

    def allow(self, text: str) -> bool:
        lowered = text.lower()
        return not any(term in lowered for term in self.deny_terms)


# ---------------------------------------------------------------------------
# Live adapters (thin HTTP shims; never exercised in tests)
# ---------------------------------------------------------------------------


class LiveLLMPort:
    """Chat-completions-style HTTP provider. Key from LLM_API_KEY."""

    live = True

    def __init__(self, endpoint: str, model: str, timeout: float = DEFAULT_TIMEOUT):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self._mock = MockLLMPort()

    def _chat(self, system: str, user: str) -> str:
        key = os.environ.get("LLM_API_KEY")
        if not key:
            raise PortFailure("LLM_API_KEY not set")
        try:
            resp = requests.post(
                self.endpoint,
                headers={"Authorization": f"Bearer {key}"},
                json={
                    "model": self.model,
                    "messages": [
                        {"role": "system", "content": system},
                        {"role": "user", "content": user},
                    ],
                },
                timeout=self.timeout,
            )
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except (requests.RequestException, KeyError, ValueError) as exc:
            raise PortFailure(f"provider call failed: {exc}") from exc

    def classify(self, prompt: str, labels: Sequence[str]) -> str:
        answer = self._chat(
            "Answer with exactly one of the given labels and nothing else.",
            f"Labels: {', '.join(labels)}\n\n{prompt}",
        ).strip().lower()
        if answer not in labels:
            raise PortFailure(f"provider returned unknown label {answer!r}")
        return answer

    def to_query(self, message: str, schema: QuerySchema) -> AnalyticsQuery:
        allowed = {
            "metric": sorted(METRICS),
            "aggregate": [a.value for a in Aggregate],
            "days_back": "integer, how many days of history to read",
        }
        raw = self._chat(
            "Translate the user's question about their wearable data into a "
            "JSON object with keys metric, aggregate, days_back. "
            f"Allowed values: {json.dumps(allowed)}. Reply with JSON only.",
            message,
        )
        try:
            parsed = json.loads(raw)
            days = max(1, int(parsed["days_back"]))
            rng = DateRange(schema.today - timedelta(days=days - 1), schema.today)
            aggregate = Aggregate(parsed["aggregate"])
            compare = None
            if aggregate is Aggregate.COMPARE_PERIODS:
                compare = DateRange(rng.start - timedelta(days=days), rng.start - timedelta(days=1))
            return AnalyticsQuery(schema.user_id, parsed["metric"], aggregate, rng, compare)
        except (ValueError, KeyError, TypeError) as exc:
            raise PortFailure(f"unusable query translation: {raw!r}") from exc

    def tailor(self, arm: ArmId, snapshot: ContextSnapshot, message: str) -> str:
        base = self._mock.tailor(arm, snapshot, message)
        return self._chat(
            "You are a sleep coach. Rewrite the suggested activity so it fits "
            "the user's situation; keep the activity itself unchanged and "
            "mention the current conditions.",
            f"Conditions: {snapshot.weather_condition}, {snapshot.temperature_c} C, "
            f"hour {snapshot.local_hour}. Draft: {base}\nUser message: {message}",
        )

    def compose(self, parts: ReplyParts) -> str:
        draft = self._mock.compose(parts)
        return self._chat(
            "Act as a sleep expert. Weave the given sections into one concise, "
            "coherent reply, preserving every number.",
            f"Sections:\n{draft}\n\nUser message: {parts.message}",
        )


class LiveModerationPort:
    """Moderation endpoint shim; failing open mirrors the mock's default-allow."""

    def __init__(self, endpoint: str, timeout: float = DEFAULT_TIMEOUT):
        self.endpoint = endpoint
        self.timeout = timeout

    def allow(self, text: str) -> bool:
        key = os.environ.get("LLM_API_KEY")
        if not key:
            return True
        try:
            resp = requests.post(
                self.endpoint,
                headers={"Authorization": f"Bearer {key}"},
                json={"input": text},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            results = resp.json().get("results", [])
            return not any(r.get("flagged") for r in results)
        except (requests.RequestException, ValueError):
            return True
