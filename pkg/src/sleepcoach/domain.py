"""Domain types for wearable records, context, recommendations, and chat.

All record types are frozen dataclasses: validated once on construction and
safe to share across threads. Ingestion-format parsing lives here so every
consumer sees the same validation rules.

Conventions:
  - The "day" of a sleep record is the calendar date of bedtime_end in its
    local zone (the wake-up day), regardless of any day field in the input.
  - Scores are stored as integers, durations as integer seconds; unit
    conversion (seconds to hours) happens at reporting time only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta
from enum import Enum
from typing import Iterator, Optional

from .errors import MissingField, OrderError, RangeError


class Intensity(str, Enum):
    EASY = "easy"
    MODERATE = "moderate"
    HARD = "hard"


class Role(str, Enum):
    USER = "user"
    ASSISTANT = "assistant"


class Mode(str, Enum):
    """Chat operating mode: full coaching pipeline vs. control configuration
    without technique selection or activity recommendations."""

    COACH = "coach"
    BASELINE = "baseline"


@dataclass(frozen=True)
class DateRange:
    """Inclusive calendar-date interval."""

    start: date
    end: date

    def __post_init__(self):
        if self.end < self.start:
            raise OrderError(f"range end {self.end} before start {self.start}")

    @property
    def n_days(self) -> int:
        return (self.end - self.start).days + 1

    def days(self) -> Iterator[date]:
        d = self.start
        while d <= self.end:
            yield d
            d += timedelta(days=1)

    def __contains__(self, day: date) -> bool:
        return self.start <= day <= self.end


@dataclass(frozen=True)
class SleepRecord:
    user_id: str
    day: date
    bedtime_start: datetime
    bedtime_end: datetime
    total_sleep_seconds: int
    time_in_bed_seconds: int
    sleep_efficiency: int
    sleep_score: int
    readiness_score: int
    average_hrv_ms: float
    lowest_heart_rate_bpm: float
    average_breath: float


@dataclass(frozen=True)
class ActivityRecord:
    user_id: str
    day: date
    activity_type: str
    intensity: Intensity
    start_time: datetime
    end_time: datetime


@dataclass(frozen=True)
class PhysioSample:
    user_id: str
    day: date
    average_heart_rate_bpm: float
    lowest_heart_rate_bpm: float
    average_hrv_ms: float
    stress_level: int


@dataclass(frozen=True)
class ContextSnapshot:
    """Environmental context at recommendation time.

    degraded is set when the weather provider was unreachable and the
    snapshot was synthesized from the local clock alone.
    """

    local_hour: int
    temperature_c: float
    weather_condition: str
    captured_at: datetime
    location_label: Optional[str] = None
    degraded: bool = False

    def __post_init__(self):
        if not 0 <= self.local_hour <= 23:
            raise RangeError(f"local_hour {self.local_hour} outside 0-23")


@dataclass(frozen=True)
class Recommendation:
    rec_id: str
    user_id: str
    arm_name: str
    context_values: tuple
    issued_at: datetime
    tailored_text: str
    reward_attributed: bool = False

    def mark_attributed(self) -> "Recommendation":
        """Flip the attribution flag; valid exactly once."""
        if self.reward_attributed:
            raise ValueError(f"recommendation {self.rec_id} already attributed")
        return replace(self, reward_attributed=True)


@dataclass(frozen=True)
class ChatTurn:
    role: Role
    text: str
    timestamp: datetime
    routes_taken: frozenset = frozenset()
    techniques_used: frozenset = frozenset()

    def __post_init__(self):
        if self.role is Role.USER and self.routes_taken:
            raise ValueError("user turns carry no routing decisions")


@dataclass
class Session:
    """One user's conversation under one mode. Turns stay strictly
    time-ordered; append_turn is the only sanctioned mutation."""

    user_id: str
    mode: Mode
    created_at: datetime
    turns: list = field(default_factory=list)

    def append_turn(self, turn: ChatTurn) -> None:
        if self.turns and turn.timestamp <= self.turns[-1].timestamp:
            raise OrderError("turn timestamps must strictly increase")
        self.turns.append(turn)


# ---------------------------------------------------------------------------
# Ingestion-format parsing and validation
# ---------------------------------------------------------------------------

SLEEP_FIELDS = (
    "user_id", "day", "bedtime_start", "bedtime_end", "total_sleep_duration",
    "time_in_bed", "efficiency", "sleep_score", "readiness_score",
    "average_hrv", "lowest_heart_rate", "average_breath",
)
ACTIVITY_FIELDS = ("user_id", "day", "activity_type", "intensity", "start_time", "end_time")
PHYSIO_FIELDS = (
    "user_id", "day", "average_heart_rate", "lowest_heart_rate",
    "average_hrv", "stress_level",
)


def _require(raw: dict, name: str):
    if name not in raw or raw[name] is None:
        raise MissingField(f"missing field: {name}")
    return raw[name]


def _timestamp(raw: dict, name: str) -> datetime:
    value = _require(raw, name)
    try:
        ts = datetime.fromisoformat(str(value))
    except ValueError as exc:
        raise MissingField(f"field {name} is not an RFC-3339 timestamp: {value!r}") from exc
    if ts.tzinfo is None:
        raise MissingField(f"field {name} must carry a zone offset: {value!r}")
    return ts


def _int_field(raw: dict, name: str) -> int:
    value = _require(raw, name)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
        raise MissingField(f"field {name} is not an integer: {value!r}")
    return int(value)


def _float_field(raw: dict, name: str) -> float:
    value = _require(raw, name)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise MissingField(f"field {name} is not a finite number: {value!r}")
    return float(value)


def _score(raw: dict, name: str) -> int:
    value = _int_field(raw, name)
    if not 1 <= value <= 100:
        raise RangeError(f"{name} {value} outside 1-100")
    return value


def validate_sleep_record(raw: dict) -> SleepRecord:
    """Build a SleepRecord from one ingestion-format object.

    Raises MissingField, RangeError, or OrderError; never returns a record
    violating an invariant.
    """
    user_id = str(_require(raw, "user_id"))
    start = _timestamp(raw, "bedtime_start")
    end = _timestamp(raw, "bedtime_end")
    if start >= end:
        raise OrderError(f"bedtime_start {start.isoformat()} not before bedtime_end")

    total_sleep = _int_field(raw, "total_sleep_duration")
    in_bed = _int_field(raw, "time_in_bed")
    if total_sleep < 0 or in_bed < 0:
        raise RangeError("durations must be non-negative")
    if total_sleep > in_bed:
        raise OrderError(f"total sleep {total_sleep}s exceeds time in bed {in_bed}s")

    hrv = _float_field(raw, "average_hrv")
    if hrv < 0:
        raise RangeError(f"average_hrv {hrv} negative")
    lhr = _float_field(raw, "lowest_heart_rate")
    if lhr <= 0:
        raise RangeError(f"lowest_heart_rate {lhr} not positive")
    breath = _float_field(raw, "average_breath")
    if breath <= 0:
        raise RangeError(f"average_breath {breath} not positive")

    return SleepRecord(
        user_id=user_id,
        day=end.date(),  # wake-up day rule
        bedtime_start=start,
        bedtime_end=end,
        total_sleep_seconds=total_sleep,
        time_in_bed_seconds=in_bed,
        sleep_efficiency=_score(raw, "efficiency"),
        sleep_score=_score(raw, "sleep_score"),
        readiness_score=_score(raw, "readiness_score"),
        average_hrv_ms=hrv,
        lowest_heart_rate_bpm=lhr,
        average_breath=breath,
    )


def validate_activity_record(raw: dict) -> ActivityRecord:
    user_id = str(_require(raw, "user_id"))
    start = _timestamp(raw, "start_time")
    end = _timestamp(raw, "end_time")
    if start >= end:
        raise OrderError("activity start_time not before end_time")
    label = str(_require(raw, "intensity"))
    try:
        intensity = Intensity(label)
    except ValueError:
        raise RangeError(f"intensity {label!r} not one of easy/moderate/hard") from None
    day_raw = _require(raw, "day")
    try:
        day = date.fromisoformat(str(day_raw))
    except ValueError:
        raise MissingField(f"field day is not a calendar date: {day_raw!r}") from None
    return ActivityRecord(
        user_id=user_id,
        day=day,
        activity_type=str(_require(raw, "activity_type")),
        intensity=intensity,
        start_time=start,
        end_time=end,
    )


def validate_physio_sample(raw: dict) -> PhysioSample:
    user_id = str(_require(raw, "user_id"))
    avg_hr = _float_field(raw, "average_heart_rate")
    low_hr = _float_field(raw, "lowest_heart_rate")
    if avg_hr <= 0 or low_hr <= 0:
        raise RangeError("heart rates must be positive")
    if low_hr > avg_hr:
        raise OrderError(f"lowest_heart_rate {low_hr} exceeds average {avg_hr}")
    hrv = _float_field(raw, "average_hrv")
    if hrv < 0:
        raise RangeError(f"average_hrv {hrv} negative")
    day_raw = _require(raw, "day")
    try:
        day = date.fromisoformat(str(day_raw))
    except ValueError:
        raise MissingField(f"field day is not a calendar date: {day_raw!r}") from None
    return PhysioSample(
        user_id=user_id,
        day=day,
        average_heart_rate_bpm=avg_hr,
        lowest_heart_rate_bpm=low_hr,
        average_hrv_ms=hrv,
        stress_level=_score(raw, "stress_level"),
    )


def sleep_to_ingest(record: SleepRecord) -> dict:
    """Serialize back to the ingestion format (inverse of validate)."""
    return {
        "user_id": record.user_id,
        "day": record.day.isoformat(),
        "bedtime_start": record.bedtime_start.isoformat(),
        "bedtime_end": record.bedtime_end.isoformat(),
        "total_sleep_duration": record.total_sleep_seconds,
        "time_in_bed": record.time_in_bed_seconds,
        "efficiency": record.sleep_efficiency,
        "sleep_score": record.sleep_score,
        "readiness_score": record.readiness_score,
        "average_hrv": record.average_hrv_ms,
        "lowest_heart_rate": record.lowest_heart_rate_bpm,
        "average_breath": record.average_breath,
    }


def activity_to_ingest(record: ActivityRecord) -> dict:
    return {
        "user_id": record.user_id,
        "day": record.day.isoformat(),
        "activity_type": record.activity_type,
        "intensity": record.intensity.value,
        "start_time": record.start_time.isoformat(),
        "end_time": record.end_time.isoformat(),
    }


def physio_to_ingest(sample: PhysioSample) -> dict:
    return {
        "user_id": sample.user_id,
        "day": sample.day.isoformat(),
        "average_heart_rate": sample.average_heart_rate_bpm,
        "lowest_heart_rate": sample.lowest_heart_rate_bpm,
        "average_hrv": sample.average_hrv_ms,
        "stress_level": sample.stress_level,
    }


def classify_record(raw: dict) -> str:
    """Identify which of the three record schemas a parsed object follows."""
    if "bedtime_start" in raw:
        return "sleep"
    if "activity_type" in raw:
        return "activity"
    if "stress_level" in raw:
        return "physio"
    raise MissingField("record matches no known schema (sleep, activity, physio)")
