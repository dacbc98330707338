"""Wearable record store and the deterministic analytics engine behind the
personal-data agent.

Storage is desk-scale: an in-memory index per user, flushed atomically
(write-temp-then-rename) to one JSON-lines file per user. Upserts are keyed
on (user, day, record type, start time), so re-ingesting a file is a no-op
and line order never matters.

Analytics run over a closed query vocabulary (AnalyticsQuery) instead of
executing generated code; the language-model port only ever translates text
into one of these queries.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from . import domain
from .domain import ActivityRecord, DateRange, PhysioSample, SleepRecord
from .errors import SleepCoachError, Unavailable


class Aggregate(str, Enum):
    LATEST = "latest"
    MEAN = "mean"
    MIN = "min"
    MAX = "max"
    TREND = "trend"
    COMPARE_PERIODS = "compare_periods"


# Canonical source and unit for every queryable measurement. Sleep metrics
# read from the longest sleep of each day; durations report in hours.
METRICS = {
    "sleep_score": ("sleep", "score", lambda r: float(r.sleep_score)),
    "total_sleep_duration": ("sleep", "hours", lambda r: r.total_sleep_seconds / 3600.0),
    "time_in_bed": ("sleep", "hours", lambda r: r.time_in_bed_seconds / 3600.0),
    "efficiency": ("sleep", "percent", lambda r: float(r.sleep_efficiency)),
    "readiness_score": ("sleep", "score", lambda r: float(r.readiness_score)),
    "average_hrv": ("sleep", "ms", lambda r: r.average_hrv_ms),
    "lowest_heart_rate": ("sleep", "bpm", lambda r: r.lowest_heart_rate_bpm),
    "average_breath": ("sleep", "breaths/min", lambda r: r.average_breath),
    "average_heart_rate": ("physio", "bpm", lambda r: r.average_heart_rate_bpm),
    "stress_level": ("physio", "score", lambda r: float(r.stress_level)),
    "activity_count": ("activity", "activities/day", None),
}


@dataclass(frozen=True)
class AnalyticsQuery:
    user_id: str
    metric: str
    aggregate: Aggregate
    range: DateRange
    compare_range: Optional[DateRange] = None

    def __post_init__(self):
        if self.metric not in METRICS:
            raise Unavailable()
        wants_compare = self.aggregate is Aggregate.COMPARE_PERIODS
        if wants_compare != (self.compare_range is not None):
            raise SleepCoachError("compare_range present iff aggregate is compare_periods")


@dataclass(frozen=True)
class AnalyticsResult:
    value: float
    unit: str
    n: int
    facts: tuple  # (label, value, unit) triples for the response agent
    series: Optional[tuple] = None  # (iso day, value) pairs for trend queries


@dataclass
class IngestReport:
    counts: dict = field(default_factory=lambda: {"sleep": 0, "activity": 0, "physio": 0})
    errors: list = field(default_factory=list)  # (line number, message)
    ingested_sleep: list = field(default_factory=list)


_VALIDATORS = {
    "sleep": domain.validate_sleep_record,
    "activity": domain.validate_activity_record,
    "physio": domain.validate_physio_sample,
}
_SERIALIZERS = {
    "sleep": domain.sleep_to_ingest,
    "activity": domain.activity_to_ingest,
    "physio": domain.physio_to_ingest,
}


def _record_key(kind: str, record) -> tuple:
    if kind == "sleep":
        return (record.day.isoformat(), record.bedtime_start.isoformat())
    if kind == "activity":
        return (record.day.isoformat(), record.start_time.isoformat())
    return (record.day.isoformat(),)


class Store:
    """Per-user record index with optional on-disk persistence.

    Pass data_dir=None for a memory-only store (tests, simulations).
    Writers are serialized by an internal lock; reads of a quiescent store
    need no locking.
    """

    def __init__(self, data_dir: Path | str | None = None):
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self._users: dict[str, dict[str, dict]] = {}
        self._loaded: set[str] = set()
        self._lock = threading.Lock()

    # -- ingestion -----------------------------------------------------------

    def ingest_lines(self, lines: Iterable[str]) -> IngestReport:
        """Upsert a stream of JSON lines; per-line failures are collected in
        the report, never fatal."""
        report = IngestReport()
        touched: set[str] = set()
        with self._lock:
            for line_no, line in enumerate(lines, start=1):
                if not line.strip():
                    continue
                try:
                    raw = json.loads(line)
                    kind = domain.classify_record(raw)
                    record = _VALIDATORS[kind](raw)
                except (json.JSONDecodeError, SleepCoachError) as exc:
                    report.errors.append((line_no, str(exc)))
                    continue
                self._upsert(kind, record)
                report.counts[kind] += 1
                touched.add(record.user_id)
                if kind == "sleep":
                    report.ingested_sleep.append(record)
            for user in touched:
                self._flush(user)
        return report

    def _upsert(self, kind: str, record) -> None:
        user = self._user_bucket(record.user_id)
        user[kind][_record_key(kind, record)] = record

    def _user_bucket(self, user_id: str) -> dict:
        self._ensure_loaded(user_id)
        return self._users.setdefault(
            user_id, {"sleep": {}, "activity": {}, "physio": {}}
        )

    # -- persistence ---------------------------------------------------------

    def _store_path(self, user_id: str) -> Path:
        assert self.data_dir is not None
        return self.data_dir / "users" / user_id / "store.log"

    def _ensure_loaded(self, user_id: str) -> None:
        if self.data_dir is None or user_id in self._loaded:
            return
        self._loaded.add(user_id)
        path = self._store_path(user_id)
        if not path.exists():
            return
        bucket = self._users.setdefault(user_id, {"sleep": {}, "activity": {}, "physio": {}})
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                entry = json.loads(line)
                kind = entry.pop("type")
                record = _VALIDATORS[kind](entry)
                bucket[kind][_record_key(kind, record)] = record

    def _flush(self, user_id: str) -> None:
        if self.data_dir is None:
            return
        path = self._store_path(user_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        bucket = self._users.get(user_id, {"sleep": {}, "activity": {}, "physio": {}})
        lines = []
        for kind in ("sleep", "activity", "physio"):
            for key in sorted(bucket[kind]):
                entry = {"type": kind, **_SERIALIZERS[kind](bucket[kind][key])}
                lines.append(json.dumps(entry, sort_keys=True))
        tmp = path.with_suffix(".tmp")
        tmp.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
        tmp.replace(path)

    # -- record access ---------------------------------------------------------

    def counts(self, user_id: str) -> dict:
        bucket = self._user_bucket(user_id)
        return {kind: len(records) for kind, records in bucket.items()}

    def sleep_for_day(self, user_id: str, day: date) -> list[SleepRecord]:
        bucket = self._user_bucket(user_id)
        return sorted((r for r in bucket["sleep"].values() if r.day == day),
                      key=lambda r: r.bedtime_start)

    def longest_sleep_for_day(self, user_id: str, day: date) -> SleepRecord:
        """The main sleep of a wake-up day: maximum total sleep duration."""
        records = self.sleep_for_day(user_id, day)
        if not records:
            raise Unavailable()
        return max(records, key=lambda r: r.total_sleep_seconds)

    def activities_in_range(self, user_id: str, rng: DateRange) -> list[ActivityRecord]:
        bucket = self._user_bucket(user_id)
        return sorted((r for r in bucket["activity"].values() if r.day in rng),
                      key=lambda r: (r.day, r.start_time))

    def physio_in_range(self, user_id: str, rng: DateRange) -> list[PhysioSample]:
        bucket = self._user_bucket(user_id)
        return sorted((r for r in bucket["physio"].values() if r.day in rng),
                      key=lambda r: r.day)

    # -- analytics ---------------------------------------------------------------

    def _daily_series(self, q_user: str, metric: str, rng: DateRange) -> list[tuple[date, float]]:
        source, _, extract = METRICS[metric]
        if source == "sleep":
            days = sorted({r.day for r in self._user_bucket(q_user)["sleep"].values() if r.day in rng})
            return [(d, extract(self.longest_sleep_for_day(q_user, d))) for d in days]
        if source == "physio":
            return [(r.day, extract(r)) for r in self.physio_in_range(q_user, rng)]
        # activity_count: zero-filled per-day counts, but only if the range
        # has any activity at all (otherwise the metric is unavailable).
        activities = self.activities_in_range(q_user, rng)
        if not activities:
            return []
        per_day = {d: 0 for d in rng.days()}
        for rec in activities:
            per_day[rec.day] += 1
        return sorted(per_day.items())

    def run_query(self, query: AnalyticsQuery) -> AnalyticsResult:
        """Execute one analytics query; raises Unavailable when no records
        can answer it."""
        metric = query.metric
        _, unit, _ = METRICS[metric]
        label = metric.replace("_", " ")
        series = self._daily_series(query.user_id, metric, query.range)

        if query.aggregate is Aggregate.COMPARE_PERIODS:
            other = self._daily_series(query.user_id, metric, query.compare_range)
            if not series or not other:
                raise Unavailable()
            mean_a = float(np.mean([v for _, v in series]))
            mean_b = float(np.mean([v for _, v in other]))
            value = mean_a - mean_b
            facts = (
                (f"mean {label}, first period", mean_a, unit),
                (f"mean {label}, second period", mean_b, unit),
                (f"difference in mean {label}", value, unit),
            )
            return AnalyticsResult(value, unit, len(series) + len(other), facts)

        if not series:
            raise Unavailable()
        values = [v for _, v in series]

        if query.aggregate is Aggregate.LATEST:
            day, value = series[-1]
            facts = ((f"{label} on {day.isoformat()}", value, unit),)
            return AnalyticsResult(value, unit, len(series), facts)
        if query.aggregate is Aggregate.MEAN:
            value = float(np.mean(values))
            facts = ((f"mean {label} over {len(values)} days", value, unit),)
            return AnalyticsResult(value, unit, len(series), facts)
        if query.aggregate is Aggregate.MIN:
            value = float(min(values))
            facts = ((f"minimum {label}", value, unit),)
            return AnalyticsResult(value, unit, len(series), facts)
        if query.aggregate is Aggregate.MAX:
            value = float(max(values))
            facts = ((f"maximum {label}", value, unit),)
            return AnalyticsResult(value, unit, len(series), facts)

        # trend: least-squares slope per day
        if len(series) < 2:
            raise Unavailable()
        xs = np.array([(d - series[0][0]).days for d, _ in series], dtype=float)
        slope = float(np.polyfit(xs, np.array(values), 1)[0])
        facts = ((f"{label} trend over {len(values)} days", slope, f"{unit}/day"),)
        return AnalyticsResult(
            slope, f"{unit}/day", len(series), facts,
            series=tuple((d.isoformat(), v) for d, v in series),
        )
