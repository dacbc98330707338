"""Shared fixtures: a deterministic clock, ingestion-line builders, a weather
fixture payload, and a fully offline service state factory."""

from __future__ import annotations

import json
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import pytest

from sleepcoach.service.config import ServiceConfig
from sleepcoach.service.state import AppState

FIXED_START = datetime(2024, 7, 26, 12, 0, 0, tzinfo=timezone.utc)

WEATHER_PAYLOAD = {
    "location": {"name": "New York", "localtime": "2024-07-26 16:12"},
    "current": {"temp_c": 27.2, "condition": {"text": "Sunny"}},
}

TOKENS = {"tok-u1": "u1", "tok-u2": "u2", "tok-u3": "u3"}


class FakeClock:
    """Monotone fake time source: every call advances one step."""

    def __init__(self, start: datetime = FIXED_START, step: timedelta = timedelta(seconds=1)):
        self.current = start
        self.step = step

    def __call__(self) -> datetime:
        value = self.current
        self.current += self.step
        return value


@pytest.fixture
def fake_clock():
    return FakeClock()


def sleep_line(user="u1", wake_day="2024-07-26", score=82, total=24480, in_bed=27000,
               efficiency=91, readiness=80, hrv=52.0, lowest_hr=55.0, breath=15.2):
    """One ingestion-format sleep record: bed at 23:00 the night before,
    waking at 07:00 on wake_day (US-Eastern-style offset)."""
    wake = date.fromisoformat(wake_day)
    start = datetime(wake.year, wake.month, wake.day, 23, 0, 0,
                     tzinfo=timezone(timedelta(hours=-4))) - timedelta(days=1)
    end = datetime(wake.year, wake.month, wake.day, 7, 0, 0,
                   tzinfo=timezone(timedelta(hours=-4)))
    return json.dumps({
        "user_id": user,
        "day": wake_day,
        "bedtime_start": start.isoformat(),
        "bedtime_end": end.isoformat(),
        "total_sleep_duration": total,
        "time_in_bed": in_bed,
        "efficiency": efficiency,
        "sleep_score": score,
        "readiness_score": readiness,
        "average_hrv": hrv,
        "lowest_heart_rate": lowest_hr,
        "average_breath": breath,
    })


def activity_line(user="u1", day="2024-07-26", kind="Running", intensity="moderate",
                  start_hour=17, minutes=40):
    d = date.fromisoformat(day)
    start = datetime(d.year, d.month, d.day, start_hour, 0, 0,
                     tzinfo=timezone(timedelta(hours=-4)))
    return json.dumps({
        "user_id": user,
        "day": day,
        "activity_type": kind,
        "intensity": intensity,
        "start_time": start.isoformat(),
        "end_time": (start + timedelta(minutes=minutes)).isoformat(),
    })


def physio_line(user="u1", day="2024-07-26", avg_hr=62.0, lowest_hr=50.0,
                hrv=48.0, stress=35):
    return json.dumps({
        "user_id": user,
        "day": day,
        "average_heart_rate": avg_hr,
        "lowest_heart_rate": lowest_hr,
        "average_hrv": hrv,
        "stress_level": stress,
    })


@pytest.fixture
def weather_file(tmp_path) -> Path:
    path = tmp_path / "weather.json"
    path.write_text(json.dumps(WEATHER_PAYLOAD), encoding="utf-8")
    return path


@pytest.fixture
def make_state(tmp_path, weather_file):
    """Factory for offline AppState instances (mock ports, fixture weather,
    fake clock). Reuse the same data_dir to simulate a restart."""

    def factory(data_dir: Path | None = None, clock: FakeClock | None = None,
                **config_overrides) -> AppState:
        overrides = {
            "data_dir": str(data_dir if data_dir is not None else tmp_path / "data"),
            "tokens": TOKENS,
            "weather_fixture": str(weather_file),
            "seed": 7,
        }
        overrides.update(config_overrides)
        config = ServiceConfig(**overrides)
        return AppState(config, now=clock or FakeClock())

    return factory
