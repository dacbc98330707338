"""Environmental context: acquisition and discretization into bandit features.

The feature space is a 16-dim one-hot concatenation: 7 time-of-day bins,
4 temperature bins, 5 weather bins. Every snapshot maps to exactly one bin
per group, so every context vector has squared norm 3.
"""

from __future__ import annotations

import json
import math
import os
from bisect import bisect_right
from dataclasses import dataclass
from datetime import datetime
from enum import IntEnum
from typing import Protocol, Sequence

import requests

from .domain import ContextSnapshot
from .errors import NonFiniteError, ProviderUnavailable, RangeError

TIME_BIN_STARTS = (0, 6, 9, 12, 15, 18, 21)  # half-open intervals, last ends at 24

# Not part of the source data; configurable. Splits cold/mild/warm/hot at
# 10, 20, and 28 degrees C, boundary belonging to the warmer bin.
DEFAULT_TEMP_THRESHOLDS = (10.0, 20.0, 28.0)

DIM = 16  # 7 + 4 + 5
_TEMP_OFFSET = 7
_WEATHER_OFFSET = 11


class TimeBin(IntEnum):
    H0_6 = 0
    H6_9 = 1
    H9_12 = 2
    H12_15 = 3
    H15_18 = 4
    H18_21 = 5
    H21_24 = 6


class TempBin(IntEnum):
    COLD = 0
    MILD = 1
    WARM = 2
    HOT = 3


class WeatherBin(IntEnum):
    SUNNY = 0
    RAIN = 1
    CLEAR = 2
    WINDY = 3
    SNOW = 4


# Phrases used when recommendations mention the time slot.
TIME_PHRASES = {
    TimeBin.H0_6: "overnight",
    TimeBin.H6_9: "in the early morning",
    TimeBin.H9_12: "in the late morning",
    TimeBin.H12_15: "in the early afternoon",
    TimeBin.H15_18: "in the late afternoon",
    TimeBin.H18_21: "in the evening",
    TimeBin.H21_24: "at night",
}

# Substring rules applied in order, case-insensitively; anything unmatched
# falls through to CLEAR.
_WEATHER_RULES = (
    (("rain", "drizzle"), WeatherBin.RAIN),
    (("snow", "sleet"), WeatherBin.SNOW),
    (("wind",), WeatherBin.WINDY),
    (("sun",), WeatherBin.SUNNY),
)


def bin_time(local_hour: int) -> TimeBin:
    """Map an hour 0-23 to its interval; boundary hours go to the later bin."""
    if not 0 <= local_hour <= 23:
        raise RangeError(f"hour {local_hour} outside 0-23")
    return TimeBin(bisect_right(TIME_BIN_STARTS, local_hour) - 1)


def bin_temperature(celsius: float, thresholds: Sequence[float] = DEFAULT_TEMP_THRESHOLDS) -> TempBin:
    if not math.isfinite(celsius):
        raise NonFiniteError(f"temperature {celsius!r} not finite")
    return TempBin(bisect_right(list(thresholds), celsius))


def map_weather(condition: str) -> WeatherBin:
    lowered = condition.lower()
    for needles, bin_ in _WEATHER_RULES:
        if any(n in lowered for n in needles):
            return bin_
    return WeatherBin.CLEAR


@dataclass(frozen=True)
class ContextVector:
    """16-dim one-hot concatenation of (time, temperature, weather) bins."""

    values: tuple

    def __post_init__(self):
        if len(self.values) != DIM:
            raise RangeError(f"context vector has {len(self.values)} entries, want {DIM}")

    @property
    def dim(self) -> int:
        return DIM

    @classmethod
    def from_bins(cls, time_bin: TimeBin, temp_bin: TempBin, weather_bin: WeatherBin) -> "ContextVector":
        values = [0.0] * DIM
        values[int(time_bin)] = 1.0
        values[_TEMP_OFFSET + int(temp_bin)] = 1.0
        values[_WEATHER_OFFSET + int(weather_bin)] = 1.0
        return cls(tuple(values))

    def bins(self) -> tuple:
        """Recover (TimeBin, TempBin, WeatherBin) from the one-hot layout."""
        t = self.values.index(1.0)
        p = self.values.index(1.0, _TEMP_OFFSET)
        w = self.values.index(1.0, _WEATHER_OFFSET)
        return TimeBin(t), TempBin(p - _TEMP_OFFSET), WeatherBin(w - _WEATHER_OFFSET)


def featurize(snapshot: ContextSnapshot,
              thresholds: Sequence[float] = DEFAULT_TEMP_THRESHOLDS) -> ContextVector:
    """Deterministic encoding of a snapshot into the 16-dim feature space."""
    return ContextVector.from_bins(
        bin_time(snapshot.local_hour),
        bin_temperature(snapshot.temperature_c, thresholds),
        map_weather(snapshot.weather_condition),
    )


class WeatherProvider(Protocol):
    def fetch(self, location: str) -> dict:
        """Return the provider payload; raise ProviderUnavailable on failure."""
        ...


class HttpWeatherProvider:
    """Live weather lookup. API key comes from WEATHER_API_KEY."""

    def __init__(self, base_url: str = "https://api.weatherapi.com/v1/current.json",
                 timeout: float = 10.0):
        self.base_url = base_url
        self.timeout = timeout

    def fetch(self, location: str) -> dict:
        key = os.environ.get("WEATHER_API_KEY")
        if not key:
            raise ProviderUnavailable("WEATHER_API_KEY not set")
        try:
            resp = requests.get(self.base_url, params={"q": location, "key": key},
                                timeout=self.timeout)
            resp.raise_for_status()
            return resp.json()
        except requests.RequestException as exc:
            raise ProviderUnavailable(f"weather provider unreachable: {exc}") from exc


class FixtureWeatherProvider:
    """Reads the same payload shape from a local JSON file."""

    def __init__(self, path: str):
        self.path = path

    def fetch(self, location: str) -> dict:
        try:
            with open(self.path, encoding="utf-8") as fh:
                return json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ProviderUnavailable(f"weather fixture unreadable: {exc}") from exc


def fetch_context(location: str, provider: WeatherProvider) -> ContextSnapshot:
    """Build a snapshot from the provider payload.

    Payload fields: current.temp_c, current.condition.text, location.localtime
    (a "YYYY-MM-DD HH:MM" local wall-clock string).
    """
    payload = provider.fetch(location)
    try:
        temp_c = float(payload["current"]["temp_c"])
        condition = str(payload["current"]["condition"]["text"])
        localtime = str(payload["location"]["localtime"])
        local_dt = datetime.strptime(localtime, "%Y-%m-%d %H:%M")
    except (KeyError, TypeError, ValueError) as exc:
        raise ProviderUnavailable(f"malformed provider payload: {exc}") from exc
    return ContextSnapshot(
        local_hour=local_dt.hour,
        temperature_c=temp_c,
        weather_condition=condition,
        captured_at=local_dt,
        location_label=location,
    )


def degraded_snapshot(local_hour: int, captured_at: datetime,
                      location: str | None = None) -> ContextSnapshot:
    """Time-only fallback when the provider is down: mild temperature and
    clear sky, flagged degraded so downstream text can note it."""
    return ContextSnapshot(
        local_hour=local_hour,
        temperature_c=15.0,
        weather_condition="clear",
        captured_at=captured_at,
        location_label=location,
        degraded=True,
    )
