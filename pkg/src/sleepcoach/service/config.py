"""Service configuration: JSON file plus environment-variable overrides.

Documented keys (all optional, defaults below): host, port, provider
("mock" | "live"), weather ("fixture" | "live"), weather_fixture, location,
alpha, seed, temp_thresholds, data_dir, default_mode ("coach" | "baseline"),
arm_names, tokens (bearer token -> user id), deny_terms, llm_endpoint,
llm_model, moderation_endpoint, static_dir.

API keys are never stored in the file: LLM_API_KEY and WEATHER_API_KEY come
from the environment, and live modes refuse to start without them.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..errors import SleepCoachError

DEFAULT_ARMS = ("gym", "walking", "yoga", "reading", "meditation")


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    provider: str = "mock"
    weather: str = "fixture"
    weather_fixture: str | None = None
    location: str = "New York"
    alpha: float = 1.0
    seed: int = 7
    temp_thresholds: tuple = (10.0, 20.0, 28.0)
    data_dir: str = "data"
    default_mode: str = "coach"
    arm_names: tuple = DEFAULT_ARMS
    tokens: dict = field(default_factory=dict)
    deny_terms: tuple = ()
    llm_endpoint: str = "https://api.openai.com/v1/chat/completions"
    llm_model: str = "gpt-4o-mini"
    moderation_endpoint: str = "https://api.openai.com/v1/moderations"
    static_dir: str | None = None

    def __post_init__(self):
        if self.provider not in ("mock", "live"):
            raise SleepCoachError(f"provider must be mock or live, got {self.provider!r}")
        if self.weather not in ("fixture", "live"):
            raise SleepCoachError(f"weather must be fixture or live, got {self.weather!r}")
        if self.default_mode not in ("coach", "baseline"):
            raise SleepCoachError(f"default_mode must be coach or baseline, got {self.default_mode!r}")
        if self.provider == "live" and not os.environ.get("LLM_API_KEY"):
            raise SleepCoachError("provider=live requires LLM_API_KEY in the environment")
        if self.weather == "live" and not os.environ.get("WEATHER_API_KEY"):
            raise SleepCoachError("weather=live requires WEATHER_API_KEY in the environment")

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise SleepCoachError(f"unknown config keys: {sorted(unknown)}")
        for key in ("temp_thresholds", "arm_names", "deny_terms"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)

    def with_data_dir(self, data_dir: str | Path) -> "ServiceConfig":
        return replace(self, data_dir=str(data_dir))
