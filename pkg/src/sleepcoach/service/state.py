"""Per-user runtime state and its on-disk layout.

Each user owns users/<id>/ with:
  store.log      wearable records (managed by datastore.Store)
  bandit.state   versioned+checksummed bandit snapshot, RNG included
  sessions.log   one JSON line per session (mode, created_at, turns)
  loop.json      recommendation-loop state: pending rewards, issued
                 recommendations, adherence log, rec counter

Every mutation path saves through atomic write-temp-then-rename, and every
file is serialized with sorted keys, so a load-then-save round trip is
byte-identical: restarting the service cannot drift state.

Turn handling is serialized per user (one lock each); distinct users run
fully concurrently.
"""

from __future__ import annotations

import json
import threading
from collections import defaultdict
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Optional

from .. import orchestrator
from ..bandit import BanditModel
from ..context import DIM, FixtureWeatherProvider, HttpWeatherProvider
from ..datastore import Aggregate, AnalyticsQuery, AnalyticsResult, IngestReport, Store
from ..domain import ChatTurn, DateRange, Mode, Recommendation, Role, Session
from ..orchestrator import AgentRoute, Deps, PendingReward, TurnOutcome, UserLoopState
from ..ports import (
    LiveLLMPort,
    LiveModerationPort,
    MockLLMPort,
    MockModerationPort,
)
from ..behavior import TechniqueDomain
from .config import ServiceConfig


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# -- turn / session serialization -------------------------------------------


def turn_to_dict(turn: ChatTurn) -> dict:
    return {
        "role": turn.role.value,
        "text": turn.text,
        "timestamp": turn.timestamp.isoformat(),
        "routes": sorted(r.value for r in turn.routes_taken),
        "techniques": sorted(t.value for t in turn.techniques_used),
    }


def turn_from_dict(raw: dict) -> ChatTurn:
    return ChatTurn(
        role=Role(raw["role"]),
        text=raw["text"],
        timestamp=datetime.fromisoformat(raw["timestamp"]),
        routes_taken=frozenset(AgentRoute(r) for r in raw["routes"]),
        techniques_used=frozenset(TechniqueDomain(t) for t in raw["techniques"]),
    )


def _session_to_dict(session: Session) -> dict:
    return {
        "user_id": session.user_id,
        "mode": session.mode.value,
        "created_at": session.created_at.isoformat(),
        "turns": [turn_to_dict(t) for t in session.turns],
    }


def _session_from_dict(raw: dict) -> Session:
    session = Session(
        user_id=raw["user_id"],
        mode=Mode(raw["mode"]),
        created_at=datetime.fromisoformat(raw["created_at"]),
    )
    for turn in raw["turns"]:
        session.turns.append(turn_from_dict(turn))
    return session


def _pending_to_dict(p: PendingReward) -> dict:
    return {
        "rec_id": p.rec_id,
        "user_id": p.user_id,
        "arm_name": p.arm_name,
        "context_values": list(p.context_values),
        "issued_at": p.issued_at.isoformat(),
        "expires_after_s": p.expires_after.total_seconds(),
    }


def _pending_from_dict(raw: dict) -> PendingReward:
    return PendingReward(
        rec_id=raw["rec_id"],
        user_id=raw["user_id"],
        arm_name=raw["arm_name"],
        context_values=tuple(raw["context_values"]),
        issued_at=datetime.fromisoformat(raw["issued_at"]),
        expires_after=timedelta(seconds=raw["expires_after_s"]),
    )


def _rec_to_dict(r: Recommendation) -> dict:
    return {
        "rec_id": r.rec_id,
        "user_id": r.user_id,
        "arm_name": r.arm_name,
        "context_values": list(r.context_values),
        "issued_at": r.issued_at.isoformat(),
        "tailored_text": r.tailored_text,
        "reward_attributed": r.reward_attributed,
    }


def _rec_from_dict(raw: dict) -> Recommendation:
    return Recommendation(
        rec_id=raw["rec_id"],
        user_id=raw["user_id"],
        arm_name=raw["arm_name"],
        context_values=tuple(raw["context_values"]),
        issued_at=datetime.fromisoformat(raw["issued_at"]),
        tailored_text=raw["tailored_text"],
        reward_attributed=raw["reward_attributed"],
    )


@dataclass
class UserRuntime:
    loop: UserLoopState
    sessions: dict  # Mode -> Session
    adherence_events: list


class AppState:
    """The service's whole mutable world: store, ports, per-user runtimes."""

    def __init__(self, config: ServiceConfig,
                 now: Optional[Callable[[], datetime]] = None,
                 llm=None, moderation=None, weather=None):
        self.config = config
        self.data_dir = Path(config.data_dir)
        self.store = Store(self.data_dir)
        self.now = now or (lambda: datetime.now(timezone.utc))
        self.llm = llm if llm is not None else self._build_llm()
        self.moderation = moderation if moderation is not None else self._build_moderation()
        self.weather = weather if weather is not None else self._build_weather()
        self._runtimes: dict[str, UserRuntime] = {}
        self._locks: defaultdict = defaultdict(threading.Lock)
        self._registry_lock = threading.Lock()

    def _build_llm(self):
        if self.config.provider == "live":
            return LiveLLMPort(self.config.llm_endpoint, self.config.llm_model)
        return MockLLMPort()

    def _build_moderation(self):
        if self.config.provider == "live":
            return LiveModerationPort(self.config.moderation_endpoint)
        return MockModerationPort(self.config.deny_terms)

    def _build_weather(self):
        if self.config.weather == "live":
            return HttpWeatherProvider()
        if self.config.weather_fixture:
            return FixtureWeatherProvider(self.config.weather_fixture)
        return None  # degraded time-only context

    def _deps(self) -> Deps:
        return Deps(
            store=self.store,
            llm=self.llm,
            moderation=self.moderation,
            weather=self.weather,
            location=self.config.location,
            now=self.now,
            temp_thresholds=self.config.temp_thresholds,
        )

    # -- per-user state ------------------------------------------------------

    def _user_dir(self, user_id: str) -> Path:
        return self.data_dir / "users" / user_id

    def user_lock(self, user_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks[user_id]

    def runtime(self, user_id: str) -> UserRuntime:
        with self._registry_lock:
            existing = self._runtimes.get(user_id)
        if existing is not None:
            return existing
        runtime = self._load_runtime(user_id)
        with self._registry_lock:
            return self._runtimes.setdefault(user_id, runtime)

    def _load_runtime(self, user_id: str) -> UserRuntime:
        user_dir = self._user_dir(user_id)

        bandit_path = user_dir / "bandit.state"
        if bandit_path.exists():
            model = BanditModel.load_state(bandit_path.read_bytes(), expected_dim=DIM)
        else:
            model = BanditModel(self.config.arm_names, DIM,
                                alpha=self.config.alpha, seed=self.config.seed)

        loop = UserLoopState(user_id=user_id, bandit=model)
        adherence_events: list = []
        loop_path = user_dir / "loop.json"
        if loop_path.exists():
            raw = json.loads(loop_path.read_text(encoding="utf-8"))
            loop.rec_counter = raw["rec_counter"]
            loop.pending = [_pending_from_dict(p) for p in raw["pending"]]
            loop.recommendations = {
                r["rec_id"]: _rec_from_dict(r) for r in raw["recommendations"]
            }
            loop.adherence = list(raw["adherence"])
            adherence_events = loop.adherence

        sessions: dict = {}
        sessions_path = user_dir / "sessions.log"
        if sessions_path.exists():
            for line in sessions_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    session = _session_from_dict(json.loads(line))
                    sessions[session.mode] = session

        return UserRuntime(loop=loop, sessions=sessions, adherence_events=adherence_events)

    def save_user(self, user_id: str) -> None:
        runtime = self.runtime(user_id)
        user_dir = self._user_dir(user_id)
        user_dir.mkdir(parents=True, exist_ok=True)

        (user_dir / "bandit.state.tmp").write_bytes(runtime.loop.bandit.save_state())
        (user_dir / "bandit.state.tmp").replace(user_dir / "bandit.state")

        loop_doc = {
            "rec_counter": runtime.loop.rec_counter,
            "pending": [_pending_to_dict(p) for p in runtime.loop.pending],
            "recommendations": [
                _rec_to_dict(runtime.loop.recommendations[k])
                for k in sorted(runtime.loop.recommendations)
            ],
            "adherence": runtime.loop.adherence,
        }
        _write_atomic(user_dir / "loop.json", _dump(loop_doc))

        lines = [
            _dump(_session_to_dict(runtime.sessions[mode]))
            for mode in sorted(runtime.sessions, key=lambda m: m.value)
        ]
        _write_atomic(user_dir / "sessions.log", "\n".join(lines) + ("\n" if lines else ""))

    # -- operations ------------------------------------------------------------

    def session_for(self, user_id: str, mode: Mode) -> Session:
        runtime = self.runtime(user_id)
        if mode not in runtime.sessions:
            runtime.sessions[mode] = Session(user_id=user_id, mode=mode,
                                             created_at=self.now())
        return runtime.sessions[mode]

    def chat(self, user_id: str, message: str, mode: Optional[str] = None) -> TurnOutcome:
        """Run one turn under the user's lock and persist the result."""
        mode_value = Mode(mode) if mode else Mode(self.config.default_mode)
        with self.user_lock(user_id):
            runtime = self.runtime(user_id)
            session = self.session_for(user_id, mode_value)
            outcome = orchestrator.handle_turn(runtime.loop, session, message, self._deps())
            self.save_user(user_id)
        return outcome

    def ingest(self, lines) -> tuple[IngestReport, int]:
        """Ingest records, then close the reward loop for each new sleep
        record. Returns the report and how many bandit updates were applied."""
        report = self.store.ingest_lines(lines)
        applied = 0
        for record in report.ingested_sleep:
            with self.user_lock(record.user_id):
                runtime = self.runtime(record.user_id)
                applied += len(orchestrator.attribute_rewards(runtime.loop, record))
                self.save_user(record.user_id)
        return report, applied

    def metrics(self, user_id: str, metric: str, aggregate: str,
                start: date, end: date) -> AnalyticsResult:
        query = AnalyticsQuery(
            user_id=user_id,
            metric=metric,
            aggregate=Aggregate(aggregate),
            range=DateRange(start, end),
        )
        return self.store.run_query(query)

    def record_adherence(self, rec_id: str, followed: bool) -> bool:
        """Log an adherence answer against a recommendation; False if the
        rec_id is unknown. Re-answers overwrite (idempotent)."""
        user_id, sep, _ = rec_id.rpartition("-r")
        if not sep:
            return False
        with self.user_lock(user_id):
            runtime = self.runtime(user_id)
            if rec_id not in runtime.loop.recommendations:
                return False
            entry = {"rec_id": rec_id, "followed": followed,
                     "at": self.now().isoformat()}
            runtime.loop.adherence = [
                e for e in runtime.loop.adherence if e["rec_id"] != rec_id
            ] + [entry]
            runtime.adherence_events = runtime.loop.adherence
            self.save_user(user_id)
        return True

    def authenticate(self, token: Optional[str]) -> Optional[str]:
        """Map a bearer token to its user id; None when unknown."""
        if not token:
            return None
        return self.config.tokens.get(token)
