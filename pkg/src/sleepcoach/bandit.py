"""Disjoint-model LinUCB contextual bandit.

Each arm keeps a ridge-regularized Gram matrix A (identity-initialized) and
an accumulated reward vector b. Scoring solves A theta = b per query rather
than maintaining an incremental inverse: at d = 16 the solve is cheap and
numerically robust. Selection takes the arm maximizing
theta.x + alpha * sqrt(x. A^-1 x); exact ties break by a seeded uniform draw
so fresh models explore symmetrically but reproducibly.

A model is single-writer: callers serialize updates per user. Scoring is
read-only and safe on a quiescent model.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    CorruptState,
    DimensionMismatch,
    DuplicateArm,
    EmptyArmSet,
    RewardOutOfRange,
    UnknownArm,
)

STATE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ArmId:
    name: str
    index: int


@dataclass(frozen=True)
class ArmScore:
    arm: ArmId
    estimate: float
    uncertainty: float
    ucb: float


class ArmState:
    """Per-arm sufficient statistics: A = I + sum(x x^T), b = sum(r x)."""

    def __init__(self, dim: int):
        self.gram = np.eye(dim)
        self.reward_vec = np.zeros(dim)
        self.update_count = 0

    def copy(self) -> "ArmState":
        fresh = ArmState(self.gram.shape[0])
        fresh.gram = self.gram.copy()
        fresh.reward_vec = self.reward_vec.copy()
        fresh.update_count = self.update_count
        return fresh


def _as_vector(x, dim: int) -> np.ndarray:
    values = getattr(x, "values", x)
    vec = np.asarray(values, dtype=float)
    if vec.shape != (dim,):
        raise DimensionMismatch(f"context has shape {vec.shape}, model dim is {dim}")
    return vec


class BanditModel:
    """LinUCB state for one user: an ordered arm set sharing one dimension."""

    def __init__(self, arm_names: Sequence[str], dim: int, alpha: float = 1.0, seed: int = 0):
        names = list(arm_names)
        if not names:
            raise EmptyArmSet("need at least one arm")
        if len(set(names)) != len(names):
            raise DuplicateArm(f"arm names not unique: {names}")
        if dim < 1:
            raise DimensionMismatch(f"dim must be >= 1, got {dim}")
        if alpha < 0:
            raise RewardOutOfRange(f"alpha must be >= 0, got {alpha}")
        self.arm_ids = [ArmId(name, i) for i, name in enumerate(names)]
        self.states = [ArmState(dim) for _ in names]
        self.alpha = float(alpha)
        self.dim = int(dim)
        self.rng_seed = int(seed)
        self._rng = np.random.default_rng(seed)
        self._by_name = {a.name: a.index for a in self.arm_ids}

    # -- queries ------------------------------------------------------------

    def score(self, x) -> list[ArmScore]:
        """Per-arm estimate, uncertainty, and upper confidence bound at x."""
        vec = _as_vector(x, self.dim)
        scores = []
        for arm, state in zip(self.arm_ids, self.states):
            # One solve covers both theta = A^-1 b and A^-1 x.
            solved = np.linalg.solve(state.gram, np.column_stack([state.reward_vec, vec]))
            estimate = float(solved[:, 0] @ vec)
            uncertainty = float(np.sqrt(vec @ solved[:, 1]))
            scores.append(ArmScore(arm, estimate, uncertainty,
                                   estimate + self.alpha * uncertainty))
        return scores

    def select(self, x) -> ArmId:
        """Argmax of the UCB; exact ties resolved by a seeded uniform draw."""
        scores = self.score(x)
        best = max(s.ucb for s in scores)
        tied = [s.arm for s in scores if s.ucb == best]
        if len(tied) == 1:
            return tied[0]
        return tied[int(self._rng.integers(len(tied)))]

    # -- learning -----------------------------------------------------------

    def update(self, arm: ArmId | str, x, r: float) -> None:
        """Fold one observed reward into the chosen arm; other arms untouched."""
        if not 0.0 <= r <= 1.0:
            raise RewardOutOfRange(f"reward {r} outside [0, 1]")
        name = arm if isinstance(arm, str) else arm.name
        if name not in self._by_name:
            raise UnknownArm(f"no arm named {name!r}")
        vec = _as_vector(x, self.dim)
        state = self.states[self._by_name[name]]
        state.gram += np.outer(vec, vec)
        state.reward_vec += r * vec
        state.update_count += 1

    def arm(self, name: str) -> ArmId:
        if name not in self._by_name:
            raise UnknownArm(f"no arm named {name!r}")
        return self.arm_ids[self._by_name[name]]

    def arm_state(self, name: str) -> ArmState:
        return self.states[self._by_name[name]]

    # -- persistence ----------------------------------------------------------

    def save_state(self) -> bytes:
        """Versioned, checksummed JSON snapshot (matrices, counters, RNG)."""
        body = {
            "dim": self.dim,
            "alpha": self.alpha,
            "rng_seed": self.rng_seed,
            "rng_state": _encode_rng_state(self._rng),
            "arms": [
                {
                    "name": arm.name,
                    "gram": state.gram.tolist(),
                    "reward_vec": state.reward_vec.tolist(),
                    "update_count": state.update_count,
                }
                for arm, state in zip(self.arm_ids, self.states)
            ],
        }
        payload = json.dumps(body, sort_keys=True, separators=(",", ":"))
        envelope = {
            "format_version": STATE_FORMAT_VERSION,
            "checksum": hashlib.sha256(payload.encode()).hexdigest(),
            "body": body,
        }
        return json.dumps(envelope, sort_keys=True, separators=(",", ":")).encode()

    @classmethod
    def load_state(cls, data: bytes, expected_dim: int | None = None) -> "BanditModel":
        try:
            envelope = json.loads(data.decode())
            version = envelope["format_version"]
            body = envelope["body"]
            stored_sum = envelope["checksum"]
        except (ValueError, KeyError, UnicodeDecodeError) as exc:
            raise CorruptState(f"unreadable model state: {exc}") from exc
        if version != STATE_FORMAT_VERSION:
            raise CorruptState(f"unsupported state version {version}")
        payload = json.dumps(body, sort_keys=True, separators=(",", ":"))
        if hashlib.sha256(payload.encode()).hexdigest() != stored_sum:
            raise CorruptState("checksum mismatch")
        dim = int(body["dim"])
        if expected_dim is not None and dim != expected_dim:
            raise DimensionMismatch(f"state has dim {dim}, configuration expects {expected_dim}")
        model = cls([a["name"] for a in body["arms"]], dim,
                    alpha=body["alpha"], seed=body["rng_seed"])
        for state, stored in zip(model.states, body["arms"]):
            gram = np.asarray(stored["gram"], dtype=float)
            if gram.shape != (dim, dim):
                raise CorruptState(f"gram for {stored['name']!r} has shape {gram.shape}")
            state.gram = gram
            state.reward_vec = np.asarray(stored["reward_vec"], dtype=float)
            state.update_count = int(stored["update_count"])
        _restore_rng_state(model._rng, body["rng_state"])
        return model


def _encode_rng_state(rng: np.random.Generator) -> dict:
    state = rng.bit_generator.state
    return {
        "bit_generator": state["bit_generator"],
        "state": str(state["state"]["state"]),
        "inc": str(state["state"]["inc"]),
        "has_uint32": state["has_uint32"],
        "uinteger": state["uinteger"],
    }


def _restore_rng_state(rng: np.random.Generator, encoded: dict) -> None:
    try:
        rng.bit_generator.state = {
            "bit_generator": encoded["bit_generator"],
            "state": {"state": int(encoded["state"]), "inc": int(encoded["inc"])},
            "has_uint32": encoded["has_uint32"],
            "uinteger": encoded["uinteger"],
        }
    except (KeyError, ValueError, TypeError) as exc:
        raise CorruptState(f"bad RNG state: {exc}") from exc


def init(arm_names: Sequence[str], dim: int, alpha: float = 1.0, seed: int = 0) -> BanditModel:
    """Fresh model: identity Gram matrices, zero reward vectors."""
    return BanditModel(arm_names, dim, alpha=alpha, seed=seed)
