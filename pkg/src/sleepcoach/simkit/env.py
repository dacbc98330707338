"""Synthetic recommendation environment over the discrete context space.

The context space is the 7 x 4 x 5 = 140 grid of (time, temperature,
weather) bins. Each arm has a true weight vector; the expected reward of an
arm in a context is its weights dotted with the one-hot context vector,
clamped to [0, 1], and observations add clamped Gaussian noise. Everything
is seeded, so trajectories are exactly reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..context import DIM, ContextVector, TempBin, TimeBin, WeatherBin

N_CONTEXTS = 7 * 4 * 5


def context_vector_for(index: int) -> ContextVector:
    """Decode a flat context index (time-major) into its one-hot vector."""
    t, rest = divmod(index, 20)
    p, w = divmod(rest, 5)
    return ContextVector.from_bins(TimeBin(t), TempBin(p), WeatherBin(w))


_ALL_VECTORS = np.array([context_vector_for(i).values for i in range(N_CONTEXTS)])


@dataclass(frozen=True)
class TrajectoryStep:
    context_index: int
    context_values: tuple
    arm: int
    reward: float          # observed, noisy
    expected: float        # true expectation of the chosen arm
    optimal_expected: float


@dataclass(frozen=True)
class Trajectory:
    policy: str
    seed: int
    steps: tuple


class SyntheticEnv:
    def __init__(self, true_weights, noise_sd: float, seed: int,
                 arm_names=None, context_probs=None):
        self.true_weights = np.asarray(true_weights, dtype=float)
        if self.true_weights.ndim != 2 or self.true_weights.shape[1] != DIM:
            raise ValueError(f"true_weights must be (n_arms, {DIM})")
        self.noise_sd = float(noise_sd)
        self.seed = int(seed)
        self.n_arms = self.true_weights.shape[0]
        self.arm_names = list(arm_names) if arm_names else [f"arm{i}" for i in range(self.n_arms)]
        if context_probs is None:
            self.context_probs = np.full(N_CONTEXTS, 1.0 / N_CONTEXTS)
        else:
            probs = np.asarray(context_probs, dtype=float)
            if probs.shape != (N_CONTEXTS,):
                raise ValueError(f"context_probs must have {N_CONTEXTS} entries")
            self.context_probs = probs / probs.sum()
        # Expected reward table (arms x contexts), clamped before noise.
        self.expected = np.clip(self.true_weights @ _ALL_VECTORS.T, 0.0, 1.0)
        self.optimal_arms = np.argmax(self.expected, axis=0)
        self.optimal_expected = self.expected.max(axis=0)

    def sample_context(self, rng: np.random.Generator) -> int:
        return int(rng.choice(N_CONTEXTS, p=self.context_probs))

    def observe(self, arm: int, context_index: int, rng: np.random.Generator) -> float:
        mean = self.expected[arm, context_index]
        return float(np.clip(mean + rng.normal(0.0, self.noise_sd), 0.0, 1.0))

    def min_margin(self) -> float:
        """Smallest best-vs-second-best gap across contexts."""
        top2 = np.sort(self.expected, axis=0)[-2:, :]
        return float(np.min(top2[1] - top2[0]))

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "arm_names": self.arm_names,
            "dim": DIM,
            "noise_sd": self.noise_sd,
            "seed": self.seed,
            "true_weights": self.true_weights.tolist(),
            "context_distribution": "uniform"
            if np.allclose(self.context_probs, 1.0 / N_CONTEXTS)
            else self.context_probs.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SyntheticEnv":
        dist = payload.get("context_distribution", "uniform")
        probs = None if dist == "uniform" else dist
        return cls(
            payload["true_weights"],
            payload["noise_sd"],
            payload["seed"],
            arm_names=payload.get("arm_names"),
            context_probs=probs,
        )

    @classmethod
    def from_file(cls, path: Path | str) -> "SyntheticEnv":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def default_env() -> SyntheticEnv:
    """The pinned fixture environment used by acceptance runs."""
    text = resources.files("sleepcoach").joinpath("data/default_env.json").read_text("utf-8")
    return SyntheticEnv.from_dict(json.loads(text))
