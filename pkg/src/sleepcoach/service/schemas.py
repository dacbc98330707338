"""Pydantic request/response models for the HTTP surface."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel


class ChatRequest(BaseModel):
    user_id: str
    message: str
    mode: Optional[str] = None


class ChatMeta(BaseModel):
    """Structured trailer appended to the streamed reply."""

    routes: list[str]
    techniques: list[str]
    rec_id: Optional[str] = None


class IngestResponse(BaseModel):
    counts: dict[str, int]
    errors: list[tuple[int, str]]
    rewards_applied: int


class MetricsResponse(BaseModel):
    user_id: str
    metric: str
    aggregate: str
    value: float
    unit: str
    n: int
    facts: list[tuple[str, float, str]]
    series: Optional[list[tuple[str, float]]] = None


class AdherenceRequest(BaseModel):
    rec_id: str
    followed: bool
