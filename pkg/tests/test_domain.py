import json
from datetime import date, datetime, timedelta, timezone

import pytest
from hypothesis import given, strategies as st

from sleepcoach import domain
from sleepcoach.datastore import METRICS
from sleepcoach.domain import (
    ChatTurn,
    Mode,
    Recommendation,
    Role,
    Session,
    classify_record,
    validate_activity_record,
    validate_physio_sample,
    validate_sleep_record,
)
from sleepcoach.errors import MissingField, OrderError, RangeError

from conftest import sleep_line, activity_line, physio_line


def parse(line: str) -> dict:
    return json.loads(line)


class TestSleepValidation:
    def test_valid_record(self):
        record = validate_sleep_record(parse(sleep_line(total=24480, in_bed=27000, efficiency=91)))
        assert record.total_sleep_seconds == 24480
        assert record.sleep_efficiency == 91

    def test_sleep_exceeding_time_in_bed(self):
        with pytest.raises(OrderError):
            validate_sleep_record(parse(sleep_line(total=30000, in_bed=27000)))

    def test_score_zero_rejected(self):
        with pytest.raises(RangeError):
            validate_sleep_record(parse(sleep_line(score=0)))

    def test_score_above_hundred_rejected(self):
        with pytest.raises(RangeError):
            validate_sleep_record(parse(sleep_line(efficiency=101)))

    def test_missing_field(self):
        raw = parse(sleep_line())
        del raw["readiness_score"]
        with pytest.raises(MissingField):
            validate_sleep_record(raw)

    def test_bedtime_order(self):
        raw = parse(sleep_line())
        raw["bedtime_start"], raw["bedtime_end"] = raw["bedtime_end"], raw["bedtime_start"]
        with pytest.raises(OrderError):
            validate_sleep_record(raw)

    def test_naive_timestamp_rejected(self):
        raw = parse(sleep_line())
        raw["bedtime_start"] = "2024-07-25T23:00:00"
        with pytest.raises(MissingField):
            validate_sleep_record(raw)

    def test_day_is_wake_day(self):
        # even when the ingested day disagrees, the wake-up date wins
        raw = parse(sleep_line(wake_day="2024-07-26"))
        raw["day"] = "2024-07-25"
        record = validate_sleep_record(raw)
        assert record.day == date(2024, 7, 26)


class TestActivityAndPhysio:
    def test_activity_valid(self):
        record = validate_activity_record(parse(activity_line(kind="Cycling", intensity="hard")))
        assert record.activity_type == "Cycling"
        assert record.intensity is domain.Intensity.HARD

    def test_activity_bad_intensity(self):
        with pytest.raises(RangeError):
            validate_activity_record(parse(activity_line(intensity="extreme")))

    def test_activity_time_order(self):
        raw = parse(activity_line())
        raw["end_time"] = raw["start_time"]
        with pytest.raises(OrderError):
            validate_activity_record(raw)

    def test_physio_heart_rate_order(self):
        with pytest.raises(OrderError):
            validate_physio_sample(parse(physio_line(avg_hr=50.0, lowest_hr=60.0)))

    def test_physio_stress_bounds(self):
        with pytest.raises(RangeError):
            validate_physio_sample(parse(physio_line(stress=0)))

    def test_classify(self):
        assert classify_record(parse(sleep_line())) == "sleep"
        assert classify_record(parse(activity_line())) == "activity"
        assert classify_record(parse(physio_line())) == "physio"
        with pytest.raises(MissingField):
            classify_record({"user_id": "x"})


# -- round-trip property -------------------------------------------------------

_scores = st.integers(min_value=1, max_value=100)


@st.composite
def sleep_records(draw):
    wake = draw(st.dates(min_value=date(2024, 1, 2), max_value=date(2025, 1, 1)))
    offset = timezone(timedelta(hours=draw(st.integers(-12, 12))))
    end = datetime(wake.year, wake.month, wake.day,
                   draw(st.integers(4, 11)), draw(st.integers(0, 59)), tzinfo=offset)
    start = end - timedelta(minutes=draw(st.integers(60, 16 * 60)))
    in_bed = draw(st.integers(0, 50_000))
    total = draw(st.integers(0, in_bed))
    return {
        "user_id": draw(st.text(st.characters(categories=["Ll"]), min_size=1, max_size=8)),
        "day": wake.isoformat(),
        "bedtime_start": start.isoformat(),
        "bedtime_end": end.isoformat(),
        "total_sleep_duration": total,
        "time_in_bed": in_bed,
        "efficiency": draw(_scores),
        "sleep_score": draw(_scores),
        "readiness_score": draw(_scores),
        "average_hrv": draw(st.floats(0, 200, allow_nan=False)),
        "lowest_heart_rate": draw(st.floats(30, 90, exclude_min=True, allow_nan=False)),
        "average_breath": draw(st.floats(5, 30, exclude_min=True, allow_nan=False)),
    }


@given(sleep_records())
def test_sleep_round_trip_identity(raw):
    record = validate_sleep_record(raw)
    again = validate_sleep_record(domain.sleep_to_ingest(record))
    assert again == record


def test_activity_round_trip():
    record = validate_activity_record(parse(activity_line()))
    assert validate_activity_record(domain.activity_to_ingest(record)) == record


def test_physio_round_trip():
    sample = validate_physio_sample(parse(physio_line()))
    assert validate_physio_sample(domain.physio_to_ingest(sample)) == sample


def test_every_wearable_measurement_has_one_home():
    """Each queryable measurement reads from exactly one record type."""
    sources = {name: source for name, (source, _, _) in METRICS.items()}
    expected = {
        "sleep_score": "sleep", "total_sleep_duration": "sleep", "time_in_bed": "sleep",
        "efficiency": "sleep", "readiness_score": "sleep", "average_hrv": "sleep",
        "lowest_heart_rate": "sleep", "average_breath": "sleep",
        "average_heart_rate": "physio", "stress_level": "physio",
        "activity_count": "activity",
    }
    assert sources == expected


# -- conversation types ----------------------------------------------------------


def test_user_turns_carry_no_routes():
    ts = datetime(2024, 7, 26, 12, 0, tzinfo=timezone.utc)
    with pytest.raises(ValueError):
        ChatTurn(Role.USER, "hi", ts, routes_taken=frozenset({"x"}))


def test_session_turns_strictly_ordered():
    ts = datetime(2024, 7, 26, 12, 0, tzinfo=timezone.utc)
    session = Session("u1", Mode.COACH, created_at=ts)
    session.append_turn(ChatTurn(Role.USER, "a", ts))
    with pytest.raises(OrderError):
        session.append_turn(ChatTurn(Role.ASSISTANT, "b", ts))
    session.append_turn(ChatTurn(Role.ASSISTANT, "b", ts + timedelta(seconds=1)))
    assert len(session.turns) == 2


def test_recommendation_attribution_flag_flips_once():
    rec = Recommendation("u1-r0001", "u1", "walking", (0.0,) * 16,
                         datetime(2024, 7, 26, tzinfo=timezone.utc), "walk")
    once = rec.mark_attributed()
    assert once.reward_attributed
    with pytest.raises(ValueError):
        once.mark_attributed()
