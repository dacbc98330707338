import math
from datetime import datetime, timezone

import pytest
from hypothesis import given, strategies as st

from sleepcoach import context
from sleepcoach.context import (
    ContextVector,
    FixtureWeatherProvider,
    TempBin,
    TimeBin,
    WeatherBin,
    bin_temperature,
    bin_time,
    degraded_snapshot,
    featurize,
    fetch_context,
    map_weather,
)
from sleepcoach.domain import ContextSnapshot
from sleepcoach.errors import NonFiniteError, ProviderUnavailable, RangeError

NOW = datetime(2024, 7, 26, 16, 0, tzinfo=timezone.utc)


class TestTimeBins:
    @pytest.mark.parametrize("hour,expected", [
        (0, 0), (5, 0), (6, 1), (8, 1), (9, 2), (12, 3), (15, 4), (18, 5), (21, 6), (23, 6),
    ])
    def test_examples(self, hour, expected):
        assert bin_time(hour) == TimeBin(expected)

    @pytest.mark.parametrize("hour", [-1, 24, 100])
    def test_out_of_range(self, hour):
        with pytest.raises(RangeError):
            bin_time(hour)

    def test_totality(self):
        assert sorted({bin_time(h) for h in range(24)}) == list(TimeBin)


class TestTempBins:
    @pytest.mark.parametrize("celsius,expected", [
        (15.0, TempBin.MILD), (10.0, TempBin.MILD), (35.0, TempBin.HOT),
        (9.999, TempBin.COLD), (-20.0, TempBin.COLD), (19.999, TempBin.MILD),
        (20.0, TempBin.WARM), (27.999, TempBin.WARM), (28.0, TempBin.HOT),
    ])
    def test_thresholds(self, celsius, expected):
        assert bin_temperature(celsius) == expected

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), float("-inf")])
    def test_non_finite(self, bad):
        with pytest.raises(NonFiniteError):
            bin_temperature(bad)

    def test_custom_thresholds(self):
        assert bin_temperature(12.0, thresholds=(5.0, 15.0, 25.0)) == TempBin.MILD

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_total_partition(self, celsius):
        assert bin_temperature(celsius) in list(TempBin)


class TestWeatherMapping:
    @pytest.mark.parametrize("condition,expected", [
        ("Sunny", WeatherBin.SUNNY),
        ("Patchy light drizzle", WeatherBin.RAIN),
        ("Overcast", WeatherBin.CLEAR),
        ("Light snow showers", WeatherBin.SNOW),
        ("Sleet", WeatherBin.SNOW),
        ("Windy", WeatherBin.WINDY),
        ("RAIN", WeatherBin.RAIN),
        ("clear", WeatherBin.CLEAR),
        ("Fog", WeatherBin.CLEAR),
    ])
    def test_synonyms(self, condition, expected):
        assert map_weather(condition) == expected

    @given(st.text(max_size=40))
    def test_total_over_strings(self, condition):
        assert map_weather(condition) in list(WeatherBin)


class TestFeaturize:
    def test_layout_afternoon_sunny(self):
        snap = ContextSnapshot(7, 15.0, "Sunny", NOW)
        vec = featurize(snap)
        assert [i for i, v in enumerate(vec.values) if v == 1.0] == [1, 8, 11]

    def test_layout_midnight_snow(self):
        snap = ContextSnapshot(0, 5.0, "Snow", NOW)
        vec = featurize(snap)
        assert [i for i, v in enumerate(vec.values) if v == 1.0] == [0, 7, 15]

    @given(
        st.integers(0, 23),
        st.floats(-40, 50, allow_nan=False),
        st.sampled_from(["Sunny", "Light rain", "Blowing snow", "Overcast", "windy", "Mist"]),
    )
    def test_norm_is_three(self, hour, temp, condition):
        vec = featurize(ContextSnapshot(hour, temp, condition, NOW))
        assert sum(v * v for v in vec.values) == 3.0

    def test_deterministic(self):
        snap = ContextSnapshot(16, 27.2, "Sunny", NOW)
        assert featurize(snap) == featurize(snap)

    def test_bins_recoverable(self):
        vec = ContextVector.from_bins(TimeBin.H15_18, TempBin.WARM, WeatherBin.SUNNY)
        assert vec.bins() == (TimeBin.H15_18, TempBin.WARM, WeatherBin.SUNNY)

    def test_wrong_length_rejected(self):
        with pytest.raises(RangeError):
            ContextVector((1.0,) * 15)


class TestProvider:
    def test_fixture_fetch(self, weather_file):
        snap = fetch_context("New York", FixtureWeatherProvider(str(weather_file)))
        assert (snap.local_hour, snap.temperature_c, snap.weather_condition) == (16, 27.2, "Sunny")
        assert not snap.degraded

    def test_missing_fixture(self, tmp_path):
        provider = FixtureWeatherProvider(str(tmp_path / "absent.json"))
        with pytest.raises(ProviderUnavailable):
            fetch_context("New York", provider)

    def test_malformed_payload(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"current": {}}', encoding="utf-8")
        with pytest.raises(ProviderUnavailable):
            fetch_context("New York", FixtureWeatherProvider(str(bad)))

    def test_rainy_fixture_lands_in_rain_bin(self, tmp_path):
        payload = '{"location": {"localtime": "2024-07-26 09:30"}, "current": {"temp_c": 12.0, "condition": {"text": "Light rain"}}}'
        path = tmp_path / "rain.json"
        path.write_text(payload, encoding="utf-8")
        snap = fetch_context("X", FixtureWeatherProvider(str(path)))
        vec = featurize(snap)
        assert vec.bins()[2] == WeatherBin.RAIN

    def test_http_provider_without_key_unavailable(self, monkeypatch):
        monkeypatch.delenv("WEATHER_API_KEY", raising=False)
        with pytest.raises(ProviderUnavailable):
            context.HttpWeatherProvider().fetch("New York")

    def test_degraded_snapshot(self):
        snap = degraded_snapshot(22, NOW, "New York")
        assert snap.degraded
        assert bin_temperature(snap.temperature_c) == TempBin.MILD
        assert map_weather(snap.weather_condition) == WeatherBin.CLEAR
        assert snap.local_hour == 22


def test_time_phrases_cover_all_bins():
    assert set(context.TIME_PHRASES) == set(TimeBin)
    assert all(isinstance(v, str) and v for v in context.TIME_PHRASES.values())
