import csv
import json

import pytest
from click.testing import CliRunner

from sleepcoach.cli import main
from sleepcoach.errors import APOLOGY

from conftest import sleep_line


@pytest.fixture
def runner():
    return CliRunner()


class TestSimulate:
    def test_random_policy_csv(self, runner, tmp_path):
        out = tmp_path / "results.csv"
        result = runner.invoke(main, ["simulate", "--policy", "random", "--rounds", "100",
                                      "--seeds", "1", "--out", str(out)])
        assert result.exit_code == 0, result.output
        with out.open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["seed", "round", "policy", "cumulative_regret"]
        assert len(rows) == 101
        assert rows[1][:3] == ["0", "1", "random"]

    def test_env_fixture_flag(self, runner, tmp_path):
        out = tmp_path / "r.csv"
        result = runner.invoke(main, ["simulate", "--policy", "oracle", "--rounds", "50",
                                      "--seeds", "1", "--env", "fixtures/default_env.json",
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        with out.open() as fh:
            rows = list(csv.reader(fh))[1:]
        assert all(float(r[3]) == 0.0 for r in rows)  # oracle regret is zero

    def test_unknown_policy_usage_error(self, runner):
        result = runner.invoke(main, ["simulate", "--policy", "quantum"])
        assert result.exit_code == 2


class TestIngestAnalyze:
    def test_ingest_then_analyze(self, runner, tmp_path):
        data_file = tmp_path / "records.jsonl"
        data_file.write_text("\n".join([
            sleep_line(wake_day="2024-07-25", total=23328),
            sleep_line(wake_day="2024-07-26", total=24624),
        ]), encoding="utf-8")
        data_dir = tmp_path / "data"

        result = runner.invoke(main, ["ingest", "--file", str(data_file),
                                      "--data-dir", str(data_dir)])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output.splitlines()[-1])["counts"]["sleep"] == 2

        result = runner.invoke(main, ["analyze", "--user", "u1",
                                      "--metric", "total_sleep_duration",
                                      "--from", "2024-07-20", "--to", "2024-07-26",
                                      "--data-dir", str(data_dir)])
        assert result.exit_code == 0, result.output
        assert "6.66 hours" in result.output

    def test_analyze_empty_store_apologizes(self, runner, tmp_path):
        result = runner.invoke(main, ["analyze", "--user", "ghost",
                                      "--from", "2024-07-20", "--to", "2024-07-26",
                                      "--data-dir", str(tmp_path / "nothing")])
        assert result.exit_code == 1
        assert APOLOGY in result.output

    def test_ingest_user_filter(self, runner, tmp_path):
        data_file = tmp_path / "mixed.jsonl"
        data_file.write_text("\n".join([
            sleep_line(user="u1", wake_day="2024-07-25"),
            sleep_line(user="u2", wake_day="2024-07-25"),
        ]), encoding="utf-8")
        result = runner.invoke(main, ["ingest", "--file", str(data_file), "--user", "u1",
                                      "--data-dir", str(tmp_path / "data")])
        assert result.exit_code == 0
        assert json.loads(result.output.splitlines()[-1])["counts"]["sleep"] == 1
        assert "skipped record for user 'u2'" in result.output

    def test_ingest_all_bad_lines_exits_one(self, runner, tmp_path):
        data_file = tmp_path / "bad.jsonl"
        data_file.write_text("{broken\n", encoding="utf-8")
        result = runner.invoke(main, ["ingest", "--file", str(data_file),
                                      "--data-dir", str(tmp_path / "data")])
        assert result.exit_code == 1


class TestChatRepl:
    def test_recommendation_round_trip(self, runner, tmp_path, weather_file):
        result = runner.invoke(
            main,
            ["chat", "--user", "u1", "--data-dir", str(tmp_path / "data"),
             "--weather-fixture", str(weather_file)],
            input="what do you recommend?\n",
        )
        assert result.exit_code == 0, result.output
        assert "could help your sleep" in result.output
        assert "rec_id=u1-r0001" in result.output

    def test_baseline_mode(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["chat", "--user", "u1", "--mode", "baseline",
             "--data-dir", str(tmp_path / "data")],
            input="what do you recommend?\n",
        )
        assert result.exit_code == 0
        assert "direct" in result.output
        assert "rec_id" not in result.output

    def test_jitai_loop_through_cli(self, runner, tmp_path, weather_file):
        """recommend via chat, ingest next-night sleep, reward applied once"""
        data_dir = tmp_path / "data"
        runner.invoke(main, ["chat", "--user", "u1", "--data-dir", str(data_dir),
                             "--weather-fixture", str(weather_file)],
                      input="suggest something\n")
        # the offline REPL stamps recommendations with the real clock, so the
        # "next night" must sit a few hours ahead of now
        from datetime import datetime, timedelta, timezone
        bed = datetime.now(timezone.utc) + timedelta(hours=6)
        wake = bed + timedelta(hours=8)
        record = json.loads(sleep_line(score=82))
        record["bedtime_start"] = bed.isoformat()
        record["bedtime_end"] = wake.isoformat()
        record["day"] = wake.date().isoformat()
        night = tmp_path / "night.jsonl"
        night.write_text(json.dumps(record), encoding="utf-8")

        result = runner.invoke(main, ["ingest", "--file", str(night),
                                      "--data-dir", str(data_dir)])
        assert json.loads(result.output.splitlines()[-1])["rewards_applied"] == 1

        result = runner.invoke(main, ["ingest", "--file", str(night),
                                      "--data-dir", str(data_dir)])
        assert json.loads(result.output.splitlines()[-1])["rewards_applied"] == 0


def test_help_lists_subcommands(runner):
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    for command in ("serve", "ingest", "simulate", "analyze", "chat"):
        assert command in result.output


def test_missing_required_option_is_usage_error(runner):
    result = runner.invoke(main, ["analyze"])
    assert result.exit_code == 2
