"""Operator entry points: serve, ingest, simulate, analyze, and an offline
REPL chat. Everything but serve runs fully offline against the local data
directory; exit codes are 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import csv
import functools
import json
import sys

import click

from .datastore import Aggregate, AnalyticsQuery, Store
from .domain import DateRange
from .errors import SleepCoachError, Unavailable
from .service.app import create_app
from .service.config import ServiceConfig
from .service.state import AppState
from .simkit import SyntheticEnv, cumulative_regret, default_env, make_policy, run_policy


def domain_errors(fn):
    """Map package errors to exit code 1 with the message on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SleepCoachError as exc:
            click.echo(str(exc), err=True)
            sys.exit(1)

    return wrapper


@click.group()
def main():
    """Sleep coaching engine."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON config file; omit for defaults.")
@click.option("--weather-fixture", type=click.Path(exists=True, dir_okay=False),
              help="Serve weather from this JSON payload instead of the live API.")
@domain_errors
def serve(config_path, weather_fixture):
    """Run the HTTP service."""
    import uvicorn

    config = ServiceConfig.from_file(config_path) if config_path else ServiceConfig()
    if weather_fixture:
        from dataclasses import replace
        config = replace(config, weather="fixture", weather_fixture=weather_fixture)
    app = create_app(AppState(config))
    uvicorn.run(app, host=config.host, port=config.port)


@main.command()
@click.option("--file", "path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--user", "user_id", default=None,
              help="Only accept records belonging to this user.")
@click.option("--data-dir", default="data", show_default=True)
@domain_errors
def ingest(path, user_id, data_dir):
    """Ingest JSON-lines wearable records and close any due reward loops."""
    state = AppState(ServiceConfig(data_dir=data_dir))
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if user_id is not None:
        kept = []
        for i, line in enumerate(lines, start=1):
            try:
                owner = json.loads(line).get("user_id")
            except json.JSONDecodeError:
                kept.append(line)  # let the store report the parse error
                continue
            if owner == user_id:
                kept.append(line)
            else:
                click.echo(f"line {i}: skipped record for user {owner!r}", err=True)
        lines = kept
    report, applied = state.ingest(lines)
    for line_no, message in report.errors:
        click.echo(f"line {line_no}: {message}", err=True)
    click.echo(json.dumps({"counts": report.counts, "rewards_applied": applied}))
    if report.errors and not any(report.counts.values()):
        sys.exit(1)


@main.command()
@click.option("--policy", type=click.Choice(["linucb", "epsilon_greedy", "random", "oracle"]),
              default="linucb", show_default=True)
@click.option("--alpha", default=1.0, show_default=True)
@click.option("--epsilon", default=0.1, show_default=True)
@click.option("--rounds", default=10_000, show_default=True)
@click.option("--seeds", default=10, show_default=True)
@click.option("--env", "env_path", type=click.Path(exists=True, dir_okay=False),
              help="Environment fixture JSON; omit for the built-in default.")
@click.option("--out", "out_path", default="results.csv", show_default=True)
@domain_errors
def simulate(policy, alpha, epsilon, rounds, seeds, env_path, out_path):
    """Roll a policy on a synthetic environment and write per-round regret."""
    env = SyntheticEnv.from_file(env_path) if env_path else default_env()
    finals = []
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "round", "policy", "cumulative_regret"])
        for seed in range(seeds):
            trajectory = run_policy(env, make_policy(policy, env, seed, alpha, epsilon),
                                    rounds, seed)
            regret = cumulative_regret(trajectory)
            for round_no, value in enumerate(regret, start=1):
                writer.writerow([seed, round_no, policy, f"{value:.6f}"])
            finals.append(regret[-1])
    click.echo(f"{policy}: mean final regret {sum(finals) / len(finals):.3f} "
               f"over {seeds} seed(s), {rounds} rounds -> {out_path}")


@main.command()
@click.option("--user", "user_id", required=True)
@click.option("--metric", default="total_sleep_duration", show_default=True)
@click.option("--aggregate", default="mean", show_default=True,
              type=click.Choice([a.value for a in Aggregate]))
@click.option("--from", "start", required=True, type=click.DateTime(["%Y-%m-%d"]))
@click.option("--to", "end", required=True, type=click.DateTime(["%Y-%m-%d"]))
@click.option("--data-dir", default="data", show_default=True)
@domain_errors
def analyze(user_id, metric, aggregate, start, end, data_dir):
    """Run one analytics query against the local store."""
    store = Store(data_dir)
    query = AnalyticsQuery(
        user_id=user_id,
        metric=metric,
        aggregate=Aggregate(aggregate),
        range=DateRange(start.date(), end.date()),
    )
    try:
        result = store.run_query(query)
    except Unavailable as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    for label, value, unit in result.facts:
        click.echo(f"{label}: {value:.2f} {unit}")


@main.command(name="chat")
@click.option("--user", "user_id", required=True)
@click.option("--mode", type=click.Choice(["coach", "baseline"]), default="coach",
              show_default=True)
@click.option("--data-dir", default="data", show_default=True)
@click.option("--weather-fixture", type=click.Path(exists=True, dir_okay=False))
@domain_errors
def chat(user_id, mode, data_dir, weather_fixture):
    """Offline REPL against the mock provider; reads messages from stdin."""
    config = ServiceConfig(data_dir=data_dir, weather_fixture=weather_fixture)
    state = AppState(config)
    for line in sys.stdin:
        message = line.strip()
        if not message:
            continue
        outcome = state.chat(user_id, message, mode)
        click.echo(outcome.turn.text)
        meta = ", ".join(sorted(r.value for r in outcome.turn.routes_taken))
        if outcome.rec_id:
            meta += f"; rec_id={outcome.rec_id}"
        click.echo(f"[{meta}]")


if __name__ == "__main__":
    main()
