"""Benchmark harness: run controller-vs-task episodes, log, and summarize.

The headline metric is the normalized return, sum(reward)/episode_steps,
which lies in [0, 1] for every task by the reward bounds. Early-terminated
episodes still divide by the full episode length, so failing early scores
worse than surviving at low reward. All reward values in logs come from the
environment (tasks module); the harness never recomputes or adjusts them.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass

from .controllers import CONTROLLER_NAMES, Controller, make_controller
from .core import PendulumState, PhysicalParams
from .domain import DomainConfig
from .env import QubeEnv, make_env
from .errors import UsageError
from .records import (
    FIELD_NAMES,
    TrajectoryRecord,
    TrajectoryRecorder,
    from_csv_row,
    from_json_line,
    to_csv_row,
    to_json_line,
)
from .tasks import TASK_NAMES


@dataclass(frozen=True)
class BenchmarkSummary:
    task: str
    controller: str
    episodes: int
    mean_normalized_return: float
    std: float
    min: float
    max: float
    seed: int
    config_digest: str

    def __post_init__(self):
        if not 0.0 <= self.mean_normalized_return <= 1.0:
            raise ValueError(f"mean normalized return {self.mean_normalized_return!r} outside [0, 1]")


def summarize(returns) -> tuple[float, float, float, float]:
    """Population statistics (mean, std, min, max); std uses the n denominator."""
    values = [float(v) for v in returns]
    if not values:
        raise UsageError("cannot summarize an empty list of returns")
    n = len(values)
    mean = sum(values) / n
    variance = sum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(variance), min(values), max(values)


def run_episode(env: QubeEnv, controller: Controller, recorder: TrajectoryRecorder | None = None,
                on_step=None) -> tuple[float, int]:
    """One reset-then-step loop; returns (normalized_return, steps_taken)."""
    if recorder is not None:
        env.attach_recorder(recorder)
    controller.reset()
    observation = env.reset()
    total = 0.0
    steps = 0
    done = False
    while not done:
        state = PendulumState(*(float(v) for v in observation[:4]))
        result = env.step(controller(state))
        observation = result.observation
        total += result.reward
        steps += 1
        done = result.done
        if on_step is not None:
            on_step(env, result)
    return total / env.task.episode_steps, steps


def _config_digest(task_names, controller_names, episodes, seed, params, domain_config, task_overrides) -> str:
    payload = json.dumps(
        {
            "tasks": list(task_names),
            "controllers": list(controller_names),
            "episodes": episodes,
            "seed": seed,
            "params": asdict(params),
            "domain": asdict(domain_config),
            "task_overrides": {k: repr(v) for k, v in sorted(task_overrides.items())},
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def benchmark(
    task_names,
    controller_names,
    episodes: int,
    seed: int = 0,
    params: PhysicalParams | None = None,
    domain_config: DomainConfig | None = None,
    out_dir=None,
    **task_overrides,
) -> list[BenchmarkSummary]:
    """Run every task x controller pair for `episodes` episodes each.

    Per-episode seeds are derived from the base seed by a running counter,
    so the whole run is a pure function of (configs, seed). With ``out_dir``
    set, writes ``summary.jsonl`` and per-episode ``returns.jsonl``.
    """
    task_names = [task_names] if isinstance(task_names, str) else list(task_names)
    controller_names = [controller_names] if isinstance(controller_names, str) else list(controller_names)
    for name in task_names:
        if name not in TASK_NAMES:
            raise UsageError(f"unknown task {name!r}; valid tasks: {', '.join(TASK_NAMES)}")
    for name in controller_names:
        if name not in CONTROLLER_NAMES:
            raise UsageError(f"unknown controller {name!r}; valid controllers: {', '.join(CONTROLLER_NAMES)}")
    if episodes < 1:
        raise UsageError(f"episodes must be >= 1, got {episodes}")
    params = params or PhysicalParams()
    domain_config = domain_config or DomainConfig()
    digest = _config_digest(task_names, controller_names, episodes, seed, params, domain_config, task_overrides)

    summaries = []
    episode_rows = []
    counter = 0
    for task_name in task_names:
        for controller_name in controller_names:
            returns = []
            for episode in range(episodes):
                episode_seed = seed + counter
                counter += 1
                env = make_env(task_name, params=params, domain_config=domain_config,
                               seed=episode_seed, **task_overrides)
                controller = make_controller(
                    controller_name, params, max_voltage=domain_config.max_voltage, seed=episode_seed
                )
                try:
                    normalized, steps = run_episode(env, controller)
                finally:
                    env.close()
                returns.append(normalized)
                episode_rows.append(
                    {
                        "task": task_name,
                        "controller": controller_name,
                        "episode": episode,
                        "seed": episode_seed,
                        "normalized_return": normalized,
                        "steps": steps,
                    }
                )
            mean, std, lo, hi = summarize(returns)
            summaries.append(
                BenchmarkSummary(
                    task=task_name,
                    controller=controller_name,
                    episodes=episodes,
                    mean_normalized_return=mean,
                    std=std,
                    min=lo,
                    max=hi,
                    seed=seed,
                    config_digest=digest,
                )
            )

    if out_dir is not None:
        from pathlib import Path

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "summary.jsonl", "w") as fh:
            for summary in summaries:
                fh.write(json.dumps(asdict(summary)) + "\n")
        with open(out / "returns.jsonl", "w") as fh:
            for row in episode_rows:
                fh.write(json.dumps(row) + "\n")
    return summaries


def export_trajectory(records, path, fmt: str = "jsonl") -> None:
    """Write records as JSONL (one object per step) or CSV (header + rows)."""
    if fmt not in ("jsonl", "csv"):
        raise UsageError(f"unknown trajectory format {fmt!r} (choose jsonl or csv)")
    try:
        with open(path, "w", newline="") as fh:
            if fmt == "jsonl":
                for record in records:
                    fh.write(to_json_line(record) + "\n")
            else:
                writer = csv.writer(fh)
                writer.writerow(FIELD_NAMES)
                for record in records:
                    writer.writerow(to_csv_row(record))
    except OSError as exc:
        raise UsageError(f"cannot write trajectory to {path}: {exc}") from exc


def read_trajectory(path, fmt: str = "jsonl") -> list[TrajectoryRecord]:
    """Inverse of export_trajectory."""
    if fmt not in ("jsonl", "csv"):
        raise UsageError(f"unknown trajectory format {fmt!r} (choose jsonl or csv)")
    try:
        with open(path, newline="") as fh:
            if fmt == "jsonl":
                return [from_json_line(line) for line in fh if line.strip()]
            reader = csv.DictReader(fh)
            return [from_csv_row(row) for row in reader]
    except OSError as exc:
        raise UsageError(f"cannot read trajectory from {path}: {exc}") from exc


def parse_render_line(line: str) -> dict:
    """Parse the text render format back into a dict of floats plus led/task."""
    out: dict = {}
    for token in line.split():
        key, _, value = token.partition("=")
        if not _:
            continue
        if key in ("led", "task"):
            out[key] = value
        else:
            out[key] = float(value)
    return out
