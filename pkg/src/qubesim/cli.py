"""Command-line interface.

Exit codes: 0 success, 2 usage error (argparse or unknown names), 1 runtime
failure (reset timeout, I/O, safety aborts).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .controllers import CONTROLLER_NAMES, make_controller
from .core import PhysicalParams
from .domain import DomainConfig
from .env import make_env
from .errors import QubeSimError, UsageError
from .harness import benchmark, run_episode, summarize
from .records import TrajectoryRecorder
from .tasks import TASK_NAMES, task_spec


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qubesim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run controller episodes on a task and log them")
    run.add_argument("--task", required=True, help="task name (see list-tasks)")
    run.add_argument("--controller", required=True, help="controller name (see list-controllers)")
    run.add_argument("--frequency", type=float, default=None, help="control rate in Hz")
    run.add_argument("--episodes", type=int, default=1)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--params", default=None, help="physical-parameter config file")
    run.add_argument("--domain-config", default=None, help="domain config file")
    run.add_argument("--out", default=None, help="trajectory log path")
    run.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    run.add_argument("--sparse", action="store_true", help="use the sparse reward variant")
    run.add_argument("--oracle-state", action="store_true", help="bypass sensor models (debug)")
    run.add_argument("--realtime", action="store_true", help="pace steps against the wall clock")
    run.add_argument("--render", action="store_true", help="print a render line per step")

    sub.add_parser("list-tasks", help="print the canonical task names")
    sub.add_parser("list-controllers", help="print the canonical controller names")

    bench = sub.add_parser("benchmark", help="run a task x controller grid and write summaries")
    bench.add_argument("--tasks", nargs="+", required=True)
    bench.add_argument("--controllers", nargs="+", required=True)
    bench.add_argument("--episodes", type=int, default=5)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--params", default=None)
    bench.add_argument("--domain-config", default=None)
    bench.add_argument("--out-dir", default=None)
    return parser


def _domain_config(args) -> DomainConfig:
    config = DomainConfig() if args.domain_config is None else DomainConfig.from_file(args.domain_config)
    overrides = {}
    if getattr(args, "frequency", None):
        overrides["frequency"] = args.frequency
    if getattr(args, "oracle_state", False):
        overrides["oracle_state"] = True
    if getattr(args, "realtime", False):
        overrides["realtime"] = True
    return dataclasses.replace(config, **overrides) if overrides else config


def _cmd_run(args) -> int:
    if args.episodes < 1:
        raise UsageError(f"episodes must be >= 1, got {args.episodes}")
    task_name = args.task
    if args.sparse and not task_name.endswith("-sparse"):
        task_name += "-sparse"
    task = task_spec(task_name)
    params = PhysicalParams() if args.params is None else PhysicalParams.from_file(args.params)
    domain_config = _domain_config(args)
    recorder = TrajectoryRecorder(args.out, args.format) if args.out else None

    on_step = (lambda env, result: print(env.render("text"))) if args.render else None
    returns = []
    try:
        for episode in range(args.episodes):
            seed = args.seed + episode
            env = make_env(task, params=params, domain_config=domain_config, seed=seed,
                           recorder=recorder)
            controller = make_controller(args.controller, params,
                                         max_voltage=domain_config.max_voltage, seed=seed)
            try:
                normalized, steps = run_episode(env, controller, on_step=on_step)
            finally:
                env.close()
            returns.append(normalized)
    finally:
        if recorder is not None:
            recorder.close()
    mean, std, lo, hi = summarize(returns)
    print(json.dumps({
        "task": task.name,
        "controller": args.controller,
        "episodes": args.episodes,
        "mean_normalized_return": mean,
        "std": std,
        "min": lo,
        "max": hi,
        "seed": args.seed,
    }))
    return 0


def _cmd_benchmark(args) -> int:
    params = PhysicalParams() if args.params is None else PhysicalParams.from_file(args.params)
    domain_config = DomainConfig() if args.domain_config is None else DomainConfig.from_file(args.domain_config)
    summaries = benchmark(args.tasks, args.controllers, args.episodes, args.seed,
                          params=params, domain_config=domain_config, out_dir=args.out_dir)
    for summary in summaries:
        print(json.dumps(dataclasses.asdict(summary)))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-tasks":
            for name in TASK_NAMES:
                print(name)
            return 0
        if args.command == "list-controllers":
            for name in CONTROLLER_NAMES:
                print(name)
            return 0
        if args.command == "benchmark":
            return _cmd_benchmark(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QubeSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
