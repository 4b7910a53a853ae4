"""Command-line experiment harness: train, evaluate, compare, workload-stats.

Every command is driven by a TOML experiment config plus a handful of flags;
all outputs (metrics CSV, checkpoints, comparison tables, workload reports)
land in the configured output directory.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from .agent import ReplicationAgent
from .baselines import BASELINE_NAMES, make_baseline
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import (
    ConfigError,
    ExperimentConfig,
    experiment_to_dict,
    load_experiment_config,
)
from .env import ReplicationEnv
from .evaluate import (
    SamplingAdapter,
    agent_from_checkpoint,
    compare_policies,
    evaluate_policy,
    resolve_entrant,
    workload_statistics,
)
from .metrics import write_metrics_csv
from .ppo import DivergenceError

FULL_RUN_TIMESTEPS = 500_000
TRAIN_STREAM = 0  # environment seed label for training runs


def _load_config(args) -> ExperimentConfig:
    config = load_experiment_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if getattr(args, "out", None):
        config = dataclasses.replace(config, output_dir=args.out)
    return config


def _out_dir(config: ExperimentConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_train(args) -> int:
    config = _load_config(args)
    if config.policy not in ("rl_e", "rl_ne"):
        raise ConfigError(f"train requires an RL policy, config says {config.policy!r}")
    if args.full:
        config = dataclasses.replace(
            config, ppo=dataclasses.replace(config.ppo, total_timesteps=FULL_RUN_TIMESTEPS)
        )
    out = _out_dir(config)
    env = ReplicationEnv(
        config.cluster, config.workload, seed=np.random.SeedSequence([config.seed, TRAIN_STREAM])
    )
    agent = ReplicationAgent(
        **{f.name: getattr(config.ppo, f.name) for f in dataclasses.fields(config.ppo)},
        seed=config.seed,
    )

    started = time.perf_counter()
    metrics_path = out / "metrics.csv"
    try:
        agent.fit(env)
    except DivergenceError as exc:
        write_metrics_csv(exc.metrics, metrics_path)
        print(f"error: training diverged: {exc}", file=sys.stderr)
        print(f"partial metrics ({len(exc.metrics)} updates) kept at {metrics_path}", file=sys.stderr)
        return 1
    wall = time.perf_counter() - started

    write_metrics_csv(agent.metrics_, metrics_path)
    checkpoint_path = out / "checkpoint.bin"
    rng_states = {"trainer": agent.rng_states_, "environment": env.rng_states()}
    save_checkpoint(checkpoint_path, agent.params_, experiment_to_dict(config), rng_states)

    tail = agent.metrics_[-max(1, len(agent.metrics_) // 10) :]
    summary = {
        "policy": config.policy,
        "seed": config.seed,
        "timesteps": agent.metrics_[-1].timestep,
        "updates": len(agent.metrics_),
        "final_mean_variance": float(np.mean([r.mean_variance for r in tail])),
        "final_entropy": agent.metrics_[-1].entropy,
        "wall_seconds": wall,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if args.svg:
        from .svg import line_chart

        line_chart(
            [r.mean_reward for r in agent.metrics_],
            out / "reward_curve.svg",
            title="Mean reward per update",
            x_label="update",
            y_label="reward",
        )
        line_chart(
            [r.entropy for r in agent.metrics_],
            out / "entropy_curve.svg",
            title="Policy entropy per update",
            x_label="update",
            y_label="entropy",
        )
    print(
        f"trained {config.policy} for {summary['timesteps']} timesteps "
        f"({summary['updates']} updates) in {wall:.1f}s"
    )
    print(f"final mean variance (last 10% of updates): {summary['final_mean_variance']:.2f}")
    print(f"wrote {metrics_path} and {checkpoint_path}")
    return 0


def _report_lines(report):
    return [
        f"policy:            {report.policy}",
        f"episodes:          {report.episodes} ({report.steps} steps)",
        f"mean variance:     {report.mean_variance:.3f}",
        f"std variance:      {report.std_variance:.3f}",
        f"mean reward:       {report.mean_reward:.5f}",
        f"ignored actions:   {report.ignored_fraction:.3f}",
    ]


def cmd_evaluate(args) -> int:
    if args.checkpoint:
        checkpoint = load_checkpoint(args.checkpoint)
        agent, ck_config = agent_from_checkpoint(checkpoint)
        if args.config:
            config = _load_config(args)
            ours = experiment_to_dict(config)
            for section in ("cluster", "workload"):
                if ck_config.get(section) != ours[section]:
                    raise CheckpointError(
                        f"checkpoint was trained on a different [{section}] config"
                    )
        else:
            from .config import experiment_from_dict

            config = experiment_from_dict(ck_config)
            if args.seed is not None:
                config = dataclasses.replace(config, seed=args.seed)
            if args.out:
                config = dataclasses.replace(config, output_dir=args.out)
        policy = agent if args.argmax else SamplingAdapter(agent)
        name = f"{ck_config.get('policy', 'rl')}:{args.checkpoint}"
    else:
        if not args.config:
            raise ConfigError("evaluate needs --config (and --checkpoint for RL policies)")
        config = _load_config(args)
        kind = args.policy or config.policy
        if kind not in BASELINE_NAMES:
            raise ConfigError(
                f"policy {kind!r} needs --checkpoint; baselines are {BASELINE_NAMES}"
            )
        policy = make_baseline(kind, seed=config.seed)
        name = kind

    report = evaluate_policy(
        policy,
        config.cluster,
        config.workload,
        episodes=args.episodes,
        seed=config.seed,
        name=name,
    )
    print("\n".join(_report_lines(report)))
    if args.out:
        out = _out_dir(config)
        (out / "evaluation.json").write_text(
            json.dumps(dataclasses.asdict(report), indent=2) + "\n"
        )
        print(f"wrote {out / 'evaluation.json'}")
    return 0


def cmd_compare(args) -> int:
    config = _load_config(args)
    entrants = [
        resolve_entrant(spec, config, seed=config.seed, argmax=args.argmax)
        for spec in args.entrants
    ]
    reports = compare_policies(
        entrants, config.cluster, config.workload, episodes=args.episodes, seed=config.seed
    )
    out = _out_dir(config)
    table_path = out / "comparison.csv"
    with table_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["policy", "mean_variance", "std_variance", "mean_reward", "ignored_fraction"])
        for r in reports:
            writer.writerow(
                [r.policy, repr(r.mean_variance), repr(r.std_variance), repr(r.mean_reward), repr(r.ignored_fraction)]
            )
    width = max(len(r.policy) for r in reports)
    print(f"{'policy':<{width}}  {'mean_var':>12}  {'std_var':>12}  {'mean_reward':>12}  {'ignored':>8}")
    for r in sorted(reports, key=lambda r: r.mean_variance):
        print(
            f"{r.policy:<{width}}  {r.mean_variance:>12.3f}  {r.std_variance:>12.3f}  "
            f"{r.mean_reward:>12.5f}  {r.ignored_fraction:>8.3f}"
        )
    print(f"wrote {table_path}")
    return 0


def cmd_workload_stats(args) -> int:
    config = _load_config(args)
    stats = workload_statistics(config.workload, steps=args.steps, seed=config.seed)
    out = _out_dir(config)

    rank_path = out / "rank_frequency.csv"
    order = np.argsort(stats.expected_pmf)[::-1]
    total = max(stats.total_requests, 1)
    with rank_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "block_id", "observed_count", "observed_freq", "expected_freq"])
        for rank, block in enumerate(order):
            writer.writerow(
                [
                    rank + 1,
                    int(block),
                    int(stats.block_counts[block]),
                    repr(stats.block_counts[block] / total),
                    repr(float(stats.expected_pmf[block])),
                ]
            )
    hist_path = out / "batch_sizes.csv"
    with hist_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["batch_size", "count"])
        for size, count in enumerate(stats.batch_size_counts):
            if count:
                writer.writerow([size, int(count)])

    print(f"steps:            {stats.steps}")
    print(f"total requests:   {stats.total_requests}")
    print(f"mean batch size:  {stats.batch_size_mean:.3f}")
    print(f"hot-set rotations:{stats.rotations:>4}")
    if np.isnan(stats.chi2_statistic):
        print("chi-square vs analytic mixture: skipped (hot sets rotated mid-run)")
    else:
        print(
            f"chi-square vs analytic mixture: {stats.chi2_statistic:.2f} "
            f"(p = {stats.chi2_p_value:.4g})"
        )
    print(f"wrote {rank_path} and {hist_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockbalance",
        description="Block-replication load balancing: simulator, PPO trainer, baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="experiment TOML file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")

    p_train = sub.add_parser("train", help="train an RL policy and write metrics + checkpoint")
    add_common(p_train)
    p_train.add_argument("--full", action="store_true", help=f"train for {FULL_RUN_TIMESTEPS} timesteps")
    p_train.add_argument("--svg", action="store_true", help="also write SVG learning curves")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("evaluate", help="evaluate a checkpoint or baseline")
    add_common(p_eval, config_required=False)
    p_eval.add_argument("--checkpoint", default=None, help="trained policy checkpoint")
    p_eval.add_argument("--policy", default=None, help=f"baseline name: {', '.join(BASELINE_NAMES)}")
    p_eval.add_argument("--episodes", type=int, default=20)
    p_eval.add_argument(
        "--argmax",
        action="store_true",
        help="evaluate the distribution mode instead of sampling from the policy",
    )
    p_eval.set_defaults(func=cmd_evaluate)

    p_cmp = sub.add_parser("compare", help="evaluate several entrants on shared request streams")
    add_common(p_cmp)
    p_cmp.add_argument(
        "entrants",
        nargs="+",
        help="two or more baseline names or checkpoint paths",
    )
    p_cmp.add_argument("--episodes", type=int, default=20)
    p_cmp.add_argument(
        "--argmax",
        action="store_true",
        help="evaluate RL entrants by distribution mode instead of sampling",
    )
    p_cmp.set_defaults(func=cmd_compare)

    p_ws = sub.add_parser("workload-stats", help="sample the workload and report its statistics")
    add_common(p_ws)
    p_ws.add_argument("--steps", type=int, default=10_000)
    p_ws.set_defaults(func=cmd_workload_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CheckpointError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
