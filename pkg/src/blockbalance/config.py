"""Experiment configuration: TOML files with one section per sub-config.

Sections are ``[cluster]``, ``[workload]``, and ``[ppo]``; experiment-level
keys (``policy``, ``seed``, ``output_dir``) sit at the top level. Unknown keys
are rejected rather than ignored so typos surface immediately. A workload's
``rotation_period = 0`` disables hot-set rotation.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .cluster import ClusterConfig
from .ppo import PPOConfig
from .workload import WorkloadConfig

POLICY_KINDS = ("rl_e", "rl_ne", "static", "random", "greedy")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    cluster: ClusterConfig
    workload: WorkloadConfig
    ppo: PPOConfig
    policy: str = "rl_e"
    seed: int = 0
    output_dir: str = "runs"

    def __post_init__(self):
        if self.policy not in POLICY_KINDS:
            raise ConfigError(f"unknown policy {self.policy!r}; expected one of {POLICY_KINDS}")
        if self.cluster.num_blocks != self.workload.num_blocks:
            raise ConfigError(
                f"cluster num_blocks {self.cluster.num_blocks} != workload "
                f"num_blocks {self.workload.num_blocks}"
            )
        if self.policy == "rl_ne" and self.cluster.allow_erase:
            # the no-erase variant restricts the action space
            self.cluster = dataclasses.replace(self.cluster, allow_erase=False)


def _build_section(cls, section: dict, name: str, **overrides):
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {', '.join(unknown)}")
    try:
        return cls(**{**section, **overrides})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [{name}] config: {exc}") from exc


def experiment_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data)
    known_sections = {"cluster", "workload", "ppo"}
    known_top = {"policy", "seed", "output_dir"}
    unknown = sorted(set(data) - known_sections - known_top)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    cluster_raw = dict(data.get("cluster") or {})
    if "num_nodes" not in cluster_raw or "num_blocks" not in cluster_raw:
        raise ConfigError("[cluster] must set num_nodes and num_blocks")
    cluster = _build_section(ClusterConfig, cluster_raw, "cluster")

    workload_raw = dict(data.get("workload") or {})
    workload_raw.setdefault("num_blocks", cluster.num_blocks)
    if workload_raw.get("rotation_period") == 0:
        workload_raw["rotation_period"] = None
    workload = _build_section(WorkloadConfig, workload_raw, "workload")

    ppo = _build_section(PPOConfig, dict(data.get("ppo") or {}), "ppo")

    try:
        return ExperimentConfig(
            cluster=cluster,
            workload=workload,
            ppo=ppo,
            policy=data.get("policy", "rl_e"),
            seed=int(data.get("seed", 0)),
            output_dir=str(data.get("output_dir", "runs")),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_experiment_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return experiment_from_dict(data)


def experiment_to_dict(config: ExperimentConfig) -> dict:
    """Plain-dict echo of the config, suitable for checkpoints and JSON."""
    return {
        "cluster": dataclasses.asdict(config.cluster),
        "workload": dataclasses.asdict(config.workload),
        "ppo": dataclasses.asdict(config.ppo),
        "policy": config.policy,
        "seed": config.seed,
        "output_dir": config.output_dir,
    }
