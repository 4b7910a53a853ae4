"""Per-update training metrics and their CSV serialization.

The CSV holds only fields that are pure functions of config and seed, so two
runs with identical inputs produce byte-identical files; wall-clock timing is
kept on the row object and reported through the run summary instead.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

CSV_COLUMNS = (
    "timestep",
    "mean_reward",
    "mean_variance",
    "entropy",
    "policy_loss",
    "value_loss",
    "clip_fraction",
)


@dataclass
class MetricsRow:
    timestep: int
    mean_reward: float
    mean_variance: float
    entropy: float
    policy_loss: float
    value_loss: float
    clip_fraction: float
    wall_seconds: float = 0.0


def write_metrics_csv(rows, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [row.timestep]
                + [repr(float(getattr(row, name))) for name in CSV_COLUMNS[1:]]
            )


def read_metrics_csv(path) -> list[MetricsRow]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected metrics columns: {reader.fieldnames}")
        return [
            MetricsRow(
                timestep=int(rec["timestep"]),
                **{name: float(rec[name]) for name in CSV_COLUMNS[1:]},
            )
            for rec in reader
        ]
