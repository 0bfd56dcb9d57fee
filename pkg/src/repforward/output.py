"""CSV emitters. Column order is part of the public interface."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

from .dynamics import Trajectory
from .manet import RoundRecord

TRAJECTORY_COLUMNS = ("t", "p", "u_dove", "u_hawk", "u_mean", "s_h_star")

MANET_COLUMNS = (
    "epoch", "t", "p", "s_d", "s_h", "requests", "forwards", "refusals", "unreachable",
    "normalized_forwarded", "mean_dove_reputation", "mean_hawk_reputation",
    "p_trajectory", "n_doves", "attempts", "cumulative_forwarded",
)

SWEEP_COLUMNS = (
    "cell", "lambda", "delta_r", "delta_b", "p0", "p_T", "predicted_limit",
    "final_p", "observed_limit", "converged", "agree",
)


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".9g")
    return str(value)


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def write_trajectory(path: Path, traj: Trajectory) -> Path:
    return write_rows(path, TRAJECTORY_COLUMNS, traj.rows())


def manet_row(r: RoundRecord):
    return (
        r.epoch, float(r.t), float(r.p), float(r.s_d), float(r.s_h), r.requests, r.forwards,
        r.refusals, r.unreachable, float(r.normalized_forwarded), float(r.mean_dove_reputation),
        float(r.mean_hawk_reputation), float(r.p_trajectory), r.n_doves, r.attempts,
        r.cumulative_forwarded,
    )


def write_manet(path: Path, records: Sequence[RoundRecord]) -> Path:
    return write_rows(path, MANET_COLUMNS, (manet_row(r) for r in records))


def p0_tag(p0: float) -> str:
    return format(p0, "g")
