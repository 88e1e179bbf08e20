"""Evaluation artifacts: per-trial CSV with an aggregate footer, and
long-form force time series for plotting.

The CSV has one row per trial and ends with comment lines (prefixed '#')
carrying the aggregate: success rate, force cost against the expert
value, and how many episodes were excluded for never making contact.
Comment lines keep the data rows machine-parseable by any CSV reader
that skips '#'.

Plot data is long-form - (trial, step, force_norm) - one row per control
step, which any plotting tool can pivot.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

from .metrics import expert_force, force_cost
from .runner import TrialReport

__all__ = ["aggregate", "write_trials_csv", "write_plot_data", "read_trials_csv"]

_COLUMNS = ["task", "index", "seed", "success", "force_stat", "steps",
            "handover", "target_x", "spatial_shift", "material_factor"]


def aggregate(reports: list[TrialReport]) -> dict:
    if not reports:
        raise ValueError("no trials to aggregate")
    kinds = {r.task for r in reports}
    if len(kinds) != 1:
        raise ValueError(f"cannot aggregate across task kinds: {sorted(kinds)}")
    kind = kinds.pop()
    stats = [r.force_stat for r in reports]
    return {
        "task": kind,
        "n_trials": len(reports),
        "success_rate": sum(r.success for r in reports) / len(reports),
        "force_cost": force_cost(stats, expert_force(kind)),
        "n_no_contact": sum(not s.valid for s in stats),
    }


def write_trials_csv(path: Path, reports: list[TrialReport]) -> dict:
    agg = aggregate(reports)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_COLUMNS)
        for r in reports:
            stat = f"{r.force_stat.value:.6g}" if r.force_stat.valid else "no_contact"
            writer.writerow([r.task, r.index, r.seed, int(r.success), stat,
                             r.steps, r.handover, f"{r.target_x:.6g}",
                             int(r.spatial_shift), f"{r.material_factor:.6g}"])
        fc = agg["force_cost"]
        fh.write(f"# aggregate n_trials={agg['n_trials']} "
                 f"success_rate={agg['success_rate']:.4f} "
                 f"force_cost={'nan' if math.isnan(fc) else f'{fc:.6g}'} "
                 f"n_no_contact={agg['n_no_contact']}\n")
    return agg


def read_trials_csv(path: Path) -> list[dict]:
    rows = []
    with Path(path).open() as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        for row in reader:
            rows.append(row)
    return rows


def write_plot_data(path: Path, reports: list[TrialReport]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "step", "force_norm"])
        for r in reports:
            for step, f in enumerate(r.force_norms):
                writer.writerow([r.index, step, f"{f:.6g}"])
