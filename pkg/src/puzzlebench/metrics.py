"""Aggregation of EvalRecords into accuracy-vs-complexity curves, discrete
collapse-threshold estimation, and report emission (CSV tables plus one JSON
bundle, byte-stable across reruns)."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

from .core import EvalRecord, PuzzleInstance, VerdictKind, level_label

DEFAULT_THETA = 0.8
_RATE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class LevelCell:
    """Measured rates for one (model, env, level) cell."""

    level: int
    n_episodes: int
    pass_rate: float
    fail_rate: float
    collapse_rate: float
    mean_total_tokens: float
    mean_latency_ms: float


@dataclass(frozen=True)
class ComplexityCurve:
    model_id: str
    env_id: str
    cells: tuple  # LevelCell, levels strictly ascending

    def pass_rates(self):
        return [c.pass_rate for c in self.cells]


@dataclass(frozen=True)
class CollapseEstimate:
    """threshold_level is absent when fewer than two measured levels exist or
    the curve never drops; reliable_level is the highest level with
    pass_rate >= theta."""

    threshold_level: Optional[int]
    max_drop: float
    reliable_level: Optional[int]
    theta: float


def aggregate(records, instances):
    """Group records by (model, env, level) and compute per-cell rates.

    Records referencing unknown instances are skipped and tallied; the
    diagnostics tally is returned alongside the curves.
    """
    by_id = {}
    for inst in instances:
        by_id[inst.instance_id] = inst
    cells = {}
    skipped = 0
    for rec in records:
        inst = by_id.get(rec.instance_id)
        if inst is None:
            skipped += 1
            continue
        key = (rec.model_id, inst.env_id, inst.level)
        cells.setdefault(key, []).append(rec)

    curves = {}
    for (model_id, env_id, level), recs in sorted(cells.items()):
        n = len(recs)
        passes = sum(1 for r in recs if r.verdict.kind is VerdictKind.PASS)
        fails = sum(1 for r in recs if r.verdict.kind is VerdictKind.FAIL)
        collapses = sum(1 for r in recs if r.verdict.kind is VerdictKind.COLLAPSE)
        cell = LevelCell(
            level=level,
            n_episodes=n,
            pass_rate=passes / n,
            fail_rate=fails / n,
            collapse_rate=collapses / n,
            mean_total_tokens=sum(r.prompt_tokens + r.completion_tokens for r in recs) / n,
            mean_latency_ms=sum(r.latency_ms for r in recs) / n,
        )
        curves.setdefault((model_id, env_id), []).append(cell)

    out = []
    for (model_id, env_id), cell_list in sorted(curves.items()):
        cell_list.sort(key=lambda c: c.level)
        out.append(ComplexityCurve(model_id=model_id, env_id=env_id, cells=tuple(cell_list)))
    return out, {"skipped_unknown_instance": skipped}


def collapse_threshold(curve: ComplexityCurve, theta: float = DEFAULT_THETA) -> CollapseEstimate:
    """Steepest discrete pass-rate drop between consecutive measured levels.

    The threshold is the LATER level of the maximal-drop pair, ties broken
    toward the lowest level. Unmeasured levels split the curve into segments;
    drops are never taken across a gap.
    """
    cells = curve.cells
    reliable = None
    for cell in cells:
        if cell.pass_rate >= theta:
            reliable = cell.level
    drops = []
    for prev, cur in zip(cells, cells[1:]):
        if cur.level - prev.level != 1:
            continue  # gap: different segment
        drops.append((cur.level, prev.pass_rate - cur.pass_rate))
    # argmax over declines only ("steepest decline"); a curve that never
    # drops beyond tolerance has no threshold
    best_level, best_drop = None, 0.0
    for level, drop in drops:
        if drop > best_drop + _RATE_TOLERANCE:
            best_level, best_drop = level, drop
    if best_level is None:
        return CollapseEstimate(None, 0.0, reliable, theta)
    return CollapseEstimate(best_level, best_drop, reliable, theta)


def _mean(values):
    return sum(values) / len(values) if values else None


def summaries(curves, theta: float = DEFAULT_THETA):
    """The report tables: per-env mean pass rate, per-level global mean,
    per-model outcome distribution, (raw and normalized) env-by-model success
    matrix, and the per-model collapse-threshold table."""
    env_rates = {}
    level_rates = {}
    model_counts = {}
    matrix = {}
    thresholds = []
    for curve in curves:
        for cell in curve.cells:
            env_rates.setdefault(curve.env_id, []).append(cell.pass_rate)
            level_rates.setdefault(cell.level, []).append(cell.pass_rate)
            counts = model_counts.setdefault(curve.model_id, [0, 0, 0, 0])
            counts[0] += round(cell.pass_rate * cell.n_episodes)
            counts[1] += round(cell.fail_rate * cell.n_episodes)
            counts[2] += round(cell.collapse_rate * cell.n_episodes)
            counts[3] += cell.n_episodes
            matrix.setdefault((curve.env_id, curve.model_id), []).append(cell.pass_rate)
        est = collapse_threshold(curve, theta)
        thresholds.append(
            {
                "model_id": curve.model_id,
                "env_id": curve.env_id,
                "threshold_level": est.threshold_level,
                "threshold_label": level_label(est.threshold_level) if est.threshold_level else "",
                "max_drop": est.max_drop,
                "reliable_level": est.reliable_level,
                "reliable_label": level_label(est.reliable_level) if est.reliable_level else "",
                "theta": theta,
            }
        )

    task_difficulty = [
        {"env_id": env, "mean_pass_rate": _mean(rates)} for env, rates in sorted(env_rates.items())
    ]
    level_scaling = [
        {"level": lvl, "label": level_label(lvl), "mean_pass_rate": _mean(rates)}
        for lvl, rates in sorted(level_rates.items())
    ]
    model_distribution = []
    for model_id, (p, f, c, n) in sorted(model_counts.items()):
        model_distribution.append(
            {
                "model_id": model_id,
                "n_episodes": n,
                "pass_share": p / n if n else 0.0,
                "fail_share": f / n if n else 0.0,
                "collapse_share": c / n if n else 0.0,
            }
        )
    raw_matrix = [
        {"env_id": env, "model_id": model, "mean_pass_rate": _mean(rates)}
        for (env, model), rates in sorted(matrix.items())
    ]
    peak = max((row["mean_pass_rate"] for row in raw_matrix), default=0.0)
    normalized_matrix = [
        {
            "env_id": row["env_id"],
            "model_id": row["model_id"],
            "normalized_pass_rate": row["mean_pass_rate"] / peak if peak > 0 else 0.0,
        }
        for row in raw_matrix
    ]
    return {
        "task_difficulty": task_difficulty,
        "level_scaling": level_scaling,
        "model_distribution": model_distribution,
        "success_matrix": raw_matrix,
        "success_matrix_normalized": normalized_matrix,
        "collapse_thresholds": thresholds,
        "theta": theta,
    }


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col)) for col in header))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_report(out_dir, curves, diagnostics=None, theta: float = DEFAULT_THETA):
    """Emit curve CSVs, summary CSVs, and report.json under out_dir. Output is
    deterministic: fixed headers, sorted keys, no wall-clock metadata."""
    os.makedirs(out_dir, exist_ok=True)
    tables = summaries(curves, theta)

    curve_rows = {}
    for curve in curves:
        name = f"curve__{curve.model_id}__{curve.env_id}.csv"
        rows = [
            {
                "level": cell.level,
                "pass_rate": cell.pass_rate,
                "fail_rate": cell.fail_rate,
                "collapse_rate": cell.collapse_rate,
                "n_episodes": cell.n_episodes,
                "mean_total_tokens": cell.mean_total_tokens,
                "mean_latency_ms": cell.mean_latency_ms,
            }
            for cell in curve.cells
        ]
        curve_rows[name] = rows
        _write_csv(
            os.path.join(out_dir, name),
            ["level", "pass_rate", "fail_rate", "collapse_rate", "n_episodes",
             "mean_total_tokens", "mean_latency_ms"],
            rows,
        )

    _write_csv(
        os.path.join(out_dir, "task_difficulty.csv"),
        ["env_id", "mean_pass_rate"],
        tables["task_difficulty"],
    )
    _write_csv(
        os.path.join(out_dir, "level_scaling.csv"),
        ["level", "label", "mean_pass_rate"],
        tables["level_scaling"],
    )
    _write_csv(
        os.path.join(out_dir, "model_distribution.csv"),
        ["model_id", "n_episodes", "pass_share", "fail_share", "collapse_share"],
        tables["model_distribution"],
    )
    _write_csv(
        os.path.join(out_dir, "success_matrix.csv"),
        ["env_id", "model_id", "mean_pass_rate"],
        tables["success_matrix"],
    )
    _write_csv(
        os.path.join(out_dir, "success_matrix_normalized.csv"),
        ["env_id", "model_id", "normalized_pass_rate"],
        tables["success_matrix_normalized"],
    )
    _write_csv(
        os.path.join(out_dir, "collapse_thresholds.csv"),
        ["model_id", "env_id", "threshold_level", "threshold_label", "max_drop",
         "reliable_level", "reliable_label", "theta"],
        tables["collapse_thresholds"],
    )

    bundle = {
        "tables": tables,
        "curves": {name: rows for name, rows in sorted(curve_rows.items())},
        "diagnostics": diagnostics or {},
    }
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(bundle, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return bundle


def load_records(path):
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(EvalRecord.from_dict(json.loads(line)))
    return records


def load_instances(paths):
    instances = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as fh:
            instances.append(PuzzleInstance.from_json(fh.read()))
    return instances
