"""Comparison experiments, fairness metrics, and CSV/JSON report emission.

Reports are byte-stable for a fixed seed and flags except for the wall-time
fields, which measure the actual runs.
"""

from __future__ import annotations

import csv
import json
import os
import statistics
import time
from dataclasses import dataclass, replace
from pathlib import Path

from .exact import InstanceTooLargeError, SolveConfig, SolveResult, solve_exact
from .formulation import EvaluatedSolution
from .instance import Instance, compute_distances
from .reduced import HeuristicResult, heuristic_solve

__all__ = [
    "FairnessMetrics",
    "ComparisonReport",
    "fairness_metrics",
    "compare",
    "write_report_csv",
    "write_report_json",
    "default_solve_config",
    "REPORT_CSV_VERSION",
    "REPORT_CSV_COLUMNS",
]

REPORT_CSV_VERSION = "# fairvax-report v1"
REPORT_CSV_COLUMNS = [
    "instance", "m", "n", "supply", "budget", "theta", "alpha",
    "exact_status", "exact_objective", "heuristic_objective",
    "gap_abs", "gap_rel", "sites_match", "site_jaccard",
    "k", "silhouette", "space_full", "space_reduced",
    "beta_exact", "fill_mean_exact", "fill_spread_exact", "fill_std_exact",
    "dist_mean_exact", "dist_spread_exact", "dist_std_exact",
    "beta_heur", "fill_mean_heur", "fill_spread_heur", "fill_std_heur",
    "dist_mean_heur", "dist_spread_heur", "dist_std_heur",
    "exact_wall_s", "heur_wall_s",
]


@dataclass(frozen=True)
class FairnessMetrics:
    beta: float
    fill_min: float
    fill_max: float
    fill_mean: float
    fill_spread: float
    fill_std: float
    dist_min: float
    dist_max: float
    dist_mean: float
    dist_spread: float
    dist_std: float


def fairness_metrics(ev: EvaluatedSolution) -> FairnessMetrics:
    """Efficiency (overall fill), equity (fill spread), accessibility (distance spread)."""
    fills = ev.fill_rates
    dists = ev.distances
    return FairnessMetrics(
        beta=ev.fill_rate,
        fill_min=min(fills),
        fill_max=max(fills),
        fill_mean=statistics.fmean(fills),
        fill_spread=max(fills) - min(fills),
        fill_std=statistics.pstdev(fills),
        dist_min=min(dists),
        dist_max=max(dists),
        dist_mean=statistics.fmean(dists),
        dist_spread=max(dists) - min(dists),
        dist_std=statistics.pstdev(dists),
    )


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    instance_label: str
    instance: Instance
    exact: SolveResult | None
    exact_skipped_reason: str | None
    heuristic: HeuristicResult
    gap_abs: float | None
    gap_rel: float | None
    sites_match: bool | None
    site_jaccard: float | None
    exact_metrics: FairnessMetrics | None
    heur_metrics: FairnessMetrics
    exact_wall: float | None
    heur_wall: float


def default_solve_config() -> SolveConfig:
    """SolveConfig with the FAIRVAX_TIME_LIMIT env override applied."""
    cfg = SolveConfig()
    env = os.environ.get("FAIRVAX_TIME_LIMIT")
    if env:
        try:
            limit = float(env)
        except ValueError:
            raise ValueError(f"FAIRVAX_TIME_LIMIT must be a number, got {env!r}")
        if limit <= 0:
            raise ValueError("FAIRVAX_TIME_LIMIT must be positive")
        cfg = replace(cfg, time_limit=limit)
    return cfg


def compare(
    instance: Instance,
    seed: int = 0,
    config: SolveConfig | None = None,
    k_range=None,
    label: str = "-",
) -> ComparisonReport:
    """Run the exact solver (when the instance fits its caps) and the heuristic."""
    cfg = config or default_solve_config()
    dm = compute_distances(instance)

    exact = None
    skipped = None
    exact_wall = None
    try:
        t0 = time.monotonic()
        exact = solve_exact(instance, dm, cfg)
        exact_wall = time.monotonic() - t0
    except InstanceTooLargeError as exc:
        skipped = str(exc)

    heur = heuristic_solve(instance, seed=seed, k_range=k_range, dm=dm)

    gap_abs = gap_rel = None
    sites_match = jaccard = None
    exact_m = None
    if exact is not None and exact.best is not None:
        gap_abs = exact.best.objective - heur.evaluated.objective
        gap_rel = gap_abs / max(abs(exact.best.objective), 1e-12)
        a = set(exact.best.solution.open_sites)
        b = set(heur.evaluated.solution.open_sites)
        sites_match = a == b
        jaccard = len(a & b) / len(a | b) if (a | b) else 1.0
        exact_m = fairness_metrics(exact.best)

    return ComparisonReport(
        instance_label=label,
        instance=instance,
        exact=exact,
        exact_skipped_reason=skipped,
        heuristic=heur,
        gap_abs=gap_abs,
        gap_rel=gap_rel,
        sites_match=sites_match,
        site_jaccard=jaccard,
        exact_metrics=exact_m,
        heur_metrics=fairness_metrics(heur.evaluated),
        exact_wall=exact_wall,
        heur_wall=heur.wall_time,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _csv_row(report: ComparisonReport) -> dict[str, str]:
    inst = report.instance
    ex = report.exact
    hm = report.heur_metrics
    em = report.exact_metrics
    row = {
        "instance": report.instance_label,
        "m": inst.num_zones,
        "n": inst.num_sites,
        "supply": inst.supply,
        "budget": inst.budget,
        "theta": inst.theta,
        "alpha": inst.alpha,
        "exact_status": ex.status if ex is not None else "skipped",
        "exact_objective": ex.best.objective if ex is not None and ex.best else None,
        "heuristic_objective": report.heuristic.evaluated.objective,
        "gap_abs": report.gap_abs,
        "gap_rel": report.gap_rel,
        "sites_match": report.sites_match,
        "site_jaccard": report.site_jaccard,
        "k": report.heuristic.clustering.k,
        "silhouette": report.heuristic.clustering.silhouette,
        "space_full": report.heuristic.space_full,
        "space_reduced": report.heuristic.space_reduced,
        "beta_exact": em.beta if em else None,
        "fill_mean_exact": em.fill_mean if em else None,
        "fill_spread_exact": em.fill_spread if em else None,
        "fill_std_exact": em.fill_std if em else None,
        "dist_mean_exact": em.dist_mean if em else None,
        "dist_spread_exact": em.dist_spread if em else None,
        "dist_std_exact": em.dist_std if em else None,
        "beta_heur": hm.beta,
        "fill_mean_heur": hm.fill_mean,
        "fill_spread_heur": hm.fill_spread,
        "fill_std_heur": hm.fill_std,
        "dist_mean_heur": hm.dist_mean,
        "dist_spread_heur": hm.dist_spread,
        "dist_std_heur": hm.dist_std,
        "exact_wall_s": report.exact_wall,
        "heur_wall_s": report.heur_wall,
    }
    return {k: _fmt(v) for k, v in row.items()}


def write_report_csv(report: ComparisonReport, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(REPORT_CSV_VERSION + "\n")
        writer = csv.DictWriter(fh, fieldnames=REPORT_CSV_COLUMNS)
        writer.writeheader()
        writer.writerow(_csv_row(report))


def report_json_dict(report: ComparisonReport) -> dict:
    inst = report.instance
    out = {
        "instance": {
            "label": report.instance_label,
            "m": inst.num_zones,
            "n": inst.num_sites,
            "supply": inst.supply,
            "budget": inst.budget,
            "theta": inst.theta,
            "alpha": inst.alpha,
        },
        "exact": None,
        "exact_skipped_reason": report.exact_skipped_reason,
        "heuristic": report.heuristic.evaluated.to_dict(),
        "heuristic_diagnostics": report.heuristic.diagnostics(),
        "gap_abs": report.gap_abs,
        "gap_rel": report.gap_rel,
        "sites_match": report.sites_match,
        "site_jaccard": report.site_jaccard,
        "fairness_heuristic": vars(report.heur_metrics).copy(),
        "fairness_exact": vars(report.exact_metrics).copy() if report.exact_metrics else None,
        "space_full": report.heuristic.space_full,
        "space_reduced": report.heuristic.space_reduced,
        "exact_wall_s": report.exact_wall,
        "heur_wall_s": report.heur_wall,
    }
    if report.exact is not None:
        out["exact"] = {
            "status": report.exact.status,
            "nodes_explored": report.exact.nodes_explored,
            "solution": report.exact.best.to_dict() if report.exact.best else None,
        }
    return out


def write_report_json(report: ComparisonReport, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(report_json_dict(report), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
