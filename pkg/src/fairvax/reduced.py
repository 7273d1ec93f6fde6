"""Cluster-level dose allocation and the full reduction pipeline.

After clustering, every cluster's chosen site is opened unconditionally and
the supply is split among member zones. The cluster model keeps only the
fill terms: it rewards the sum of per-zone fill rates and penalizes each
zone's shortfall from the maximum fill rate (weight theta); distance and
alpha terms reappear when the lifted solution is scored under the full
model. A zone's fill rate uses its own demand; the aggregated cluster demand
is reported but does not enter the objective.

``heuristic_solve`` runs the whole pipeline: cluster-count selection, site
scoring and assignment, cluster allocation, lift, and full-model evaluation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import allocation
from .allocation import DoseGroup, DoseProblem, DoseZone
from .clustering import (
    Clustering,
    ClusterSite,
    ClusterSiteSelection,
    assign_sites,
    build_points,
    score_sites,
    select_k,
    silhouette_score,
    weighted_lloyd,
)
from .formulation import (
    EvaluatedSolution,
    Solution,
    TOLERANCE,
    check_feasibility,
    evaluate,
)
from .instance import DistanceMatrix, Instance, compute_distances

__all__ = [
    "ReducedInstance",
    "ReducedSolution",
    "ReducedInfeasibleError",
    "HeuristicResult",
    "build_reduced",
    "solve_reduced",
    "lift",
    "heuristic_solve",
]


class ReducedInfeasibleError(ValueError):
    """The chosen cluster sites' fixed costs alone exceed the budget."""


@dataclass(frozen=True, eq=False)
class ReducedInstance:
    clusters: tuple[ClusterSite, ...]
    zone_demand: dict[int, int]
    supply: int
    budget: float
    theta: float

    @property
    def num_zones(self) -> int:
        return len(self.zone_demand)

    def cluster_of_zone(self, zone_id: int) -> ClusterSite:
        for cs in self.clusters:
            if zone_id in cs.member_zones:
                return cs
        raise KeyError(zone_id)


@dataclass(frozen=True, eq=False)
class ReducedSolution:
    doses: dict[int, int]       # zone id -> doses (from its cluster's site)
    fill: dict[int, float]      # zone id -> fill rate (1.0 for zero demand)
    fill_peak: float
    objective: float
    total_cost: float


def build_reduced(instance: Instance, selection: ClusterSiteSelection) -> ReducedInstance:
    return ReducedInstance(
        clusters=selection.chosen,
        zone_demand={z.id: z.demand for z in instance.zones},
        supply=instance.supply,
        budget=instance.budget,
        theta=instance.theta,
    )


def solve_reduced(ri: ReducedInstance, tol: float = TOLERANCE) -> ReducedSolution:
    """Exact optimum of the cluster allocation model.

    All cluster sites are opened unconditionally; raises
    ReducedInfeasibleError when their fixed costs alone exceed the budget.
    The maximum fill rate is evaluated at the exact maximum (any larger
    feasible value only lowers the objective).
    """
    fixed_total = sum(cs.fixed_cost for cs in ri.clusters)
    var_budget = ri.budget - fixed_total
    if var_budget < -tol:
        raise ReducedInfeasibleError(
            f"cluster site fixed costs {fixed_total:g} exceed budget {ri.budget:g}"
        )

    theta = ri.theta
    m = ri.num_zones
    groups = tuple(DoseGroup(cs.capacity, cs.unit_cost) for cs in ri.clusters)
    zones = []
    n_zero = 0
    for g, cs in enumerate(ri.clusters):
        for j in cs.member_zones:
            d = ri.zone_demand[j]
            if d > 0:
                zones.append(DoseZone(j, d, (1.0 + theta) / d, g))
            else:
                n_zero += 1
    problem = DoseProblem(
        zones=tuple(zones),
        groups=groups,
        supply=ri.supply,
        var_budget=max(var_budget, 0.0),
        peak_weight=theta * m,
        peak_is_one=n_zero > 0,
    )
    _, var_cost, plan = allocation.solve_doses_with_plan(problem)

    doses = {}
    fill = {}
    for cs in ri.clusters:
        for j in cs.member_zones:
            d = ri.zone_demand[j]
            y = plan.get(j, 0)
            doses[j] = y
            fill[j] = 1.0 if d == 0 else y / d
    fill_peak = max(fill.values())
    objective = sum(fill.values()) - theta * sum(fill_peak - b for b in fill.values())
    return ReducedSolution(
        doses=doses,
        fill=fill,
        fill_peak=fill_peak,
        objective=objective,
        total_cost=fixed_total + var_cost,
    )


def lift(ri: ReducedInstance, rs: ReducedSolution,
         selection: ClusterSiteSelection) -> Solution:
    """Map the cluster allocation back onto the full model's decision space.

    Opens exactly the chosen cluster sites, assigns each zone to its
    cluster's site, and copies the doses. Capacities, budget, and supply
    carry over term for term, so the lift is always feasible for the full
    model; callers still assert that rather than assume it.
    """
    assignment = {}
    doses = {}
    for cs in selection.chosen:
        for j in cs.member_zones:
            assignment[j] = cs.site_id
            y = rs.doses.get(j, 0)
            if y > 0:
                doses[(cs.site_id, j)] = y
    return Solution(
        open_sites=selection.site_ids,
        assignment=assignment,
        doses=doses,
    )


@dataclass(frozen=True, eq=False)
class HeuristicResult:
    evaluated: EvaluatedSolution
    clustering: Clustering
    selection: ClusterSiteSelection
    reduced: ReducedSolution
    space_full: str
    space_reduced: str
    wall_time: float

    def diagnostics(self) -> dict:
        return {
            "k": self.clustering.k,
            "silhouette": self.clustering.silhouette,
            "wcss": self.clustering.wcss,
            "selected_sites": list(self.selection.site_ids),
            "space_full": self.space_full,
            "space_reduced": self.space_reduced,
            "objective_reduced": self.reduced.objective,
            "objective_full_model": self.evaluated.objective,
            "wall_time_s": self.wall_time,
        }


def heuristic_solve(
    instance: Instance,
    seed: int = 0,
    k_range=None,
    dm: DistanceMatrix | None = None,
    retry_on_budget: bool = False,
    restarts: int = 4,
    tol: float = TOLERANCE,
) -> HeuristicResult:
    """Full reduction pipeline, scored under the full model.

    Deterministic for a fixed seed. With ``retry_on_budget`` the cluster
    count is decremented and the pipeline re-run when the chosen sites'
    fixed costs exceed the budget; otherwise that case raises.
    """
    t0 = time.monotonic()
    if dm is None:
        dm = compute_distances(instance)
    points = build_points(instance)
    if k_range is None:
        k_range = range(2, min(9, len(points)))
    clustering = select_k(points, k_range, instance.num_sites, seed, restarts)

    while True:
        ranked = score_sites(instance, clustering)
        selection = assign_sites(instance, clustering, ranked)
        ri = build_reduced(instance, selection)
        try:
            rs = solve_reduced(ri, tol)
            break
        except ReducedInfeasibleError:
            if not retry_on_budget or clustering.k <= 1:
                raise
            clustering = _recluster(points, clustering.k - 1, seed, restarts)

    solution = lift(ri, rs, selection)
    report = check_feasibility(instance, solution, tol)
    if not report.ok:  # the lift preserves every constraint, checked anyway
        raise RuntimeError(
            "lifted solution infeasible: "
            + "; ".join(v.message for v in report.violations)
        )
    ev = evaluate(instance, dm, solution, tol)
    n, m = instance.num_sites, instance.num_zones
    return HeuristicResult(
        evaluated=ev,
        clustering=clustering,
        selection=selection,
        reduced=rs,
        space_full=f"{2 * n}^{m}",
        space_reduced=f"{2 * n}^{clustering.k}",
        wall_time=time.monotonic() - t0,
    )


def _recluster(points, k: int, seed: int, restarts: int) -> Clustering:
    best = None
    for r in range(restarts):
        run = weighted_lloyd(points, k, np.random.SeedSequence([seed, k, r]))
        if best is None or run.wcss < best.wcss:
            best = run
    if k >= 2:
        best = replace(best, silhouette=silhouette_score(points, best))
    return best
