"""Exact desk-scale optimizer and an independent brute-force oracle.

The outer search enumerates open-site subsets (skipping any whose fixed costs
alone break the budget) and runs a depth-first branch-and-bound over the
zone-to-site assignment. Distance terms depend only on the assignment, and
the fill part of the objective is bounded above by the best achievable
overall fill rate given the open set, so partial assignments carry a sound
upper bound; subtrees strictly worse than the incumbent (beyond the 1e-9
comparison tolerance) are pruned, which never changes the returned optimum or
its tie-break. Each surviving complete assignment is finished by the exact
integer dose engine in :mod:`fairvax.allocation`.

The brute-force oracle enumerates every (open set, assignment, dose vector)
with its own inline arithmetic and shares only the tie-break comparator; it
exists to cross-check the solver and is limited to tiny instances.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

from . import allocation
from .allocation import DoseGroup, DoseProblem, DoseZone
from .formulation import (
    EvaluatedSolution,
    Solution,
    TOLERANCE,
    candidate_key,
    evaluate,
    is_better,
    search_space_size,
)
from .instance import DistanceMatrix, Instance, compute_distances

__all__ = [
    "SolveConfig",
    "SolveResult",
    "InstanceTooLargeError",
    "solve_exact",
    "solve_inner_allocation",
    "brute_force_oracle",
]


class InstanceTooLargeError(ValueError):
    pass


class _TimeUp(Exception):
    pass


@dataclass(frozen=True)
class SolveConfig:
    """Caps and numerics for the exact solver.

    ``prune=False`` disables bound-based pruning (test mode); the result must
    not change, only ``nodes_explored``. ``nodes_explored`` counts complete
    assignments handed to the dose engine.
    """

    max_zones_exact: int = 10
    max_sites_exact: int = 6
    time_limit: float = 60.0
    tolerance: float = TOLERANCE
    prune: bool = True

    def __post_init__(self):
        if self.max_zones_exact < 1 or self.max_sites_exact < 1:
            raise ValueError("exact caps must be >= 1")
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass(frozen=True)
class SolveResult:
    best: EvaluatedSolution | None
    status: str  # "optimal" | "time_limit" | "infeasible"
    nodes_explored: int
    wall_time: float


def _fill_gains(instance: Instance) -> tuple[list[float], float, int]:
    """Per-dose gain for each positive-demand zone, plus constants.

    The fill part of the objective is sum(gain_j * y_j) - theta * peak plus
    (theta / m) per zero-demand zone, with peak pinned at 1 when any
    zero-demand zone exists.
    """
    m = instance.num_zones
    total = instance.total_demand
    theta = instance.theta
    gains = [
        0.0 if z.demand == 0 else 1.0 / total + (theta / m) / z.demand
        for z in instance.zones
    ]
    n_zero = sum(1 for z in instance.zones if z.demand == 0)
    const = (theta / m) * n_zero
    return gains, const, n_zero


def _build_problem(instance: Instance, open_ids, assignment, gains, n_zero,
                   fixed_cost: float) -> tuple[DoseProblem, dict[int, int]]:
    """Dose problem for a fixed assignment; returns (problem, group index map)."""
    group_index = {i: g for g, i in enumerate(open_ids)}
    groups = tuple(
        DoseGroup(instance.site_by_id(i).capacity, instance.site_by_id(i).unit_cost)
        for i in open_ids
    )
    zones = tuple(
        DoseZone(z.id, z.demand, gains[z.id - 1], group_index[assignment[z.id]])
        for z in instance.zones
        if z.demand > 0
    )
    problem = DoseProblem(
        zones=zones,
        groups=groups,
        supply=instance.supply,
        var_budget=instance.budget - fixed_cost,
        peak_weight=instance.theta,
        peak_is_one=n_zero > 0,
    )
    return problem, group_index


def _problem_cache_key(problem: DoseProblem) -> tuple:
    # Zone identity does not affect the optimal value/cost, only the plan.
    return (
        tuple(sorted((z.demand, z.gain, z.group) for z in problem.zones)),
        tuple((g.capacity, g.unit_cost) for g in problem.groups),
        problem.supply,
        problem.var_budget,
        problem.peak_weight,
        problem.peak_is_one,
    )


def solve_exact(
    instance: Instance,
    dm: DistanceMatrix | None = None,
    config: SolveConfig | None = None,
) -> SolveResult:
    """Provably optimal solution of the full model, or infeasibility.

    Deterministic: candidates are compared with the shared tie-break, so the
    returned solution does not depend on search order. Raises
    InstanceTooLargeError beyond the configured caps; on hitting the time
    limit the incumbent is returned with status "time_limit".
    """
    cfg = config or SolveConfig()
    m, n = instance.num_zones, instance.num_sites
    if m > cfg.max_zones_exact or n > cfg.max_sites_exact:
        raise InstanceTooLargeError(
            f"instance has m={m} zones, n={n} sites; exact caps are "
            f"m<={cfg.max_zones_exact}, n<={cfg.max_sites_exact} "
            "(use the heuristic for larger instances)"
        )
    if dm is None:
        dm = compute_distances(instance)

    t0 = time.monotonic()
    deadline = t0 + cfg.time_limit
    tol = cfg.tolerance
    dbar = dm.standardized.tolist()  # [site][zone]
    theta, alpha = instance.theta, instance.alpha
    supply, budget = instance.supply, instance.budget
    total_demand = instance.total_demand
    pos_demand = sum(z.demand for z in instance.zones if z.demand > 0)
    gains, fill_const, n_zero = _fill_gains(instance)
    caps = [s.capacity for s in instance.sites]
    fixed = [s.fixed_cost for s in instance.sites]
    unit = [s.unit_cost for s in instance.sites]

    # Feasible open sets with their fill/distance upper bounds.
    subsets = []
    for mask in range(1, 1 << n):
        open_idx = [i for i in range(n) if mask >> i & 1]
        fixed_cost = sum(fixed[i] for i in open_idx)
        if fixed_cost > budget + tol:
            continue
        cap_sum = sum(caps[i] for i in open_idx)
        vmin = min(unit[i] for i in open_idx)
        afford = int((budget - fixed_cost + tol) // vmin) if vmin > 0 else pos_demand
        dose_cap = min(supply, cap_sum, max(afford, 0), pos_demand)
        beta_cap = dose_cap / total_demand
        min_d = [min(dbar[i][j] for i in open_idx) for j in range(m)]
        ub = beta_cap - sum(min_d) / m
        subsets.append((ub, len(open_idx), mask, open_idx, fixed_cost, beta_cap, min_d))
    subsets.sort(key=lambda t: (-t[0], t[1], t[2]))

    best_obj: float | None = None
    best_key: tuple | None = None
    best_data = None  # (open_ids, assignment tuple, fill value, var cost, fixed cost)
    nodes = 0
    timed_out = False
    problem_cache: dict[tuple, tuple[float, float]] = {}

    for ub_x, _, mask, open_idx, fixed_cost, beta_cap, min_d in subsets:
        if cfg.prune and best_obj is not None and ub_x < best_obj - tol:
            continue
        open_ids = tuple(i + 1 for i in open_idx)
        n_open = len(open_ids)
        site_order = [
            sorted(open_idx, key=lambda i, j=j: (dbar[i][j], i)) for j in range(m)
        ]
        suffix_min = [0.0] * (m + 1)
        for j in range(m - 1, -1, -1):
            suffix_min[j] = suffix_min[j + 1] + min_d[j]
        assign = [0] * m

        def descend(depth: int, sum_d: float, max_d: float):
            nonlocal nodes, best_obj, best_key, best_data, timed_out
            for i in site_order[depth]:
                d = dbar[i][depth]
                s2 = sum_d + d
                m2 = max_d if max_d >= d else d
                assign[depth] = i
                if depth + 1 == m:
                    dist_part = -s2 / m - alpha * (m * m2 - s2) / m
                    if (
                        cfg.prune
                        and best_obj is not None
                        and beta_cap + dist_part < best_obj - tol
                    ):
                        continue
                    nodes += 1
                    if nodes % 1024 == 0 and time.monotonic() > deadline:
                        raise _TimeUp
                    assignment = {j + 1: assign[j] + 1 for j in range(m)}
                    problem, _ = _build_problem(
                        instance, open_ids, assignment, gains, n_zero, fixed_cost
                    )
                    ck = _problem_cache_key(problem)
                    hit = problem_cache.get(ck)
                    if hit is None:
                        hit = allocation.solve_doses(problem)
                        problem_cache[ck] = hit
                    fill_value, var_cost = hit
                    obj = fill_value + fill_const + dist_part
                    z_vec = tuple(a + 1 for a in assign)
                    key = candidate_key(n_open, fixed_cost + var_cost, open_ids, z_vec)
                    if best_obj is None or is_better(obj, key, best_obj, best_key, tol):
                        best_obj = obj
                        best_key = key
                        best_data = (open_ids, z_vec, fill_value, var_cost, fixed_cost)
                else:
                    bound = (
                        beta_cap
                        - (s2 + suffix_min[depth + 1]) / m
                        - alpha * ((depth + 1) * m2 - s2) / m
                    )
                    if cfg.prune and best_obj is not None and bound < best_obj - tol:
                        continue
                    descend(depth + 1, s2, m2)

        try:
            descend(0, 0.0, 0.0)
        except _TimeUp:
            timed_out = True
            break

    wall = time.monotonic() - t0
    if best_data is None:
        status = "time_limit" if timed_out else "infeasible"
        return SolveResult(best=None, status=status, nodes_explored=nodes, wall_time=wall)

    open_ids, z_vec, fill_value, var_cost, fixed_cost = best_data
    assignment = {j + 1: z_vec[j] for j in range(m)}
    problem, _ = _build_problem(instance, open_ids, assignment, gains, n_zero, fixed_cost)
    plan = allocation.reconstruct_doses(problem, fill_value, var_cost)
    doses = {
        (assignment[zone_id], zone_id): y for zone_id, y in plan.items() if y > 0
    }
    solution = Solution(open_sites=open_ids, assignment=assignment, doses=doses)
    ev = evaluate(instance, dm, solution, tol)
    status = "time_limit" if timed_out else "optimal"
    return SolveResult(best=ev, status=status, nodes_explored=nodes,
                       wall_time=time.monotonic() - t0)


def solve_inner_allocation(
    instance: Instance,
    open_sites,
    assignment: dict[int, int],
    remaining_budget: float | None = None,
) -> tuple[dict[tuple[int, int], int], float]:
    """Optimal integer doses for a fixed assignment.

    Returns the dose map keyed by (site, zone) and the fill part of the
    objective (the distance terms are constants once the assignment is
    fixed). ``remaining_budget`` defaults to budget minus open fixed costs.
    """
    open_ids = tuple(sorted(open_sites))
    for j, i in assignment.items():
        if i not in open_ids:
            raise ValueError(f"zone {j} assigned to a site {i} that is not open")
    fixed_cost = sum(instance.site_by_id(i).fixed_cost for i in open_ids)
    if remaining_budget is None:
        remaining_budget = instance.budget - fixed_cost
    if remaining_budget < -TOLERANCE:
        raise ValueError("remaining budget is negative")

    gains, fill_const, n_zero = _fill_gains(instance)
    problem, _ = _build_problem(
        instance, open_ids, assignment, gains, n_zero,
        instance.budget - remaining_budget,
    )
    value, cost, plan = allocation.solve_doses_with_plan(problem)
    doses = {(assignment[zone_id], zone_id): y for zone_id, y in plan.items() if y > 0}
    return doses, value + fill_const


def brute_force_oracle(
    instance: Instance,
    dm: DistanceMatrix | None = None,
    tol: float = TOLERANCE,
    max_space: int = 1_000_000,
    max_dose_combos: int = 250_000,
) -> SolveResult:
    """Exhaustive enumeration of every (open set, assignment, dose vector).

    Independent verification oracle for tiny instances; applies the same
    tie-break as the solver. Raises when the enumeration would be too large.
    """
    m, n = instance.num_zones, instance.num_sites
    if search_space_size(n, m) > max_space:
        raise InstanceTooLargeError("assignment space too large for brute force")
    combos = 1
    for z in instance.zones:
        combos *= min(z.demand, instance.supply) + 1
    if combos > max_dose_combos:
        raise InstanceTooLargeError("dose space too large for brute force")
    if dm is None:
        dm = compute_distances(instance)

    t0 = time.monotonic()
    dbar = dm.standardized.tolist()
    theta, alpha = instance.theta, instance.alpha
    supply, budget = instance.supply, instance.budget
    demands = [z.demand for z in instance.zones]
    total_demand = instance.total_demand
    caps = [s.capacity for s in instance.sites]
    fixed = [s.fixed_cost for s in instance.sites]
    unit = [s.unit_cost for s in instance.sites]

    best_obj: float | None = None
    best_key: tuple | None = None
    best_sol: tuple | None = None
    leaves = 0

    for mask in range(1, 1 << n):
        open_idx = [i for i in range(n) if mask >> i & 1]
        fixed_cost = sum(fixed[i] for i in open_idx)
        if fixed_cost > budget + tol:
            continue
        open_ids = tuple(i + 1 for i in open_idx)
        n_open = len(open_idx)
        for z in itertools.product(open_idx, repeat=m):
            dv = [dbar[z[j]][j] for j in range(m)]
            sum_d = sum(dv)
            max_d = max(dv)
            dist_part = -sum_d / m - alpha * (m * max_d - sum_d) / m
            z_vec = tuple(i + 1 for i in z)
            cap_left = list(caps)
            ys = [0] * m

            def enum(j: int, used: int, var_cost: float):
                nonlocal leaves, best_obj, best_key, best_sol
                if j == m:
                    leaves += 1
                    total = used
                    sum_beta = 0.0
                    peak = 0.0
                    for jj in range(m):
                        if demands[jj] == 0:
                            b = 1.0
                        else:
                            b = ys[jj] / demands[jj]
                        sum_beta += b
                        if b > peak:
                            peak = b
                    fill = total / total_demand + (theta / m) * sum_beta - theta * peak
                    obj = fill + dist_part
                    key = candidate_key(
                        n_open, fixed_cost + var_cost, open_ids, z_vec,
                        tuple(-y for y in ys),
                    )
                    if best_obj is None or is_better(obj, key, best_obj, best_key, tol):
                        best_obj = obj
                        best_key = key
                        best_sol = (open_ids, z_vec, tuple(ys))
                    return
                site = z[j]
                ub = min(demands[j], supply - used, cap_left[site])
                if unit[site] > 0:
                    ub = min(ub, int((budget - fixed_cost - var_cost + tol) // unit[site]))
                for y in range(max(ub, 0) + 1):
                    ys[j] = y
                    cap_left[site] -= y
                    enum(j + 1, used + y, var_cost + unit[site] * y)
                    cap_left[site] += y
                ys[j] = 0

            enum(0, 0, 0.0)

    wall = time.monotonic() - t0
    if best_sol is None:
        return SolveResult(best=None, status="infeasible", nodes_explored=leaves, wall_time=wall)
    open_ids, z_vec, ys = best_sol
    assignment = {j + 1: z_vec[j] for j in range(m)}
    doses = {(z_vec[j], j + 1): ys[j] for j in range(m) if ys[j] > 0}
    solution = Solution(open_sites=open_ids, assignment=assignment, doses=doses)
    ev = evaluate(instance, dm, solution, tol)
    return SolveResult(best=ev, status="optimal", nodes_explored=leaves,
                       wall_time=time.monotonic() - t0)
