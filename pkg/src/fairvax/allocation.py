"""Exact integer dose allocation under supply, budget, and capacity coupling.

Both the full model (assignment fixed) and the cluster-level model reduce to
the same problem: maximize a per-dose linear gain minus a penalty on the
maximum fill rate, over integer doses tied together by a shared supply, a
budget on per-group unit costs, and a capacity per group (a group is the site
or cluster whose zones pool capacity and share a unit cost).

The penalized maximum only takes values on the rational grid {t / demand_j}.
For each grid value the remaining problem is linear: doses are box-bounded by
floor(peak * demand_j), so a greedy fill curve per group (gains are constant
per dose) plus a small dynamic program across groups, keyed by supply use
with a cost/value skyline per state, solves it exactly. Sweeping the grid and
keeping the best candidate yields the true optimum: any allocation is
feasible at the grid point equal to its own peak, and a grid candidate never
overstates the objective of the allocation behind it.

Values within 1e-9 are treated as ties; the reported cost is the cheapest
among tied candidates, and dose vectors are reconstructed largest-first by
zone id (lowest zone index filled first among optima).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "DoseZone",
    "DoseGroup",
    "DoseProblem",
    "solve_doses",
    "reconstruct_doses",
    "solve_doses_with_plan",
]

_BAND = 1e-9


@dataclass(frozen=True)
class DoseZone:
    zone_id: int
    demand: int  # > 0
    gain: float  # objective gain per dose, > 0
    group: int   # index into DoseProblem.groups


@dataclass(frozen=True)
class DoseGroup:
    capacity: int
    unit_cost: float


@dataclass(frozen=True)
class DoseProblem:
    """max sum_j gain_j * y_j - peak_weight * max_j (y_j / demand_j).

    Subject to: sum y <= supply, sum unit_cost_g * (group total) <= var_budget
    (with 1e-9 slack for non-integral costs), group totals <= capacity, and
    0 <= y_j <= demand_j. With ``peak_is_one`` the max term is pinned to 1
    regardless of the doses (a zero-demand zone elsewhere counts as fully
    served and always attains the peak).
    """

    zones: tuple[DoseZone, ...]
    groups: tuple[DoseGroup, ...]
    supply: int
    var_budget: float
    peak_weight: float
    peak_is_one: bool = False


def _skyline(entries: list[tuple[float, float]]) -> list[tuple[float, float]]:
    # Keep (cost, value) pairs with cost ascending and value strictly ascending.
    entries.sort(key=lambda e: (e[0], -e[1]))
    out: list[tuple[float, float]] = []
    best = None
    for c, v in entries:
        if best is None or v > best:
            out.append((c, v))
            best = v
    return out


def _linear_best(zones, bounds, supply, budget, caps, group_costs) -> tuple[float, float]:
    """Max of sum gain*y with y_j <= bounds_j under supply/budget/capacity.

    Returns (best value, min cost among values within 1e-9 of the best).
    y = 0 is always feasible, so a result always exists.
    """
    if not zones:
        return 0.0, 0.0

    by_group: dict[int, list[int]] = {}
    for idx, z in enumerate(zones):
        if bounds[idx] > 0:
            by_group.setdefault(z.group, []).append(idx)
    if not by_group:
        return 0.0, 0.0

    # Fast path: all bounds jointly feasible.
    total = sum(bounds)
    if total <= supply:
        ok = True
        cost_full = 0.0
        for g, members in by_group.items():
            w = sum(bounds[i] for i in members)
            if w > caps[g]:
                ok = False
                break
            cost_full += w * group_costs[g]
        if ok and cost_full <= budget + _BAND:
            value_full = sum(zones[i].gain * bounds[i] for i in range(len(zones)))
            return value_full, cost_full

    # Greedy fill curve per group: cumulative value of the w best doses.
    curves: list[tuple[float, list[float]]] = []  # (unit_cost, curve)
    for g in sorted(by_group):
        members = sorted(by_group[g], key=lambda i: (-zones[i].gain, zones[i].zone_id))
        w_max = min(caps[g], sum(bounds[i] for i in members), supply)
        curve = [0.0]
        acc = 0.0
        filled = 0
        for i in members:
            take = min(bounds[i], w_max - filled)
            for _ in range(take):
                acc += zones[i].gain
                curve.append(acc)
            filled += take
            if filled >= w_max:
                break
        curves.append((group_costs[g], curve))

    # DP across groups on supply used, with a cost/value skyline per state.
    states: dict[int, list[tuple[float, float]]] = {0: [(0.0, 0.0)]}
    for unit_cost, curve in curves:
        nxt: dict[int, list[tuple[float, float]]] = {}
        for s, sky in states.items():
            top = min(len(curve) - 1, supply - s)
            for w in range(top + 1):
                dc = w * unit_cost
                dv = curve[w]
                bucket = nxt.setdefault(s + w, [])
                for c, v in sky:
                    c2 = c + dc
                    if c2 <= budget + _BAND:
                        bucket.append((c2, v + dv))
        states = {s: _skyline(entries) for s, entries in nxt.items() if entries}
        if not states:
            return 0.0, 0.0

    best_v = 0.0
    for sky in states.values():
        for _, v in sky:
            if v > best_v:
                best_v = v
    best_c = 0.0 if best_v <= _BAND else float("inf")
    for sky in states.values():
        for c, v in sky:
            if v >= best_v - _BAND and c < best_c:
                best_c = c
    return best_v, best_c


def _candidates(problem: DoseProblem, fixed: dict[int, int]):
    """Yield (value, cost) over optimal-peak candidates given fixed doses.

    ``fixed`` maps zone_id to a pinned dose. Every yielded candidate is
    achievable, and the best achievable (value, cost) appears among them.
    """
    group_costs = tuple(g.unit_cost for g in problem.groups)
    value_f = 0.0
    cost_f = 0.0
    supply_left = problem.supply
    caps = [g.capacity for g in problem.groups]
    peak_prefix = Fraction(0)
    remaining: list[DoseZone] = []
    for z in problem.zones:
        if z.zone_id in fixed:
            y = fixed[z.zone_id]
            value_f += z.gain * y
            cost_f += problem.groups[z.group].unit_cost * y
            supply_left -= y
            caps[z.group] -= y
            frac = Fraction(y, z.demand)
            if frac > peak_prefix:
                peak_prefix = frac
        else:
            remaining.append(z)
    if supply_left < 0 or any(c < 0 for c in caps):
        return
    budget_left = problem.var_budget - cost_f
    if budget_left < -_BAND:
        return

    if problem.peak_is_one or problem.peak_weight == 0.0:
        pen = problem.peak_weight if problem.peak_is_one else 0.0
        bounds = [z.demand for z in remaining]
        v, c = _linear_best(remaining, bounds, supply_left, budget_left, caps, group_costs)
        yield value_f + v - pen, cost_f + c
        return

    grid = {peak_prefix}
    for z in remaining:
        for t in range(1, z.demand + 1):
            frac = Fraction(t, z.demand)
            if frac > peak_prefix:
                grid.add(frac)
    prev_bounds = None
    for peak in sorted(grid):
        bounds = [
            min(z.demand, (peak.numerator * z.demand) // peak.denominator)
            for z in remaining
        ]
        if bounds == prev_bounds:
            continue  # same room at a larger peak is strictly dominated
        prev_bounds = bounds
        v, c = _linear_best(remaining, bounds, supply_left, budget_left, caps, group_costs)
        yield value_f + v - problem.peak_weight * float(peak), cost_f + c


def solve_doses(problem: DoseProblem) -> tuple[float, float]:
    """Optimal objective value and the min cost among value ties."""
    best_v = None
    for v, _ in _candidates(problem, {}):
        if best_v is None or v > best_v:
            best_v = v
    if best_v is None:
        raise ValueError("dose problem has no feasible allocation (negative budget?)")
    best_c = float("inf")
    for v, c in _candidates(problem, {}):
        if v >= best_v - _BAND and c < best_c:
            best_c = c
    return best_v, best_c


def _achievable(problem, fixed, target_v, target_c) -> bool:
    return any(
        v >= target_v - _BAND and c <= target_c + _BAND
        for v, c in _candidates(problem, fixed)
    )


def reconstruct_doses(
    problem: DoseProblem, target_value: float, target_cost: float
) -> dict[int, int]:
    """Lexicographically largest dose vector achieving the target value/cost.

    Zones are fixed in ascending zone id, each at the largest dose that still
    leaves the target reachable; this realizes the documented tie-break of
    filling the lowest zone index first among optima.
    """
    fixed: dict[int, int] = {}
    supply_left = problem.supply
    caps = [g.capacity for g in problem.groups]
    budget_left = problem.var_budget
    for z in sorted(problem.zones, key=lambda z: z.zone_id):
        unit = problem.groups[z.group].unit_cost
        ub = min(z.demand, supply_left, caps[z.group])
        if unit > 0:
            ub = min(ub, int((budget_left + _BAND) // unit))
        chosen = None
        for y in range(max(ub, 0), -1, -1):
            fixed[z.zone_id] = y
            if _achievable(problem, fixed, target_value, target_cost):
                chosen = y
                break
        if chosen is None:  # targets came from solve_doses, so this cannot fire
            raise RuntimeError("dose reconstruction lost the optimum")
        supply_left -= chosen
        caps[z.group] -= chosen
        budget_left -= unit * chosen
    return fixed


def solve_doses_with_plan(problem: DoseProblem) -> tuple[float, float, dict[int, int]]:
    value, cost = solve_doses(problem)
    return value, cost, reconstruct_doses(problem, value, cost)
