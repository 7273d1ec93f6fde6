"""Solution representation, feasibility checking, and objective evaluation.

The objective rewards the overall fill rate and penalizes three things: the
mean standardized travel distance, per-zone shortfalls from the peak fill
rate (weight theta), and per-zone shortfalls from the peak travel distance
(weight alpha). The two peak auxiliaries are always evaluated at the exact
maxima; any larger feasible choice can only lower the objective, so the
maxima weakly dominate (verified against a grid sweep in the tests).

Conventions pinned here and used everywhere else:

* a zone with zero demand has fill rate 1 and receives no doses; its travel
  distance still counts in the accessibility terms;
* per-zone doses never exceed demand (the peak fill rate is capped at 1);
* objective comparisons use an absolute tolerance of 1e-9; exact ties are
  broken by preferring fewer open sites, then lower total cost, then the
  lexicographically smallest open-site vector, assignment vector, and
  finally the largest dose vector (lowest zone index filled first).
"""

from __future__ import annotations

from dataclasses import dataclass

from .instance import DistanceMatrix, Instance

__all__ = [
    "Solution",
    "EvaluatedSolution",
    "Violation",
    "FeasibilityReport",
    "InfeasibleSolutionError",
    "check_feasibility",
    "evaluate",
    "objective_value",
    "solution_cost",
    "search_space_size",
    "candidate_key",
    "is_better",
    "TOLERANCE",
]

TOLERANCE = 1e-9


class InfeasibleSolutionError(ValueError):
    def __init__(self, report: "FeasibilityReport"):
        super().__init__(
            "infeasible solution: " + "; ".join(v.message for v in report.violations)
        )
        self.report = report


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    excess: float


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True, eq=False)
class Solution:
    """Open sites, zone assignment, and integer doses per (site, zone).

    ``doses`` stores only positive amounts; a missing pair means zero doses.
    """

    open_sites: tuple[int, ...]
    assignment: dict[int, int]
    doses: dict[tuple[int, int], int]

    def __post_init__(self):
        object.__setattr__(self, "open_sites", tuple(sorted(self.open_sites)))
        object.__setattr__(
            self, "doses", {k: v for k, v in self.doses.items() if v != 0}
        )

    def __eq__(self, other):
        if not isinstance(other, Solution):
            return NotImplemented
        return (
            self.open_sites == other.open_sites
            and self.assignment == other.assignment
            and self.doses == other.doses
        )

    def zone_doses(self, zone_id: int) -> int:
        return sum(v for (_, j), v in self.doses.items() if j == zone_id)

    def to_dict(self) -> dict:
        return {
            "open_sites": list(self.open_sites),
            "assignment": {str(j): i for j, i in sorted(self.assignment.items())},
            "doses": [
                {"site": i, "zone": j, "amount": a}
                for (i, j), a in sorted(self.doses.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Solution":
        return cls(
            open_sites=tuple(int(i) for i in data["open_sites"]),
            assignment={int(j): int(i) for j, i in data["assignment"].items()},
            doses={
                (int(d["site"]), int(d["zone"])): int(d["amount"])
                for d in data["doses"]
            },
        )


@dataclass(frozen=True, eq=False)
class EvaluatedSolution:
    solution: Solution
    fill_rates: tuple[float, ...]
    fill_rate: float
    fill_peak: float
    distances: tuple[float, ...]
    distance_peak: float
    objective: float

    def to_dict(self) -> dict:
        out = self.solution.to_dict()
        out["metrics"] = {
            "beta": self.fill_rate,
            "beta_j": list(self.fill_rates),
            "beta_hat": self.fill_peak,
            "d_j": list(self.distances),
            "d_hat": self.distance_peak,
            "objective": self.objective,
        }
        return out


def solution_cost(instance: Instance, solution: Solution) -> float:
    """Total fixed plus variable cost of the solution."""
    fixed = sum(instance.site_by_id(i).fixed_cost for i in solution.open_sites)
    var = sum(
        instance.site_by_id(i).unit_cost * a for (i, _), a in solution.doses.items()
    )
    return fixed + var


def check_feasibility(
    instance: Instance, solution: Solution, tol: float = TOLERANCE
) -> FeasibilityReport:
    """Report every violated constraint with its slack (report style).

    Checks, in order: structural consistency, supply, budget, per-site
    capacity, dose/assignment linkage, assignment/open linkage, one site per
    zone, and the per-zone fill cap (doses never exceed demand).
    """
    violations: list[Violation] = []
    m, n = instance.num_zones, instance.num_sites
    site_ids = set(range(1, n + 1))
    zone_ids = set(range(1, m + 1))

    for i in solution.open_sites:
        if i not in site_ids:
            violations.append(Violation("structure", f"unknown open site id {i}", 0.0))
    for j, i in solution.assignment.items():
        if j not in zone_ids:
            violations.append(Violation("structure", f"assignment for unknown zone {j}", 0.0))
        if i not in site_ids:
            violations.append(Violation("structure", f"zone {j} assigned to unknown site {i}", 0.0))
    for (i, j), a in solution.doses.items():
        if i not in site_ids or j not in zone_ids:
            violations.append(Violation("structure", f"doses for unknown pair ({i}, {j})", 0.0))
        if not isinstance(a, int) or a < 0:
            violations.append(Violation("structure", f"doses for ({i}, {j}) must be a non-negative integer", 0.0))
    if violations:
        return FeasibilityReport(tuple(violations))

    open_set = set(solution.open_sites)
    total = sum(solution.doses.values())
    if total > instance.supply:
        excess = total - instance.supply
        violations.append(
            Violation("supply", f"total doses {total} exceed supply {instance.supply} by {excess}", float(excess))
        )

    cost = solution_cost(instance, solution)
    if cost > instance.budget + tol:
        excess = cost - instance.budget
        violations.append(
            Violation("budget", f"total cost {cost:g} exceeds budget {instance.budget:g} by {excess:g}", excess)
        )

    for s in instance.sites:
        used = sum(a for (i, _), a in solution.doses.items() if i == s.id)
        if used > s.capacity:
            excess = used - s.capacity
            violations.append(
                Violation("capacity", f"site {s.id} administers {used} doses over capacity {s.capacity}", float(excess))
            )

    for (i, j), a in solution.doses.items():
        if a > 0 and solution.assignment.get(j) != i:
            violations.append(
                Violation("dose_assignment", f"zone {j} receives doses from site {i} it is not assigned to", float(a))
            )

    for j, i in solution.assignment.items():
        if i not in open_set:
            violations.append(
                Violation("assignment_open", f"zone {j} assigned to closed site {i}", 1.0)
            )

    for j in range(1, m + 1):
        if j not in solution.assignment:
            violations.append(
                Violation("assignment_missing", f"zone {j} is not assigned to any site", 1.0)
            )

    for z in instance.zones:
        got = solution.zone_doses(z.id)
        if got > z.demand:
            excess = got - z.demand
            violations.append(
                Violation("demand_cap", f"zone {z.id} receives {got} doses over its demand {z.demand}", float(excess))
            )

    return FeasibilityReport(tuple(violations))


def objective_value(
    fill_rate: float,
    fill_rates,
    distances,
    theta: float,
    alpha: float,
    fill_peak: float | None = None,
    distance_peak: float | None = None,
) -> float:
    """Objective for given per-zone fill rates and travel distances.

    The peak auxiliaries default to the exact maxima; passing larger values
    is allowed (they are feasible) and can only lower the result.
    """
    m = len(fill_rates)
    if fill_peak is None:
        fill_peak = max(fill_rates)
    if distance_peak is None:
        distance_peak = max(distances)
    return (
        fill_rate
        - sum(distances) / m
        - theta * sum(fill_peak - b for b in fill_rates) / m
        - alpha * sum(distance_peak - d for d in distances) / m
    )


def evaluate(
    instance: Instance,
    dm: DistanceMatrix,
    solution: Solution,
    tol: float = TOLERANCE,
) -> EvaluatedSolution:
    """Score a feasible solution; raises InfeasibleSolutionError otherwise."""
    report = check_feasibility(instance, solution, tol)
    if not report.ok:
        raise InfeasibleSolutionError(report)

    total_demand = instance.total_demand
    per_zone = [solution.zone_doses(z.id) for z in instance.zones]
    fill_rates = tuple(
        1.0 if z.demand == 0 else y / z.demand
        for z, y in zip(instance.zones, per_zone)
    )
    fill_rate = sum(per_zone) / total_demand
    distances = tuple(
        dm.standardized_at(solution.assignment[z.id], z.id) for z in instance.zones
    )
    fill_peak = max(fill_rates)
    distance_peak = max(distances)
    obj = objective_value(
        fill_rate, fill_rates, distances, instance.theta, instance.alpha,
        fill_peak, distance_peak,
    )
    return EvaluatedSolution(
        solution=solution,
        fill_rates=fill_rates,
        fill_rate=fill_rate,
        fill_peak=fill_peak,
        distances=distances,
        distance_peak=distance_peak,
        objective=obj,
    )


def search_space_size(num_sites: int, num_zones: int) -> int:
    """Exact cardinality (2n)^m of the open/assign search space."""
    if num_sites < 1 or num_zones < 1:
        raise ValueError("num_sites and num_zones must be >= 1")
    return (2 * num_sites) ** num_zones


def candidate_key(
    num_open: int,
    total_cost: float,
    open_vec: tuple[int, ...],
    z_vec: tuple[int, ...],
    neg_doses: tuple[int, ...] = (),
) -> tuple:
    """Tie-break key: smaller is preferred. See module docstring."""
    return (num_open, total_cost, open_vec, z_vec, neg_doses)


def is_better(obj_new: float, key_new: tuple, obj_best: float, key_best: tuple,
              tol: float = TOLERANCE) -> bool:
    """True when (obj_new, key_new) beats the incumbent under the tie-break."""
    if obj_new > obj_best + tol:
        return True
    if obj_new < obj_best - tol:
        return False
    return key_new < key_best
