import random

import pytest

from fairvax import GeneratorParams, Instance, Site, Solution, Zone


def make_tiny2x2(budget=40.0, theta=1.0, alpha=1.0, supply=20):
    """Two symmetric zones with demand 10, a site one unit above each."""
    zones = (Zone(1, 0.0, 0.0, 10), Zone(2, 10.0, 0.0, 10))
    sites = (
        Site(1, 0.0, 1.0, 15, 5.0, 1.0),
        Site(2, 10.0, 1.0, 15, 5.0, 1.0),
    )
    return Instance(zones, sites, supply, budget, theta, alpha)


def random_tiny_instance(rng: random.Random, allow_zero_demand=False) -> Instance:
    """Random instance small enough for the brute-force oracle."""
    m = rng.randint(1, 3)
    n = rng.randint(1, 3)
    lo_demand = 0 if allow_zero_demand else 1
    zones = [
        Zone(j + 1, rng.uniform(0.0, 8.0), rng.uniform(0.0, 8.0), rng.randint(lo_demand, 6))
        for j in range(m)
    ]
    if all(z.demand == 0 for z in zones):
        zones[0] = Zone(zones[0].id, zones[0].x, zones[0].y, rng.randint(1, 6))
    sites = [
        Site(
            i + 1,
            rng.uniform(0.0, 8.0),
            rng.uniform(0.0, 8.0),
            rng.randint(0, 12),
            float(rng.randint(0, 6)),
            float(rng.randint(1, 3)),
        )
        for i in range(n)
    ]
    return Instance(
        zones=tuple(zones),
        sites=tuple(sites),
        supply=rng.randint(0, 12),
        budget=float(rng.randint(0, 40)),
        theta=rng.choice([0.0, 0.5, 1.0, 2.0]),
        alpha=rng.choice([0.0, 0.5, 1.0, 2.0]),
    )


def random_feasible_solution(inst: Instance, rng: random.Random) -> Solution | None:
    """A feasible (rarely optimal) solution, or None when no site is affordable."""
    open_ids = [s.id for s in inst.sites if rng.random() < 0.7 or s.id == 1]
    fixed = sum(inst.site_by_id(i).fixed_cost for i in open_ids)
    if fixed > inst.budget:
        open_ids = [min(inst.sites, key=lambda s: s.fixed_cost).id]
        fixed = inst.site_by_id(open_ids[0]).fixed_cost
        if fixed > inst.budget:
            return None
    assignment = {z.id: rng.choice(open_ids) for z in inst.zones}
    supply_left = inst.supply
    budget_left = inst.budget - fixed
    cap_left = {s.id: s.capacity for s in inst.sites}
    doses = {}
    for z in inst.zones:
        site = assignment[z.id]
        unit = inst.site_by_id(site).unit_cost
        ub = min(z.demand, supply_left, cap_left[site])
        if unit > 0:
            ub = min(ub, int(budget_left // unit))
        y = rng.randint(0, max(ub, 0))
        if y:
            doses[(site, z.id)] = y
            supply_left -= y
            budget_left -= unit * y
            cap_left[site] -= y
    return Solution(tuple(open_ids), assignment, doses)


# parameters for the exact-solvable planted-cluster fixture used by the
# site-agreement tests: identical sites so the site score reduces to
# distance, full supply and ample budget so the optimum serves every zone
PLANTED_DESK_PARAMS = GeneratorParams(
    demand=(1, 4),
    capacity=(25, 25),
    fixed_cost=(5, 5),
    unit_cost=(1, 1),
    supply_frac=(1.0, 1.0),
    budget_frac=(2.0, 2.0),
    theta=1.0,
    alpha=0.5,
)


@pytest.fixture
def tiny2x2() -> Instance:
    return make_tiny2x2()
