"""Problem instances: domain model, validation, distances, generation, JSON I/O.

An instance is a set of demand zones (planar coordinates plus an integer dose
demand) and candidate sites (coordinates, dose capacity, fixed opening cost,
per-dose cost), together with a total dose supply, a budget, and the two
fairness penalty weights ``theta`` (fill-rate equity) and ``alpha`` (travel
distance equity).

Instances and distance matrices are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Zone",
    "Site",
    "Instance",
    "DistanceMatrix",
    "ValidationReport",
    "ValidationError",
    "InstanceFormatError",
    "GeneratorParams",
    "validate",
    "compute_distances",
    "generate_clustered",
    "load",
    "save",
]


class InstanceFormatError(ValueError):
    """Raised when an instance file cannot be parsed against the schema."""


class ValidationError(ValueError):
    """Raised when a loaded instance violates a domain invariant."""

    def __init__(self, report: "ValidationReport"):
        super().__init__("; ".join(report.violations))
        self.report = report


@dataclass(frozen=True)
class Zone:
    """A demand zone: location plus requested dose count."""

    id: int
    x: float
    y: float
    demand: int


@dataclass(frozen=True)
class Site:
    """A candidate vaccination site with capacity and cost structure."""

    id: int
    x: float
    y: float
    capacity: int
    fixed_cost: float
    unit_cost: float


@dataclass(frozen=True)
class Instance:
    zones: tuple[Zone, ...]
    sites: tuple[Site, ...]
    supply: int
    budget: float
    theta: float
    alpha: float

    @property
    def num_zones(self) -> int:
        return len(self.zones)

    @property
    def num_sites(self) -> int:
        return len(self.sites)

    @property
    def total_demand(self) -> int:
        return sum(z.demand for z in self.zones)

    def zone_by_id(self, zone_id: int) -> Zone:
        return self.zones[zone_id - 1]

    def site_by_id(self, site_id: int) -> Site:
        return self.sites[site_id - 1]

    def to_dict(self) -> dict:
        return {
            "supply": self.supply,
            "budget": self.budget,
            "theta": self.theta,
            "alpha": self.alpha,
            "zones": [
                {"id": z.id, "x": z.x, "y": z.y, "demand": z.demand}
                for z in self.zones
            ],
            "sites": [
                {
                    "id": s.id,
                    "x": s.x,
                    "y": s.y,
                    "capacity": s.capacity,
                    "fixed_cost": s.fixed_cost,
                    "unit_cost": s.unit_cost,
                }
                for s in self.sites
            ],
        }


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Demand-weighted zone/site distances, raw and min-max standardized.

    Both arrays are shaped (num_sites, num_zones) and read-only. Raw entries
    are the zone demand times the Euclidean zone-site distance. Standardized
    entries lie in [0, 1]; when every raw entry is equal the standardized
    matrix is all zeros (every pair is then equally accessible).
    """

    raw: np.ndarray
    standardized: np.ndarray

    def raw_at(self, site_id: int, zone_id: int) -> float:
        return float(self.raw[site_id - 1, zone_id - 1])

    def standardized_at(self, site_id: int, zone_id: int) -> float:
        return float(self.standardized[site_id - 1, zone_id - 1])


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(instance: Instance) -> ValidationReport:
    """Check every domain invariant, returning all violations (report style).

    Zero-demand zones are legal but reported as warnings; such zones are
    treated as fully served with zero doses everywhere else in the library.
    """
    violations: list[str] = []
    warnings: list[str] = []

    m = len(instance.zones)
    n = len(instance.sites)
    if m < 1:
        violations.append("m >= 1 required (instance has no demand zones)")
    if n < 1:
        violations.append("n >= 1 required (instance has no candidate sites)")

    zone_ids = [z.id for z in instance.zones]
    if zone_ids != list(range(1, m + 1)):
        violations.append("zone ids must be 1..m, contiguous and in order")
    site_ids = [s.id for s in instance.sites]
    if site_ids != list(range(1, n + 1)):
        violations.append("site ids must be 1..n, contiguous and in order")

    for z in instance.zones:
        if not (math.isfinite(z.x) and math.isfinite(z.y)):
            violations.append(f"non-finite coordinates at zone {z.id}")
        if z.demand < 0:
            violations.append(f"negative demand at zone {z.id}")
        elif z.demand == 0:
            warnings.append(f"zone {z.id} has zero demand")
    if m >= 1 and all(z.demand <= 0 for z in instance.zones):
        violations.append("at least one zone must have positive demand")

    for s in instance.sites:
        if not (math.isfinite(s.x) and math.isfinite(s.y)):
            violations.append(f"non-finite coordinates at site {s.id}")
        if s.capacity < 0:
            violations.append(f"negative capacity at site {s.id}")
        if s.fixed_cost < 0:
            violations.append(f"negative fixed cost at site {s.id}")
        if s.unit_cost < 0:
            violations.append(f"negative unit cost at site {s.id}")

    if instance.supply < 0:
        violations.append("supply must be non-negative")
    if instance.budget < 0:
        violations.append("budget must be non-negative")
    if instance.theta < 0:
        violations.append("theta must be non-negative")
    if instance.alpha < 0:
        violations.append("alpha must be non-negative")

    return ValidationReport(tuple(violations), tuple(warnings))


def compute_distances(instance: Instance) -> DistanceMatrix:
    """Demand-weighted distances and their min-max standardization.

    raw[i][j] = demand_j * euclidean(zone_j, site_i). Standardization maps the
    global minimum to 0 and the maximum to 1; a degenerate matrix (all raw
    values equal) standardizes to all zeros.
    """
    zx = np.array([z.x for z in instance.zones], dtype=float)
    zy = np.array([z.y for z in instance.zones], dtype=float)
    dem = np.array([z.demand for z in instance.zones], dtype=float)
    sx = np.array([s.x for s in instance.sites], dtype=float)
    sy = np.array([s.y for s in instance.sites], dtype=float)

    raw = dem[None, :] * np.hypot(sx[:, None] - zx[None, :], sy[:, None] - zy[None, :])
    lo = raw.min()
    span = raw.max() - lo
    if span > 0.0:
        standardized = (raw - lo) / span
    else:
        standardized = np.zeros_like(raw)
    raw.setflags(write=False)
    standardized.setflags(write=False)
    return DistanceMatrix(raw=raw, standardized=standardized)


@dataclass(frozen=True)
class GeneratorParams:
    """Value ranges for synthetic instances; integer ranges are inclusive."""

    demand: tuple[int, int] = (1, 6)
    capacity: tuple[int, int] = (8, 30)
    fixed_cost: tuple[int, int] = (3, 12)
    unit_cost: tuple[int, int] = (1, 3)
    supply_frac: tuple[float, float] = (0.5, 0.9)
    budget_frac: tuple[float, float] = (0.8, 1.4)
    theta: float = 1.0
    alpha: float = 1.0


def _cluster_counts(num_clusters: int, zones_per_cluster) -> list[int]:
    # A (lo, hi) range targets num_clusters * mean(lo, hi) total zones,
    # split as evenly as possible; the split is independent of the seed.
    if isinstance(zones_per_cluster, int):
        if zones_per_cluster < 1:
            raise ValueError("zones_per_cluster must be >= 1")
        return [zones_per_cluster] * num_clusters
    lo, hi = zones_per_cluster
    if lo < 1 or hi < lo:
        raise ValueError("zones_per_cluster range must satisfy 1 <= lo <= hi")
    total = int(round(num_clusters * (lo + hi) / 2.0))
    base, rem = divmod(total, num_clusters)
    return [base + 1] * rem + [base] * (num_clusters - rem)


def generate_clustered(
    seed: int,
    num_clusters: int,
    zones_per_cluster,
    num_sites: int,
    spread: float = 1.0,
    params: GeneratorParams | None = None,
) -> Instance:
    """Deterministic synthetic instance with planted, well-separated clusters.

    Zone centers are drawn around ``num_clusters`` centroids placed on a ring
    whose radius keeps adjacent centroids at least eight spreads apart. The
    first min(num_clusters, num_sites) sites are placed within ``spread`` of
    distinct centroids; any remaining sites are scattered over the bounding
    region. ``zones_per_cluster`` is an int or an inclusive (lo, hi) range.
    """
    if num_clusters < 1 or num_sites < 1:
        raise ValueError("num_clusters and num_sites must be >= 1")
    if spread <= 0:
        raise ValueError("spread must be positive")
    p = params or GeneratorParams()
    counts = _cluster_counts(num_clusters, zones_per_cluster)
    rng = np.random.default_rng(seed)

    if num_clusters == 1:
        centers = np.zeros((1, 2))
    else:
        sep = 8.0 * spread
        radius = sep / (2.0 * math.sin(math.pi / num_clusters))
        base_angle = rng.uniform(0.0, 2.0 * math.pi)
        angles = base_angle + 2.0 * math.pi * np.arange(num_clusters) / num_clusters
        centers = radius * np.column_stack([np.cos(angles), np.sin(angles)])

    zones: list[Zone] = []
    for c, count in enumerate(counts):
        offsets = rng.normal(0.0, spread / 2.0, size=(count, 2))
        demands = rng.integers(p.demand[0], p.demand[1] + 1, size=count)
        for off, d in zip(offsets, demands):
            zid = len(zones) + 1
            zones.append(Zone(zid, float(centers[c, 0] + off[0]), float(centers[c, 1] + off[1]), int(d)))
    if all(z.demand == 0 for z in zones):
        z0 = zones[0]
        zones[0] = Zone(z0.id, z0.x, z0.y, max(1, p.demand[0]))

    site_xy: list[tuple[float, float]] = []
    for c in range(min(num_clusters, num_sites)):
        r = 0.45 * spread * math.sqrt(rng.uniform())
        ang = rng.uniform(0.0, 2.0 * math.pi)
        site_xy.append((float(centers[c, 0] + r * math.cos(ang)), float(centers[c, 1] + r * math.sin(ang))))
    if num_sites > num_clusters:
        margin = 2.0 * spread
        lo_x, hi_x = centers[:, 0].min() - margin, centers[:, 0].max() + margin
        lo_y, hi_y = centers[:, 1].min() - margin, centers[:, 1].max() + margin
        for _ in range(num_sites - num_clusters):
            site_xy.append((float(rng.uniform(lo_x, hi_x)), float(rng.uniform(lo_y, hi_y))))

    caps = rng.integers(p.capacity[0], p.capacity[1] + 1, size=num_sites)
    fixed = rng.integers(p.fixed_cost[0], p.fixed_cost[1] + 1, size=num_sites)
    unit = rng.integers(p.unit_cost[0], p.unit_cost[1] + 1, size=num_sites)
    sites = tuple(
        Site(i + 1, site_xy[i][0], site_xy[i][1], int(caps[i]), float(fixed[i]), float(unit[i]))
        for i in range(num_sites)
    )

    total_demand = sum(z.demand for z in zones)
    supply = int(round(rng.uniform(*p.supply_frac) * total_demand))
    mean_unit = float(np.mean(unit)) if num_sites else 0.0
    budget = float(int(round(rng.uniform(*p.budget_frac) * (float(fixed.sum()) + supply * mean_unit))))

    instance = Instance(
        zones=tuple(zones),
        sites=sites,
        supply=max(0, supply),
        budget=max(0.0, budget),
        theta=p.theta,
        alpha=p.alpha,
    )
    report = validate(instance)
    if not report.ok:  # construction guarantees this never fires
        raise ValidationError(report)
    return instance


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise InstanceFormatError(f"missing field '{key}' in {where}")
    return obj[key]


def _as_int(value, key: str, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceFormatError(f"field '{key}' in {where} must be an integer")
    return value


def _as_number(value, key: str, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceFormatError(f"field '{key}' in {where} must be a number")
    return float(value)


def load(path) -> Instance:
    """Load an instance JSON file, raising on parse or validation failure."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InstanceFormatError("instance file root must be a JSON object")

    where = "instance"
    supply = _as_int(_require(data, "supply", where), "supply", where)
    budget = _as_number(_require(data, "budget", where), "budget", where)
    theta = _as_number(_require(data, "theta", where), "theta", where)
    alpha = _as_number(_require(data, "alpha", where), "alpha", where)

    zones_raw = _require(data, "zones", where)
    sites_raw = _require(data, "sites", where)
    if not isinstance(zones_raw, list) or not isinstance(sites_raw, list):
        raise InstanceFormatError("'zones' and 'sites' must be arrays")

    zones = []
    for idx, zr in enumerate(zones_raw):
        w = f"zones[{idx}]"
        zones.append(
            Zone(
                id=_as_int(_require(zr, "id", w), "id", w),
                x=_as_number(_require(zr, "x", w), "x", w),
                y=_as_number(_require(zr, "y", w), "y", w),
                demand=_as_int(_require(zr, "demand", w), "demand", w),
            )
        )
    sites = []
    for idx, sr in enumerate(sites_raw):
        w = f"sites[{idx}]"
        sites.append(
            Site(
                id=_as_int(_require(sr, "id", w), "id", w),
                x=_as_number(_require(sr, "x", w), "x", w),
                y=_as_number(_require(sr, "y", w), "y", w),
                capacity=_as_int(_require(sr, "capacity", w), "capacity", w),
                fixed_cost=_as_number(_require(sr, "fixed_cost", w), "fixed_cost", w),
                unit_cost=_as_number(_require(sr, "unit_cost", w), "unit_cost", w),
            )
        )

    instance = Instance(tuple(zones), tuple(sites), supply, budget, theta, alpha)
    report = validate(instance)
    if not report.ok:
        raise ValidationError(report)
    return instance


def save(instance: Instance, path) -> None:
    """Write the instance as JSON; round-trips exactly through load()."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(instance.to_dict(), indent=2) + "\n", encoding="utf-8")
