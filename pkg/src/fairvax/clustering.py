"""Weighted clustering, silhouette model selection, and site-to-cluster picks.

Zones and candidate sites are clustered together: each zone carries its
demand as weight, each site carries weight one. The cluster count is chosen
by the highest mean silhouette over a sweep, then capped at the number of
candidate sites. Sites are scored per cluster by standardized capacity over
the product of standardized centroid distance, fixed cost, and unit cost, and
each cluster greedily takes its best still-available site, highest current
top score first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .instance import Instance

__all__ = [
    "WeightedPoint",
    "Clustering",
    "ClusterSite",
    "ClusterSiteSelection",
    "build_points",
    "weighted_lloyd",
    "silhouette_score",
    "select_k",
    "score_sites",
    "assign_sites",
    "SCORE_EPSILON",
]

SCORE_EPSILON = 1e-6  # replaces exact zeros after min-max standardization
_MAX_ITER = 100


@dataclass(frozen=True)
class WeightedPoint:
    x: float
    y: float
    weight: float
    kind: str  # "zone" or "site"
    ref_id: int


@dataclass(frozen=True, eq=False)
class Clustering:
    k: int
    centroids: tuple[tuple[float, float], ...]
    zone_membership: dict[int, int]  # zone id -> cluster index (0-based)
    site_membership: dict[int, int]
    silhouette: float | None
    wcss: float
    wcss_history: tuple[float, ...]

    def members_of(self, cluster: int) -> tuple[int, ...]:
        return tuple(sorted(j for j, c in self.zone_membership.items() if c == cluster))


def build_points(instance: Instance) -> tuple[WeightedPoint, ...]:
    """Zones (weighted by demand) followed by sites (weight one)."""
    pts = [WeightedPoint(z.x, z.y, float(z.demand), "zone", z.id) for z in instance.zones]
    pts += [WeightedPoint(s.x, s.y, 1.0, "site", s.id) for s in instance.sites]
    return tuple(pts)


def _seed_centroids(coords: np.ndarray, weights: np.ndarray, k: int, rng) -> np.ndarray:
    # Weighted analogue of careful seeding: first center drawn by weight,
    # later centers by weight times squared distance to the nearest center.
    p = len(coords)
    total = weights.sum()
    probs = weights / total if total > 0 else np.full(p, 1.0 / p)
    centers = [coords[rng.choice(p, p=probs)]]
    for _ in range(1, k):
        d2 = np.min(
            ((coords[:, None, :] - np.array(centers)[None, :, :]) ** 2).sum(-1), axis=1
        )
        mass = weights * d2
        s = mass.sum()
        if s > 0:
            idx = rng.choice(p, p=mass / s)
        else:
            idx = int(np.argmax(d2))
        centers.append(coords[idx])
    return np.array(centers, dtype=float)


def weighted_lloyd(points, k: int, seed) -> Clustering:
    """Weighted Lloyd iterations to a membership fixpoint.

    Deterministic for a fixed seed. Centroids are weighted means of their
    members (plain means for clusters whose members all have zero weight).
    An emptied cluster is reseeded at the point farthest from its assigned
    centroid. The recorded weighted within-cluster sum of squares is
    non-increasing across iterations.
    """
    points = tuple(points)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(points):
        raise ValueError("k cannot exceed the number of points")
    coords = np.array([[p.x, p.y] for p in points], dtype=float)
    weights = np.array([p.weight for p in points], dtype=float)
    rng = np.random.default_rng(seed)
    centers = _seed_centroids(coords, weights, k, rng)

    prev_labels = None
    history: list[float] = []
    labels = np.zeros(len(points), dtype=int)
    for _ in range(_MAX_ITER):
        d2 = ((coords[:, None, :] - centers[None, :, :]) ** 2).sum(-1)
        labels = np.argmin(d2, axis=1)
        empties = [c for c in range(k) if not np.any(labels == c)]
        if empties:
            repairs = []
            taken: set[int] = set()
            for c in empties:
                own = d2[np.arange(len(points)), labels].copy()
                own[list(taken)] = -1.0
                far = int(np.argmax(own))
                centers[c] = coords[far]
                taken.add(far)
                repairs.append((c, far))
            d2 = ((coords[:, None, :] - centers[None, :, :]) ** 2).sum(-1)
            labels = np.argmin(d2, axis=1)
            # a repaired centroid coincident with another one loses the
            # argmin tie; pin each repair point so its cluster is non-empty
            for c, far in repairs:
                labels[far] = c
        history.append(float((weights * d2[np.arange(len(points)), labels]).sum()))
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            break
        prev_labels = labels
        for c in range(k):
            members = labels == c
            if not members.any():
                continue  # emptied this round; next iteration reseats it
            wsum = weights[members].sum()
            if wsum > 0:
                centers[c] = (weights[members, None] * coords[members]).sum(0) / wsum
            else:
                centers[c] = coords[members].mean(0)

    zone_membership = {
        p.ref_id: int(labels[i]) for i, p in enumerate(points) if p.kind == "zone"
    }
    site_membership = {
        p.ref_id: int(labels[i]) for i, p in enumerate(points) if p.kind == "site"
    }
    return Clustering(
        k=k,
        centroids=tuple((float(c[0]), float(c[1])) for c in centers),
        zone_membership=zone_membership,
        site_membership=site_membership,
        silhouette=None,
        wcss=history[-1],
        wcss_history=tuple(history),
    )


def _labels_for(points, clustering: Clustering) -> list[int]:
    out = []
    for p in points:
        members = (
            clustering.zone_membership if p.kind == "zone" else clustering.site_membership
        )
        out.append(members[p.ref_id])
    return out


def silhouette_score(points, clustering: Clustering) -> float:
    """Unweighted mean silhouette over all points (zones and sites alike).

    Per point: (b - a) / max(a, b) with a the mean distance to its own
    cluster and b the smallest mean distance to another cluster; 0/0 counts
    as 0, and a point alone in its cluster scores 0. Requires k >= 2.
    """
    points = tuple(points)
    if clustering.k < 2:
        raise ValueError("silhouette requires at least two clusters")
    labels = _labels_for(points, clustering)
    coords = np.array([[p.x, p.y] for p in points], dtype=float)
    dist = np.hypot(
        coords[:, None, 0] - coords[None, :, 0], coords[:, None, 1] - coords[None, :, 1]
    )
    labels_arr = np.array(labels)
    scores = []
    for i in range(len(points)):
        same = labels_arr == labels_arr[i]
        n_same = same.sum() - 1
        if n_same == 0:
            scores.append(0.0)
            continue
        a = dist[i, same].sum() / n_same
        b = math.inf
        for c in range(clustering.k):
            if c == labels_arr[i]:
                continue
            other = labels_arr == c
            if other.any():
                b = min(b, float(dist[i, other].mean()))
        if math.isinf(b):  # every other cluster is empty
            scores.append(0.0)
            continue
        denom = max(a, b)
        scores.append(0.0 if denom == 0 else (b - a) / denom)
    return float(np.mean(scores))


def _best_of_restarts(points, k: int, seed: int, restarts: int) -> Clustering:
    best = None
    for r in range(restarts):
        run = weighted_lloyd(points, k, np.random.SeedSequence([seed, k, r]))
        if best is None or run.wcss < best.wcss:
            best = run
    return best


def select_k(points, k_range, n_sites: int, seed: int, restarts: int = 4) -> Clustering:
    """Silhouette sweep over k, then cap the cluster count at n_sites.

    Ties go to the smaller k. If the cap forces fewer clusters than the
    sweep winner, the points are re-clustered at k = n_sites. When no k >= 2
    is admissible (too few points or a single site) a single cluster is used
    and the silhouette is undefined.
    """
    points = tuple(points)
    valid = sorted({k for k in k_range if 2 <= k <= len(points) - 1})
    chosen: Clustering | None = None
    best_sil = None
    for k in valid:
        run = _best_of_restarts(points, k, seed, restarts)
        sil = silhouette_score(points, run)
        run = replace(run, silhouette=sil)
        if best_sil is None or sil > best_sil:
            best_sil = sil
            chosen = run
    if chosen is None:
        k = 1 if n_sites == 1 or len(points) < 3 else min(n_sites, len(points) - 1)
        run = _best_of_restarts(points, k, seed, restarts)
        if k >= 2:
            run = replace(run, silhouette=silhouette_score(points, run))
        return run
    if chosen.k > n_sites:
        run = _best_of_restarts(points, n_sites, seed, restarts)
        if n_sites >= 2 and n_sites <= len(points) - 1:
            run = replace(run, silhouette=silhouette_score(points, run))
        return run
    return chosen


def _standardize(values: np.ndarray) -> np.ndarray:
    lo = values.min()
    span = values.max() - lo
    out = (values - lo) / span if span > 0 else np.zeros_like(values, dtype=float)
    out[out == 0.0] = SCORE_EPSILON
    return out


def score_sites(instance: Instance, clustering: Clustering) -> dict[int, list[tuple[int, float]]]:
    """Per-cluster site ranking by standardized capacity / (dist * costs).

    Capacity, fixed cost, and unit cost are min-max standardized across
    sites; centroid distances across all (site, cluster) pairs. Exact zeros
    are floored at SCORE_EPSILON so the cheapest or nearest site keeps a
    finite, top-ranked score instead of dividing by zero.
    """
    sites = instance.sites
    cap = _standardize(np.array([s.capacity for s in sites], dtype=float))
    fc = _standardize(np.array([s.fixed_cost for s in sites], dtype=float))
    vc = _standardize(np.array([s.unit_cost for s in sites], dtype=float))
    cents = np.array(clustering.centroids, dtype=float)
    sx = np.array([s.x for s in sites])
    sy = np.array([s.y for s in sites])
    dist = np.hypot(sx[:, None] - cents[None, :, 0], sy[:, None] - cents[None, :, 1])
    dist = _standardize(dist)

    ranked: dict[int, list[tuple[int, float]]] = {}
    for c in range(clustering.k):
        scores = cap / (dist[:, c] * fc * vc)
        order = sorted(
            ((s.id, float(scores[s.id - 1])) for s in sites),
            key=lambda t: (-t[1], t[0]),
        )
        ranked[c] = order
    return ranked


@dataclass(frozen=True)
class ClusterSite:
    cluster: int
    site_id: int
    capacity: int
    fixed_cost: float
    unit_cost: float
    member_zones: tuple[int, ...]
    demand: int


@dataclass(frozen=True)
class ClusterSiteSelection:
    chosen: tuple[ClusterSite, ...]

    @property
    def site_ids(self) -> tuple[int, ...]:
        return tuple(cs.site_id for cs in self.chosen)

    def cluster_of_zone(self, zone_id: int) -> ClusterSite:
        for cs in self.chosen:
            if zone_id in cs.member_zones:
                return cs
        raise KeyError(zone_id)


def assign_sites(
    instance: Instance,
    clustering: Clustering,
    ranked: dict[int, list[tuple[int, float]]],
) -> ClusterSiteSelection:
    """One distinct site per cluster, processed by descending current top score.

    Each cluster takes its highest-ranked site not already taken; score ties
    and equal top scores break toward the lower index. The chosen site's
    capacity and costs become the cluster's parameters, and member demand is
    aggregated.
    """
    k = clustering.k
    if k > instance.num_sites:
        raise ValueError("more clusters than candidate sites")
    taken: set[int] = set()
    picks: dict[int, int] = {}
    pending = set(range(k))
    while pending:
        best_cluster = None
        best_site = None
        best_score = None
        for c in sorted(pending):
            for site_id, score in ranked[c]:
                if site_id not in taken:
                    if best_score is None or score > best_score:
                        best_cluster, best_site, best_score = c, site_id, score
                    break
        picks[best_cluster] = best_site
        taken.add(best_site)
        pending.remove(best_cluster)

    chosen = []
    for c in range(k):
        site = instance.site_by_id(picks[c])
        members = clustering.members_of(c)
        demand = sum(instance.zone_by_id(j).demand for j in members)
        chosen.append(
            ClusterSite(
                cluster=c,
                site_id=site.id,
                capacity=site.capacity,
                fixed_cost=site.fixed_cost,
                unit_cost=site.unit_cost,
                member_zones=members,
                demand=demand,
            )
        )
    return ClusterSiteSelection(chosen=tuple(chosen))
