"""Solution map rendering: zones, candidate/selected sites, assignment edges.

Figures are written as SVG (vector, headless Agg backend). Element groups
carry stable ids (zone-<id>, site-<id>, edge-zone-<id>) so the output can be
inspected structurally; the file timestamp is suppressed and the hash salt
pinned so renders are reproducible.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .formulation import Solution  # noqa: E402
from .instance import Instance  # noqa: E402

__all__ = ["render_solution_svg"]

_PALETTE = plt.get_cmap("tab10").colors


def render_solution_svg(
    instance: Instance,
    solution: Solution,
    path,
    title: str | None = None,
) -> None:
    """Scatter map: demand discs, squares for sites, one edge per zone.

    Zones are discs scaled by demand and colored by their assigned site's
    position in the open-site list; open sites are filled squares in the
    same color, unselected candidates hollow gray squares.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    plt.rcParams["svg.hashsalt"] = "fairvax"

    open_ids = list(solution.open_sites)
    color_of_site = {sid: _PALETTE[i % len(_PALETTE)] for i, sid in enumerate(open_ids)}

    fig, ax = plt.subplots(figsize=(7.0, 6.0))
    max_demand = max((z.demand for z in instance.zones), default=1) or 1

    for z in instance.zones:
        site = solution.assignment[z.id]
        s = instance.site_by_id(site)
        ax.plot(
            [z.x, s.x], [z.y, s.y],
            color="0.6", linewidth=0.8, zorder=1, gid=f"edge-zone-{z.id}",
        )
    for z in instance.zones:
        color = color_of_site[solution.assignment[z.id]]
        size = 30.0 + 170.0 * (z.demand / max_demand)
        ax.scatter(
            [z.x], [z.y], s=size, color=color, alpha=0.75,
            edgecolors="none", zorder=2, gid=f"zone-{z.id}",
        )
    for s in instance.sites:
        if s.id in color_of_site:
            ax.scatter(
                [s.x], [s.y], s=140, marker="s", color=color_of_site[s.id],
                edgecolors="black", linewidths=0.8, zorder=3, gid=f"site-{s.id}",
            )
        else:
            ax.scatter(
                [s.x], [s.y], s=110, marker="s", facecolors="none",
                edgecolors="0.4", linewidths=1.0, zorder=3, gid=f"site-{s.id}",
            )

    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
