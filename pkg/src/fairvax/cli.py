"""Command line interface: generate, solve, compare, report."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import harness, instance as inst_mod, report as report_mod
from .exact import InstanceTooLargeError, solve_exact
from .formulation import Solution
from .instance import GeneratorParams, compute_distances, generate_clustered
from .reduced import ReducedInfeasibleError, heuristic_solve


def _parse_zones_per_cluster(text: str):
    if "-" in text:
        lo, hi = text.split("-", 1)
        return (int(lo), int(hi))
    return int(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairvax",
        description="Vaccination site selection and dose allocation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic clustered instance")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--clusters", type=int, required=True)
    gen.add_argument("--zones-per-cluster", type=_parse_zones_per_cluster,
                     required=True, metavar="N|LO-HI")
    gen.add_argument("--sites", type=int, required=True)
    gen.add_argument("--spread", type=float, default=1.0)
    gen.add_argument("--out", type=Path, required=True)

    solve = sub.add_parser("solve", help="solve an instance file")
    solve.add_argument("--instance", type=Path, required=True)
    solve.add_argument("--mode", choices=["exact", "heuristic"], required=True)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--k-min", type=int, default=2)
    solve.add_argument("--k-max", type=int, default=8)
    solve.add_argument("--theta", type=float, default=None,
                       help="override the instance's fill-equity weight")
    solve.add_argument("--alpha", type=float, default=None,
                       help="override the instance's distance-equity weight")
    solve.add_argument("--out", type=Path, required=True)

    cmp_p = sub.add_parser("compare", help="run exact and heuristic, write a report")
    cmp_p.add_argument("--instance", type=Path, required=True)
    cmp_p.add_argument("--seed", type=int, default=0)
    cmp_p.add_argument("--k-min", type=int, default=2)
    cmp_p.add_argument("--k-max", type=int, default=8)
    cmp_p.add_argument("--out-csv", type=Path, required=True)
    cmp_p.add_argument("--out-json", type=Path, required=True)

    rep = sub.add_parser("report", help="render a solution map to SVG")
    rep.add_argument("--solution", type=Path, required=True)
    rep.add_argument("--instance", type=Path, required=True)
    rep.add_argument("--out-svg", type=Path, required=True)

    return parser


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _cmd_generate(args) -> int:
    inst = generate_clustered(
        seed=args.seed,
        num_clusters=args.clusters,
        zones_per_cluster=args.zones_per_cluster,
        num_sites=args.sites,
        spread=args.spread,
        params=GeneratorParams(),
    )
    inst_mod.save(inst, args.out)
    print(f"wrote instance with m={inst.num_zones} zones, n={inst.num_sites} sites "
          f"to {args.out}")
    return 0


def _cmd_solve(args) -> int:
    inst = inst_mod.load(args.instance)
    if args.theta is not None:
        inst = replace(inst, theta=args.theta)
    if args.alpha is not None:
        inst = replace(inst, alpha=args.alpha)
    dm = compute_distances(inst)

    if args.mode == "exact":
        cfg = harness.default_solve_config()
        try:
            result = solve_exact(inst, dm, cfg)
        except InstanceTooLargeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        payload = {"mode": "exact", "status": result.status,
                   "nodes_explored": result.nodes_explored,
                   "wall_time_s": result.wall_time}
        if result.best is None:
            payload["solution"] = None
            _write_json(args.out, payload)
            print(f"exact solve: {result.status}")
            return 0 if result.status != "infeasible" else 1
        payload.update(result.best.to_dict())
        _write_json(args.out, payload)
        print(f"exact solve: {result.status}, objective "
              f"{result.best.objective:.6f}, wrote {args.out}")
        return 0

    try:
        heur = heuristic_solve(
            inst, seed=args.seed,
            k_range=range(args.k_min, args.k_max + 1), dm=dm,
        )
    except ReducedInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    payload = {"mode": "heuristic"}
    payload.update(heur.evaluated.to_dict())
    payload["diagnostics"] = heur.diagnostics()
    _write_json(args.out, payload)
    print(f"heuristic solve: k={heur.clustering.k}, objective "
          f"{heur.evaluated.objective:.6f}, wrote {args.out}")
    return 0


def _cmd_compare(args) -> int:
    inst = inst_mod.load(args.instance)
    report = harness.compare(
        inst, seed=args.seed,
        k_range=range(args.k_min, args.k_max + 1),
        label=args.instance.stem,
    )
    harness.write_report_csv(report, args.out_csv)
    harness.write_report_json(report, args.out_json)
    if report.gap_abs is not None:
        print(f"gap {report.gap_abs:.3e} (rel {report.gap_rel:.3e}), "
              f"sites_match={report.sites_match}")
    else:
        print(f"exact skipped: {report.exact_skipped_reason}")
    print(f"wrote {args.out_csv} and {args.out_json}")
    return 0


def _cmd_report(args) -> int:
    inst = inst_mod.load(args.instance)
    data = json.loads(args.solution.read_text(encoding="utf-8"))
    solution = Solution.from_dict(data)
    report_mod.render_solution_svg(
        inst, solution, args.out_svg, title=args.instance.stem
    )
    print(f"wrote {args.out_svg}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "solve": _cmd_solve,
        "compare": _cmd_compare,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except (inst_mod.InstanceFormatError, inst_mod.ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
