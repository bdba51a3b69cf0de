"""Command-line front door.

Subcommands: solve, validate, export, gen-grid.  Exit codes are a stable
contract:

    0  success (optimal solve / valid plan)
    1  usage or input error
    2  proven infeasible
    3  time limit hit
    4  plan validation failed

Verbosity comes from the HMWTPP_LOG environment variable (DEBUG, INFO,
WARNING, ...); every run is deterministic given its inputs and --seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import exports
from .encoder import EncodeOptions, encode
from .graph import build_graph, dump_graph
from .instances import (
    GridError,
    TsplibRecipe,
    generate_grid,
    grid_to_instance,
    load_grid,
    load_instance,
    native_weigher,
    parse_tsplib,
    plan_geojson,
    save_grid,
    tsplib_to_instance,
)
from .model import validate_instance
from .routes import validate_plan
from .run import InstanceDefectsError, plan_instance
from .solver import SolveLimits

log = logging.getLogger("hmwtpp")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_TIMEOUT = 3
EXIT_INVALID_PLAN = 4

DEFAULT_SEED = 0


def _setup_logging() -> None:
    level = os.environ.get("HMWTPP_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load_problem(args) -> tuple:
    """Resolve an input path to (instance, weigher, grid-or-None)."""
    path = Path(args.input)
    if not path.exists():
        raise FileNotFoundError(f"input file {path} does not exist")
    if path.suffix.lower() == ".tsp":
        prob = parse_tsplib(path.read_text())
        recipe = None
        if args.compat or args.order_pairs or args.precedence_pairs:
            recipe = TsplibRecipe(args.compat, args.order_pairs,
                                  args.precedence_pairs, args.seed)
        inst, weigher = tsplib_to_instance(
            prob, n_workers=args.workers, speed=args.speed,
            base_index=args.base_index, recipe=recipe, rounded=args.rounded,
        )
        return inst, weigher, None
    doc = json.loads(path.read_text())
    kind = doc.get("kind")
    if kind == "grid":
        grid = load_grid(path)
        towers = args.towers.split(",") if args.towers else None
        segments = args.segments.split(",") if args.segments else None
        inst, weigher = grid_to_instance(grid, towers=towers, segments=segments)
        return inst, weigher, grid
    if kind == "instance":
        ni = load_instance(path)
        return ni.instance, native_weigher(ni), None
    raise ValueError(f"cannot tell what {path} is: kind={kind!r}")


def _add_input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="instance file (.json native/grid or .tsp)")
    p.add_argument("--workers", type=int, default=1, help="team size for .tsp inputs")
    p.add_argument("--speed", type=float, default=10.0, help="travel speed for .tsp inputs")
    p.add_argument("--base-index", type=int, default=0, help="base node for .tsp inputs")
    p.add_argument("--rounded", action="store_true",
                   help="use convention-rounded integer distances for .tsp inputs")
    p.add_argument("--compat", type=int, default=0, help="seeded compatibility constraints (.tsp)")
    p.add_argument("--order-pairs", type=int, default=0, help="seeded order pairs (.tsp)")
    p.add_argument("--precedence-pairs", type=int, default=0, help="seeded precedence pairs (.tsp)")
    p.add_argument("--towers", default="", help="grid tower selection, comma separated")
    p.add_argument("--segments", default="", help="grid segment selection, comma separated")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)


def cmd_solve(args) -> int:
    inst, weigher, grid = _load_problem(args)
    opts = EncodeOptions(
        sec_mode=args.sec,
        objective=args.objective,
        waiting=True if args.waiting else None,
        energy_budget=True if args.energy_budget else None,
    )
    limits = SolveLimits(time_limit=args.time_limit, gap_limit=args.gap)
    if args.export_lp or args.dump_graph:
        graph = build_graph(inst, weigher)
        if args.dump_graph:
            Path(args.dump_graph).write_text(dump_graph(graph))
            log.info("graph dumped to %s", args.dump_graph)
        if args.export_lp:
            model = encode(graph, opts)
            Path(args.export_lp).write_text(exports.write_lp(model))
            log.info("model exported to %s", args.export_lp)
    try:
        run = plan_instance(inst, weigher, opts, limits)
    except InstanceDefectsError as exc:
        print(f"instance has defects: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out) if args.out else Path(args.input).with_suffix("")
    report_text = exports.write_report(run.report) + f"seed {args.seed}\n"
    exports.save(report_text, f"{out}.report.txt")
    print(run.report.summary())
    if run.plan is not None:
        exports.save(exports.write_plan(run.plan, inst.name), f"{out}.plan.txt")
        exports.save(exports.write_solution(run.report.values), f"{out}.sol.txt")
        if grid is not None:
            geo = plan_geojson(run.plan, grid)
            exports.save(json.dumps(geo, indent=2, sort_keys=True) + "\n",
                         f"{out}.plan.geojson")
        if run.validation is not None and not run.validation.passed:
            print(str(run.validation), file=sys.stderr)
            return EXIT_INVALID_PLAN
    if run.report.status == "infeasible":
        return EXIT_INFEASIBLE
    if run.report.status in ("timeout", "iteration_limit"):
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_validate(args) -> int:
    inst, weigher, _ = _load_problem(args)
    graph = build_graph(inst, weigher)
    plan, name = exports.read_plan(Path(args.plan).read_text(), graph)
    if name and name != inst.name:
        print(f"plan was produced for {name!r}, not {inst.name!r}", file=sys.stderr)
        return EXIT_USAGE
    rep = validate_plan(plan, inst, graph, objective=args.objective)
    print(str(rep))
    return EXIT_OK if rep.passed else EXIT_INVALID_PLAN


def cmd_export(args) -> int:
    inst, weigher, _ = _load_problem(args)
    defects = validate_instance(inst)
    if defects:
        print("instance has defects: " + "; ".join(map(str, defects)), file=sys.stderr)
        return EXIT_USAGE
    graph = build_graph(inst, weigher)
    opts = EncodeOptions(
        sec_mode=args.sec,
        objective=args.objective,
        waiting=True if args.waiting else None,
        energy_budget=True if args.energy_budget else None,
    )
    model = encode(graph, opts)
    out = Path(args.out) if args.out else Path(args.input).with_suffix("")
    exports.save(exports.write_lp(model), f"{out}.lp")
    exports.save(exports.write_mps(model, name=inst.name), f"{out}.mps")
    print(f"wrote {out}.lp and {out}.mps")
    return EXIT_OK


def cmd_gen_grid(args) -> int:
    if args.towers < 1:
        print("refused: empty selection (need at least one tower)", file=sys.stderr)
        return EXIT_USAGE
    wind = tuple(float(p) for p in args.wind.split(",")) if args.wind else (0.0, 0.0)
    try:
        grid = generate_grid(
            args.towers,
            n_segments=args.grid_segments,
            seed=args.seed,
            spacing=args.spacing,
            multirotors=args.multirotors,
            vtols=args.vtols,
            wind=wind,
        )
    except GridError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = args.out or f"grid_t{args.towers}_s{args.seed}.json"
    save_grid(grid, out)
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hmwtpp", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="plan an instance and write report/plan files")
    _add_input_flags(ps)
    ps.add_argument("--sec", choices=("mtz", "dfj"), default="mtz")
    ps.add_argument("--objective", choices=("mtm", "total"), default="mtm")
    ps.add_argument("--time-limit", type=float, default=600.0)
    ps.add_argument("--gap", type=float, default=0.0)
    ps.add_argument("--waiting", action="store_true", help="enable waiting points")
    ps.add_argument("--energy-budget", action="store_true", help="enforce energy budgets")
    ps.add_argument("--export-lp", default="", help="also write the LP model here")
    ps.add_argument("--dump-graph", default="", help="also write the graph dump here")
    ps.add_argument("--out", default="", help="output path prefix")
    ps.set_defaults(func=cmd_solve)

    pv = sub.add_parser("validate", help="check a plan file against its instance")
    pv.add_argument("plan", help="plan file produced by solve")
    _add_input_flags(pv)
    pv.add_argument("--objective", choices=("mtm", "total"), default="mtm")
    pv.set_defaults(func=cmd_validate)

    pe = sub.add_parser("export", help="write LP and MPS files for an instance")
    _add_input_flags(pe)
    pe.add_argument("--sec", choices=("mtz", "dfj"), default="mtz")
    pe.add_argument("--objective", choices=("mtm", "total"), default="mtm")
    pe.add_argument("--waiting", action="store_true")
    pe.add_argument("--energy-budget", action="store_true")
    pe.add_argument("--out", default="", help="output path prefix")
    pe.set_defaults(func=cmd_export)

    pg = sub.add_parser("gen-grid", help="generate a seeded synthetic power grid")
    pg.add_argument("--towers", type=int, required=True)
    pg.add_argument("--segments", type=int, default=None, dest="grid_segments")
    pg.add_argument("--seed", type=int, default=DEFAULT_SEED)
    pg.add_argument("--spacing", type=float, default=300.0)
    pg.add_argument("--multirotors", type=int, default=2)
    pg.add_argument("--vtols", type=int, default=0)
    pg.add_argument("--wind", default="", help="wind vector, e.g. 2,1")
    pg.add_argument("--out", default="", help="output grid file")
    pg.set_defaults(func=cmd_gen_grid)
    return ap


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError, GridError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
