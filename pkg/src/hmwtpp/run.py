"""End-to-end pipeline: instance -> graph -> model -> solve -> plan."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .encoder import EncodeOptions, MilpModel, encode
from .graph import MultiGraph, Weigher, build_graph
from .model import ProblemInstance, validate_instance
from .routes import Plan, ValidationReport, extract_plan, validate_plan
from .solver import SolveLimits, SolveReport, dfj_loop, solve_milp


class InstanceDefectsError(Exception):
    def __init__(self, defects):
        self.defects = defects
        super().__init__("; ".join(str(d) for d in defects))


@dataclass
class PlanRun:
    graph: MultiGraph
    model: MilpModel
    report: SolveReport
    plan: Plan | None
    validation: ValidationReport | None


def plan_instance(
    inst: ProblemInstance,
    weigher: Weigher,
    opts: EncodeOptions | None = None,
    limits: SolveLimits | None = None,
) -> PlanRun:
    """Validate, build, encode, solve with the mode-appropriate driver, then
    extract and cross-validate the plan."""
    opts = opts or EncodeOptions()
    # option overrides become instance truth so the validator sees the same
    # flags the encoder used
    flags = {}
    if opts.waiting is not None and opts.waiting != inst.waiting:
        flags["waiting"] = opts.waiting
    if opts.energy_budget is not None and opts.energy_budget != inst.energy_budget:
        flags["energy_budget"] = opts.energy_budget
    if flags:
        inst = replace(inst, **flags)
        opts = replace(opts, waiting=None, energy_budget=None)
    defects = validate_instance(inst)
    if defects:
        raise InstanceDefectsError(defects)
    graph = build_graph(inst, weigher)
    model = encode(graph, opts)
    if opts.sec_mode == "dfj":
        report = dfj_loop(model, graph, limits)
    else:
        report = solve_milp(model, limits)
    plan = None
    validation = None
    if report.values is not None:
        plan = extract_plan(report.values, graph, model)
        validation = validate_plan(plan, inst, graph, objective=opts.objective)
    return PlanRun(graph, model, report, plan, validation)
