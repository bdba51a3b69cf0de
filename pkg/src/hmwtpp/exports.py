"""Text interchange: LP/MPS model export, solution, report and plan files.

The variable naming scheme (z_<from>_<to>_<worker>, yb_<worker>,
yc_<vertex>_<worker>, p_<vertex>_<worker>, f_<cost>_<vertex>_<worker>,
msigma, wp_<worker>) is stable so external solvers can cross-check models
and their solutions can be re-imported for validation.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

from .encoder import MilpModel
from .graph import MultiGraph
from .routes import Plan, WorkerPlan
from .solver import SolveReport


def _row_name(name: str) -> str:
    # LP/MPS identifiers do not allow square brackets
    return name.replace("[", "(").replace("]", ")")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_lp(model: MilpModel) -> str:
    """CPLEX-style LP text for the full model."""
    lines = ["\\ hmwtpp model export", "Minimize"]
    terms = " + ".join(
        f"{_fmt(coef)} {model.vars[j].name}"
        for j, coef in sorted(model.objective.items())
        if coef != 0.0
    ) or "0 " + model.vars[0].name
    lines.append(f" obj: {terms}")
    lines.append("Subject To")
    sense_txt = {"L": "<=", "G": ">=", "E": "="}
    for con in model.constraints:
        parts = []
        for j, coef in con.coeffs:
            sign = "+" if coef >= 0 else "-"
            parts.append(f"{sign} {_fmt(abs(coef))} {model.vars[j].name}")
        if not parts:
            parts = ["+ 0 " + model.vars[0].name]
        body = " ".join(parts).lstrip("+ ")
        lines.append(f" {_row_name(con.name)}: {body} {sense_txt[con.sense]} {_fmt(con.rhs)}")
    lines.append("Bounds")
    for v in model.vars:
        lines.append(f" {_fmt(v.lb)} <= {v.name} <= {_fmt(v.ub)}")
    binaries = [v.name for v in model.vars if v.kind == "binary"]
    generals = [v.name for v in model.vars if v.kind == "integer"]
    if binaries:
        lines.append("Binaries")
        lines.extend(f" {name}" for name in binaries)
    if generals:
        lines.append("Generals")
        lines.extend(f" {name}" for name in generals)
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_mps(model: MilpModel, name: str = "hmwtpp") -> str:
    """Free-format MPS text for the full model."""
    lines = [f"NAME {name}", "ROWS", " N COST"]
    for con in model.constraints:
        lines.append(f" {con.sense} {_row_name(con.name)}")
    # column-major coefficient table
    cols: dict[int, list[tuple[str, float]]] = {j: [] for j in range(len(model.vars))}
    for con in model.constraints:
        for j, coef in con.coeffs:
            cols[j].append((_row_name(con.name), coef))
    for j, coef in model.objective.items():
        cols[j].append(("COST", coef))
    lines.append("COLUMNS")
    in_int = False
    marker = 0
    for j, v in enumerate(model.vars):
        is_int = v.kind in ("binary", "integer")
        if is_int != in_int:
            tag = "INTORG" if is_int else "INTEND"
            lines.append(f" MARKER{marker} 'MARKER' '{tag}'")
            marker += 1
            in_int = is_int
        for row, coef in cols[j]:
            lines.append(f" {v.name} {row} {_fmt(coef)}")
        if not cols[j]:
            lines.append(f" {v.name} COST 0")
    if in_int:
        lines.append(f" MARKER{marker} 'MARKER' 'INTEND'")
    lines.append("RHS")
    for con in model.constraints:
        if con.rhs != 0.0:
            lines.append(f" RHS {_row_name(con.name)} {_fmt(con.rhs)}")
    lines.append("BOUNDS")
    for v in model.vars:
        if v.kind == "binary":
            lines.append(f" BV BND {v.name}")
        elif v.kind == "integer":
            lines.append(f" LI BND {v.name} {int(v.lb)}")
            lines.append(f" UI BND {v.name} {int(v.ub)}")
        else:
            lines.append(f" LO BND {v.name} {_fmt(v.lb)}")
            lines.append(f" UP BND {v.name} {_fmt(v.ub)}")
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


# -- solution vectors ----------------------------------------------------------

def write_solution(values: Mapping[str, float]) -> str:
    lines = ["# hmwtpp solution v1"]
    for name in sorted(values):
        lines.append(f"{name} {_fmt(values[name])}")
    return "\n".join(lines) + "\n"


def read_solution(text: str) -> dict[str, float]:
    values: dict[str, float] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, _, val = line.partition(" ")
        values[name] = float(val)
    return values


# -- reports ---------------------------------------------------------------------

def write_report(report: SolveReport) -> str:
    lines = [
        "# hmwtpp report v1",
        f"status {report.status}",
        f"objective {_fmt(report.objective) if report.objective is not None else 'none'}",
        f"bound {_fmt(report.bound)}",
        f"gap {_fmt(report.gap)}",
        f"nodes {report.nodes}",
        f"cuts {report.cuts_added}",
        f"wall_time_s {report.wall_time:.3f}",
    ]
    for rnd in report.rounds:
        lines.append(
            f"round {rnd.number} objective={_fmt(rnd.objective)} "
            f"subtours={rnd.subtours} cuts={rnd.cuts_added} nodes={rnd.nodes}"
        )
    return "\n".join(lines) + "\n"


# -- plans -----------------------------------------------------------------------

def write_plan(plan: Plan, instance_name: str = "") -> str:
    lines = ["# hmwtpp plan v1"]
    if instance_name:
        lines.append(f"instance {instance_name}")
    lines.append(f"objective {_fmt(plan.objective)}")
    for wid in sorted(plan.workers):
        wp = plan.workers[wid]
        lines.append(f"worker {wid} active {int(wp.active)} wait {_fmt(wp.wait)}")
        for v in wp.visited():
            lines.append(
                f"visit {v.token} t {_fmt(wp.completion[v])} e {_fmt(wp.energy.get(v, 0.0))}"
            )
    return "\n".join(lines) + "\n"


def read_plan(text: str, graph: MultiGraph) -> tuple[Plan, str]:
    """Parse a plan file back against its graph; returns (plan, instance name)."""
    objective = 0.0
    name = ""
    workers: dict[str, WorkerPlan] = {}
    current: WorkerPlan | None = None

    def close(wp: WorkerPlan | None):
        if wp is None:
            return
        base = graph.worker_base[wp.worker]
        if wp.active:
            route = (base,) + tuple(wp.route) + (base,)
            interior = route[1:-1]
            total_t = wp.wait
            total_e = 0.0
            prev = base
            for v in interior:
                total_t += graph.weight(wp.worker, prev, v, "time")
                if "energy" in graph.instance.cost_types:
                    total_e += graph.weight(wp.worker, prev, v, "energy")
                prev = v
            if interior:
                total_t += graph.weight(wp.worker, prev, base, "time")
                if "energy" in graph.instance.cost_types:
                    total_e += graph.weight(wp.worker, prev, base, "energy")
            workers[wp.worker] = WorkerPlan(
                wp.worker, True, route, wp.completion, wp.energy,
                wp.wait, total_t, total_e)
        else:
            workers[wp.worker] = WorkerPlan(wp.worker, False, (), {}, {}, wp.wait, 0.0, 0.0)

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "instance":
            name = parts[1]
        elif parts[0] == "objective":
            objective = float(parts[1])
        elif parts[0] == "worker":
            close(current)
            current = WorkerPlan(parts[1], parts[3] == "1", [], {}, {},
                                 float(parts[5]), 0.0, 0.0)
        elif parts[0] == "visit":
            if current is None:
                raise ValueError("visit line before any worker line")
            v = graph.vertex(parts[1])
            current.route.append(v)  # type: ignore[attr-defined]
            current.completion[v] = float(parts[3])
            current.energy[v] = float(parts[5])
    close(current)
    for wid in graph.workers():
        if wid not in workers:
            workers[wid] = WorkerPlan(wid, False, (), {}, {}, 0.0, 0.0, 0.0)
    return Plan(objective, dict(sorted(workers.items()))), name


def save(text: str, path: str | Path) -> None:
    Path(path).write_text(text)
