"""Plan extraction, first-principles validation and the exhaustive oracle.

The validator recomputes every schedule with its own forward simulation and
never trusts the partial-cost values under test; that independence is what
lets it act as an oracle for the encoder and solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Iterable, Mapping

from .encoder import MilpModel, z_name
from .graph import MultiGraph, Vertex
from .model import ENERGY, TIME, ProblemInstance

TIME_TOL = 1e-6
ENERGY_TOL = 1e-7

FAMILIES = ("structure", "compatibility", "coverage", "order",
            "precedence", "windows", "energy", "objective")


class ExtractionError(Exception):
    pass


class BruteForceError(Exception):
    pass


@dataclass
class WorkerPlan:
    worker: str
    active: bool
    route: tuple[Vertex, ...]  # base, tasks..., base (empty when inactive)
    completion: dict[Vertex, float]  # service completion times along the route
    energy: dict[Vertex, float]  # cumulative energy at each visited vertex
    wait: float
    total_time: float
    total_energy: float

    def visited(self) -> tuple[Vertex, ...]:
        return self.route[1:-1] if self.route else ()


@dataclass
class Plan:
    objective: float
    workers: dict[str, WorkerPlan]

    def visits(self) -> dict[Vertex, str]:
        """Visited task vertex -> worker id."""
        out: dict[Vertex, str] = {}
        for wid, wp in self.workers.items():
            for v in wp.visited():
                out[v] = wid
        return out


def _simulate(graph: MultiGraph, wid: str, interior: Iterable[Vertex], wait: float
              ) -> tuple[dict[Vertex, float], dict[Vertex, float], float, float]:
    """Forward roll of one route: completion times, cumulative energy, route
    time total (wait included) and energy total."""
    base = graph.worker_base[wid]
    has_energy = ENERGY in graph.instance.cost_types
    completion: dict[Vertex, float] = {}
    energy: dict[Vertex, float] = {}
    t = wait
    e = 0.0
    prev = base
    for v in interior:
        t += graph.weight(wid, prev, v, TIME)
        completion[v] = t
        if has_energy:
            e += graph.weight(wid, prev, v, ENERGY)
        energy[v] = e
        prev = v
    if prev != base or completion:
        t += graph.weight(wid, prev, base, TIME)
        if has_energy:
            e += graph.weight(wid, prev, base, ENERGY)
    return completion, energy, t if completion else 0.0, e


def extract_plan(values: Mapping[str, float], graph: MultiGraph, model: MilpModel) -> Plan:
    """Rebuild per-worker routes from an integral solution vector.

    Completion times come from the tracked partial costs when the model has
    them, otherwise from a forward roll.  All waiting is reported at base
    departure.  A layer whose active edges do not form a single base-anchored
    cycle indicates a solver bug and raises ExtractionError.
    """
    inst = graph.instance
    track_time = ("time" in model.meta.get("track", ()))
    workers: dict[str, WorkerPlan] = {}
    for wid in graph.workers():
        base = graph.worker_base[wid]
        active_edges = [
            (u, v) for u, v in graph.edges(wid)
            if values.get(z_name(wid, u, v), 0.0) > 0.5
        ]
        yb = values.get(f"yb_{wid}", 0.0) > 0.5
        if not yb:
            if active_edges:
                raise ExtractionError(f"worker {wid} is inactive but has active edges")
            workers[wid] = WorkerPlan(wid, False, (), {}, {}, 0.0, 0.0, 0.0)
            continue
        nxt: dict[Vertex, Vertex] = {}
        for u, v in active_edges:
            if u in nxt:
                raise ExtractionError(f"worker {wid} leaves {u.token} twice")
            nxt[u] = v
        if base not in nxt:
            raise ExtractionError(f"worker {wid} is active but never leaves its base")
        route = [base]
        cur = nxt[base]
        while cur != base:
            route.append(cur)
            if cur not in nxt:
                raise ExtractionError(f"worker {wid} route dead-ends at {cur.token}")
            cur = nxt[cur]
            if len(route) > len(active_edges) + 1:
                raise ExtractionError(f"worker {wid} route does not close")
        route.append(base)
        if len(route) - 1 != len(active_edges):
            raise ExtractionError(
                f"worker {wid} has {len(active_edges)} active edges but its "
                f"base cycle uses {len(route) - 1}; disconnected subtour present"
            )
        wait = max(0.0, values.get(f"wp_{wid}", 0.0)) if model.meta.get("waiting") else 0.0
        interior = tuple(route[1:-1])
        completion, energy, total_t, total_e = _simulate(graph, wid, interior, wait)
        if track_time:
            for v in interior:
                completion[v] = values.get(f"f_time_{v.token}_{wid}", completion[v])
        workers[wid] = WorkerPlan(wid, True, tuple(route), completion, energy,
                                  wait, total_t, total_e)

    if model.meta.get("objective") == "total":
        objective = sum(wp.total_time for wp in workers.values())
    else:
        objective = max((wp.total_time for wp in workers.values()), default=0.0)
    return Plan(objective, workers)


@dataclass(frozen=True)
class Finding:
    family: str
    subject: str
    detail: str

    def __str__(self):
        return f"[{self.family}] {self.subject}: {self.detail}"


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)
    families_checked: tuple[str, ...] = FAMILIES

    @property
    def passed(self) -> bool:
        return not self.findings

    def families_failed(self) -> tuple[str, ...]:
        seen: list[str] = []
        for f in self.findings:
            if f.family not in seen:
                seen.append(f.family)
        return tuple(seen)

    def __str__(self):
        if self.passed:
            return "plan valid (" + ", ".join(self.families_checked) + " ok)"
        return "\n".join(str(f) for f in self.findings)


def validate_plan(plan: Plan, inst: ProblemInstance, graph: MultiGraph,
                  objective: str = "mtm") -> ValidationReport:
    """Re-derive every constraint family from first principles.

    Works purely from the instance, the graph weights and the plan's route
    orders plus per-worker wait totals; schedule values inside the plan are
    deliberately ignored.
    """
    rep = ValidationReport()
    add = lambda fam, subj, det: rep.findings.append(Finding(fam, subj, det))

    sim_completion: dict[str, dict[Vertex, float]] = {}
    sim_total: dict[str, float] = {}
    sim_energy: dict[str, float] = {}

    # structure and per-worker simulation
    for wid in graph.workers():
        wp = plan.workers.get(wid)
        if wp is None:
            add("structure", wid, "worker missing from plan")
            continue
        base = graph.worker_base[wid]
        if wp.wait < -TIME_TOL:
            add("structure", wid, f"negative wait {wp.wait}")
        if wp.wait > TIME_TOL and not inst.waiting:
            add("structure", wid, "wait reported but waiting points are disabled")
        if not wp.active:
            if wp.route:
                add("structure", wid, "inactive worker with a route")
            sim_completion[wid] = {}
            sim_total[wid] = 0.0
            sim_energy[wid] = 0.0
            continue
        if len(wp.route) < 3 or wp.route[0] != base or wp.route[-1] != base:
            add("structure", wid, "route must start and end at the worker's base")
            sim_completion[wid] = {}
            sim_total[wid] = 0.0
            sim_energy[wid] = 0.0
            continue
        interior = wp.visited()
        if len(set(interior)) != len(interior):
            add("structure", wid, "route revisits a vertex")
        missing = [
            (u, v) for u, v in zip(wp.route, wp.route[1:])
            if not graph.has_edge(wid, u, v)
        ]
        if missing:
            u, v = missing[0]
            add("structure", wid, f"edge [{u.token} -> {v.token}] does not exist in this layer")
            sim_completion[wid] = {}
            sim_total[wid] = 0.0
            sim_energy[wid] = 0.0
            continue
        completion, _, total_t, total_e = _simulate(graph, wid, interior, wp.wait)
        sim_completion[wid] = completion
        sim_total[wid] = total_t
        sim_energy[wid] = total_e

    # compatibility
    for wid, wp in plan.workers.items():
        w = inst.worker(wid)
        for v in wp.visited():
            if (v.name, v.approach) not in w.compatible:
                add("compatibility", wid, f"{v.token} is not compatible with {wid}")

    # team-wide coverage
    visits_by_task: dict[str, list[Vertex]] = {}
    for wid, wp in plan.workers.items():
        for v in wp.visited():
            visits_by_task.setdefault(v.name, []).append(v)
    for task in inst.sorted_tasks():
        hits = visits_by_task.get(task.id, [])
        if task.mandatory and len(hits) == 0:
            add("coverage", task.id, "mandatory task is never performed")
        if len(hits) > 1:
            add("coverage", task.id, f"task covered {len(hits)} times")

    # order of visit
    for pair in inst.order:
        wp = plan.workers.get(pair.worker)
        if wp is None:
            continue
        pos = {v.name: i for i, v in enumerate(wp.visited())}
        if pair.before in pos and pair.after in pos and pos[pair.before] > pos[pair.after]:
            add("order", pair.worker, f"{pair.after} visited before {pair.before}")

    def task_times(task_id: str) -> tuple[float, float] | None:
        """(completion, service start) of the vertex that performs a task."""
        for wid, comp in sim_completion.items():
            for v, t in comp.items():
                if v.name == task_id:
                    start = t - graph.execution_cost(wid, v, TIME)
                    return t, start
        return None

    # precedence on recomputed times
    for pair in inst.precedence:
        before = task_times(pair.before)
        after = task_times(pair.after)
        if before is None and after is None:
            continue
        if before is not None and after is None:
            add("precedence", f"{pair.before}<={pair.after}",
                f"{pair.before} performed but {pair.after} skipped")
            continue
        if before is None:
            continue
        if before[0] > after[1] + TIME_TOL:
            add("precedence", f"{pair.before}<={pair.after}",
                f"completion {before[0]:.6f} exceeds start {after[1]:.6f}")

    # time windows
    for win in inst.windows:
        hit = None
        for wid, comp in sim_completion.items():
            for v, t in comp.items():
                if v.name == win.task and (not win.approach or v.approach == win.approach):
                    hit = (wid, v, t)
        if hit is None:
            if win.start > TIME_TOL:
                add("windows", win.task, "window requires service but task vertex is unvisited")
            continue
        wid, v, t = hit
        start = t - graph.execution_cost(wid, v, TIME)
        if start < win.start - TIME_TOL:
            add("windows", win.task, f"service starts {start:.6f} before window opens {win.start}")
        if t > win.end + TIME_TOL:
            add("windows", win.task, f"service ends {t:.6f} after window closes {win.end}")

    # energy budget
    if inst.energy_budget:
        for wid in graph.workers():
            if sim_energy.get(wid, 0.0) > 1.0 + ENERGY_TOL:
                add("energy", wid, f"route consumes {sim_energy[wid]:.9f} > budget 1")

    # objective consistency
    if objective == "total":
        recomputed = sum(sim_total.values())
    else:
        recomputed = max(sim_total.values(), default=0.0)
    if abs(recomputed - plan.objective) > TIME_TOL * max(1.0, abs(recomputed)):
        add("objective", objective,
            f"plan reports {plan.objective:.6f} but routes give {recomputed:.6f}")

    return rep


# -- waiting redistribution helper --------------------------------------------

def schedule_with_wait_at(plan: Plan, graph: MultiGraph, wid: str,
                          before: Vertex) -> dict[Vertex, float]:
    """Completion times when the worker takes its whole wait just before one
    vertex instead of at departure.  How wait is split is up to the caller;
    the model only fixes the total."""
    wp = plan.workers[wid]
    if before not in wp.visited():
        raise ValueError(f"{before.token} is not on {wid}'s route")
    completion, _, _, _ = _simulate(graph, wid, wp.visited(), 0.0)
    out = {}
    for v in wp.visited():
        shift = wp.wait if completion[v] >= completion[before] else 0.0
        out[v] = completion[v] + shift
    return out


# -- exhaustive oracle ---------------------------------------------------------

def _optimal_shifts(inst: ProblemInstance, assignments: dict[str, tuple[str, Vertex]],
                    completion: dict[str, dict[Vertex, float]],
                    starts: dict[str, dict[Vertex, float]],
                    waiting: bool, worker_ids: list[str]) -> dict[str, float] | None:
    """Componentwise-least per-worker departure delays satisfying precedence
    and window-open constraints, or None when infeasible.  Without waiting
    all shifts are zero and the constraints are simply checked."""
    lower = {wid: 0.0 for wid in worker_ids}
    upper = {wid: math.inf for wid in worker_ids}
    edges: list[tuple[str, str, float]] = []  # s[b] >= s[a] + d

    for pair in inst.precedence:
        got_u = assignments.get(pair.before)
        got_v = assignments.get(pair.after)
        if got_u is None and got_v is None:
            continue
        if got_u is not None and got_v is None:
            return None
        if got_u is None:
            continue
        wu, vu = got_u
        wv, vv = got_v
        d = completion[wu][vu] - starts[wv][vv]
        if wu == wv:
            if d > TIME_TOL:
                return None
            continue
        edges.append((wu, wv, d))

    for win in inst.windows:
        got = assignments.get(win.task)
        if got is None:
            if win.start > TIME_TOL:
                return None
            continue
        wid, v = got
        if win.approach and v.approach != win.approach:
            continue
        lower[wid] = max(lower[wid], win.start - starts[wid][v])
        upper[wid] = min(upper[wid], win.end - completion[wid][v])

    shifts = dict(lower)
    if waiting:
        for _ in range(len(worker_ids) + 1):
            changed = False
            for a, b, d in edges:
                need = shifts[a] + d
                if need > shifts[b] + 1e-12:
                    shifts[b] = need
                    changed = True
            if not changed:
                break
        else:
            return None  # positive cycle: no finite delays work
    else:
        for wid in worker_ids:
            if shifts[wid] > TIME_TOL:
                return None
        for a, b, d in edges:
            if shifts[a] + d > shifts[b] + TIME_TOL:
                return None
    for wid in worker_ids:
        if shifts[wid] > upper[wid] + TIME_TOL:
            return None
    return shifts


def brute_force(inst: ProblemInstance, graph: MultiGraph,
                objective: str = "mtm") -> Plan:
    """Exhaustive optimum over task assignments and visit orders.

    Enumerates every task -> (worker, approach) assignment and every
    per-worker visit order, schedules each candidate with optimal waiting by
    earliest-start propagation, and returns the minimal plan (ties broken by
    the lexicographically smallest route encoding).  Refuses instances above
    the enumeration bound of 6 mandatory tasks or 2 workers.
    """
    mandatory = [t for t in inst.sorted_tasks() if t.mandatory]
    if len(mandatory) > 6 or len(inst.workers) > 2 or len(inst.tasks) > 8:
        raise BruteForceError(
            f"instance too large to enumerate: {len(mandatory)} mandatory tasks, "
            f"{len(inst.workers)} workers"
        )
    worker_ids = [w.id for w in inst.sorted_workers()]
    tasks = inst.sorted_tasks()

    options: list[list[tuple[str, Vertex] | None]] = []
    for t in tasks:
        opts: list[tuple[str, Vertex] | None] = []
        for wid in worker_ids:
            for v in graph.task_vertices(wid):
                if v.name == t.id and graph.in_vertices(wid, v) and graph.out_vertices(wid, v):
                    opts.append((wid, v))
        if not t.mandatory:
            opts.append(None)
        if not opts:
            raise BruteForceError(f"task {t.id} has no compatible worker")
        options.append(opts)

    best_obj = math.inf
    best_enc = None
    best = None

    for combo in product(*options):
        assignment: dict[str, tuple[str, Vertex]] = {
            t.id: got for t, got in zip(tasks, combo) if got is not None
        }
        per_worker: dict[str, list[Vertex]] = {wid: [] for wid in worker_ids}
        for wid, v in assignment.values():
            per_worker[wid].append(v)
        order_spaces = [
            list(permutations(sorted(per_worker[wid], key=Vertex.sort_key)))
            for wid in worker_ids
        ]
        for orders in product(*order_spaces):
            routes = dict(zip(worker_ids, orders))
            ok = True
            completion: dict[str, dict[Vertex, float]] = {}
            starts: dict[str, dict[Vertex, float]] = {}
            totals: dict[str, float] = {}
            energies: dict[str, float] = {}
            for wid in worker_ids:
                base = graph.worker_base[wid]
                prev = base
                legs_exist = all(
                    graph.has_edge(wid, u, v)
                    for u, v in zip((base,) + routes[wid], routes[wid] + ((base,) if routes[wid] else ()))
                )
                if not legs_exist:
                    ok = False
                    break
                comp, _, total_t, total_e = _simulate(graph, wid, routes[wid], 0.0)
                completion[wid] = comp
                starts[wid] = {
                    v: comp[v] - graph.execution_cost(wid, v, TIME) for v in comp
                }
                totals[wid] = total_t
                energies[wid] = total_e
            if not ok:
                continue
            for pair in inst.order:
                r = routes.get(pair.worker, ())
                names = [v.name for v in r]
                if pair.before in names and pair.after in names:
                    if names.index(pair.before) > names.index(pair.after):
                        ok = False
                        break
            if not ok:
                continue
            if inst.energy_budget and any(e > 1.0 + ENERGY_TOL for e in energies.values()):
                continue
            shifts = _optimal_shifts(inst, assignment, completion, starts,
                                     inst.waiting, worker_ids)
            if shifts is None:
                continue
            route_times = {
                wid: (totals[wid] + shifts[wid]) if routes[wid] else 0.0
                for wid in worker_ids
            }
            if objective == "total":
                obj = sum(route_times.values())
            else:
                obj = max(route_times.values(), default=0.0)
            enc = tuple((wid, tuple(v.token for v in routes[wid])) for wid in worker_ids)
            if obj < best_obj - 1e-12 or (abs(obj - best_obj) <= 1e-12 and enc < best_enc):
                best_obj = obj
                best_enc = enc
                best = (routes, shifts)

    if best is None:
        raise BruteForceError("no feasible assignment exists")

    routes, shifts = best
    workers: dict[str, WorkerPlan] = {}
    for wid in worker_ids:
        interior = routes[wid]
        if not interior:
            workers[wid] = WorkerPlan(wid, False, (), {}, {}, 0.0, 0.0, 0.0)
            continue
        base = graph.worker_base[wid]
        comp, energy, total_t, total_e = _simulate(graph, wid, interior, shifts[wid])
        workers[wid] = WorkerPlan(
            wid, True, (base,) + interior + (base,), comp, energy,
            shifts[wid], total_t, total_e,
        )
    return Plan(best_obj, workers)
