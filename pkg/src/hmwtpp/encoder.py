"""MILP encoding of a multigraph planning problem.

Variable families: edge activations z, worker activations yb, per-vertex
worker assignments yc, visit positions p (mtz mode), monotone partial costs
f (per tracked cost type), per-worker wait totals wp, and the minimize-the-
maximum bound msigma.

Variables are only created where they are free: activations of nonexistent
edges and assignments of incompatible (vertex, worker) pairs are fixed at
zero, which here means they are simply absent, and every sum over them
treats missing entries as zero contribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .graph import MultiGraph, Vertex
from .model import ENERGY, TIME


class EncodeError(Exception):
    pass


@dataclass(frozen=True)
class Var:
    name: str
    kind: str  # binary | integer | continuous
    lb: float
    ub: float


@dataclass(frozen=True)
class Constraint:
    name: str
    family: str
    coeffs: tuple[tuple[int, float], ...]  # (variable index, coefficient)
    sense: str  # L | G | E
    rhs: float


@dataclass
class EncodeOptions:
    sec_mode: str = "mtz"  # mtz | dfj
    objective: str = "mtm"  # mtm | total
    waiting: bool | None = None  # None: take the instance flag
    energy_budget: bool | None = None
    track_costs: tuple[str, ...] = ()


def z_name(worker_id: str, u: Vertex, v: Vertex) -> str:
    return f"z_{u.token}_{v.token}_{worker_id}"


class MilpModel:
    def __init__(self, graph: MultiGraph, opts: EncodeOptions):
        self.graph = graph
        self.opts = opts
        self.vars: list[Var] = []
        self.constraints: list[Constraint] = []
        self.objective: dict[int, float] = {}
        self.by_name: dict[str, int] = {}
        # index maps
        self.z: dict[tuple[str, Vertex, Vertex], int] = {}
        self.yb: dict[str, int] = {}
        self.yc: dict[tuple[Vertex, str], int] = {}
        self.p: dict[tuple[Vertex, str], int] = {}
        self.f: dict[tuple[str, Vertex, str], int] = {}  # (cost type, vertex, worker)
        self.wp: dict[str, int] = {}
        self.msigma: int | None = None
        # big-M registry
        self.m_w: dict[str, int] = {}
        self.O: dict[tuple[str, str], float] = {}  # (worker, cost type)
        self.wp_bound: float = 0.0
        self.cut_keys: set[tuple[str, frozenset[Vertex]]] = set()
        self.meta: dict = {}
        self._last_root_basis: tuple = (None, None)  # warm-start hook for cut rounds

    # -- construction --------------------------------------------------------

    def add_var(self, name: str, kind: str, lb: float, ub: float) -> int:
        idx = len(self.vars)
        self.vars.append(Var(name, kind, lb, ub))
        self.by_name[name] = idx
        return idx

    def add_constraint(self, name: str, family: str,
                       coeffs: Iterable[tuple[int, float]], sense: str, rhs: float) -> int:
        packed = tuple((i, float(c)) for i, c in coeffs if c != 0.0)
        self.constraints.append(Constraint(name, family, packed, sense, float(rhs)))
        return len(self.constraints) - 1

    # -- queries -------------------------------------------------------------

    def family_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for con in self.constraints:
            out[con.family] = out.get(con.family, 0) + 1
        return out

    def var_count(self) -> int:
        return len(self.vars)

    def value(self, values: Mapping[str, float], name: str) -> float:
        return float(values.get(name, 0.0))


def _resolve_flags(graph: MultiGraph, opts: EncodeOptions) -> tuple[bool, bool]:
    inst = graph.instance
    waiting = inst.waiting if opts.waiting is None else opts.waiting
    energy = inst.energy_budget if opts.energy_budget is None else opts.energy_budget
    return waiting, energy


def encode(graph: MultiGraph, opts: EncodeOptions | None = None) -> MilpModel:
    """Translate a multigraph into the full MILP.

    Raises EncodeError for structurally unsatisfiable inputs (a mandatory
    task no edge can reach) and for option combinations the lazy-cut mode
    cannot express.
    """
    opts = opts or EncodeOptions()
    inst = graph.instance
    waiting, energy = _resolve_flags(graph, opts)

    if opts.sec_mode not in ("mtz", "dfj"):
        raise EncodeError(f"unknown SEC mode {opts.sec_mode!r}")
    if opts.objective not in ("mtm", "total"):
        raise EncodeError(f"unknown objective {opts.objective!r}")
    if opts.sec_mode == "dfj":
        blocked = []
        if inst.order:
            blocked.append("order pairs")
        if inst.precedence:
            blocked.append("precedence pairs")
        if inst.windows:
            blocked.append("time windows")
        if waiting:
            blocked.append("waiting points")
        if blocked:
            raise EncodeError(
                "dfj mode removes visit-order and partial-cost tracking; "
                "unsupported with: " + ", ".join(blocked)
            )
    if TIME not in inst.cost_types:
        raise EncodeError("a 'time' cost type is required for the objective")
    if energy and ENERGY not in inst.cost_types:
        raise EncodeError("energy budget requires an 'energy' cost type")

    workers = [w.id for w in inst.sorted_workers()]

    # structural satisfiability: each mandatory task must be enterable and
    # leavable by at least one worker
    for task in inst.sorted_tasks():
        if not task.mandatory:
            continue
        reachable = False
        for wid in workers:
            for a in task.approaches:
                v = None
                for cand in graph.task_vertices(wid):
                    if cand.name == task.id and cand.approach == a:
                        v = cand
                        break
                if v is not None and graph.in_vertices(wid, v) and graph.out_vertices(wid, v):
                    reachable = True
                    break
            if reachable:
                break
        if not reachable:
            raise EncodeError(f"mandatory task {task.id!r} has no compatible edges")

    track = set(opts.track_costs)
    if inst.precedence or inst.windows or waiting:
        track.add(TIME)
    for ct in track:
        if ct not in inst.cost_types:
            raise EncodeError(f"cannot track unknown cost type {ct!r}")

    model = MilpModel(graph, opts)
    model.meta = {
        "sec_mode": opts.sec_mode,
        "objective": opts.objective,
        "waiting": waiting,
        "energy_budget": energy,
        "track": tuple(sorted(track)),
    }

    # big-M registry
    model.wp_bound = sum(graph.layer_weight_sum(w, TIME) for w in workers) if waiting else 0.0
    for wid in workers:
        model.m_w[wid] = len(graph.task_vertices(wid))
        for ct in inst.cost_types:
            big = 1.0 + graph.layer_weight_sum(wid, ct)
            if waiting and ct == TIME:
                big += model.wp_bound
            model.O[(wid, ct)] = big

    # ---- variables ---------------------------------------------------------
    for wid in workers:
        for u, v in graph.edges(wid):
            model.z[(wid, u, v)] = model.add_var(z_name(wid, u, v), "binary", 0.0, 1.0)
    for wid in workers:
        model.yb[wid] = model.add_var(f"yb_{wid}", "binary", 0.0, 1.0)
    for wid in workers:
        for v in graph.task_vertices(wid):
            model.yc[(v, wid)] = model.add_var(f"yc_{v.token}_{wid}", "binary", 0.0, 1.0)
    if opts.sec_mode == "mtz":
        for wid in workers:
            for v in graph.task_vertices(wid):
                model.p[(v, wid)] = model.add_var(
                    f"p_{v.token}_{wid}", "integer", 0.0, float(model.m_w[wid])
                )
    for ct in sorted(track):
        for wid in workers:
            for v in graph.task_vertices(wid):
                model.f[(ct, v, wid)] = model.add_var(
                    f"f_{ct}_{v.token}_{wid}", "continuous", 0.0, model.O[(wid, ct)]
                )
    if waiting:
        for wid in workers:
            model.wp[wid] = model.add_var(f"wp_{wid}", "continuous", 0.0, model.wp_bound)
    if opts.objective == "mtm":
        msig_ub = 1.0 + max((model.O[(wid, TIME)] for wid in workers), default=1.0)
        model.msigma = model.add_var("msigma", "continuous", 0.0, msig_ub)

    # ---- constraints ---------------------------------------------------------

    # bases: route leaves and enters the worker's base iff the worker is active
    for wid in workers:
        b = graph.worker_base[wid]
        out_terms = [(model.z[(wid, b, v)], 1.0) for v in graph.out_vertices(wid, b)]
        in_terms = [(model.z[(wid, v, b)], 1.0) for v in graph.in_vertices(wid, b)]
        model.add_constraint(f"cb_out[{wid}]", "cb", out_terms + [(model.yb[wid], -1.0)], "E", 0.0)
        model.add_constraint(f"cb_in[{wid}]", "cb", in_terms + [(model.yb[wid], -1.0)], "E", 0.0)

    # task completion: team-wide one departure and one arrival per task
    for task in inst.sorted_tasks():
        sense = "E" if task.mandatory else "L"
        out_terms: list[tuple[int, float]] = []
        in_terms: list[tuple[int, float]] = []
        for wid in workers:
            for v in graph.task_vertices(wid):
                if v.name != task.id:
                    continue
                out_terms += [(model.z[(wid, v, x)], 1.0) for x in graph.out_vertices(wid, v)]
                in_terms += [(model.z[(wid, x, v)], 1.0) for x in graph.in_vertices(wid, v)]
        model.add_constraint(f"ct_out[{task.id}]", "ct_cover", out_terms, sense, 1.0)
        model.add_constraint(f"ct_in[{task.id}]", "ct_cover", in_terms, sense, 1.0)

    # degree coupling: a visited vertex is entered and left exactly once
    for wid in workers:
        for v in graph.task_vertices(wid):
            terms = [(model.z[(wid, x, v)], 1.0) for x in graph.in_vertices(wid, v)]
            terms += [(model.z[(wid, v, x)], 1.0) for x in graph.out_vertices(wid, v)]
            terms.append((model.yc[(v, wid)], -2.0))
            model.add_constraint(f"ct_deg[{v.token}|{wid}]", "ct_degree", terms, "E", 0.0)

    # subtour elimination, polynomial variant with visit positions
    if opts.sec_mode == "mtz":
        for wid in workers:
            mw = float(model.m_w[wid])
            for u, v in graph.edges(wid):
                if u.kind != "task" or v.kind != "task":
                    continue
                model.add_constraint(
                    f"mtz_edge[{u.token}->{v.token}|{wid}]", "mtz_chain",
                    [(model.p[(u, wid)], 1.0), (model.p[(v, wid)], -1.0),
                     (model.z[(wid, u, v)], mw)],
                    "L", mw - 1.0,
                )
            for u in graph.task_vertices(wid):
                model.add_constraint(
                    f"mtz_cap[{u.token}|{wid}]", "mtz_cap",
                    [(model.p[(u, wid)], 1.0), (model.yc[(u, wid)], -mw)],
                    "L", 0.0,
                )
            b = graph.worker_base[wid]
            for u in graph.out_vertices(wid, b):
                model.add_constraint(
                    f"mtz_start[{u.token}|{wid}]", "mtz_start",
                    [(model.z[(wid, b, u)], 1.0), (model.p[(u, wid)], -1.0)],
                    "L", 0.0,
                )

    # order of visit inside one worker's route, expanded across approaches
    for pair in inst.order:
        wid = pair.worker
        mw = float(model.m_w.get(wid, 0))
        before = [v for v in graph.task_vertices(wid) if v.name == pair.before]
        after = [v for v in graph.task_vertices(wid) if v.name == pair.after]
        for u in before:
            for v in after:
                model.add_constraint(
                    f"co[{u.token}<{v.token}|{wid}]", "co",
                    [(model.p[(u, wid)], 1.0), (model.p[(v, wid)], -1.0),
                     (model.yc[(u, wid)], mw), (model.yc[(v, wid)], mw)],
                    "L", 2.0 * mw,
                )

    # monotone partial-cost tracking
    for ct in sorted(track):
        shift = waiting and ct == TIME
        for wid in workers:
            O = model.O[(wid, ct)]
            b = graph.worker_base[wid]
            for u, v in graph.edges(wid):
                if u.kind != "task" or v.kind != "task":
                    continue
                omega = graph.weight(wid, u, v, ct)
                model.add_constraint(
                    f"cmfe_edge[{ct}][{u.token}->{v.token}|{wid}]", "cmfe_chain",
                    [(model.f[(ct, u, wid)], 1.0), (model.f[(ct, v, wid)], -1.0),
                     (model.z[(wid, u, v)], O)],
                    "L", O - omega,
                )
            for u in graph.task_vertices(wid):
                model.add_constraint(
                    f"cmfe_cap[{ct}][{u.token}|{wid}]", "cmfe_cap",
                    [(model.f[(ct, u, wid)], 1.0), (model.yc[(u, wid)], -O)],
                    "L", 0.0,
                )
            for u in graph.out_vertices(wid, b):
                omega = graph.weight(wid, b, u, ct)
                if shift:
                    # f(u) >= omega*z + wp - O*(1 - z): binding only on the
                    # actual first leg, otherwise unvisited vertices with
                    # f = 0 would force wp <= 0
                    terms = [(model.z[(wid, b, u)], omega + O),
                             (model.wp[wid], 1.0),
                             (model.f[(ct, u, wid)], -1.0)]
                    model.add_constraint(
                        f"cmfe_start[{ct}][{u.token}|{wid}]", "cmfe_start",
                        terms, "L", O,
                    )
                else:
                    model.add_constraint(
                        f"cmfe_start[{ct}][{u.token}|{wid}]", "cmfe_start",
                        [(model.z[(wid, b, u)], omega), (model.f[(ct, u, wid)], -1.0)],
                        "L", 0.0,
                    )
            route_terms = [
                (model.z[(wid, u, v)], graph.weight(wid, u, v, ct))
                for u, v in graph.edges(wid) if v != b
            ]
            for u in graph.task_vertices(wid):
                terms = [(model.f[(ct, u, wid)], 1.0)]
                terms += [(i, -c) for i, c in route_terms]
                if shift:
                    terms.append((model.wp[wid], -1.0))
                model.add_constraint(
                    f"cmfe_total[{ct}][{u.token}|{wid}]", "cmfe_total",
                    terms, "L", 0.0,
                )

    # precedence: completion of `before` no later than service start of `after`
    for pair in inst.precedence:
        terms: list[tuple[int, float]] = []
        for wid in workers:
            for v in graph.task_vertices(wid):
                if v.name == pair.before:
                    terms.append((model.f[(TIME, v, wid)], 1.0))
                elif v.name == pair.after:
                    terms.append((model.f[(TIME, v, wid)], -1.0))
                    terms.append((model.yc[(v, wid)], graph.execution_cost(wid, v, TIME)))
        model.add_constraint(f"cp[{pair.before}<={pair.after}]", "cp", terms, "L", 0.0)

    # time windows: service must start after t_i and finish before t_f
    for k, win in enumerate(inst.windows):
        lo_terms: list[tuple[int, float]] = []
        hi_terms: list[tuple[int, float]] = []
        for wid in workers:
            for v in graph.task_vertices(wid):
                if v.name != win.task:
                    continue
                if win.approach and v.approach != win.approach:
                    continue
                lo_terms.append((model.f[(TIME, v, wid)], 1.0))
                lo_terms.append((model.yc[(v, wid)], -graph.execution_cost(wid, v, TIME)))
                hi_terms.append((model.f[(TIME, v, wid)], 1.0))
        tag = f"{win.task}" + (f".{win.approach}" if win.approach else "")
        model.add_constraint(f"cw_lo[{tag}#{k}]", "cw", lo_terms, "G", win.start)
        model.add_constraint(f"cw_hi[{tag}#{k}]", "cw", hi_terms, "L", win.end)

    # objective
    if opts.objective == "mtm":
        for wid in workers:
            terms = [(model.z[(wid, u, v)], graph.weight(wid, u, v, TIME))
                     for u, v in graph.edges(wid)]
            if waiting:
                terms.append((model.wp[wid], 1.0))
            terms.append((model.msigma, -1.0))
            model.add_constraint(f"cmtm[{wid}]", "cmtm", terms, "L", 0.0)
        model.objective = {model.msigma: 1.0}
    else:
        obj: dict[int, float] = {}
        for wid in workers:
            for u, v in graph.edges(wid):
                idx = model.z[(wid, u, v)]
                obj[idx] = obj.get(idx, 0.0) + graph.weight(wid, u, v, TIME)
            if waiting:
                obj[model.wp[wid]] = 1.0
        model.objective = obj

    # energy budget: normalized route consumption within 1
    if energy:
        for wid in workers:
            terms = [(model.z[(wid, u, v)], graph.weight(wid, u, v, ENERGY))
                     for u, v in graph.edges(wid)]
            model.add_constraint(f"cenergy[{wid}]", "cenergy", terms, "L", 1.0)

    return model


# -- solution-space operators -------------------------------------------------

def divergence(values: Mapping[str, float], graph: MultiGraph, worker_id: str,
               S: Iterable[Vertex], sign: int) -> float:
    """Directed divergence of a solution over a vertex set.

    sign +1 counts active edges leaving S, -1 counts edges entering it;
    nonexistent edges contribute nothing.
    """
    S = set(S)
    total = 0.0
    for u, v in graph.edges(worker_id):
        crossing = (u in S) and (v not in S)
        if sign < 0:
            crossing = (v in S) and (u not in S)
        if crossing:
            total += values.get(z_name(worker_id, u, v), 0.0)
    return total


def integral(values: Mapping[str, float], graph: MultiGraph, worker_id: str,
             S: Iterable[Vertex]) -> float:
    """Total number of active connections of one worker inside S."""
    S = set(S)
    return sum(
        values.get(z_name(worker_id, u, v), 0.0)
        for u, v in graph.edges(worker_id)
        if u in S and v in S
    )


def make_dfj_cut(model: MilpModel, worker_id: str, Q: Iterable[Vertex]) -> Constraint:
    """Subtour-elimination inequality over Q for one worker layer.

    Q must not contain the worker's base and needs at least two vertices.
    The cut is returned, not added; an empty left-hand side (no internal
    edges) is legal and trivially true.
    """
    Q = set(Q)
    if len(Q) < 2:
        raise ValueError("a subtour cut needs |Q| >= 2")
    if model.graph.worker_base[worker_id] in Q:
        raise ValueError("a subtour cut must not contain the worker's base")
    terms = [
        (model.z[(worker_id, u, v)], 1.0)
        for u, v in model.graph.edges(worker_id)
        if u in Q and v in Q
    ]
    tokens = ",".join(sorted(v.token for v in Q))
    return Constraint(f"cs_dfj[{worker_id}|{tokens}]", "cs", tuple(terms), "L", float(len(Q) - 1))
