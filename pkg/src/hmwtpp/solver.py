"""Exact solving: LP relaxations, best-bound branch-and-bound, lazy cuts.

The branch-and-bound explores nodes in best-bound order, branching on the
most fractional binary first (ties by lexicographic variable name), then on
general integers.  Node re-solves reuse the engine's current basis: the
tableau depends only on the basis, so swapping in a node's bounds and
re-running the dual simplex is a valid warm start from wherever the engine
last stopped.  Reduced-cost fixing against the root relaxation tightens
integer bounds whenever the incumbent improves.

The relax-solve-iterate mode removes all subtour constraints up front,
solves to integrality, then adds violated subtour cuts and repeats until
the incumbent is subtour-free.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping

import numpy as np

from .encoder import Constraint, MilpModel, make_dfj_cut, z_name
from .graph import MultiGraph, Vertex
from .lp import FEAS_TOL, LpData, LpSolution, SimplexEngine, solve_lp_data

INT_TOL = 1e-6

#: expand detected subtours into all subsets below this cardinality
SUBSET_EXPANSION_THRESHOLD = 8


class SolveError(Exception):
    pass


@dataclass
class SolveLimits:
    time_limit: float = 600.0
    gap_limit: float = 0.0


@dataclass
class DfjRound:
    number: int
    objective: float
    subtours: int
    cuts_added: int
    nodes: int


@dataclass
class SolveReport:
    status: str  # optimal | infeasible | timeout | iteration_limit
    objective: float | None
    bound: float
    gap: float
    nodes: int
    cuts_added: int
    wall_time: float
    values: dict[str, float] | None
    rounds: list[DfjRound] = field(default_factory=list)

    def summary(self) -> str:
        obj = "-" if self.objective is None else f"{self.objective:.6g}"
        return (f"status={self.status} objective={obj} gap={self.gap:.3g} "
                f"nodes={self.nodes} cuts={self.cuts_added} time={self.wall_time:.2f}s")


def lp_data_from_model(model: MilpModel, extra: list[Constraint] = ()) -> LpData:
    rows = list(model.constraints) + list(extra)
    n = len(model.vars)
    m = len(rows)
    A = np.zeros((m, n))
    b = np.zeros(m)
    senses: list[str] = []
    for i, con in enumerate(rows):
        for j, coef in con.coeffs:
            A[i, j] += coef
        b[i] = con.rhs
        senses.append(con.sense)
    c = np.zeros(n)
    for j, coef in model.objective.items():
        c[j] = coef
    lb = np.array([v.lb for v in model.vars])
    ub = np.array([v.ub for v in model.vars])
    integers = np.array(
        [j for j, v in enumerate(model.vars) if v.kind in ("binary", "integer")],
        dtype=np.int64,
    )
    names = [v.name for v in model.vars]
    return LpData(c=c, A=A, senses=senses, b=b, lb=lb, ub=ub, names=names, integers=integers)


def _max_flow(n_nodes: int, arcs: list[tuple[int, int, float]], s: int, t: int
              ) -> tuple[float, set[int]]:
    """Edmonds-Karp max flow; returns (value, source side of a min cut)."""
    cap: dict[tuple[int, int], float] = {}
    adj: list[list[int]] = [[] for _ in range(n_nodes)]
    for u, v, c in arcs:
        if c <= 0.0:
            continue
        if (u, v) not in cap:
            adj[u].append(v)
            adj[v].append(u)
            cap[(u, v)] = 0.0
            cap.setdefault((v, u), 0.0)
        cap[(u, v)] += c
    flow = 0.0
    while True:
        parent = {s: s}
        queue = [s]
        while queue and t not in parent:
            u = queue.pop(0)
            for v in adj[u]:
                if v not in parent and cap.get((u, v), 0.0) > 1e-12:
                    parent[v] = u
                    queue.append(v)
        if t not in parent:
            break
        bottleneck = math.inf
        v = t
        while v != s:
            u = parent[v]
            bottleneck = min(bottleneck, cap[(u, v)])
            v = u
        v = t
        while v != s:
            u = parent[v]
            cap[(u, v)] -= bottleneck
            cap[(v, u)] += bottleneck
            v = u
        flow += bottleneck
    side = {s}
    queue = [s]
    while queue:
        u = queue.pop(0)
        for v in adj[u]:
            if v not in side and cap.get((u, v), 0.0) > 1e-12:
                side.add(v)
                queue.append(v)
    return flow, side


def fractional_subtour_cuts(model: MilpModel, x: np.ndarray,
                            seen: set) -> list[Constraint]:
    """Exact separation of violated subtour inequalities at a fractional
    point, one min-cut family per worker layer.

    For a vertex set Q the inequality sum(z inside Q) <= |Q|-1 is violated
    iff outflow(Q) + sum(1 - outdeg(v)) < 1, which a max flow to an
    aggregated sink decides exactly.
    """
    graph = model.graph
    cuts: list[Constraint] = []
    for wid in graph.workers():
        tw = list(graph.task_vertices(wid))
        if len(tw) < 2:
            continue
        index = {v: i for i, v in enumerate(tw)}
        t_node = len(tw)
        out_strength = [0.0] * len(tw)
        arcs: list[tuple[int, int, float]] = []
        base = graph.worker_base[wid]
        for u, v in graph.edges(wid):
            val = float(x[model.z[(wid, u, v)]])
            if u.kind != "task":
                continue
            out_strength[index[u]] += val
            if val <= 1e-12:
                continue
            if v.kind == "task":
                arcs.append((index[u], index[v], val))
            elif v == base:
                arcs.append((index[u], t_node, val))
        for i, v in enumerate(tw):
            slack = max(0.0, 1.0 - out_strength[i])
            if slack > 1e-12:
                arcs.append((i, t_node, slack))
        covered: set[int] = set()
        for s in range(len(tw)):
            if s in covered:
                continue
            value, side = _max_flow(t_node + 1, arcs, s, t_node)
            if value < 1.0 - 1e-6:
                Q = frozenset(tw[i] for i in side if i != t_node)
                if len(Q) < 2:
                    continue
                covered |= {i for i in side if i != t_node}
                key = (wid, Q)
                if key in seen:
                    continue
                seen.add(key)
                cut = make_dfj_cut(model, wid, Q)
                if cut.coeffs:
                    cuts.append(cut)
    return cuts


def named_values(data: LpData, x: np.ndarray) -> dict[str, float]:
    return {name: float(val) for name, val in zip(data.names, x)}


def solve_lp(model: MilpModel) -> LpSolution:
    """Solve the LP relaxation of a model (integrality dropped)."""
    return solve_lp_data(lp_data_from_model(model))


class _BranchAndBound:
    def __init__(self, model: MilpModel, limits: SolveLimits,
                 warm: tuple[np.ndarray, np.ndarray] | None = None,
                 extra: list[Constraint] = ()):
        self.model = model
        self.limits = limits
        self.data = lp_data_from_model(model, extra)
        self.engine = SimplexEngine(self.data)
        self.warm = warm
        n = self.data.ncols
        self.int_idx = self.data.integers
        kinds = [model.vars[j].kind for j in self.int_idx]
        self.bin_mask = np.array([k == "binary" for k in kinds], dtype=bool)
        order = sorted(range(n), key=lambda j: self.data.names[j])
        self.name_rank = np.empty(n, dtype=np.int64)
        for rank, j in enumerate(order):
            self.name_rank[j] = rank
        self.root_lb = self.data.lb.copy()
        self.root_ub = self.data.ub.copy()
        # tightened by reduced-cost fixing as incumbents improve
        self.fixed_lb = self.root_lb.copy()
        self.fixed_ub = self.root_ub.copy()
        self.root_d: np.ndarray | None = None
        self.root_status: np.ndarray | None = None
        self.root_bound = -math.inf
        self.root_basis: np.ndarray | None = None
        self.root_basis_status: np.ndarray | None = None

    # -- helpers -------------------------------------------------------------

    def _select_branch(self, x: np.ndarray) -> int | None:
        xi = x[self.int_idx]
        frac = xi - np.floor(xi)
        dist = np.minimum(frac, 1.0 - frac)
        cand = dist > INT_TOL
        if not cand.any():
            return None
        use = cand & self.bin_mask
        if not use.any():
            use = cand
        best = dist[use].max()
        pool = self.int_idx[use & (dist == best)]
        return int(pool[np.argmin(self.name_rank[pool])])

    def _rc_fix(self, inc_obj: float) -> None:
        # x_j moving off its root-relaxation bound costs at least d_j per
        # unit, so integers whose first step already exceeds the incumbent
        # can be pinned
        if self.root_d is None:
            return
        slack = inc_obj - self.root_bound
        if not math.isfinite(slack):
            return
        d = self.root_d
        st = self.root_status
        for j in self.int_idx:
            dj = d[j]
            if st[j] == 0 and dj > 1e-9:  # nonbasic at lower
                steps = math.floor(slack / dj + 1e-9)
                new_ub = self.root_lb[j] + steps
                if new_ub < self.fixed_ub[j]:
                    self.fixed_ub[j] = new_ub
            elif st[j] == 1 and dj < -1e-9:  # nonbasic at upper
                steps = math.floor(slack / (-dj) + 1e-9)
                new_lb = self.root_ub[j] - steps
                if new_lb > self.fixed_lb[j]:
                    self.fixed_lb[j] = new_lb

    # -- main loop -------------------------------------------------------------

    def _node_solve(self, lb: np.ndarray, ub: np.ndarray) -> str:
        """Optimize under the current bounds; a numerically lost basis is
        retried once from a deterministic cold start."""
        from .lp import LpError, LpStallError
        try:
            return self.engine.optimize()
        except (LpError, LpStallError):
            self.engine.set_bounds(lb, ub)
            self.engine.reset()
            return self.engine.optimize()

    def _chain_bounds(self, chain: tuple) -> tuple[np.ndarray, np.ndarray]:
        lb = self.fixed_lb.copy()
        ub = self.fixed_ub.copy()
        for j, kind, val in chain:
            if kind == 0:
                ub[j] = min(ub[j], val)
            else:
                lb[j] = max(lb[j], val)
        return lb, ub

    def solve(self) -> SolveReport:
        t0 = time.monotonic()
        engine = self.engine
        if self.warm is not None:
            basis, status = self.warm
            engine.basis = basis.astype(np.int64).copy()
            engine.status = status.astype(np.int8).copy()
            engine._snap_nonbasic()
            engine.refactorize()
        else:
            engine.reset()
        st = engine.optimize()
        wall = lambda: time.monotonic() - t0
        if st == "infeasible":
            return SolveReport("infeasible", None, math.inf, 0.0, 0, 0, wall(), None)
        if st == "unbounded":
            raise SolveError("relaxation unbounded; encoder bounds are missing")
        self.root_bound = engine.objective()
        self.root_d = engine.d.copy()
        self.root_status = engine.status.copy()
        self.root_basis = engine.basis.copy()
        self.root_basis_status = engine.status.copy()

        inc_x: np.ndarray | None = None
        inc_obj = math.inf
        nodes = 1
        seq = 0
        status = "optimal"
        best_bound = self.root_bound

        def gap_of(bound: float) -> float:
            if inc_x is None:
                return math.inf
            return max(0.0, (inc_obj - bound) / max(1.0, abs(inc_obj)))

        def prune_eps() -> float:
            return 1e-9 * max(1.0, abs(inc_obj))

        # each heap entry carries its own optimal basis so re-activation is a
        # refactorization, never a cold feasibility walk
        heap: list = []
        x0 = engine.solution()[: self.data.ncols]
        j0 = self._select_branch(x0)
        if j0 is None:
            xr = x0.copy()
            xr[self.int_idx] = np.round(xr[self.int_idx])
            values = named_values(self.data, xr)
            return SolveReport("optimal", self.root_bound, self.root_bound, 0.0,
                               nodes, 0, wall(), values)
        heapq.heappush(heap, (self.root_bound, seq, (),
                              engine.basis.astype(np.int32),
                              engine.status.copy()))

        while heap:
            bound, _, chain, basisv, statusv = heapq.heappop(heap)
            best_bound = bound
            if inc_x is not None:
                if bound >= inc_obj - prune_eps() or gap_of(bound) <= self.limits.gap_limit:
                    best_bound = inc_obj if self.limits.gap_limit == 0.0 else bound
                    break
            if wall() > self.limits.time_limit:
                status = "timeout"
                break
            lb, ub = self._chain_bounds(chain)
            if np.any(lb > ub):
                continue
            # activate: restore this node's basis, re-solve under current
            # bounds (reduced-cost fixing may have tightened them since)
            if not np.array_equal(engine.basis, basisv):
                engine.basis = basisv.astype(np.int64)
                engine.status = statusv.copy()
                engine.set_bounds(lb, ub)
                engine.refactorize()
            else:
                engine.status = statusv.copy()
                engine.set_bounds(lb, ub)
                engine.compute_xB()

            # depth-first plunge from the popped node: siblings go on the
            # heap, the engine stays warm along the whole dive, incumbents
            # appear early enough for pruning and reduced-cost fixing
            diving = True
            while diving:
                st = self._node_solve(lb, ub)
                nodes += 1
                if st == "infeasible":
                    break
                if st == "unbounded":
                    raise SolveError("node relaxation unbounded; encoder bounds are missing")
                obj = engine.objective()
                if inc_x is not None and obj >= inc_obj - prune_eps():
                    break
                x = engine.solution()[: self.data.ncols]
                j = self._select_branch(x)
                if j is None:
                    xr = x.copy()
                    xr[self.int_idx] = np.round(xr[self.int_idx])
                    inc_x = xr
                    inc_obj = obj
                    self._rc_fix(inc_obj)
                    break
                if wall() > self.limits.time_limit:
                    status = "timeout"
                    diving = False
                    break
                val = x[j]
                frac = val - math.floor(val)
                # dive toward the rounding direction; the sibling is solved
                # first so the engine ends the level holding the dive child
                dive_kind = 1 if frac >= 0.5 else 0
                side_kind = 1 - dive_kind
                side_val = math.floor(val) if side_kind == 0 else math.ceil(val)
                dive_val = math.floor(val) if dive_kind == 0 else math.ceil(val)
                side_chain = chain + ((j, side_kind, side_val),)
                side_state = None  # (obj, basis, status) of a live sibling
                lb_s, ub_s = self._chain_bounds(side_chain)
                if not np.any(lb_s > ub_s):
                    engine.set_bounds(lb_s, ub_s)
                    engine.compute_xB()
                    st = self._node_solve(lb_s, ub_s)
                    nodes += 1
                    if st not in ("infeasible",):
                        obj_s = engine.objective()
                        if inc_x is None or obj_s < inc_obj - prune_eps():
                            x_s = engine.solution()[: self.data.ncols]
                            j_s = self._select_branch(x_s)
                            if j_s is None:
                                xr = x_s.copy()
                                xr[self.int_idx] = np.round(xr[self.int_idx])
                                inc_x = xr
                                inc_obj = obj_s
                                self._rc_fix(inc_obj)
                            else:
                                side_state = (obj_s, engine.basis.astype(np.int32),
                                              engine.status.copy())
                chain_d = chain + ((j, dive_kind, dive_val),)
                lb_d, ub_d = self._chain_bounds(chain_d)
                dive_alive = not np.any(lb_d > ub_d)
                if dive_alive:
                    engine.set_bounds(lb_d, ub_d)
                    engine.compute_xB()
                    st = self._node_solve(lb_d, ub_d)
                    nodes += 1
                    dive_alive = st != "infeasible"
                    if dive_alive:
                        obj_d = engine.objective()
                        dive_alive = inc_x is None or obj_d < inc_obj - prune_eps()
                if dive_alive:
                    if side_state is not None:
                        obj_s, basis_s, status_s = side_state
                        seq += 1
                        heapq.heappush(heap, (obj_s, seq, side_chain, basis_s, status_s))
                    chain, lb, ub = chain_d, lb_d, ub_d
                    x = engine.solution()[: self.data.ncols]
                    j = self._select_branch(x)
                    obj = engine.objective()
                    # fall through: loop's optimize() will be a no-op re-solve
                    engine.set_bounds(lb, ub)
                    engine.compute_xB()
                elif side_state is not None:
                    # the dive path died; continue into the live sibling
                    obj_s, basis_s, status_s = side_state
                    chain = side_chain
                    lb, ub = lb_s, ub_s
                    engine.basis = basis_s.astype(np.int64)
                    engine.status = status_s.copy()
                    engine.set_bounds(lb, ub)
                    engine.refactorize()
                else:
                    break

        if inc_x is None:
            if status == "timeout":
                return SolveReport("timeout", None, best_bound, math.inf, nodes, 0, wall(), None)
            return SolveReport("infeasible", None, math.inf, 0.0, nodes, 0, wall(), None)
        if not heap and status == "optimal":
            best_bound = inc_obj
        gap = gap_of(best_bound)
        values = named_values(self.data, inc_x)
        return SolveReport(status, inc_obj, best_bound, gap, nodes, 0, wall(), values)


def _root_cut_rounds(model: MilpModel, limits: SolveLimits,
                     max_rounds: int = 60
                     ) -> tuple[list[Constraint], tuple | None]:
    """Strengthen the mtz root relaxation with violated subtour inequalities
    before branching; returns the cut rows and a warm basis covering them.

    The polynomial SEC family leaves large fractional subtour violations in
    the relaxation, and closing them here is what keeps the tree small."""
    t0 = time.monotonic()
    cuts: list[Constraint] = []
    seen: set = set()
    data = lp_data_from_model(model)
    engine = SimplexEngine(data)
    engine.reset()
    if engine.optimize() != "optimal":
        return [], None
    for _ in range(max_rounds):
        if time.monotonic() - t0 > 0.25 * limits.time_limit:
            break
        x = engine.solution()[: data.ncols]
        new = fractional_subtour_cuts(model, x, seen)
        if not new:
            break
        cuts.extend(new)
        basis = engine.basis.copy()
        status = engine.status.copy()
        data = lp_data_from_model(model, cuts)
        engine = SimplexEngine(data)
        n, m_new = data.ncols, data.nrows
        extra_slacks = np.arange(n + len(basis), n + m_new, dtype=np.int64)
        engine.basis = np.concatenate([basis, extra_slacks])
        engine.status = np.concatenate([
            status, np.full(m_new - len(basis), 2, dtype=np.int8)])
        engine.refactorize()
        if engine.optimize() != "optimal":
            return [], None
    return cuts, (engine.basis.copy(), engine.status.copy())


def solve_milp(model: MilpModel, limits: SolveLimits | None = None,
               warm: tuple[np.ndarray, np.ndarray] | None = None,
               root_cuts: bool = True) -> SolveReport:
    """Solve a model exactly by LP-based branch-and-bound.

    Models in mtz mode get a round of exact fractional subtour separation at
    the root (the added rows are valid for every integer solution, so the
    optimum is unchanged).  A timeout is reported as status "timeout" with
    the best incumbent and a nonzero gap, never silently.
    """
    limits = limits or SolveLimits()
    extra: list[Constraint] = []
    if root_cuts and warm is None and model.meta.get("sec_mode") == "mtz":
        extra, warm_from_cuts = _root_cut_rounds(model, limits)
        if extra and warm_from_cuts is not None:
            warm = warm_from_cuts
    bnb = _BranchAndBound(model, limits, warm=warm, extra=extra)
    report = bnb.solve()
    report.rounds = []
    report.cuts_added = len(extra)
    model._last_root_basis = (bnb.root_basis, bnb.root_basis_status)  # warm-start hook
    return report


def separate_subtours(values: Mapping[str, float], graph: MultiGraph
                      ) -> list[tuple[str, frozenset[Vertex]]]:
    """Connected components of each worker's active edges that miss the base.

    The solution must be integral in z.  An empty list means every active
    layer is one base-anchored cycle.
    """
    found: list[tuple[str, frozenset[Vertex]]] = []
    for wid in graph.workers():
        active = [
            (u, v) for u, v in graph.edges(wid)
            if values.get(z_name(wid, u, v), 0.0) > 0.5
        ]
        if not active:
            continue
        adj: dict[Vertex, set[Vertex]] = {}
        for u, v in active:
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        base = graph.worker_base[wid]
        seen: set[Vertex] = set()
        for start in sorted(adj, key=Vertex.sort_key):
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                node = stack.pop()
                for nxt in adj.get(node, ()):
                    if nxt not in comp:
                        comp.add(nxt)
                        stack.append(nxt)
            seen |= comp
            if base not in comp:
                found.append((wid, frozenset(comp)))
    return found


def dfj_loop(model: MilpModel, graph: MultiGraph, limits: SolveLimits | None = None,
             threshold: int = SUBSET_EXPANSION_THRESHOLD, expand: bool = True,
             max_rounds: int = 200) -> SolveReport:
    """Relax-solve-iterate with lazily separated subtour cuts.

    Each round solves the current model to integrality, looks for subtours
    in the incumbent, and adds the corresponding cuts: every subset of a
    small detected component (below ``threshold``), or the single component
    cut otherwise, for every worker layer.  Cuts are retained across rounds.
    """
    if model.meta["sec_mode"] != "dfj":
        raise SolveError("dfj_loop needs a model encoded in dfj mode")
    limits = limits or SolveLimits()
    t0 = time.monotonic()
    rounds: list[DfjRound] = []
    total_cuts = 0
    total_nodes = 0
    warm = None
    report: SolveReport | None = None
    for number in range(1, max_rounds + 1):
        remaining = limits.time_limit - (time.monotonic() - t0)
        if remaining <= 0:
            if report is not None:
                report.status = "timeout"
            break
        report = solve_milp(model, SolveLimits(remaining, limits.gap_limit), warm=warm)
        total_nodes += report.nodes
        if report.status in ("infeasible", "timeout"):
            break
        subtours = separate_subtours(report.values, graph)
        added = 0
        for _, comp in subtours:
            tokens = sorted(comp, key=Vertex.sort_key)
            if expand and len(comp) < threshold:
                subsets = [
                    frozenset(c)
                    for size in range(2, len(comp) + 1)
                    for c in combinations(tokens, size)
                ]
            else:
                subsets = [comp]
            for sub in subsets:
                for wid in graph.workers():
                    if graph.worker_base[wid] in sub:
                        continue
                    key = (wid, sub)
                    if key in model.cut_keys:
                        continue
                    model.cut_keys.add(key)
                    cut = make_dfj_cut(model, wid, sub)
                    if not cut.coeffs:
                        continue
                    model.constraints.append(cut)
                    added += 1
        rounds.append(DfjRound(number, report.objective, len(subtours), added, report.nodes))
        total_cuts += added
        if not subtours:
            break
        basis, basis_status = model._last_root_basis
        if basis is not None:
            # new cut rows enter with their slacks basic
            n = len(model.vars)
            m_old = len(basis)
            m_new = len(model.constraints)
            extra = np.arange(n + m_old, n + m_new, dtype=np.int64)
            warm = (
                np.concatenate([basis, extra]),
                np.concatenate([basis_status, np.full(m_new - m_old, 2, dtype=np.int8)]),
            )
    else:
        assert report is not None
        report.status = "iteration_limit"
    if report is None:
        return SolveReport("timeout", None, -math.inf, math.inf, 0, 0,
                           time.monotonic() - t0, None)
    report.rounds = rounds
    report.cuts_added = total_cuts
    report.nodes = total_nodes
    report.wall_time = time.monotonic() - t0
    return report
