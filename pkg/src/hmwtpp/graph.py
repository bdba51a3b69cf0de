"""Weighted directed multigraph construction.

One vertex per base and per task approach; one edge layer per worker.  A
worker's base connects to every compatible task vertex in both directions and
compatible task vertices are pairwise connected except within the same task.
Edge weights are computed once at build time by a caller-supplied weigher and
never change afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

from .model import ProblemInstance, Worker

#: cost type -> (transition cost, execution cost); the edge weight is the sum
WeightMap = dict[str, tuple[float, float]]

#: (worker, from, to) -> WeightMap
Weigher = Callable[[Worker, "Vertex", "Vertex"], WeightMap]

EdgeFilter = Callable[[Worker, "Vertex", "Vertex"], bool]


class GraphBuildError(Exception):
    pass


@dataclass(frozen=True)
class Vertex:
    kind: str  # "base" | "task"
    name: str  # base id or task id
    approach: str = ""

    @property
    def token(self) -> str:
        """Stable text form used in files and variable names."""
        if self.kind == "base":
            return self.name
        return f"{self.name}.{self.approach}"

    def sort_key(self):
        return (self.kind != "base", self.name, self.approach)

    def __repr__(self):
        return f"V({self.token})"


def base_vertex(base_id: str) -> Vertex:
    return Vertex("base", base_id)


def task_vertex(task_id: str, approach: str) -> Vertex:
    return Vertex("task", task_id, approach)


class MultiGraph:
    """Immutable after build; stored as per-worker edge maps keyed (from, to).

    No two parallel edges share a worker, so the (from, to) key is unique
    within a layer.
    """

    def __init__(self, instance: ProblemInstance):
        self.instance = instance
        self.vertices: tuple[Vertex, ...] = ()
        self.worker_base: dict[str, Vertex] = {}
        self._task_vertices: dict[str, tuple[Vertex, ...]] = {}  # worker -> T|w
        self._edges: dict[str, dict[tuple[Vertex, Vertex], WeightMap]] = {}
        self._out: dict[str, dict[Vertex, tuple[Vertex, ...]]] = {}
        self._in: dict[str, dict[Vertex, tuple[Vertex, ...]]] = {}
        self._by_token: dict[str, Vertex] = {}

    # -- structure ----------------------------------------------------------

    def workers(self) -> list[str]:
        return sorted(self._edges)

    def tasked_vertices(self) -> list[Vertex]:
        return [v for v in self.vertices if v.kind == "task"]

    def task_vertices(self, worker_id: str) -> tuple[Vertex, ...]:
        """T|w: compatible tasked vertices of one worker, sorted."""
        return self._task_vertices[worker_id]

    def vertex(self, token: str) -> Vertex:
        return self._by_token[token]

    def has_edge(self, worker_id: str, u: Vertex, v: Vertex) -> bool:
        return (u, v) in self._edges[worker_id]

    def edges(self, worker_id: str) -> list[tuple[Vertex, Vertex]]:
        return sorted(self._edges[worker_id], key=lambda e: (e[0].sort_key(), e[1].sort_key()))

    def edge_count(self) -> int:
        return sum(len(layer) for layer in self._edges.values())

    def out_vertices(self, worker_id: str, u: Vertex) -> tuple[Vertex, ...]:
        return self._out[worker_id].get(u, ())

    def in_vertices(self, worker_id: str, u: Vertex) -> tuple[Vertex, ...]:
        return self._in[worker_id].get(u, ())

    # -- weights -------------------------------------------------------------

    def weight_parts(self, worker_id: str, u: Vertex, v: Vertex, cost_type: str) -> tuple[float, float]:
        return self._edges[worker_id][(u, v)][cost_type]

    def weight(self, worker_id: str, u: Vertex, v: Vertex, cost_type: str) -> float:
        dw, w = self.weight_parts(worker_id, u, v, cost_type)
        return dw + w

    def execution_cost(self, worker_id: str, v: Vertex, cost_type: str) -> float:
        """Execution part of v's weight for one worker (identical on all
        edges entering v by construction)."""
        for u in self.in_vertices(worker_id, v):
            return self._edges[worker_id][(u, v)][cost_type][1]
        return 0.0

    def layer_weight_sum(self, worker_id: str, cost_type: str) -> float:
        return sum(sum(wm[cost_type]) for wm in self._edges[worker_id].values())


def build_graph(
    inst: ProblemInstance,
    weigher: Weigher,
    edge_filter: EdgeFilter | None = None,
) -> MultiGraph:
    """Construct the multigraph of an instance.

    ``weigher`` must be total over every legal edge and must return a weight
    map covering all cost types of the instance.  ``edge_filter`` can veto
    rule-conforming edges when tasks need extra connection rules.
    """
    g = MultiGraph(inst)

    verts = [base_vertex(b.id) for b in inst.bases]
    for t in inst.sorted_tasks():
        verts.extend(task_vertex(t.id, a) for a in t.approaches)
    g.vertices = tuple(sorted(verts, key=Vertex.sort_key))
    g._by_token = {v.token: v for v in g.vertices}

    for w in inst.sorted_workers():
        bw = base_vertex(w.base)
        g.worker_base[w.id] = bw
        layer: dict[tuple[Vertex, Vertex], WeightMap] = {}
        tw = tuple(
            v for v in g.vertices
            if v.kind == "task" and (v.name, v.approach) in w.compatible
        )
        g._task_vertices[w.id] = tw

        def admit(u: Vertex, v: Vertex) -> bool:
            return edge_filter is None or edge_filter(w, u, v)

        pairs: list[tuple[Vertex, Vertex]] = []
        for v in tw:
            pairs.append((bw, v))
            pairs.append((v, bw))
        for u in tw:
            for v in tw:
                if u is not v and u.name != v.name:
                    pairs.append((u, v))

        for u, v in pairs:
            if not admit(u, v):
                continue
            weights = weigher(w, u, v)
            for ct in inst.cost_types:
                if ct not in weights:
                    raise GraphBuildError(
                        f"weigher missing cost type {ct!r} on edge [{u.token} -> {v.token}] | {w.id}"
                    )
                dw, ex = weights[ct]
                if not (math.isfinite(dw) and math.isfinite(ex)):
                    raise GraphBuildError(
                        f"non-finite {ct} weight on edge [{u.token} -> {v.token}] | {w.id}"
                    )
                if ct == "time" and dw + ex < 0:
                    raise GraphBuildError(
                        f"negative time weight on edge [{u.token} -> {v.token}] | {w.id}"
                    )
            layer[(u, v)] = {ct: (float(weights[ct][0]), float(weights[ct][1])) for ct in weights}

        g._edges[w.id] = layer
        out: dict[Vertex, list[Vertex]] = {}
        inc: dict[Vertex, list[Vertex]] = {}
        for (u, v) in layer:
            out.setdefault(u, []).append(v)
            inc.setdefault(v, []).append(u)
        g._out[w.id] = {u: tuple(sorted(vs, key=Vertex.sort_key)) for u, vs in out.items()}
        g._in[w.id] = {v: tuple(sorted(us, key=Vertex.sort_key)) for v, us in inc.items()}

    return g


def edge_count_bound(n_w: int, n: int, n_a: int) -> int:
    """Worst-case edge count under full compatibility: per worker, 2*n*n_a
    base links plus n_a^2 * n * (n-1) inter-task links."""
    if min(n_w, n, n_a) < 0:
        raise ValueError("arguments must be nonnegative")
    return n_w * (2 * n * n_a + n_a * n_a * n * (n - 1))


def dump_graph(g: MultiGraph) -> str:
    """Render a graph as structured text (see docs/formats in the README).

    Layout::

        # hmwtpp graph v1
        vertices <count>
        v <token> <kind>
        edges <worker> <count>
        e <from> <to> <ct>=<transition>+<execution> ...
    """
    lines = ["# hmwtpp graph v1", f"vertices {len(g.vertices)}"]
    for v in g.vertices:
        lines.append(f"v {v.token} {v.kind}")
    for wid in g.workers():
        lines.append(f"edges {wid} {len(g.edges(wid))}")
        for u, v in g.edges(wid):
            parts = " ".join(
                f"{ct}={g.weight_parts(wid, u, v, ct)[0]:.12g}+{g.weight_parts(wid, u, v, ct)[1]:.12g}"
                for ct in g.instance.cost_types
            )
            lines.append(f"e {u.token} {v.token} {parts}")
    return "\n".join(lines) + "\n"
