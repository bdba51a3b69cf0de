"""TSPLIB ingestion (EUC_2D and ATT node-coordinate instances).

``TsplibProblem.distance`` follows the published TSPLIB conventions
(nearest-integer Euclidean, pseudo-Euclidean ATT).  Instance building
defaults to the exact unrounded lengths so the original distance scaling is
preserved; pass ``rounded=True`` to plan on convention-rounded weights.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from ..graph import Vertex
from ..model import Base, OrderPair, PrecedencePair, ProblemInstance, Task, Worker


class TsplibError(Exception):
    pass


SUPPORTED = ("EUC_2D", "ATT")


@dataclass(frozen=True)
class TsplibProblem:
    name: str
    dimension: int
    edge_weight_type: str
    coords: tuple[tuple[float, float], ...]

    def exact_distance(self, i: int, j: int) -> float:
        (x1, y1), (x2, y2) = self.coords[i], self.coords[j]
        d = math.hypot(x1 - x2, y1 - y2)
        if self.edge_weight_type == "ATT":
            return d / math.sqrt(10.0)
        return d

    def distance(self, i: int, j: int) -> int:
        """Convention-rounded integer distance."""
        (x1, y1), (x2, y2) = self.coords[i], self.coords[j]
        if self.edge_weight_type == "ATT":
            rij = math.sqrt(((x1 - x2) ** 2 + (y1 - y2) ** 2) / 10.0)
            tij = int(rij + 0.5)
            return tij + 1 if tij < rij else tij
        return int(math.hypot(x1 - x2, y1 - y2) + 0.5)


def parse_tsplib(text: str) -> TsplibProblem:
    """Parse a TSPLIB file with a NODE_COORD_SECTION."""
    name = ""
    dimension = None
    ewt = ""
    coords: list[tuple[float, float]] = []
    lines = iter(text.splitlines())
    in_coords = False
    for raw in lines:
        line = raw.strip()
        if not line or line == "EOF":
            continue
        if in_coords:
            parts = line.split()
            if len(parts) < 3:
                raise TsplibError(f"malformed coordinate line: {raw!r}")
            coords.append((float(parts[1]), float(parts[2])))
            continue
        if line.startswith("NODE_COORD_SECTION"):
            in_coords = True
            continue
        if ":" in line:
            key, _, value = line.partition(":")
            key = key.strip().upper()
            value = value.strip()
            if key == "NAME":
                name = value
            elif key == "DIMENSION":
                dimension = int(value)
            elif key == "EDGE_WEIGHT_TYPE":
                ewt = value.upper()
    if ewt not in SUPPORTED:
        raise TsplibError(
            f"unsupported EDGE_WEIGHT_TYPE {ewt or '(missing)'}; supported: {', '.join(SUPPORTED)}"
        )
    if not coords:
        raise TsplibError("NODE_COORD_SECTION missing or empty")
    if dimension is None:
        dimension = len(coords)
    if dimension != len(coords):
        raise TsplibError(f"DIMENSION {dimension} but {len(coords)} coordinates")
    return TsplibProblem(name or "tsplib", dimension, ewt, tuple(coords))


@dataclass(frozen=True)
class TsplibRecipe:
    """Seeded constraint recipe layered over a plain instance.

    ``n_compat`` removes one random worker from that many tasks,
    ``n_order`` adds per-worker order pairs and ``n_precedence`` adds
    team-wide precedence pairs; generated pairs follow node-index order so
    the relation is acyclic.
    """

    n_compat: int = 0
    n_order: int = 0
    n_precedence: int = 0
    seed: int = 0


def tsplib_to_instance(
    prob: TsplibProblem,
    n_workers: int = 1,
    speed: float = 10.0,
    base_index: int = 0,
    recipe: TsplibRecipe | None = None,
    rounded: bool = False,
):
    """One single-approach task per non-base node; travel time is
    distance/speed and visits cost nothing.  Returns (instance, weigher)."""
    if not 0 <= base_index < prob.dimension:
        raise TsplibError(f"base index {base_index} out of range")
    if n_workers < 1 or speed <= 0:
        raise TsplibError("need at least one worker and a positive speed")

    node_of: dict[str, int] = {}
    tasks = []
    for i in range(prob.dimension):
        if i == base_index:
            continue
        tid = f"n{i + 1}"
        node_of[tid] = i
        tasks.append(Task(tid, ("a",)))
    base_id = "b1"
    node_of[base_id] = base_index

    all_pairs = {(t.id, "a") for t in tasks}
    worker_ids = [f"w{k + 1}" for k in range(n_workers)]
    compat: dict[str, set] = {wid: set(all_pairs) for wid in worker_ids}
    order: list[OrderPair] = []
    precedence: list[PrecedencePair] = []

    if recipe is not None:
        rng = random.Random(recipe.seed)
        task_ids = [t.id for t in tasks]
        if recipe.n_compat:
            if n_workers < 2:
                raise TsplibError("compatibility constraints need at least two workers")
            victims = rng.sample(task_ids, min(recipe.n_compat, len(task_ids)))
            for tid in victims:
                wid = rng.choice(worker_ids)
                compat[wid].discard((tid, "a"))
        def index_pairs(count: int) -> list[tuple[str, str]]:
            pool = [
                (a, b)
                for ai, a in enumerate(task_ids)
                for b in task_ids[ai + 1:]
            ]
            rng.shuffle(pool)
            return pool[:count]
        for a, b in index_pairs(recipe.n_order):
            order.append(OrderPair(rng.choice(worker_ids), a, b))
        for a, b in index_pairs(recipe.n_precedence):
            precedence.append(PrecedencePair(a, b))

    inst = ProblemInstance(
        name=f"{prob.name}-w{n_workers}",
        cost_types=("time",),
        tasks=tuple(tasks),
        workers=tuple(
            Worker(wid, base_id, frozenset(compat[wid])) for wid in worker_ids
        ),
        bases=(Base(base_id, prob.coords[base_index]),),
        order=tuple(order),
        precedence=tuple(precedence),
    )

    def weigher(worker: Worker, u: Vertex, v: Vertex):
        i, j = node_of[u.name], node_of[v.name]
        d = float(prob.distance(i, j)) if rounded else prob.exact_distance(i, j)
        return {"time": (d / speed, 0.0)}

    return inst, weigher
