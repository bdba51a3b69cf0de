"""Synthetic power grids and their planning instances.

A grid is towers plus cable segments, one or more bases, a UAV team and a
constant wind vector.  Planning maps every selected tower to a
single-approach orbit task and every selected segment to a two-approach task
(one vertex per inspection direction).  VTOLs cannot orbit towers, so tower
tasks are simply absent from their compatibility sets.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from ..costmodels import (
    Pose2D,
    SegmentRun,
    TowerOrbit,
    UavSpec,
    heading_against,
    inspection_cost,
    norm_angle,
    transit_cost,
)
from ..graph import Vertex, Weigher
from ..model import Base, ProblemInstance, Task, Worker
from ..routes import Plan


class GridError(Exception):
    pass


@dataclass(frozen=True)
class Tower:
    id: str
    xy: tuple[float, float]


@dataclass(frozen=True)
class Segment:
    id: str
    a: str  # tower ids
    b: str


@dataclass(frozen=True)
class GridUav:
    id: str
    kind: str  # multirotor | vtol
    base: str
    nav_speed: float = 10.0
    insp_speed: float = 5.0
    turn_radius: float = 0.0
    endurance: float = math.inf

    def spec(self) -> UavSpec:
        return UavSpec(self.kind, self.nav_speed, self.insp_speed,
                       self.turn_radius, self.endurance)


@dataclass
class PowerGrid:
    name: str
    towers: tuple[Tower, ...]
    segments: tuple[Segment, ...]
    bases: tuple[Base, ...]
    uavs: tuple[GridUav, ...]
    wind: tuple[float, float] = (0.0, 0.0)
    orbit_radius: float = 10.0

    def tower(self, tid: str) -> Tower:
        for t in self.towers:
            if t.id == tid:
                return t
        raise GridError(f"unknown tower {tid!r}")

    def check(self) -> None:
        tower_ids = {t.id for t in self.towers}
        for s in self.segments:
            if s.a not in tower_ids or s.b not in tower_ids:
                raise GridError(f"segment {s.id} references a missing tower")
        wind = math.hypot(*self.wind)
        for u in self.uavs:
            if wind >= min(u.nav_speed, u.insp_speed):
                raise GridError(f"wind {wind:.2f} m/s not below every airspeed of {u.id}")

    def segment_length(self, s: Segment) -> float:
        (x1, y1), (x2, y2) = self.tower(s.a).xy, self.tower(s.b).xy
        return math.hypot(x1 - x2, y1 - y2)


# -- JSON ----------------------------------------------------------------------

def grid_to_json(grid: PowerGrid) -> str:
    doc = {
        "kind": "grid",
        "name": grid.name,
        "towers": [{"id": t.id, "xy": list(t.xy)} for t in grid.towers],
        "segments": [{"id": s.id, "a": s.a, "b": s.b} for s in grid.segments],
        "bases": [{"id": b.id, "xy": list(b.xy)} for b in grid.bases],
        "uavs": [
            {
                "id": u.id, "kind": u.kind, "base": u.base,
                "nav_speed": u.nav_speed, "insp_speed": u.insp_speed,
                "turn_radius": u.turn_radius,
                "endurance": None if math.isinf(u.endurance) else u.endurance,
            }
            for u in grid.uavs
        ],
        "wind": list(grid.wind),
        "orbit_radius": grid.orbit_radius,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads_grid(text: str) -> PowerGrid:
    doc = json.loads(text)
    if doc.get("kind") != "grid":
        raise GridError("not a grid document (kind != 'grid')")
    grid = PowerGrid(
        name=doc.get("name", "grid"),
        towers=tuple(Tower(t["id"], tuple(t["xy"])) for t in doc["towers"]),
        segments=tuple(Segment(s["id"], s["a"], s["b"]) for s in doc["segments"]),
        bases=tuple(Base(b["id"], tuple(b["xy"])) for b in doc["bases"]),
        uavs=tuple(
            GridUav(
                u["id"], u["kind"], u["base"],
                u.get("nav_speed", 10.0), u.get("insp_speed", 5.0),
                u.get("turn_radius", 0.0),
                math.inf if u.get("endurance") is None else float(u["endurance"]),
            )
            for u in doc["uavs"]
        ),
        wind=tuple(doc.get("wind", (0.0, 0.0))),
        orbit_radius=doc.get("orbit_radius", 10.0),
    )
    grid.check()
    return grid


def load_grid(path: str | Path) -> PowerGrid:
    return loads_grid(Path(path).read_text())


def save_grid(grid: PowerGrid, path: str | Path) -> None:
    Path(path).write_text(grid_to_json(grid))


# -- generation ------------------------------------------------------------------

def generate_grid(
    n_towers: int,
    n_segments: int | None = None,
    seed: int = 0,
    spacing: float = 300.0,
    multirotors: int = 2,
    vtols: int = 0,
    wind: tuple[float, float] = (0.0, 0.0),
    name: str | None = None,
) -> PowerGrid:
    """Seeded branchy synthetic grid: towers grow as a random tree and the
    tree edges become cable segments."""
    if n_towers < 1:
        raise GridError("empty selection: need at least one tower")
    if n_segments is None:
        n_segments = n_towers - 1
    if n_segments > n_towers - 1:
        raise GridError("a tree on n towers has at most n-1 segments")
    rng = random.Random(seed)
    positions: list[tuple[float, float]] = [(0.0, 0.0)]
    parent: list[int] = [0]
    headings: list[float] = [0.0]
    for i in range(1, n_towers):
        # mostly continue the current branch, sometimes fork a new one
        if i > 1 and rng.random() < 0.3:
            anchor = rng.randrange(i)
            heading = rng.uniform(0, 2 * math.pi)
        else:
            anchor = i - 1
            heading = headings[anchor] + rng.uniform(-0.5, 0.5)
        length = spacing * rng.uniform(0.7, 1.3)
        ax, ay = positions[anchor]
        positions.append((ax + length * math.cos(heading), ay + length * math.sin(heading)))
        parent.append(anchor)
        headings.append(heading)
    towers = tuple(
        Tower(f"t{i + 1}", (round(x, 3), round(y, 3))) for i, (x, y) in enumerate(positions)
    )
    segments = tuple(
        Segment(f"s{i}", f"t{parent[i] + 1}", f"t{i + 1}") for i in range(1, n_segments + 1)
    )
    base = Base("b1", (-spacing, 0.0))
    uavs = []
    for k in range(multirotors):
        uavs.append(GridUav(f"m{k + 1}", "multirotor", "b1"))
    for k in range(vtols):
        uavs.append(GridUav(f"v{k + 1}", "vtol", "b1", turn_radius=60.0))
    grid = PowerGrid(
        name=name or f"grid{n_towers}s{n_segments}", towers=towers, segments=segments,
        bases=(base,), uavs=tuple(uavs), wind=wind,
    )
    grid.check()
    return grid


# -- planning instance -------------------------------------------------------------

def grid_to_instance(
    grid: PowerGrid,
    towers: list[str] | None = None,
    segments: list[str] | None = None,
    energy_budget: bool | None = None,
) -> tuple[ProblemInstance, Weigher]:
    """Planning instance over a selection of grid elements (default: all).

    Tower tasks get one orbit approach; segment tasks get one vertex per
    inspection direction.  The weigher prices transits and executions with
    the aircraft cost models.
    """
    grid.check()
    sel_towers = [t for t in grid.towers if towers is None or t.id in set(towers)]
    sel_segments = [s for s in grid.segments if segments is None or s.id in set(segments)]
    if towers is not None:
        missing = set(towers) - {t.id for t in sel_towers}
        if missing:
            raise GridError(f"unknown towers selected: {sorted(missing)}")
    if segments is not None:
        missing = set(segments) - {s.id for s in sel_segments}
        if missing:
            raise GridError(f"unknown segments selected: {sorted(missing)}")
    if not sel_towers and not sel_segments:
        raise GridError("empty selection: nothing to inspect")

    tasks: list[Task] = []
    for t in sel_towers:
        tasks.append(Task(t.id, ("orbit",)))
    for s in sel_segments:
        tasks.append(Task(s.id, ("u", "d")))

    budget_on = any(math.isfinite(u.endurance) for u in grid.uavs) \
        if energy_budget is None else energy_budget

    workers = []
    for u in grid.uavs:
        pairs = set()
        if u.kind != "vtol":
            pairs |= {(t.id, "orbit") for t in sel_towers}
        pairs |= {(s.id, d) for s in sel_segments for d in ("u", "d")}
        workers.append(Worker(
            u.id, u.base, frozenset(pairs), kind=u.kind,
            params={
                "nav_speed": u.nav_speed, "insp_speed": u.insp_speed,
                "turn_radius": u.turn_radius,
                "endurance": u.endurance if math.isfinite(u.endurance) else -1.0,
            },
        ))

    inst = ProblemInstance(
        name=grid.name,
        cost_types=("time", "energy"),
        tasks=tuple(tasks),
        workers=tuple(workers),
        bases=grid.bases,
        energy_budget=budget_on,
    )

    seg_by_id = {s.id: s for s in grid.segments}
    tower_by_id = {t.id: t for t in grid.towers}
    base_by_id = {b.id: b for b in grid.bases}
    specs = {u.id: u.spec() for u in grid.uavs}
    wind = grid.wind

    def seg_heading(s: Segment, direction: str) -> float:
        (x1, y1), (x2, y2) = tower_by_id[s.a].xy, tower_by_id[s.b].xy
        h = math.atan2(y2 - y1, x2 - x1)
        return norm_angle(h if direction == "u" else h + math.pi)

    def entry_pose(v: Vertex, spec: UavSpec) -> Pose2D:
        if v.kind == "base":
            x, y = base_by_id[v.name].xy
            return Pose2D(x, y, heading_against(wind))
        if v.name in tower_by_id:
            x, y = tower_by_id[v.name].xy
            return Pose2D(x, y, 0.0)
        s = seg_by_id[v.name]
        start = s.a if v.approach == "u" else s.b
        x, y = tower_by_id[start].xy
        return Pose2D(x, y, seg_heading(s, v.approach))

    def exit_pose(v: Vertex, spec: UavSpec) -> Pose2D:
        if v.kind == "base":
            x, y = base_by_id[v.name].xy
            return Pose2D(x, y, heading_against(wind))
        if v.name in tower_by_id:
            x, y = tower_by_id[v.name].xy
            return Pose2D(x, y, 0.0)
        s = seg_by_id[v.name]
        end = s.b if v.approach == "u" else s.a
        x, y = tower_by_id[end].xy
        return Pose2D(x, y, seg_heading(s, v.approach))

    def weigher(worker: Worker, u: Vertex, v: Vertex):
        spec = specs[worker.id]
        dt, de = transit_cost(spec, exit_pose(u, spec), entry_pose(v, spec), wind)
        if v.kind == "base":
            et, ee = 0.0, 0.0
        elif v.name in tower_by_id:
            et, ee = inspection_cost(TowerOrbit(grid.orbit_radius), spec)
        else:
            et, ee = inspection_cost(SegmentRun(grid.segment_length(seg_by_id[v.name])), spec)
        return {"time": (dt, et), "energy": (de, ee)}

    return inst, weigher


# -- GeoJSON ---------------------------------------------------------------------

def grid_geojson(grid: PowerGrid) -> dict:
    features = []
    for t in grid.towers:
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": list(t.xy)},
            "properties": {"id": t.id, "role": "tower"},
        })
    for s in grid.segments:
        features.append({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": [
                list(grid.tower(s.a).xy), list(grid.tower(s.b).xy)]},
            "properties": {"id": s.id, "role": "segment"},
        })
    for b in grid.bases:
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": list(b.xy)},
            "properties": {"id": b.id, "role": "base"},
        })
    return {"type": "FeatureCollection", "features": features}


def plan_geojson(plan: Plan, grid: PowerGrid) -> dict:
    """Planned routes as one LineString per active worker."""
    tower_by_id = {t.id: t.xy for t in grid.towers}
    seg_by_id = {s.id: s for s in grid.segments}
    base_by_id = {b.id: b.xy for b in grid.bases}
    features = []
    for wid, wp in sorted(plan.workers.items()):
        if not wp.active:
            continue
        coords: list[list[float]] = []
        for v in wp.route:
            if v.kind == "base":
                coords.append(list(base_by_id[v.name]))
            elif v.name in tower_by_id:
                coords.append(list(tower_by_id[v.name]))
            else:
                s = seg_by_id[v.name]
                pair = (s.a, s.b) if v.approach == "u" else (s.b, s.a)
                coords.append(list(tower_by_id[pair[0]]))
                coords.append(list(tower_by_id[pair[1]]))
        features.append({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": coords},
            "properties": {"worker": wid, "wait": wp.wait,
                           "total_time": wp.total_time,
                           "total_energy": wp.total_energy},
        })
    return {"type": "FeatureCollection", "features": features}
