"""Native JSON instance format.

One document fully describes a planning instance: tasks, workers, bases,
constraint sets, flags and edge costs.  Costs come in two shapes:

* ``locations``: each task/base maps to a named location; transitions cost
  ``between`` across locations, ``same`` within one, and ``into_base`` on
  legs entering a base (route closure is bookkeeping, not movement, unless
  said otherwise).  Execution costs are per (task, approach, worker).
* ``explicit``: a flat list of per-edge (transition, execution) entries.

The JSON schema ships with the package data (instance.schema.json); parsing
and serialization are exact inverses of each other.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..graph import Vertex, Weigher
from ..model import (
    Base,
    OrderPair,
    PrecedencePair,
    ProblemInstance,
    Task,
    TimeWindow,
    Worker,
)


class NativeFormatError(Exception):
    pass


@dataclass
class NativeInstance:
    instance: ProblemInstance
    costs: dict

    @property
    def name(self) -> str:
        return self.instance.name


def _pairs(raw) -> frozenset:
    return frozenset((t, a) for t, a in raw)


def loads_instance(text: str) -> NativeInstance:
    doc = json.loads(text)
    if doc.get("kind") != "instance":
        raise NativeFormatError("not a native instance document (kind != 'instance')")
    try:
        tasks = tuple(
            Task(t["id"], tuple(t.get("approaches", ["a"])), t.get("mandatory", True))
            for t in doc["tasks"]
        )
        workers = tuple(
            Worker(
                w["id"], w["base"], _pairs(w["compatible"]),
                w.get("kind", "generic"), dict(w.get("params", {})),
            )
            for w in doc["workers"]
        )
        bases = tuple(
            Base(b["id"], tuple(b["xy"]) if b.get("xy") is not None else None)
            for b in doc["bases"]
        )
        inst = ProblemInstance(
            name=doc.get("name", "instance"),
            cost_types=tuple(doc.get("cost_types", ["time"])),
            tasks=tasks,
            workers=workers,
            bases=bases,
            order=tuple(OrderPair(o["worker"], o["before"], o["after"])
                        for o in doc.get("order", [])),
            precedence=tuple(PrecedencePair(p["before"], p["after"])
                             for p in doc.get("precedence", [])),
            windows=tuple(TimeWindow(w["task"], w["start"], w["end"], w.get("approach", ""))
                          for w in doc.get("windows", [])),
            waiting=doc.get("waiting", False),
            energy_budget=doc.get("energy_budget", False),
        )
    except KeyError as exc:
        raise NativeFormatError(f"missing field {exc}") from exc
    return NativeInstance(inst, doc.get("costs", {}))


def load_instance(path: str | Path) -> NativeInstance:
    return loads_instance(Path(path).read_text())


def dumps_instance(ni: NativeInstance) -> str:
    inst = ni.instance
    doc = {
        "kind": "instance",
        "name": inst.name,
        "cost_types": list(inst.cost_types),
        "tasks": [
            {"id": t.id, "approaches": list(t.approaches), "mandatory": t.mandatory}
            for t in inst.tasks
        ],
        "workers": [
            {
                "id": w.id,
                "base": w.base,
                "compatible": sorted([t, a] for t, a in w.compatible),
                "kind": w.kind,
                "params": dict(w.params),
            }
            for w in inst.workers
        ],
        "bases": [
            {"id": b.id, "xy": list(b.xy) if b.xy is not None else None}
            for b in inst.bases
        ],
        "order": [
            {"worker": o.worker, "before": o.before, "after": o.after} for o in inst.order
        ],
        "precedence": [
            {"before": p.before, "after": p.after} for p in inst.precedence
        ],
        "windows": [
            {"task": w.task, "start": w.start, "end": w.end, "approach": w.approach}
            for w in inst.windows
        ],
        "waiting": inst.waiting,
        "energy_budget": inst.energy_budget,
        "costs": ni.costs,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def dump_instance(ni: NativeInstance, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(ni))


def _ct_map(raw, cost_types) -> dict[str, float]:
    return {ct: float(raw.get(ct, 0.0)) for ct in cost_types}


def native_weigher(ni: NativeInstance) -> Weigher:
    """Build the edge weigher described by the document's costs section."""
    inst = ni.instance
    costs = ni.costs
    cts = inst.cost_types
    mode = costs.get("transition", {}).get("mode", "locations")

    execution = costs.get("execution", {})

    def exec_cost(worker: Worker, v: Vertex) -> dict[str, float]:
        if v.kind == "base":
            return {ct: 0.0 for ct in cts}
        try:
            raw = execution[v.name][v.approach][worker.id]
        except KeyError as exc:
            raise NativeFormatError(
                f"no execution cost for {v.token} by {worker.id}"
            ) from exc
        return _ct_map(raw, cts)

    if mode == "locations":
        tr = costs.get("transition", {})
        location = tr.get("location", {})
        between = _ct_map(tr.get("between", {}), cts)
        same = _ct_map(tr.get("same", {}), cts)
        into_base = _ct_map(tr.get("into_base", tr.get("between", {})), cts)
        overrides = {
            key: _ct_map(val, cts) for key, val in tr.get("pairs", {}).items()
        }

        def weigher(worker: Worker, u: Vertex, v: Vertex):
            lu = location.get(u.name, u.name)
            lv = location.get(v.name, v.name)
            if f"{lu}->{lv}" in overrides:
                trans = overrides[f"{lu}->{lv}"]
            elif v.kind == "base":
                trans = into_base
            elif lu == lv:
                trans = same
            else:
                trans = between
            ex = exec_cost(worker, v)
            return {ct: (trans[ct], ex[ct]) for ct in cts}

        return weigher

    if mode == "explicit":
        table: dict[tuple[str, str, str], dict[str, tuple[float, float]]] = {}
        for entry in costs.get("transition", {}).get("edges", []):
            key = (entry["worker"], entry["from"], entry["to"])
            table[key] = {
                ct: (float(pair[0]), float(pair[1]))
                for ct, pair in entry["costs"].items()
            }

        def weigher(worker: Worker, u: Vertex, v: Vertex):
            try:
                return table[(worker.id, u.token, v.token)]
            except KeyError as exc:
                raise NativeFormatError(
                    f"no explicit cost for edge [{u.token} -> {v.token}] | {worker.id}"
                ) from exc

        return weigher

    raise NativeFormatError(f"unknown transition mode {mode!r}")
