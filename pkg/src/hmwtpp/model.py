"""Domain model: cost types, tasks, approaches, workers, bases.

A planning instance is a declarative description of who can do what.  All
identifiers are opaque strings and every deterministic iteration in the
package uses lexicographic id order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

TIME = "time"
ENERGY = "energy"

#: (task id, approach id)
TaskApproach = tuple[str, str]


@dataclass(frozen=True)
class Task:
    """A unit of work offering one or more alternative approaches.

    Non-mandatory tasks may be skipped by the whole team; they exist for
    abstract pseudo-work such as waiting or recharging stops.
    """

    id: str
    approaches: tuple[str, ...] = ("a",)
    mandatory: bool = True

    def __post_init__(self):
        if not self.approaches:
            raise ValueError(f"task {self.id!r} needs at least one approach")
        if len(set(self.approaches)) != len(self.approaches):
            raise ValueError(f"task {self.id!r} has duplicate approach ids")


@dataclass(frozen=True)
class Base:
    """Start/finish anchor of a worker route; may carry planar coordinates."""

    id: str
    xy: tuple[float, float] | None = None


@dataclass(frozen=True)
class Worker:
    """A team member with exactly one base and a set of compatible approaches.

    ``params`` holds cost-model inputs (speeds, endurance, turn radius, ...);
    the MILP encoder never reads them, only the edge weighers do.
    """

    id: str
    base: str
    compatible: frozenset[TaskApproach]
    kind: str = "generic"
    params: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class OrderPair:
    """Within ``worker``'s route, task ``before`` must precede task ``after``."""

    worker: str
    before: str
    after: str


@dataclass(frozen=True)
class PrecedencePair:
    """Team-wide: ``before`` must be completed no later than ``after`` starts."""

    before: str
    after: str


@dataclass(frozen=True)
class TimeWindow:
    """Service at a task must start at or after ``start`` and finish by ``end``.

    ``approach`` narrows the window to a single approach vertex; when empty it
    applies to whichever approach the team selects.
    """

    task: str
    start: float
    end: float
    approach: str = ""


@dataclass
class ProblemInstance:
    name: str
    cost_types: tuple[str, ...]
    tasks: tuple[Task, ...]
    workers: tuple[Worker, ...]
    bases: tuple[Base, ...]
    order: tuple[OrderPair, ...] = ()
    precedence: tuple[PrecedencePair, ...] = ()
    windows: tuple[TimeWindow, ...] = ()
    waiting: bool = False
    energy_budget: bool = False

    def __post_init__(self):
        self._task_by_id = {t.id: t for t in self.tasks}
        self._worker_by_id = {w.id: w for w in self.workers}
        self._base_by_id = {b.id: b for b in self.bases}

    # -- lookups -----------------------------------------------------------

    def task(self, task_id: str) -> Task:
        return self._task_by_id[task_id]

    def worker(self, worker_id: str) -> Worker:
        return self._worker_by_id[worker_id]

    def base(self, base_id: str) -> Base:
        return self._base_by_id[base_id]

    def all_approaches(self) -> set[TaskApproach]:
        """Every (task, approach) pair of the instance."""
        return {(t.id, a) for t in self.tasks for a in t.approaches}

    def sorted_workers(self) -> list[Worker]:
        return sorted(self.workers, key=lambda w: w.id)

    def sorted_tasks(self) -> list[Task]:
        return sorted(self.tasks, key=lambda t: t.id)


def restrict(approaches: set[TaskApproach], worker: Worker) -> set[TaskApproach]:
    """Compatible restriction: the subset of ``approaches`` that ``worker``
    is able to perform."""
    return {s for s in approaches if s in worker.compatible}


@dataclass(frozen=True)
class Defect:
    """One problem found while validating an instance. Data, not a failure."""

    code: str
    subject: str
    detail: str

    def __str__(self):
        return f"{self.code}({self.subject}): {self.detail}"


def _precedence_cycle(inst: ProblemInstance) -> list[str] | None:
    """Return one cycle of task ids in the precedence relation, or None."""
    succ: dict[str, list[str]] = {}
    for p in inst.precedence:
        succ.setdefault(p.before, []).append(p.after)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {t: WHITE for t in succ} | {t: WHITE for ts in succ.values() for t in ts}
    stack: list[str] = []

    def visit(u: str) -> list[str] | None:
        color[u] = GREY
        stack.append(u)
        for v in sorted(succ.get(u, ())):
            if color.get(v, WHITE) == GREY:
                return stack[stack.index(v):] + [v]
            if color.get(v, WHITE) == WHITE:
                found = visit(v)
                if found:
                    return found
        stack.pop()
        color[u] = BLACK
        return None

    for u in sorted(color):
        if color[u] == WHITE:
            cyc = visit(u)
            if cyc:
                return cyc
    return None


def validate_instance(inst: ProblemInstance) -> list[Defect]:
    """Check an instance for defects.  An empty list means the instance is ok.

    Defects cover dangling references, id collisions, mandatory tasks nobody
    can perform, cyclic precedence and empty time windows.
    """
    defects: list[Defect] = []

    def add(code, subject, detail):
        defects.append(Defect(code, subject, detail))

    seen_ct: set[str] = set()
    for ct in inst.cost_types:
        if ct in seen_ct:
            add("duplicate-cost-type", ct, "cost type labels must be unique")
        seen_ct.add(ct)

    task_ids = {t.id for t in inst.tasks}
    base_ids = {b.id for b in inst.bases}
    worker_ids = {w.id for w in inst.workers}
    if len(task_ids) != len(inst.tasks):
        add("duplicate-id", "tasks", "task ids must be unique")
    if len(base_ids) != len(inst.bases):
        add("duplicate-id", "bases", "base ids must be unique")
    if len(worker_ids) != len(inst.workers):
        add("duplicate-id", "workers", "worker ids must be unique")
    for shared in sorted(task_ids & base_ids):
        add("base-task-collision", shared, "base ids must be disjoint from task ids")
    if not inst.bases:
        add("no-base", inst.name, "an instance needs at least one base")

    approaches = inst.all_approaches()
    for w in inst.sorted_workers():
        if w.base not in base_ids:
            add("dangling-base", w.id, f"worker base {w.base!r} does not exist")
        for pair in sorted(w.compatible):
            if pair not in approaches:
                add("dangling-approach", w.id, f"compatibility entry {pair!r} does not resolve")

    covered = set()
    for w in inst.workers:
        covered |= restrict(approaches, w)
    for t in inst.sorted_tasks():
        if t.mandatory and not any((t.id, a) in covered for a in t.approaches):
            add("uncovered-mandatory-task", t.id, "no worker is compatible with any approach")

    for p in inst.order:
        if p.worker not in worker_ids:
            add("dangling-worker", f"{p.before}<{p.after}", f"order pair names unknown worker {p.worker!r}")
        for tid in (p.before, p.after):
            if tid not in task_ids:
                add("dangling-task", tid, "order pair references unknown task")
    for p in inst.precedence:
        for tid in (p.before, p.after):
            if tid not in task_ids:
                add("dangling-task", tid, "precedence pair references unknown task")

    cycle = _precedence_cycle(inst)
    if cycle:
        add("precedence-cycle", "->".join(cycle), "precedence relation must be acyclic")

    for win in inst.windows:
        if win.task not in task_ids:
            add("dangling-task", win.task, "time window references unknown task")
        elif win.approach and win.approach not in inst.task(win.task).approaches:
            add("dangling-approach", win.task, f"window approach {win.approach!r} does not exist")
        if win.start > win.end:
            add("empty-time-window", win.task, f"window [{win.start}, {win.end}] is empty")

    if inst.energy_budget and ENERGY not in inst.cost_types:
        add("missing-cost-type", ENERGY, "energy budget requires an energy cost type")

    return defects
