"""The two-worker guitar assembly line fixture.

Six tasks on three workbenches; the gluing step offers a fast and a slow
approach.  Worker wa handles body work, wb neck work, and both can glue or
finish.  Moving between distinct stations (or out of the base) takes 5
seconds; shuffling within one workbench and the bookkeeping leg that closes
the route back to the base are free.
"""

from __future__ import annotations

from ..model import Base, PrecedencePair, ProblemInstance, Task, Worker
from .native import NativeInstance

H = 3600.0

#: (task, approach) -> {worker: execution seconds}; absent worker means
#: not compatible
_COSTS = {
    ("T1", "a"): {"wa": 1 * H},
    ("T2", "a"): {"wa": 1 * H},
    ("T3", "a"): {"wb": 2 * H},
    ("T4", "a"): {"wb": 2 * H},
    ("T5", "A"): {"wa": 0.5 * H, "wb": 1 * H},
    ("T5", "B"): {"wa": 3 * H, "wb": 3 * H},
    ("T6", "a"): {"wa": 1 * H, "wb": 2 * H},
}

_STATION = {"B": "base", "T1": "wb1", "T2": "wb1", "T3": "wb2",
            "T4": "wb2", "T5": "wb3", "T6": "wb3"}


def build_guitar(waiting: bool = False) -> NativeInstance:
    tasks = (
        Task("T1"), Task("T2"), Task("T3"), Task("T4"),
        Task("T5", ("A", "B")), Task("T6"),
    )
    compat = {"wa": set(), "wb": set()}
    execution: dict = {}
    for (tid, app), per_worker in _COSTS.items():
        for wid, seconds in per_worker.items():
            compat[wid].add((tid, app))
            execution.setdefault(tid, {}).setdefault(app, {})[wid] = {"time": seconds}

    inst = ProblemInstance(
        name="guitar",
        cost_types=("time",),
        tasks=tasks,
        workers=(
            Worker("wa", "B", frozenset(compat["wa"])),
            Worker("wb", "B", frozenset(compat["wb"])),
        ),
        bases=(Base("B"),),
        precedence=(
            PrecedencePair("T1", "T2"),
            PrecedencePair("T3", "T4"),
            PrecedencePair("T2", "T5"),
            PrecedencePair("T4", "T5"),
            PrecedencePair("T5", "T6"),
        ),
        waiting=waiting,
    )
    costs = {
        "execution": execution,
        "transition": {
            "mode": "locations",
            "location": dict(_STATION),
            "between": {"time": 5.0},
            "same": {"time": 0.0},
            "into_base": {"time": 0.0},
        },
    }
    return NativeInstance(inst, costs)
