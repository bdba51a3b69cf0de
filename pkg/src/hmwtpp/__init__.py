"""hmwtpp: exact planning for heterogeneous multi-worker task problems.

The pipeline is: describe a ProblemInstance, build the weighted directed
multigraph, encode it as a MILP, solve with the internal branch-and-bound
(optionally with lazily separated subtour cuts), then extract and validate
per-worker plans.
"""

from .model import (
    ENERGY,
    TIME,
    Base,
    Defect,
    OrderPair,
    PrecedencePair,
    ProblemInstance,
    Task,
    TimeWindow,
    Worker,
    restrict,
    validate_instance,
)
from .graph import MultiGraph, Vertex, build_graph, dump_graph, edge_count_bound
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "TIME",
    "ENERGY",
    "Task",
    "Worker",
    "Base",
    "OrderPair",
    "PrecedencePair",
    "TimeWindow",
    "ProblemInstance",
    "Defect",
    "restrict",
    "validate_instance",
    "Vertex",
    "MultiGraph",
    "build_graph",
    "dump_graph",
    "edge_count_bound",
    "KERNEL_BACKEND",
    "__version__",
]
