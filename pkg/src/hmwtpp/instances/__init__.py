"""Instance ingestion and construction: TSPLIB files, the native JSON
format, the two-worker assembly-line fixture and synthetic power grids."""

from .tsplib import TsplibError, TsplibProblem, TsplibRecipe, parse_tsplib, tsplib_to_instance
from .native import NativeInstance, load_instance, loads_instance, dump_instance, native_weigher
from .guitar import build_guitar
from .grid import (
    GridError,
    GridUav,
    PowerGrid,
    Segment,
    Tower,
    generate_grid,
    grid_geojson,
    grid_to_instance,
    grid_to_json,
    load_grid,
    loads_grid,
    plan_geojson,
    save_grid,
)

__all__ = [
    "TsplibError",
    "TsplibProblem",
    "TsplibRecipe",
    "parse_tsplib",
    "tsplib_to_instance",
    "NativeInstance",
    "load_instance",
    "loads_instance",
    "dump_instance",
    "native_weigher",
    "build_guitar",
    "GridError",
    "GridUav",
    "PowerGrid",
    "Segment",
    "Tower",
    "generate_grid",
    "grid_geojson",
    "grid_to_instance",
    "load_grid",
    "plan_geojson",
]
