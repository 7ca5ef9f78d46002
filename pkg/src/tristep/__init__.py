"""Three-step iterative processes with errors for three multivalued maps."""
from .engine import StopRule, Trace, fejer_check, run, step
from .geometry import AxisBox, Ball, FinitePointSet, Singleton, hausdorff, project
from .mappings import MultiMap, ProximalMap, catalog_map, catalog_problem
from .schedules import make_errors, make_schedule, validate

__version__ = "0.1.0"

__all__ = [
    "AxisBox", "Ball", "FinitePointSet", "Singleton", "hausdorff", "project",
    "MultiMap", "ProximalMap", "catalog_map", "catalog_problem",
    "make_errors", "make_schedule", "validate",
    "StopRule", "Trace", "fejer_check", "run", "step",
]
