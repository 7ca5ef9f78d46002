"""Experiment configuration: YAML in, validated :class:`ExperimentConfig` out.

Schema (all blocks except ``problem`` and ``schedule`` are optional)::

    problem:
      label: half_interval        # catalog problem label
      params: {}                  # keyword parameters of the catalog entry
      x1: [1.0]                   # initial point, defaults to the catalog x1
      fixed_points: [[0.0]]       # override of the known common fixed points
      strict_singleton_images: true
    schedule:
      name: constant_decay        # builtin schedule
      params: {}
      window: [0.3, 0.75]         # hypothesis window [a, b], builtin default otherwise
      errors: {kind: zero}        # zero | constant {point} | seeded_uniform {lower, upper, seed}
      strict: false
      horizon: 10000              # validation horizon
      tail_threshold: 0.01        # summability proxy threshold
    mode: A                       # A | B
    strategy: nearest             # nearest | seeded_random | first_listed
    singleton_images: warn        # warn | error | ignore (mode A hypothesis)
    stop: {max_iter: 10000, residual_tol: 1.0e-8, stagnation_tol: 0.0, stagnation_window: 10}
    seeds: [0]
    monitors: {fejer: true, fejer_tol: 1.0e-9}
    output: {dir: out, plots: false}
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from .engine import MODES, STRATEGIES, StopRule
from .geometry import GeometryError, as_vector, dist_point_to_set
from .mappings import PROBLEM_CATALOG, KnownFixedPoints, Problem, catalog_problem
from .schedules import (
    BUILTIN_SCHEDULES,
    DEFAULT_TAIL_THRESHOLD,
    Schedule,
    ScheduleError,
    make_errors,
    make_schedule,
)


class ConfigError(ValueError):
    """All schema errors found in a document, each as ``path: message``."""

    def __init__(self, errors: list[str]):
        super().__init__("invalid config:\n  " + "\n  ".join(errors))
        self.errors = errors


@dataclass
class ExperimentConfig:
    problem_label: str
    problem_params: dict
    x1: list
    schedule_name: str
    schedule_params: dict = field(default_factory=dict)
    errors: dict = field(default_factory=lambda: {"kind": "zero"})
    window: list | None = None
    strict: bool = False
    horizon: int = 10_000
    tail_threshold: float = DEFAULT_TAIL_THRESHOLD
    fixed_points: list | None = None
    strict_singleton_images: bool | None = None
    mode: str = "A"
    strategy: str = "nearest"
    singleton_images: str = "warn"
    stop: dict = field(default_factory=dict)
    seeds: list = field(default_factory=lambda: [0])
    fejer: bool = True
    fejer_tol: float = 1e-9
    out_dir: str = "out"
    plots: bool = False
    warnings: list = field(default_factory=list, compare=False)

    def problem(self) -> Problem:
        base = catalog_problem(self.problem_label, **self.problem_params)
        fp = base.fixed_points
        if self.fixed_points is not None or self.strict_singleton_images is not None:
            pts = self.fixed_points if self.fixed_points is not None else (fp.points if fp else [])
            strict = (self.strict_singleton_images if self.strict_singleton_images is not None
                      else (fp.strict_singleton_images if fp else True))
            fp = KnownFixedPoints(tuple(pts), strict)
        return Problem(base.label, base.maps, base.domain, as_vector(self.x1), fp,
                       base.engine_ok)

    def schedule(self, seed: int) -> Schedule:
        problem = catalog_problem(self.problem_label, **self.problem_params)
        errors = make_errors(self.errors, problem.domain, seed=seed)
        return make_schedule(self.schedule_name, self.schedule_params, errors, self.window)

    def stop_rule(self) -> StopRule:
        return StopRule(**self.stop)

    def to_dict(self) -> dict:
        problem = {"label": self.problem_label, "params": dict(self.problem_params),
                   "x1": list(self.x1)}
        if self.fixed_points is not None:
            problem["fixed_points"] = [list(p) for p in self.fixed_points]
        if self.strict_singleton_images is not None:
            problem["strict_singleton_images"] = self.strict_singleton_images
        schedule = {"name": self.schedule_name, "params": dict(self.schedule_params),
                    "errors": dict(self.errors), "strict": self.strict,
                    "horizon": self.horizon, "tail_threshold": self.tail_threshold}
        if self.window is not None:
            schedule["window"] = list(self.window)
        return {"problem": problem, "schedule": schedule, "mode": self.mode,
                "strategy": self.strategy, "singleton_images": self.singleton_images,
                "stop": dict(self.stop), "seeds": list(self.seeds),
                "monitors": {"fejer": self.fejer, "fejer_tol": self.fejer_tol},
                "output": {"dir": self.out_dir, "plots": self.plots}}


def emit(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False)


_TOP = {"problem", "schedule", "mode", "strategy", "singleton_images", "stop", "seeds",
        "monitors", "output"}
_STOP_KEYS = {"max_iter", "residual_tol", "stagnation_tol", "stagnation_window"}


def _floats(value, path, errors):
    try:
        return [float(v) for v in np.atleast_1d(np.asarray(value, dtype=float)).tolist()]
    except (TypeError, ValueError):
        errors.append(f"{path}: expected a number or list of numbers, got {value!r}")
        return None


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a YAML experiment description.

    Every problem is collected before raising, so one :class:`ConfigError`
    lists them all.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"<document>: not valid YAML ({exc})"]) from None
    if not isinstance(doc, dict):
        raise ConfigError(["<document>: expected a mapping at the top level"])
    errors: list[str] = []
    warns: list[str] = []
    for key in sorted(set(doc) - _TOP):
        errors.append(f"{key}: unknown top-level key")

    prob = doc.get("problem")
    problem = None
    label, params = None, {}
    if not isinstance(prob, dict):
        errors.append("problem: required mapping is missing")
        prob = {}
    else:
        label = prob.get("label")
        params = prob.get("params") or {}
        if label is None:
            errors.append("problem.label: required field is missing")
        elif label not in PROBLEM_CATALOG:
            errors.append(f"problem.label: unknown catalog label {label!r} "
                          f"(known: {', '.join(sorted(PROBLEM_CATALOG))})")
        elif not isinstance(params, dict):
            errors.append("problem.params: expected a mapping")
        else:
            try:
                problem = catalog_problem(label, **params)
            except (TypeError, ValueError) as exc:
                errors.append(f"problem.params: {exc}")

    x1 = None
    if problem is not None:
        x1 = _floats(prob["x1"], "problem.x1", errors) if "x1" in prob else problem.x1.tolist()
        if x1 is not None:
            if len(x1) != problem.dim:
                errors.append(f"problem.x1: expected {problem.dim} coordinates, got {len(x1)}")
            elif not np.all(np.isfinite(x1)):
                errors.append("problem.x1: non-finite coordinate")
            elif dist_point_to_set(x1, problem.domain) > 1e-9:
                errors.append(f"problem.x1: {x1} is not in the domain {problem.domain!r}")
        if not problem.engine_ok:
            warns.append(f"problem.label: {label} is meant for checker calibration, "
                         "not convergence runs")
    fixed = None
    if "fixed_points" in prob:
        fixed = []
        for i, p in enumerate(prob["fixed_points"] or []):
            v = _floats(p, f"problem.fixed_points[{i}]", errors)
            if v is not None:
                if problem is not None and len(v) != problem.dim:
                    errors.append(f"problem.fixed_points[{i}]: wrong dimension")
                fixed.append(v)
    ssi = prob.get("strict_singleton_images")
    if ssi is not None and not isinstance(ssi, bool):
        errors.append("problem.strict_singleton_images: expected true/false")

    sched = doc.get("schedule")
    sname, sparams, serrors, window = None, {}, {"kind": "zero"}, None
    strict, horizon, tail = False, 10_000, DEFAULT_TAIL_THRESHOLD
    if not isinstance(sched, dict):
        errors.append("schedule: required mapping is missing")
    else:
        sname = sched.get("name")
        sparams = sched.get("params") or {}
        serrors = sched.get("errors") or {"kind": "zero"}
        window = sched.get("window")
        strict = sched.get("strict", False)
        horizon = sched.get("horizon", 10_000)
        tail = sched.get("tail_threshold", DEFAULT_TAIL_THRESHOLD)
        if sname is None:
            errors.append("schedule.name: required field is missing")
        elif sname not in BUILTIN_SCHEDULES:
            errors.append(f"schedule.name: unknown schedule {sname!r} "
                          f"(known: {', '.join(sorted(BUILTIN_SCHEDULES))})")
        if not isinstance(strict, bool):
            errors.append("schedule.strict: expected true/false")
        if not isinstance(horizon, int) or horizon < 1:
            errors.append("schedule.horizon: expected a positive integer")
        if window is not None:
            window = _floats(window, "schedule.window", errors)
            if window is not None and len(window) != 2:
                errors.append("schedule.window: expected [a, b]")
        if not isinstance(serrors, dict):
            errors.append("schedule.errors: expected a mapping")
            serrors = {"kind": "zero"}
        if sname in BUILTIN_SCHEDULES and problem is not None and isinstance(sparams, dict):
            try:
                errs = make_errors(serrors, problem.domain)
                if errs.dim != problem.dim:
                    errors.append("schedule.errors: dimension does not match the problem")
                make_schedule(sname, sparams, errs, window)
            except (ScheduleError, GeometryError, KeyError, TypeError, ValueError) as exc:
                errors.append(f"schedule: {exc}")

    mode = doc.get("mode", "A")
    if mode not in MODES:
        errors.append(f"mode: expected one of {list(MODES)}, got {mode!r}")
    strategy = doc.get("strategy", "nearest")
    if strategy not in STRATEGIES:
        errors.append(f"strategy: expected one of {list(STRATEGIES)}, got {strategy!r}")
    singleton_images = doc.get("singleton_images", "warn")
    if singleton_images not in ("warn", "error", "ignore"):
        errors.append("singleton_images: expected warn, error or ignore")

    stop = doc.get("stop") or {}
    if not isinstance(stop, dict):
        errors.append("stop: expected a mapping")
        stop = {}
    for key in sorted(set(stop) - _STOP_KEYS):
        errors.append(f"stop.{key}: unknown field")
    stop = {k: v for k, v in stop.items() if k in _STOP_KEYS}
    try:
        StopRule(**stop)
    except (TypeError, ValueError) as exc:
        errors.append(f"stop: {exc}")

    seeds = doc.get("seeds", [0])
    if isinstance(seeds, int):
        seeds = [seeds]
    if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
        errors.append("seeds: expected a nonempty list of integers")
        seeds = [0]

    mon = doc.get("monitors") or {}
    out = doc.get("output") or {}
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        problem_label=label, problem_params=dict(params), x1=x1, schedule_name=sname,
        schedule_params=dict(sparams), errors=dict(serrors), window=window, strict=strict,
        horizon=horizon, tail_threshold=float(tail), fixed_points=fixed,
        strict_singleton_images=ssi, mode=mode, strategy=strategy,
        singleton_images=singleton_images, stop=stop, seeds=list(seeds),
        fejer=bool(mon.get("fejer", True)), fejer_tol=float(mon.get("fejer_tol", 1e-9)),
        out_dir=str(out.get("dir", "out")), plots=bool(out.get("plots", False)),
        warnings=warns)
