"""Run a parsed experiment over its seeds and write traces and summaries."""
from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

from .config import ExperimentConfig
from .engine import EngineError, Trace, fejer_check, run
from .schedules import HypothesisViolation, ScheduleError, validate

log = logging.getLogger(__name__)

CONVERGED = ("residual_tol", "stagnation")


@dataclass
class RunSummary:
    seed: int
    stop_reason: str | None
    iterations: int
    final_x: list | None
    final_residuals: list | None
    final_dist_F: float | None
    fejer: dict = field(default_factory=dict)
    validation: dict = field(default_factory=dict)
    wall_time: float = 0.0
    error: str | None = None
    trace_file: str | None = None
    plot_file: str | None = None

    @property
    def ok(self) -> bool:
        monitors = all(v["passed"] for v in self.fejer.values())
        return self.stop_reason in CONVERGED and monitors and self.error is None


@dataclass
class ExperimentResult:
    summaries: list
    out_dir: str
    warnings: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 0 if self.summaries and all(s.ok for s in self.summaries) else 1

    def aggregate(self) -> dict:
        reasons: dict[str, int] = {}
        for s in self.summaries:
            reasons[str(s.stop_reason)] = reasons.get(str(s.stop_reason), 0) + 1
        return {"runs": len(self.summaries), "converged": sum(s.ok for s in self.summaries),
                "stop_reasons": reasons, "exit_code": self.exit_code,
                "seeds": [s.seed for s in self.summaries], "warnings": self.warnings,
                "summaries": [f"summary_seed{s.seed}.json" for s in self.summaries]}


def write_atomic(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _json_default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _fejer_applicable(config: ExperimentConfig, problem) -> bool:
    fp = problem.fixed_points
    if not config.fejer or fp is None or not fp.points:
        return False
    # the monitor's bound relies on T_i(p) = {p}; without it only mode B is covered
    return fp.strict_singleton_images or config.mode == "B"


def _summarize(trace: Trace | None, seed, config, problem, validation, error, t0) -> RunSummary:
    if trace is None or not trace.records:
        return RunSummary(seed, trace.stop_reason if trace else "not_run", 0, None, None,
                          None, validation=validation, error=error,
                          wall_time=time.perf_counter() - t0)
    last = trace.final
    fejer = {}
    if _fejer_applicable(config, problem) and len(trace) >= 2:
        for p in problem.fixed_points.points:
            rep = fejer_check(trace, p, tol=config.fejer_tol)
            fejer[json.dumps(p.tolist())] = {"passed": rep.passed, "M": rep.details["M"],
                                             "violations": len(rep.violations)}
    return RunSummary(seed, trace.stop_reason, len(trace), last.x.tolist(),
                      list(last.residuals), last.dist_F, fejer, validation,
                      time.perf_counter() - t0, error)


def _run_one(config: ExperimentConfig, seed: int, out_dir: str, strict: bool,
             plots: bool) -> RunSummary:
    t0 = time.perf_counter()
    problem = config.problem()
    schedule = config.schedule(seed)
    trace = None
    try:
        report = validate(schedule, config.horizon, strict=strict,
                          tail_threshold=config.tail_threshold, warn=False)
    except HypothesisViolation as exc:
        summary = _summarize(None, seed, config, problem,
                             {"ok": False, "strict": True, "message": str(exc)},
                             f"schedule validation failed: {exc}", t0)
    except ScheduleError as exc:
        summary = _summarize(None, seed, config, problem, {"ok": False, "message": str(exc)},
                             f"schedule is infeasible: {exc}", t0)
    else:
        error = None
        try:
            trace = run(problem, schedule, config.stop_rule(), config.mode, config.strategy,
                        seed, singleton_images="ignore")
        except EngineError as exc:
            trace, error = exc.trace, str(exc)
            if exc.kind == "outside_domain":
                error = f"divergence: {exc}"
        summary = _summarize(trace, seed, config, problem, report.to_dict(), error, t0)
    if trace is not None and trace.records:
        name = os.path.join(out_dir, f"trace_seed{seed}.csv")
        write_atomic(name, trace.to_csv())
        summary.trace_file = os.path.basename(name)
        if plots:
            from .plotting import plot_trace
            summary.plot_file = os.path.basename(
                plot_trace(trace, os.path.join(out_dir, f"residuals_seed{seed}.png")))
    write_atomic(os.path.join(out_dir, f"summary_seed{seed}.json"),
                 json.dumps(asdict(summary), indent=2, default=_json_default) + "\n")
    return summary


def run_experiment(config: ExperimentConfig, out_dir: str | None = None,
                   strict: bool | None = None, seeds: list | None = None,
                   plots: bool | None = None, workers: int | None = None) -> ExperimentResult:
    """Run every seed (concurrently) and write, under `out_dir`,
    ``trace_seed<k>.csv``, ``summary_seed<k>.json`` and ``summary.json``.

    The exit code is 0 only if every run stopped on residual_tol or
    stagnation and every enabled monitor passed.
    """
    out_dir = out_dir or config.out_dir
    strict = config.strict if strict is None else strict
    seeds = list(seeds) if seeds is not None else list(config.seeds)
    plots = config.plots if plots is None else plots
    os.makedirs(out_dir, exist_ok=True)
    warns = list(config.warnings)
    problem = config.problem()
    fp = problem.fixed_points
    if config.mode == "A" and fp is not None and not fp.strict_singleton_images:
        msg = ("fixed points without singleton images: mode A convergence and the "
               "Fejer monitor are not covered")
        if config.singleton_images == "error":
            raise EngineError(msg, kind="hypothesis")
        if config.singleton_images == "warn":
            warns.append(msg)
    for w in warns:
        log.warning(w)
    workers = workers or min(len(seeds), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        summaries = list(pool.map(lambda s: _run_one(config, s, out_dir, strict, plots), seeds))
    result = ExperimentResult(summaries, out_dir, warns)
    write_atomic(os.path.join(out_dir, "summary.json"),
                 json.dumps(result.aggregate(), indent=2) + "\n")
    return result
