"""Three-step iteration with errors for three multivalued maps.

One step from x_n, with z_n, u'_n drawn from T1(x_n), u_n, v'_n from T2(w_n)
and v_n from T3(y_n)::

    w_n     = (1 - a_n - b_n) x_n + a_n z_n + b_n s_n
    y_n     = (1 - c_n - d_n - e_n) x_n + c_n u_n + d_n u'_n + e_n s'_n
    x_{n+1} = (1 - alpha_n - beta_n - gamma_n) x_n + alpha_n v_n + beta_n v'_n + gamma_n s''_n

Mode ``"A"`` selects from the images T_i(.) themselves; mode ``"B"`` selects
from the nearest-point sets P_{T_i}(.) instead.
"""
from __future__ import annotations

import io
import logging
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import (
    AxisBox,
    Ball,
    CompactSet,
    FinitePointSet,
    Singleton,
    as_vector,
    convex_combine,
    dist_point_to_set,
    project,
    sample_uniform,
)
from .mappings import MultiMap, Problem, evaluate, nearest_points
from .report import Report
from .schedules import CoefficientTuple, Schedule, coefficients_at

log = logging.getLogger(__name__)

MODES = ("A", "B")
STRATEGIES = ("nearest", "seeded_random", "first_listed")
SELECTION_TOL = 1e-10
DRIFT_TOL = 1e-12
DOMAIN_TOL = 1e-9


class EngineError(RuntimeError):
    """A run aborted; `trace` holds the records produced so far."""

    def __init__(self, message: str, trace: "Trace | None" = None, kind: str = "error"):
        super().__init__(message)
        self.trace = trace
        self.kind = kind


class OutsideDomain(EngineError):
    pass


class SelectionError(EngineError):
    pass


class SingletonImageWarning(UserWarning):
    pass


@dataclass(frozen=True)
class StopRule:
    max_iter: int = 10_000
    residual_tol: float = 1e-8
    stagnation_tol: float = 0.0
    stagnation_window: int = 10

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.residual_tol < 0 or self.stagnation_tol < 0:
            raise ValueError("tolerances must be >= 0")
        if self.stagnation_window < 1:
            raise ValueError("stagnation_window must be >= 1")


@dataclass(frozen=True)
class IterationState:
    n: int
    x: np.ndarray
    w: np.ndarray | None = None
    y: np.ndarray | None = None


@dataclass(frozen=True)
class Selections:
    z: np.ndarray
    u: np.ndarray
    u1: np.ndarray  # u'_n
    v: np.ndarray
    v1: np.ndarray  # v'_n


@dataclass
class Record:
    n: int
    x: np.ndarray
    residuals: tuple
    dist_F: float | None = None
    w: np.ndarray | None = None
    y: np.ndarray | None = None
    selections: Selections | None = None
    errors: tuple | None = None
    error_weight: float | None = None  # b_n + e_n + gamma_n
    theta: float | None = None

    @property
    def stepped(self) -> bool:
        return self.w is not None


@dataclass
class Trace:
    records: list = field(default_factory=list)
    mode: str = "A"
    strategy: str = "nearest"
    seed: int = 0
    schedule: str = ""
    problem: str = ""
    stop_reason: str | None = None
    M: float | None = None
    error: str | None = None

    def __len__(self):
        return len(self.records)

    @property
    def dim(self) -> int:
        return self.records[0].x.size

    @property
    def final(self) -> Record:
        return self.records[-1]

    def header(self) -> list[str]:
        return (["n"] + [f"x_{k}" for k in range(self.dim)]
                + ["r1", "r2", "r3", "dx_w", "dx_y", "theta", "dist_F"])

    def rows(self):
        for r in self.records:
            dxw = float(np.linalg.norm(r.x - r.w)) if r.w is not None else None
            dxy = float(np.linalg.norm(r.x - r.y)) if r.y is not None else None
            yield ([r.n] + r.x.tolist() + list(r.residuals)
                   + [dxw, dxy, r.theta, r.dist_F])

    def to_csv(self, fh=None) -> str:
        """Write the trace as CSV; floats use the shortest round-trip repr."""
        buf = io.StringIO()
        buf.write(",".join(self.header()) + "\n")
        for row in self.rows():
            buf.write(",".join("" if v is None else repr(v) if isinstance(v, float) else str(v)
                               for v in row) + "\n")
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text

    def metadata(self) -> dict:
        return {"mode": self.mode, "strategy": self.strategy, "seed": self.seed,
                "schedule": self.schedule, "problem": self.problem,
                "stop_reason": self.stop_reason, "M": self.M, "error": self.error,
                "records": len(self.records)}


# -- selection ---------------------------------------------------------------

def select(strategy: str, image: CompactSet, anchor, rng: np.random.Generator | None = None
           ) -> np.ndarray:
    """Pick one point of `image`.

    nearest: metric projection of `anchor`; seeded_random: uniform draw from
    `rng`; first_listed: first point, ball center, or lower box corner.
    """
    if strategy == "nearest":
        return project(anchor, image)
    if strategy == "seeded_random":
        if rng is None:
            raise ValueError("seeded_random selection needs an rng")
        return sample_uniform(image, rng)
    if strategy == "first_listed":
        as_vector(anchor)
        if isinstance(image, Singleton):
            return image.point
        if isinstance(image, FinitePointSet):
            return image.points[0]
        if isinstance(image, Ball):
            return image.center
        if isinstance(image, AxisBox):
            return image.lower
        raise TypeError(f"not a compact set: {image!r}")
    raise ValueError(f"unknown selection strategy {strategy!r}; known: {STRATEGIES}")


def _image(T: MultiMap, x: np.ndarray, mode: str) -> CompactSet:
    E = evaluate(T, x)
    return nearest_points(x, E) if mode == "B" else E


def _pick(strategy, image, anchor, rng, what, n):
    p = select(strategy, image, anchor, rng)
    gap = dist_point_to_set(p, image)
    if gap > SELECTION_TOL:
        raise SelectionError(f"selection {what} at n={n} lies {gap:.3g} outside its image set")
    return p


def _keep_in(domain: CompactSet | None, p: np.ndarray, what: str, n: int) -> np.ndarray:
    if domain is None:
        return p
    gap = dist_point_to_set(p, domain)
    if gap > DOMAIN_TOL:
        raise OutsideDomain(f"{what} at n={n} left the domain by {gap:.6g} "
                            f"(value {p.tolist()})", kind="outside_domain")
    if gap > DRIFT_TOL:
        return project(p, domain)
    return p


def _advance(x, T1x, maps, k: CoefficientTuple, mode, strategy, rng, domain, n):
    T1, T2, T3 = maps
    z = _pick(strategy, T1x, x, rng, "z", n)
    u1 = z if strategy == "nearest" else _pick(strategy, T1x, x, rng, "u'", n)
    w = convex_combine([x, z, k.s], [1 - k.a - k.b, k.a, k.b])
    w = _keep_in(domain, w, "w", n)
    T2w = _image(T2, w, mode)
    u = _pick(strategy, T2w, w, rng, "u", n)
    v1 = u if strategy == "nearest" else _pick(strategy, T2w, w, rng, "v'", n)
    y = convex_combine([x, u, u1, k.s1], [1 - k.c - k.d - k.e, k.c, k.d, k.e])
    y = _keep_in(domain, y, "y", n)
    T3y = _image(T3, y, mode)
    v = _pick(strategy, T3y, y, rng, "v", n)
    x_next = convex_combine([x, v, v1, k.s2],
                            [1 - k.alpha - k.beta - k.gamma, k.alpha, k.beta, k.gamma])
    if not np.all(np.isfinite(x_next)):
        raise EngineError(f"non-finite iterate at n={n + 1}", kind="non_finite")
    x_next = _keep_in(domain, x_next, "x", n + 1)
    return w, y, x_next, Selections(z, u, u1, v, v1)


def step(state: IterationState, maps: Sequence[MultiMap], coeffs: CoefficientTuple,
         mode: str = "A", strategy: str = "nearest", rng: np.random.Generator | None = None,
         domain: CompactSet | None = None) -> tuple[IterationState, Selections]:
    """Advance x_n to x_{n+1}; returns the new state and the selections used.

    The returned state carries x_{n+1} and the w_n, y_n computed on the way.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    x = as_vector(state.x)
    domain = domain if domain is not None else maps[0].domain
    T1x = _image(maps[0], x, mode)
    w, y, x_next, sel = _advance(x, T1x, maps, coeffs, mode, strategy, rng, domain, state.n)
    return IterationState(state.n + 1, x_next, w, y), sel


# -- runs --------------------------------------------------------------------

def _observed_M(records, points) -> float:
    errs = [e for r in records if r.errors is not None for e in r.errors]
    if not errs:
        return 0.0
    E = np.array(errs)
    refs = points if points else (np.zeros(E.shape[1]),)
    return max(float(np.linalg.norm(E - p, axis=1).max()) for p in refs)


def run(problem: Problem, schedule: Schedule, stop: StopRule = StopRule(), mode: str = "A",
        strategy: str = "nearest", seed: int = 0, x1=None,
        singleton_images: str = "warn") -> Trace:
    """Iterate until a stop rule fires and return the full trace.

    Stop rules are checked at the top of iteration n, before stepping:
    max residual <= residual_tol, then stagnation, then n == max_iter. The
    last record therefore never carries a step.

    `singleton_images` ("warn", "error" or "ignore") controls what happens
    when mode A is run on a problem whose fixed points do not have singleton
    images.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown selection strategy {strategy!r}")
    fp = problem.fixed_points
    if mode == "A" and fp is not None and not fp.strict_singleton_images:
        msg = (f"{problem.label}: fixed points without singleton images; "
               "mode A convergence and the Fejer monitor are not covered")
        if singleton_images == "error":
            raise EngineError(msg, kind="hypothesis")
        if singleton_images == "warn":
            warnings.warn(msg, SingletonImageWarning, stacklevel=2)

    maps = problem.maps
    domain = problem.domain
    x = as_vector(problem.x1 if x1 is None else x1)
    if dist_point_to_set(x, domain) > DOMAIN_TOL:
        raise OutsideDomain(f"x1={x.tolist()} is outside the domain", kind="outside_domain")
    rng = np.random.default_rng(seed)
    trace = Trace(mode=mode, strategy=strategy, seed=seed, schedule=schedule.label,
                  problem=problem.label)
    still = 0
    n = 1
    try:
        while True:
            T1x = _image(maps[0], x, mode)
            full1 = evaluate(maps[0], x) if mode == "B" else T1x
            res = (dist_point_to_set(x, full1),
                   dist_point_to_set(x, evaluate(maps[1], x)),
                   dist_point_to_set(x, evaluate(maps[2], x)))
            rec = Record(n, x, res, fp.dist(x) if fp and fp.points else None)
            trace.records.append(rec)
            if max(res) <= stop.residual_tol:
                trace.stop_reason = "residual_tol"
                break
            if stop.stagnation_tol > 0 and still >= stop.stagnation_window:
                trace.stop_reason = "stagnation"
                break
            if n >= stop.max_iter:
                trace.stop_reason = "max_iter"
                break
            k = coefficients_at(schedule, n)
            w, y, x_next, sel = _advance(x, T1x, maps, k, mode, strategy, rng, domain, n)
            rec.w, rec.y, rec.selections = w, y, sel
            rec.errors = (k.s, k.s1, k.s2)
            rec.error_weight = k.error_weight
            moved = float(np.linalg.norm(x_next - x))
            still = still + 1 if moved < stop.stagnation_tol else 0
            x = x_next
            n += 1
    except EngineError as exc:
        trace.stop_reason = exc.kind
        trace.error = str(exc)
        _fill_theta(trace, fp)
        exc.trace = trace
        raise
    _fill_theta(trace, fp)
    return trace


def _fill_theta(trace: Trace, fp) -> None:
    trace.M = _observed_M(trace.records, fp.points if fp else ())
    for r in trace.records:
        if r.error_weight is not None:
            r.theta = trace.M * r.error_weight


def fejer_check(trace: Trace, p, M: float | None = None, tol: float = 1e-9) -> Report:
    """Check ||x_{n+1} - p|| <= ||x_n - p|| + M (b_n + e_n + gamma_n) + tol.

    `M` defaults to the largest ||s - p|| over the error vectors the run
    actually used; a smaller value is rejected.
    """
    if len(trace.records) < 2:
        raise ValueError("fejer_check needs a trace with at least two records")
    p = as_vector(p)
    observed = _observed_M(trace.records, (p,))
    if M is None:
        M = observed
    elif M < observed * (1 - 1e-12):
        raise ValueError(f"M={M} is below the observed error radius {observed}")
    viol = []
    recs = trace.records
    for cur, nxt in zip(recs, recs[1:]):
        lhs = float(np.linalg.norm(nxt.x - p))
        rhs = float(np.linalg.norm(cur.x - p)) + M * cur.error_weight
        if lhs > rhs + tol:
            viol.append((cur.n, lhs, rhs))
    return Report(f"fejer monitor p={p.tolist()}", not viol, viol, len(recs) - 1,
                  {"M": M, "tol": tol})


def max_residual(record: Record) -> float:
    return max(record.residuals)
