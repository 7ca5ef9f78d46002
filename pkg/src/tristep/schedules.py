"""Coefficient and error sequences for the three-step iteration, and checks of
the convergence hypotheses on them.

Indices start at n = 1. A schedule yields, for each n, the eight weights
``(a, b, c, d, e, alpha, beta, gamma)`` and three error vectors
``(s, s', s'')``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .geometry import AxisBox, Ball, CompactSet, as_vector, farthest_distance

COEFF_NAMES = ("a", "b", "c", "d", "e", "alpha", "beta", "gamma")
FEASIBILITY_TOL = 1e-12
DEFAULT_TAIL_THRESHOLD = 1e-2
ERROR_BLOCK = 1024


class ScheduleError(ValueError):
    pass


class HypothesisViolation(ScheduleError):
    pass


class HypothesisWarning(UserWarning):
    pass


@dataclass(frozen=True, slots=True)
class CoefficientTuple:
    a: float
    b: float
    c: float
    d: float
    e: float
    alpha: float
    beta: float
    gamma: float
    s: np.ndarray
    s1: np.ndarray
    s2: np.ndarray

    @property
    def sums(self) -> tuple[float, float, float]:
        return (self.a + self.b, self.c + self.d + self.e,
                self.alpha + self.beta + self.gamma)

    @property
    def error_weight(self) -> float:
        return self.b + self.e + self.gamma


# -- error generators --------------------------------------------------------

@dataclass(frozen=True)
class ZeroErrors:
    dim: int
    kind = "zero"

    def at(self, n: int):
        z = np.zeros(self.dim)
        z.flags.writeable = False
        return z, z, z

    @property
    def bound(self) -> float:
        return 0.0

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True, eq=False)
class ConstantErrors:
    point: np.ndarray
    kind = "constant"

    def __post_init__(self):
        object.__setattr__(self, "point", as_vector(self.point))

    def at(self, n: int):
        return self.point, self.point, self.point

    @property
    def dim(self) -> int:
        return self.point.size

    @property
    def bound(self) -> float:
        return float(np.linalg.norm(self.point))

    def to_dict(self):
        return {"kind": self.kind, "point": self.point.tolist()}


@lru_cache(maxsize=64)
def _uniform_block(seed: int, lower: tuple, upper: tuple, block: int) -> np.ndarray:
    rng = np.random.default_rng([seed, block])
    lo, hi = np.array(lower), np.array(upper)
    out = lo + rng.random((ERROR_BLOCK, 3, len(lo))) * (hi - lo)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class SeededUniformErrors:
    """Errors drawn uniformly from a box; entry n depends only on (seed, n)."""

    box: AxisBox
    seed: int
    kind = "seeded_uniform"

    def at(self, n: int):
        block, i = divmod(n - 1, ERROR_BLOCK)
        B = _uniform_block(int(self.seed), tuple(self.box.lower.tolist()),
                           tuple(self.box.upper.tolist()), block)
        return B[i, 0], B[i, 1], B[i, 2]

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def bound(self) -> float:
        return farthest_distance(np.zeros(self.dim), self.box)

    def to_dict(self):
        return {"kind": self.kind, "lower": self.box.lower.tolist(),
                "upper": self.box.upper.tolist(), "seed": int(self.seed)}


def inner_box(E: CompactSet) -> AxisBox:
    """A box contained in E (E itself for boxes, inscribed cube for balls)."""
    if isinstance(E, AxisBox):
        return E
    if isinstance(E, Ball):
        h = E.radius / math.sqrt(E.dim)
        return AxisBox(E.center - h, E.center + h)
    raise ScheduleError(f"no default error box for domain {E!r}")


def make_errors(spec: dict | None, domain: CompactSet, seed: int = 0):
    spec = dict(spec or {"kind": "zero"})
    kind = spec.pop("kind", "zero")
    if kind == "zero":
        return ZeroErrors(domain.dim)
    if kind == "constant":
        return ConstantErrors(spec["point"])
    if kind == "seeded_uniform":
        if "lower" in spec or "upper" in spec:
            box = AxisBox(spec["lower"], spec["upper"])
        else:
            box = inner_box(domain)
        return SeededUniformErrors(box, int(spec.get("seed", seed)))
    raise ScheduleError(f"unknown error generator {kind!r}")


# -- schedules ---------------------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    label: str
    coefficients: Callable[[int], tuple] = field(repr=False)
    errors: object
    window: tuple[float, float]
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        lo, hi = self.window
        if not 0 < lo <= hi < 1:
            raise ScheduleError(f"window must satisfy 0 < a <= b < 1, got {self.window}")

    @property
    def error_bound(self) -> float:
        return self.errors.bound

    def at(self, n: int) -> CoefficientTuple:
        return coefficients_at(self, n)

    def to_dict(self) -> dict:
        return {"name": self.label, "params": dict(self.params),
                "window": list(self.window), "errors": self.errors.to_dict()}


def coefficients_at(schedule: Schedule, n: int) -> CoefficientTuple:
    if n < 1 or int(n) != n:
        raise ScheduleError(f"schedule index must be a positive integer, got {n}")
    coeffs = schedule.coefficients(int(n))
    s, s1, s2 = schedule.errors.at(int(n))
    return CoefficientTuple(*coeffs, s, s1, s2)


def theta_at(schedule: Schedule, n: int, M: float) -> float:
    """Perturbation budget M * (b_n + e_n + gamma_n) of the n-th step."""
    if M < 0:
        raise ValueError("M must be >= 0")
    return M * coefficients_at(schedule, n).error_weight


def _constant_decay(a=0.3, c=0.3, d=0.2, alpha=0.3, beta=0.2, scale=1.0, power=2.0):
    def f(n):
        t = scale / (n + 1) ** power
        return (a, t, c, d, t, alpha, beta, t)
    return f


def _constant(a=0.0, b=0.0, c=0.0, d=0.0, e=0.0, alpha=0.0, beta=0.0, gamma=0.0):
    vals = (a, b, c, d, e, alpha, beta, gamma)
    return lambda n: vals


def _harmonic_errors(a=0.3, c=0.3, d=0.2, alpha=0.3, beta=0.2, scale=0.25):
    def f(n):
        t = scale / n
        return (a, t, c, d, t, alpha, beta, t)
    return f


def _mann(alpha=0.5):
    return _constant(alpha=alpha)


def _ishikawa(c=0.5, alpha=0.5):
    return _constant(c=c, alpha=alpha)


def _default_window(name, p):
    if name == "constant_decay":
        lo = min(p["a"], p["c"] + p["d"], p["alpha"] + p["beta"])
        hi = max(p["a"], p["c"] + p["d"], p["alpha"] + p["beta"]) + p["scale"] / 2 ** p["power"]
        return (lo, hi)
    if name == "harmonic_errors":
        lo = min(p["a"], p["c"] + p["d"], p["alpha"] + p["beta"])
        return (lo, max(p["a"], p["c"] + p["d"], p["alpha"] + p["beta"]) + p["scale"])
    if name == "constant":
        sums = [p["a"] + p["b"], p["c"] + p["d"] + p["e"], p["alpha"] + p["beta"] + p["gamma"]]
        pos = [v for v in sums if 0 < v < 1] or [0.5]
        return (min(pos), max(pos))
    if name == "mann":
        return (p["alpha"], p["alpha"])
    if name == "ishikawa":
        return (min(p["c"], p["alpha"]), max(p["c"], p["alpha"]))
    raise KeyError(name)


BUILTIN_SCHEDULES = {
    "constant_decay": _constant_decay,
    "constant": _constant,
    "harmonic_errors": _harmonic_errors,
    "mann": _mann,
    "ishikawa": _ishikawa,
}


def _defaults(func) -> dict:
    import inspect
    return {k: v.default for k, v in inspect.signature(func).parameters.items()}


def make_schedule(name: str, params: dict | None = None, errors=None,
                  window: tuple[float, float] | None = None) -> Schedule:
    """Build a builtin schedule.

    >>> make_schedule("constant_decay").at(1).b
    0.25
    """
    try:
        factory = BUILTIN_SCHEDULES[name]
    except KeyError:
        raise ScheduleError(f"unknown schedule {name!r}; known: {sorted(BUILTIN_SCHEDULES)}"
                            ) from None
    p = _defaults(factory)
    unknown = set(params or {}) - set(p)
    if unknown:
        raise ScheduleError(f"unknown parameter(s) for {name}: {sorted(unknown)}")
    p.update(params or {})
    p = {k: float(v) for k, v in p.items()}
    win = tuple(window) if window is not None else _default_window(name, p)
    return Schedule(name, factory(**p), errors if errors is not None else ZeroErrors(1),
                    win, p)


# -- hypothesis validation ---------------------------------------------------

@dataclass
class Issue:
    kind: str
    n: int | None
    message: str


@dataclass
class ValidationReport:
    schedule: str
    horizon: int
    strict: bool
    issues: list = field(default_factory=list)
    tail_sums: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.issues

    @property
    def summability(self) -> str:
        if any(i.kind == "summability" for i in self.issues):
            return "tail sums too large; not consistent with summability"
        return "consistent with summability (tail-sum proxy, not a proof)"

    def to_dict(self) -> dict:
        return {"schedule": self.schedule, "horizon": self.horizon, "strict": self.strict,
                "ok": self.ok, "summability": self.summability,
                "tail_sums": self.tail_sums,
                "issues": [vars(i) for i in self.issues]}


def coefficient_table(schedule: Schedule, horizon: int) -> np.ndarray:
    """Array of shape (horizon, 8) with the weights for n = 1..horizon."""
    return np.array([schedule.coefficients(n) for n in range(1, horizon + 1)], dtype=float)


def tail_sum(values: np.ndarray) -> float:
    """Sum over the second half [horizon/2, horizon] of a 1-indexed sequence."""
    horizon = len(values)
    return float(math.fsum(values[max(horizon // 2, 1) - 1:]))


def validate(schedule: Schedule, horizon: int, strict: bool = False,
             tail_threshold: float = DEFAULT_TAIL_THRESHOLD, warn: bool = True
             ) -> ValidationReport:
    """Check the convergence hypotheses for n = 1..horizon.

    Range and feasibility failures (weights outside [0, 1], sums above 1)
    always raise, since no iteration can use them. Window, summability, and
    error-boundedness failures raise :class:`HypothesisViolation` when
    `strict`; otherwise they are returned as issues (and emitted as
    :class:`HypothesisWarning` when `warn` is set).
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    C = coefficient_table(schedule, horizon)
    if np.any(~np.isfinite(C)) or np.any(C < 0) or np.any(C > 1):
        n = int(np.argwhere((C < 0) | (C > 1) | ~np.isfinite(C))[0, 0]) + 1
        raise ScheduleError(f"{schedule.label}: coefficient outside [0, 1] at n={n}")
    sums = np.stack([C[:, 0] + C[:, 1], C[:, 2] + C[:, 3] + C[:, 4],
                     C[:, 5] + C[:, 6] + C[:, 7]], axis=1)
    over = np.argwhere(sums > 1 + FEASIBILITY_TOL)
    if len(over):
        raise ScheduleError(f"{schedule.label}: coefficient sum exceeds 1 at n={over[0, 0] + 1}")

    report = ValidationReport(schedule.label, horizon, strict)
    lo, hi = schedule.window
    labels = ("a+b", "c+d+e", "alpha+beta+gamma")
    outside = (sums < lo - FEASIBILITY_TOL) | (sums > hi + FEASIBILITY_TOL)
    for k, name in enumerate(labels):
        bad = np.flatnonzero(outside[:, k])
        if len(bad):
            n = int(bad[0]) + 1
            report.issues.append(Issue(
                "window", n, f"{name} = {sums[bad[0], k]:.6g} outside [{lo}, {hi}] at n={n} "
                f"({len(bad)} of {horizon} indices)"))

    for col, name in ((1, "b"), (4, "e"), (7, "gamma")):
        t = tail_sum(C[:, col])
        report.tail_sums[name] = t
        if t > tail_threshold:
            n = max(horizon // 2, 1)
            report.issues.append(Issue(
                "summability", n, f"summability proxy failed: tail sum of {name} over "
                f"[{n}, {horizon}] is {t:.4g} > {tail_threshold}"))

    bound = schedule.error_bound
    for n in range(1, horizon + 1):
        norms = [float(np.linalg.norm(v)) for v in schedule.errors.at(n)]
        if max(norms) > bound * (1 + 1e-12) + 1e-15:
            report.issues.append(Issue("error_bound", n,
                                       f"error norm {max(norms):.6g} > bound {bound} at n={n}"))
            break
        if isinstance(schedule.errors, (ZeroErrors, ConstantErrors)):
            break  # constant in n

    if report.issues:
        first = min(report.issues, key=lambda i: (i.n or 0))
        if strict:
            rest = "; ".join(i.message for i in report.issues if i is not first)
            raise HypothesisViolation(
                f"{schedule.label}: first violation at n={first.n}: {first.message}"
                + (f" (also: {rest})" if rest else ""))
        for issue in report.issues if warn else ():
            warnings.warn(f"{schedule.label}: {issue.message}", HypothesisWarning, stacklevel=2)
    return report
