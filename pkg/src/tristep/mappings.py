"""Multivalued mappings, the metric-projection wrapper, a problem catalog,
and grid checkers for the mapping conditions used by the convergence theory.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import (
    AxisBox,
    Ball,
    CompactSet,
    FinitePointSet,
    GeometryError,
    Singleton,
    as_vector,
    dist_point_to_set,
    hausdorff,
    pairwise_hausdorff,
    project,
)
from .report import Report

log = logging.getLogger(__name__)

DOMAIN_TOL = 1e-9
MAX_RECORDED_VIOLATIONS = 1000


class DomainError(GeometryError):
    pass


@dataclass(frozen=True)
class MultiMap:
    """x -> T(x), a nonempty compact subset of the ambient space."""

    label: str
    domain: CompactSet
    func: Callable[[np.ndarray], CompactSet] = field(repr=False)
    params: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __call__(self, x) -> CompactSet:
        return evaluate(self, x)


def evaluate(T: MultiMap, x) -> CompactSet:
    x = as_vector(x)
    if dist_point_to_set(x, T.domain) > DOMAIN_TOL:
        raise DomainError(f"{T.label}: point {x.tolist()} is outside the domain {T.domain!r}")
    return T.func(x)


def residual(T: MultiMap, x) -> float:
    """dist(x, T(x)); zero exactly at fixed points."""
    x = as_vector(x)
    return dist_point_to_set(x, evaluate(T, x))


def nearest_points(x, E: CompactSet, rtol: float = 1e-12) -> CompactSet:
    """All points of E at distance dist(x, E) from x.

    Convex representations have a unique nearest point. For a finite set,
    ties (up to a relative `rtol`) are all kept, in index order.
    """
    if not isinstance(E, FinitePointSet):
        return Singleton(project(x, E))
    d = np.linalg.norm(E.points - as_vector(x), axis=1)
    keep = d <= d.min() * (1 + rtol) + 1e-300
    pts = E.points[keep]
    return Singleton(pts[0]) if len(pts) == 1 else FinitePointSet(pts)


@dataclass(frozen=True)
class ProximalMap:
    """P_T(x) = {y in T(x) : ||x - y|| = dist(x, T(x))}."""

    base: MultiMap

    @property
    def label(self) -> str:
        return f"P[{self.base.label}]"

    @property
    def domain(self) -> CompactSet:
        return self.base.domain

    def __call__(self, x) -> CompactSet:
        return proximal_evaluate(self, x)


def proximal_evaluate(P: ProximalMap, x) -> CompactSet:
    x = as_vector(x)
    return nearest_points(x, evaluate(P.base, x))


@dataclass(frozen=True)
class KnownFixedPoints:
    points: tuple
    strict_singleton_images: bool = True

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(as_vector(p) for p in self.points))

    def dist(self, x) -> float:
        if not self.points:
            raise ValueError("no known fixed points")
        x = as_vector(x)
        return min(float(np.linalg.norm(x - p)) for p in self.points)


@dataclass(frozen=True)
class ConditionGauge:
    """Nondecreasing g with g(0) = 0 and g(r) > 0 for r > 0."""

    g: Callable[[float], float]
    label: str = "g"

    def __call__(self, r: float) -> float:
        return float(self.g(r))

    def validate(self, radii: Sequence[float]) -> Report:
        r = np.sort(np.asarray(radii, dtype=float))
        vals = np.array([self(v) for v in r])
        bad = []
        if self(0.0) != 0.0:
            bad.append(("g(0) != 0", 0.0, self(0.0)))
        bad += [("decreasing", r[i + 1], vals[i + 1]) for i in range(len(r) - 1)
                if vals[i + 1] < vals[i]]
        bad += [("not positive", ri, vi) for ri, vi in zip(r, vals) if ri > 0 and vi <= 0]
        return Report(f"gauge {self.label}", not bad, bad, len(r))


def linear_gauge(slope: float) -> ConditionGauge:
    if slope <= 0:
        raise ValueError("gauge slope must be positive")
    return ConditionGauge(lambda r: slope * r, f"{slope}*r")


@dataclass(frozen=True)
class Problem:
    """Three maps on a common convex domain, plus what is known about them."""

    label: str
    maps: tuple
    domain: CompactSet
    x1: np.ndarray
    fixed_points: KnownFixedPoints | None = None
    # maps discontinuous at a point where iterates can land are kept out of runs
    engine_ok: bool = True

    @property
    def dim(self) -> int:
        return self.domain.dim


# -- catalog -----------------------------------------------------------------

def _interval(lo: float, hi: float) -> AxisBox:
    return AxisBox([lo], [hi])


def half_interval(divisor: float = 2.0) -> MultiMap:
    """T(x) = [0, x / divisor] on [0, 1]."""
    if divisor < 1:
        raise ValueError("divisor must be >= 1")

    def f(x):
        top = x / divisor
        return Singleton(top) if top[0] == 0.0 else AxisBox(np.zeros(1), top)

    return MultiMap(f"half_interval(divisor={divisor:g})", _interval(0.0, 1.0), f,
                    {"divisor": divisor})


def shrink_ball(index: int = 1, dim: int = 2) -> MultiMap:
    """T(x) = Ball(x/2, ||x|| / (4 index)) on the closed unit ball."""
    if index < 1:
        raise ValueError("index must be >= 1")
    k = 4.0 * index

    def f(x):
        r = float(np.linalg.norm(x)) / k
        return Singleton(x / 2) if r == 0.0 else Ball(x / 2, r)

    return MultiMap(f"shrink_ball(index={index})", Ball(np.zeros(dim), 1.0), f,
                    {"index": index, "dim": dim})


def scaled_singleton(factor: float = 0.5, dim: int = 1) -> MultiMap:
    """T(x) = {factor * x} on [0, 1]^dim."""
    if not 0 <= factor <= 1:
        raise ValueError("factor must lie in [0, 1] to keep images in the domain")
    return MultiMap(f"scaled_singleton(factor={factor:g})",
                    AxisBox(np.zeros(dim), np.ones(dim)), lambda x: Singleton(factor * x),
                    {"factor": factor, "dim": dim})


def point_pair(dim: int = 1) -> MultiMap:
    """T(x) = {x/2, x/4} on [0, 1]^dim (finite images, nonexpansive)."""
    return MultiMap("point_pair", AxisBox(np.zeros(dim), np.ones(dim)),
                    lambda x: FinitePointSet(np.stack([x / 2, x / 4])), {"dim": dim})


def suzuki_map() -> MultiMap:
    """T(x) = {0} for x != 3, T(3) = {1} on [0, 3].

    Satisfies condition (C) but is not nonexpansive.
    """
    def f(x):
        return Singleton([1.0]) if x[0] == 3.0 else Singleton([0.0])

    return MultiMap("suzuki_map", _interval(0.0, 3.0), f)


def expanding_map() -> MultiMap:
    """T(x) = {2x} on [0, 1]; a negative control for the checkers."""
    return MultiMap("expanding_map", _interval(0.0, 1.0), lambda x: Singleton(2 * x))


MAP_CATALOG = {
    "half_interval": half_interval,
    "shrink_ball": shrink_ball,
    "scaled_singleton": scaled_singleton,
    "point_pair": point_pair,
    "suzuki_map": suzuki_map,
    "expanding_map": expanding_map,
}


def _triple(label, maps, x1, engine_ok=True, strict=True):
    maps = tuple(maps)
    dim = maps[0].dim
    return Problem(label, maps, maps[0].domain, as_vector(x1),
                   KnownFixedPoints((np.zeros(dim),), strict), engine_ok)


def _problem_half_interval():
    return _triple("half_interval", [half_interval(i + 1) for i in (1, 2, 3)], [1.0])


def _problem_shrink_ball(dim=2):
    x1 = np.zeros(dim)
    x1[0] = 0.8
    return _triple("shrink_ball", [shrink_ball(i, dim) for i in (1, 2, 3)], x1)


def _problem_scaled_singleton(factor=0.5, dim=1):
    return _triple("scaled_singleton", [scaled_singleton(factor, dim)] * 3, np.ones(dim))


def _problem_point_pair(dim=1):
    return _triple("point_pair", [point_pair(dim)] * 3, np.ones(dim))


def _problem_suzuki():
    return _triple("suzuki_map", [suzuki_map()] * 3, [3.0], engine_ok=False)


def _problem_expanding():
    return _triple("expanding_map", [expanding_map()] * 3, [0.1])


PROBLEM_CATALOG = {
    "half_interval": _problem_half_interval,
    "shrink_ball": _problem_shrink_ball,
    "scaled_singleton": _problem_scaled_singleton,
    "point_pair": _problem_point_pair,
    "suzuki_map": _problem_suzuki,
    "expanding_map": _problem_expanding,
}


def catalog_map(label: str, **params) -> MultiMap:
    try:
        factory = MAP_CATALOG[label]
    except KeyError:
        raise KeyError(f"unknown catalog map {label!r}; known: {sorted(MAP_CATALOG)}") from None
    return factory(**params)


def catalog_problem(label: str, **params) -> Problem:
    try:
        factory = PROBLEM_CATALOG[label]
    except KeyError:
        raise KeyError(f"unknown catalog problem {label!r}; known: {sorted(PROBLEM_CATALOG)}"
                       ) from None
    return factory(**params)


def grid_points(E: CompactSet, n: int) -> np.ndarray:
    """Uniform grid with `n` points per axis over the bounding box of E, kept
    inside E. For d = 1 this is ``linspace(lower, upper, n)``."""
    if isinstance(E, Singleton):
        return E.point[None, :]
    if isinstance(E, FinitePointSet):
        return np.array(E.points)
    if isinstance(E, Ball):
        lo, hi = E.center - E.radius, E.center + E.radius
    else:
        lo, hi = E.lower, E.upper
    axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    if isinstance(E, Ball):
        pts = pts[np.linalg.norm(pts - E.center, axis=1) <= E.radius]
    return pts


# -- checkers ----------------------------------------------------------------

def _grid_images(T: MultiMap, grid):
    X = np.array([as_vector(x) for x in grid])
    if X.shape[0] == 0:
        raise ValueError("empty grid")
    images = [evaluate(T, x) for x in X]
    res = np.array([dist_point_to_set(x, E) for x, E in zip(X, images)])
    return X, images, res


def _pairwise_dist(X: np.ndarray) -> np.ndarray:
    return np.linalg.norm(X[:, None, :] - X[None, :, :], axis=2)


def _worst_first(mask, lhs, rhs):
    """Indices of violating pairs, largest excess lhs - rhs first."""
    idx = np.argwhere(mask)
    if len(idx):
        excess = (lhs - rhs)[mask]
        idx = idx[np.argsort(-excess, kind="stable")]
    return idx


def _collect(name, mask, X, lhs, rhs, checked, grid_size):
    idx = _worst_first(mask, lhs, rhs)
    viol = [(X[i].tolist(), X[j].tolist(), float(lhs[i, j]), float(rhs[i, j]))
            for i, j in idx[:MAX_RECORDED_VIOLATIONS]]
    return Report(name, len(idx) == 0, viol, checked,
                  {"violation_count": int(len(idx)), "grid_size": grid_size, "grid": X})


def check_condition_c(T: MultiMap, grid, tol: float = 1e-9) -> Report:
    """Check (1/2) dist(x, Tx) <= ||x - y||  =>  H(Tx, Ty) <= ||x - y|| on all grid pairs.

    The premise and the conclusion are both loosened by `tol`, so grid
    rounding cannot manufacture a violation. Violations are
    ``(x, y, H(Tx, Ty), ||x - y||)``, worst first.
    """
    X, images, res = _grid_images(T, grid)
    if len(X) < 2:
        raise ValueError("condition (C) needs at least two grid points")
    D = _pairwise_dist(X)
    H = pairwise_hausdorff(images)
    premise = 0.5 * res[:, None] <= D + tol
    bad = premise & (H > D + tol)
    return _collect(f"condition (C) [{T.label}]", bad, X, H, D,
                    int(premise.sum()), len(X))


def check_nonexpansive(T: MultiMap, grid, tol: float = 1e-9) -> Report:
    """Check H(Tx, Ty) <= ||x - y|| + tol on all grid pairs."""
    X, images, _ = _grid_images(T, grid)
    D = _pairwise_dist(X)
    H = pairwise_hausdorff(images)
    return _collect(f"nonexpansive [{T.label}]", H > D + tol, X, H, D,
                    len(X) ** 2, len(X))


def check_quasi_nonexpansive(T: MultiMap, fixed_points: KnownFixedPoints, grid,
                             tol: float = 1e-9) -> Report:
    """Check H(Tx, Tp) <= ||x - p|| + tol for grid x and known fixed points p."""
    if fixed_points is None or not fixed_points.points:
        raise ValueError("quasi-nonexpansiveness needs at least one known fixed point")
    X, images, _ = _grid_images(T, grid)
    P = np.array(fixed_points.points)
    fixed_images = [evaluate(T, p) for p in P]
    H = pairwise_hausdorff(images, fixed_images)
    D = np.linalg.norm(X[:, None, :] - P[None, :, :], axis=2)
    idx = _worst_first(H > D + tol, H, D)
    viol = [(X[i].tolist(), P[j].tolist(), float(H[i, j]), float(D[i, j]))
            for i, j in idx[:MAX_RECORDED_VIOLATIONS]]
    return Report(f"quasi-nonexpansive [{T.label}]", not viol, viol, H.size,
                  {"violation_count": int(len(idx)), "grid_size": len(X)})


def _gauge_check(name, maps, gauge, fixed_points, grid, tol):
    if fixed_points is None or not fixed_points.points:
        raise ValueError(f"{name} needs known fixed points")
    X = np.array([as_vector(x) for x in grid])
    if X.shape[0] == 0:
        raise ValueError("empty grid")
    viol = []
    for x in X:
        lhs = sum(residual(T, x) for T in maps)
        rhs = gauge(fixed_points.dist(x))
        if lhs + tol < rhs:
            viol.append((x.tolist(), lhs, rhs))
    return Report(name, not viol, viol[:MAX_RECORDED_VIOLATIONS], len(X),
                  {"violation_count": len(viol), "gauge": gauge.label})


def check_condition_i(T: MultiMap, gauge: ConditionGauge, fixed_points: KnownFixedPoints,
                      grid, tol: float = 1e-9) -> Report:
    """Check dist(x, Tx) >= g(dist(x, F(T))) at every grid point."""
    return _gauge_check(f"condition (I) [{T.label}]", [T], gauge, fixed_points, grid, tol)


def check_condition_ii(maps: Sequence[MultiMap], gauge: ConditionGauge,
                       fixed_points: KnownFixedPoints, grid, tol: float = 1e-9) -> Report:
    """Check sum_i dist(x, T_i x) >= g(dist(x, F)) at every grid point."""
    if len(maps) != 3:
        raise ValueError("condition (II) is stated for three maps")
    labels = ", ".join(T.label for T in maps)
    return _gauge_check(f"condition (II) [{labels}]", maps, gauge, fixed_points, grid, tol)


def check_fixed_point_metadata(problem: Problem, tol: float = 1e-10) -> Report:
    """Every listed fixed point is a fixed point of each map (and T(p) = {p}
    when the problem claims strict singleton images)."""
    viol = []
    fp = problem.fixed_points
    for p in (fp.points if fp else ()):
        for T in problem.maps:
            r = residual(T, p)
            if r > tol:
                viol.append((p.tolist(), T.label, "residual", r))
            if fp.strict_singleton_images:
                h = hausdorff(evaluate(T, p), Singleton(p))
                if h > tol:
                    viol.append((p.tolist(), T.label, "image is not {p}", h))
    n = len(fp.points) * len(problem.maps) if fp else 0
    return Report(f"fixed-point metadata [{problem.label}]", not viol, viol, n)
