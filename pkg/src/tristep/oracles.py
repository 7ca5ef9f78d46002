"""Numeric checks of the auxiliary inequalities the convergence argument uses.

Each check returns a :class:`~tristep.report.Report`; none of them proves
anything, they evaluate both sides on concrete inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .geometry import as_vector, dist_point_to_set, hausdorff, pairwise_hausdorff
from .mappings import MultiMap, _grid_images, _pairwise_dist, _worst_first, evaluate
from .report import Report
from .schedules import DEFAULT_TAIL_THRESHOLD, HypothesisViolation, tail_sum

WEIGHT_SUM_TOL = 1e-12


def lemma25_check(T: MultiMap, pairs: Sequence | None = None, tol: float = 1e-9,
                  grid=None) -> Report:
    """Check H(Tx, Ty) <= 2 dist(x, Tx) + ||x - y|| on explicit pairs, or on
    every ordered pair of `grid` (vectorized)."""
    name = f"H(Tx,Ty) <= 2 dist(x,Tx) + |x-y| [{T.label}]"
    if grid is not None:
        X, images, res = _grid_images(T, grid)
        D = _pairwise_dist(X)
        H = pairwise_hausdorff(images)
        rhs = 2 * res[:, None] + D
        idx = _worst_first(H > rhs + tol, H, rhs)
        viol = [(X[i].tolist(), X[j].tolist(), float(H[i, j]), float(rhs[i, j]))
                for i, j in idx[:1000]]
        return Report(name, len(idx) == 0, viol, H.size, {"violation_count": int(len(idx))})
    if not pairs:
        raise ValueError("need pairs or a grid")
    viol = []
    for x, y in pairs:
        x, y = as_vector(x), as_vector(y)
        Tx, Ty = evaluate(T, x), evaluate(T, y)
        lhs = hausdorff(Tx, Ty)
        rhs = 2 * dist_point_to_set(x, Tx) + float(np.linalg.norm(x - y))
        if lhs > rhs + tol:
            viol.append((x.tolist(), y.tolist(), lhs, rhs))
    return Report(name, not viol, viol, len(pairs), {"violation_count": len(viol)})


@dataclass(frozen=True)
class SequenceTriple:
    """a_1 >= 0 and generators for delta_n, b_n (n >= 1)."""

    a1: float
    delta: Callable[[int], float]
    b: Callable[[int], float]


class LimitEstimate(NamedTuple):
    limit_estimate: float
    report: Report


def tan_xu_limit(seq: SequenceTriple, horizon: int, cauchy_tol: float,
                 tail_threshold: float = DEFAULT_TAIL_THRESHOLD) -> LimitEstimate:
    """Run a_{n+1} = (1 + delta_n) a_n + b_n up to a_horizon.

    This is the extremal case of the recurrence inequality. The check passes
    when max - min over the last horizon/10 terms is at most `cauchy_tol`.
    Inputs whose delta or b tails are not small (the summability proxy) are
    rejected with :class:`HypothesisViolation`.
    """
    if horizon < 100:
        raise ValueError("horizon must be >= 100")
    if seq.a1 < 0:
        raise ValueError("a1 must be >= 0")
    idx = range(1, horizon + 1)
    delta = np.array([seq.delta(n) for n in idx], dtype=float)
    b = np.array([seq.b(n) for n in idx], dtype=float)
    for name, vals in (("delta", delta), ("b", b)):
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError(f"{name}_n must be finite and nonnegative")
        t = tail_sum(vals)
        if t > tail_threshold:
            raise HypothesisViolation(
                f"summability proxy failed for {name}: tail sum over "
                f"[{horizon // 2}, {horizon}] is {t:.4g} > {tail_threshold}")
    a = np.empty(horizon)
    a[0] = seq.a1
    for k in range(horizon - 1):  # a[k] holds a_{k+1}
        a[k + 1] = (1.0 + delta[k]) * a[k] + b[k]
    if not np.all(np.isfinite(a)):
        raise ValueError("recurrence overflowed")
    tail = a[-max(horizon // 10, 1):]
    osc = float(tail.max() - tail.min())
    report = Report("limit of a_{n+1} = (1+delta_n) a_n + b_n", osc <= cauchy_tol,
                    [] if osc <= cauchy_tol else [("tail oscillation", osc, cauchy_tol)],
                    horizon, {"oscillation": osc, "last": float(a[-1])})
    return LimitEstimate(float(a[-1]), report)


def _check_weights(w):
    w = np.asarray(w, dtype=float)
    if w.shape != (4,):
        raise ValueError("each weight tuple needs four entries")
    if np.any(w < 0) or abs(math.fsum(w) - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"weights {w.tolist()} are not a probability vector")
    return w


def _sq(v):
    return float(np.dot(v, v))


def convexity_sides(pts, w) -> tuple[float, float, float]:
    """(||sum w_i p_i||^2, inequality bound with phi(t) = t^2, exact identity value)."""
    P = np.array([as_vector(p) for p in pts])
    w = _check_weights(w)
    lhs = _sq(w @ P)
    weighted = sum(w[i] * _sq(P[i]) for i in range(4))
    bound = weighted - w[0] * w[1] * _sq(P[0] - P[1])
    exact = weighted - sum(w[i] * w[j] * _sq(P[i] - P[j])
                           for i in range(4) for j in range(i + 1, 4))
    return lhs, bound, exact


def convexity_identity_check(tuples: Sequence, weights: Sequence, tol: float = 1e-10
                             ) -> Report:
    """Check ||ax + by + cz + dw||^2 <= sum of weighted squares - ab ||x - y||^2."""
    if len(tuples) != len(weights):
        raise ValueError("tuples and weights must have equal length")
    viol = []
    for pts, w in zip(tuples, weights):
        lhs, bound, _ = convexity_sides(pts, w)
        if lhs > bound + tol:
            viol.append((lhs, bound))
    return Report("four-point convexity inequality, phi(t)=t^2", not viol, viol, len(tuples))


def four_point_identity_check(tuples: Sequence, weights: Sequence, tol: float = 1e-10
                              ) -> Report:
    """Check the exact inner-product identity
    ||sum l_i x_i||^2 = sum l_i ||x_i||^2 - sum_{i<j} l_i l_j ||x_i - x_j||^2."""
    viol = []
    worst = 0.0
    for pts, w in zip(tuples, weights):
        lhs, _, exact = convexity_sides(pts, w)
        gap = abs(lhs - exact)
        worst = max(worst, gap)
        if gap > tol:
            viol.append((lhs, exact))
    return Report("four-point identity", not viol, viol, len(tuples), {"max_gap": worst})


def random_convexity_cases(n: int, dim: int, seed: int, scale: float = 1.0):
    """`n` random point quadruples in [-scale, scale]^dim with simplex weights."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-scale, scale, size=(n, 4, dim))
    w = rng.dirichlet(np.ones(4), size=n)
    w[:, 3] = 1.0 - w[:, :3].sum(axis=1)  # exact sum for the feasibility check
    w = np.clip(w, 0.0, None)
    return list(pts), list(w)
