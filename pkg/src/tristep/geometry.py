"""Euclidean geometry of compact sets.

Vectors are 1-D float64 numpy arrays. Four compact set representations are
supported (:class:`Singleton`, :class:`FinitePointSet`, :class:`Ball`,
:class:`AxisBox`); all of them are proximal, so point-to-set distance and
metric projection are exact. Hausdorff distance is exact for same-kind pairs
and for any pair involving a singleton; other mixed pairs fall back to a
seeded sampling estimate.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

__all__ = [
    "GeometryError",
    "DimensionMismatch",
    "as_vector",
    "Singleton",
    "FinitePointSet",
    "Ball",
    "AxisBox",
    "CompactSet",
    "dist_point_to_set",
    "farthest_distance",
    "hausdorff",
    "hausdorff_flagged",
    "hausdorff_sampled",
    "is_closed_form_pair",
    "pairwise_hausdorff",
    "project",
    "contains",
    "sample_boundary",
    "sample_uniform",
    "convex_combine",
    "MAX_BOX_ENUM_DIM",
]

MAX_BOX_ENUM_DIM = 16
WEIGHT_SUM_TOL = 1e-12


class GeometryError(ValueError):
    pass


class DimensionMismatch(GeometryError):
    pass


def as_vector(x) -> np.ndarray:
    """Return `x` as a read-only finite float64 vector (scalars become d=1)."""
    if (type(x) is np.ndarray and x.dtype == np.float64 and x.ndim == 1
            and not x.flags.writeable and x.size):
        return x  # already produced by this module
    v = np.array(x, dtype=float, ndmin=1)
    if v.ndim != 1 or v.size == 0:
        raise GeometryError(f"expected a nonempty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise GeometryError(f"vector has non-finite coordinates: {v!r}")
    v.flags.writeable = False
    return v


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Singleton:
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", as_vector(self.point))

    @property
    def dim(self) -> int:
        return self.point.size

    def __eq__(self, other):
        return isinstance(other, Singleton) and np.array_equal(self.point, other.point)

    def __repr__(self):
        return f"Singleton({self.point.tolist()})"


@dataclass(frozen=True, eq=False)
class FinitePointSet:
    points: np.ndarray  # shape (m, d)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise GeometryError("FinitePointSet needs a nonempty list of points")
        if not np.all(np.isfinite(pts)):
            raise GeometryError("FinitePointSet has non-finite coordinates")
        object.__setattr__(self, "points", _freeze(pts))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __eq__(self, other):
        return isinstance(other, FinitePointSet) and np.array_equal(self.points, other.points)

    def __repr__(self):
        return f"FinitePointSet({self.points.tolist()})"


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        r = float(self.radius)
        if not np.isfinite(r) or r < 0:
            raise GeometryError(f"ball radius must be finite and >= 0, got {self.radius}")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.size

    def __eq__(self, other):
        return (isinstance(other, Ball) and self.radius == other.radius
                and np.array_equal(self.center, other.center))

    def __repr__(self):
        return f"Ball({self.center.tolist()}, {self.radius})"


@dataclass(frozen=True, eq=False)
class AxisBox:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, hi = as_vector(self.lower), as_vector(self.upper)
        if lo.size != hi.size:
            raise DimensionMismatch(f"box corners have dimensions {lo.size} and {hi.size}")
        if np.any(lo > hi):
            raise GeometryError(f"box needs lower <= upper componentwise, got {lo} and {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    def __eq__(self, other):
        return (isinstance(other, AxisBox) and np.array_equal(self.lower, other.lower)
                and np.array_equal(self.upper, other.upper))

    def __repr__(self):
        return f"AxisBox({self.lower.tolist()}, {self.upper.tolist()})"


CompactSet = Union[Singleton, FinitePointSet, Ball, AxisBox]
_KINDS = (Singleton, FinitePointSet, Ball, AxisBox)


def _check_dims(*items):
    dims = [it.size if isinstance(it, np.ndarray) else it.dim for it in items]
    if dims and min(dims) != max(dims):
        raise DimensionMismatch(f"dimension mismatch: {sorted(set(dims))}")


def _norm(v: np.ndarray) -> float:
    return math.sqrt(float(np.dot(v, v)))


def _check_set(E):
    if not isinstance(E, _KINDS):
        raise TypeError(f"not a compact set representation: {type(E).__name__}")


# -- point-to-set ------------------------------------------------------------

def project(x, E: CompactSet) -> np.ndarray:
    """Nearest point of `E` to `x`.

    Ball: radial clamp. AxisBox: coordinate-wise clamp. FinitePointSet: argmin
    with ties broken toward the lowest index.
    """
    x = as_vector(x)
    _check_set(E)
    _check_dims(x, E)
    if isinstance(E, Singleton):
        return E.point
    if isinstance(E, AxisBox):
        return _freeze(np.clip(x, E.lower, E.upper))
    if isinstance(E, Ball):
        off = x - E.center
        n = _norm(off)
        if n <= E.radius:
            return x
        return _freeze(E.center + (E.radius / n) * off)
    d = np.linalg.norm(E.points - x, axis=1)
    return _freeze(E.points[int(np.argmin(d))].copy())


def dist_point_to_set(x, E: CompactSet) -> float:
    x = as_vector(x)
    _check_set(E)
    _check_dims(x, E)
    if isinstance(E, Singleton):
        return _norm(x - E.point)
    if isinstance(E, AxisBox):
        excess = np.maximum(np.maximum(E.lower - x, 0.0), x - E.upper)
        return _norm(excess)
    if isinstance(E, Ball):
        return max(_norm(x - E.center) - E.radius, 0.0)
    return float(np.min(np.linalg.norm(E.points - x, axis=1)))


def contains(E: CompactSet, x, tol: float = 0.0) -> bool:
    return dist_point_to_set(x, E) <= tol


def farthest_distance(x, E: CompactSet) -> float:
    """sup over z in E of ||x - z||."""
    x = as_vector(x)
    _check_set(E)
    _check_dims(x, E)
    if isinstance(E, Singleton):
        return _norm(x - E.point)
    if isinstance(E, AxisBox):
        far = np.maximum(np.abs(x - E.lower), np.abs(x - E.upper))
        return float(np.linalg.norm(far))
    if isinstance(E, Ball):
        return float(np.linalg.norm(x - E.center)) + E.radius
    return float(np.max(np.linalg.norm(E.points - x, axis=1)))


# -- Hausdorff distance ------------------------------------------------------

def _box_vertices(B: AxisBox) -> np.ndarray:
    if B.dim > MAX_BOX_ENUM_DIM:
        raise GeometryError(
            f"box vertex enumeration refused for d={B.dim} > {MAX_BOX_ENUM_DIM}; "
            "use hausdorff_sampled instead")
    corners = np.array(list(itertools.product((0, 1), repeat=B.dim)), dtype=bool)
    return np.where(corners, B.upper, B.lower)


def _box_directed(A: AxisBox, B: AxisBox) -> float:
    # dist(., B) is convex, so its sup over A sits at a vertex of A
    V = _box_vertices(A)
    excess = np.maximum(np.maximum(B.lower - V, 0.0), V - B.upper)
    return float(np.max(np.linalg.norm(excess, axis=1)))


def is_closed_form_pair(A: CompactSet, B: CompactSet) -> bool:
    return type(A) is type(B) or isinstance(A, Singleton) or isinstance(B, Singleton)


class HausdorffValue(NamedTuple):
    value: float
    approximate: bool


def hausdorff_flagged(A: CompactSet, B: CompactSet, n_samples: int = 100_000,
                      seed: int = 0) -> HausdorffValue:
    """Hausdorff distance with a flag telling whether it was sampled."""
    _check_set(A)
    _check_set(B)
    _check_dims(A, B)
    if isinstance(A, Singleton):
        return HausdorffValue(farthest_distance(A.point, B), False)
    if isinstance(B, Singleton):
        return HausdorffValue(farthest_distance(B.point, A), False)
    if type(A) is not type(B):
        return HausdorffValue(hausdorff_sampled(A, B, n_samples, seed), True)
    if isinstance(A, Ball):
        h = float(np.linalg.norm(A.center - B.center)) + abs(A.radius - B.radius)
        return HausdorffValue(h, False)
    if isinstance(A, AxisBox):
        return HausdorffValue(max(_box_directed(A, B), _box_directed(B, A)), False)
    D = np.linalg.norm(A.points[:, None, :] - B.points[None, :, :], axis=2)
    return HausdorffValue(float(max(D.min(axis=1).max(), D.min(axis=0).max())), False)


def hausdorff(A: CompactSet, B: CompactSet, n_samples: int = 100_000, seed: int = 0) -> float:
    """H(A, B) = max(sup_{a in A} dist(a, B), sup_{b in B} dist(b, A)).

    Exact for same-kind pairs and any pair containing a Singleton. Other
    mixed pairs are estimated by :func:`hausdorff_sampled`; use
    :func:`hausdorff_flagged` to find out which happened.
    """
    return hausdorff_flagged(A, B, n_samples, seed).value


def _unit_directions(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    if d == 1:
        return rng.choice([-1.0, 1.0], size=(n, 1))
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return g / norms


def sample_boundary(E: CompactSet, n: int, rng: np.random.Generator) -> np.ndarray:
    """`n` points on the boundary of `E` (all points of a small finite set)."""
    if isinstance(E, Singleton):
        return E.point[None, :]
    if isinstance(E, FinitePointSet):
        if n >= E.points.shape[0]:
            return E.points
        return E.points[rng.choice(E.points.shape[0], size=n, replace=False)]
    if isinstance(E, Ball):
        return E.center + E.radius * _unit_directions(rng, n, E.dim)
    # box surface: pick a face (weighted by its area), then a uniform point on it
    lo, hi = E.lower, E.upper
    span = hi - lo
    d = E.dim
    area = np.array([np.prod(np.delete(span, k)) for k in range(d)])
    pts = lo + rng.random((n, d)) * span
    if area.sum() > 0:
        axis = rng.choice(d, size=n, p=area / area.sum())
    else:
        axis = rng.integers(0, d, size=n)
    side = rng.random(n) < 0.5
    rows = np.arange(n)
    pts[rows, axis] = np.where(side, hi[axis], lo[axis])
    return pts


def sample_uniform(E: CompactSet, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Uniform sample(s) from `E` by volume (by count for point sets)."""
    m = 1 if n is None else n
    if isinstance(E, Singleton):
        out = np.repeat(E.point[None, :], m, axis=0)
    elif isinstance(E, FinitePointSet):
        out = E.points[rng.integers(0, E.points.shape[0], size=m)]
    elif isinstance(E, AxisBox):
        out = E.lower + rng.random((m, E.dim)) * (E.upper - E.lower)
    else:
        dirs = _unit_directions(rng, m, E.dim)
        radii = E.radius * rng.random(m) ** (1.0 / E.dim)
        out = E.center + radii[:, None] * dirs
    return out[0] if n is None else out


def _directed_sampled(S: np.ndarray, B: CompactSet, chunk: int = 4096) -> float:
    best = 0.0
    for i in range(0, S.shape[0], chunk):
        P = S[i:i + chunk]
        if isinstance(B, Singleton):
            d = np.linalg.norm(P - B.point, axis=1)
        elif isinstance(B, AxisBox):
            d = np.linalg.norm(np.maximum(np.maximum(B.lower - P, 0.0), P - B.upper), axis=1)
        elif isinstance(B, Ball):
            d = np.maximum(np.linalg.norm(P - B.center, axis=1) - B.radius, 0.0)
        else:
            d = np.linalg.norm(P[:, None, :] - B.points[None, :, :], axis=2).min(axis=1)
        best = max(best, float(d.max()))
    return best


def hausdorff_sampled(A: CompactSet, B: CompactSet, n_samples: int, seed: int) -> float:
    """Sampled lower estimate of H(A, B).

    The sup side of each directed distance is taken over `n_samples` boundary
    samples; the inf side is exact. The result never exceeds the true value.
    """
    _check_set(A)
    _check_set(B)
    _check_dims(A, B)
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    rng = np.random.default_rng(seed)
    SA = sample_boundary(A, n_samples, rng)
    SB = sample_boundary(B, n_samples, rng)
    return max(_directed_sampled(SA, B), _directed_sampled(SB, A))


def _promote(images: Sequence[CompactSet]):
    """Common kind for a batch of images, treating singletons as degenerate."""
    kinds = {type(E) for E in images} - {Singleton}
    if not kinds:
        return Singleton
    if len(kinds) == 1:
        k = kinds.pop()
        if k in (Ball, AxisBox):
            return k
    return None


def pairwise_hausdorff(images: Sequence[CompactSet], others: Sequence[CompactSet] | None = None,
                       ) -> np.ndarray:
    """Matrix of H(images[i], others[j]).

    Batches of balls, boxes, and singletons (treated as radius-0 balls or
    degenerate boxes) are vectorized; anything else loops over
    :func:`hausdorff`.
    """
    others = images if others is None else others
    _check_dims(*images, *others)
    kind = _promote(list(images) + list(others))
    if kind is Singleton:
        P = np.array([E.point for E in images])
        Q = np.array([E.point for E in others])
        return np.linalg.norm(P[:, None, :] - Q[None, :, :], axis=2)
    if kind is Ball:
        def unpack(seq):
            c = np.array([E.center if isinstance(E, Ball) else E.point for E in seq])
            r = np.array([E.radius if isinstance(E, Ball) else 0.0 for E in seq])
            return c, r
        c1, r1 = unpack(images)
        c2, r2 = unpack(others)
        return (np.linalg.norm(c1[:, None, :] - c2[None, :, :], axis=2)
                + np.abs(r1[:, None] - r2[None, :]))
    if kind is AxisBox:
        def unpack(seq):
            lo = np.array([E.lower if isinstance(E, AxisBox) else E.point for E in seq])
            hi = np.array([E.upper if isinstance(E, AxisBox) else E.point for E in seq])
            return lo, hi
        l1, u1 = unpack(images)
        l2, u2 = unpack(others)
        # squared distance to a box separates over coordinates, so the vertex
        # maximum is taken coordinate by coordinate
        out = np.empty((len(images), len(others)))
        step = max(1, 2_000_000 // max(1, len(others) * l1.shape[1]))
        for i in range(0, len(images), step):
            a_lo, a_hi = l1[i:i + step, None, :], u1[i:i + step, None, :]
            b_lo, b_hi = l2[None, :, :], u2[None, :, :]

            def exc(v, lo, hi):
                return np.maximum(np.maximum(lo - v, 0.0), v - hi)

            ab = np.maximum(exc(a_lo, b_lo, b_hi), exc(a_hi, b_lo, b_hi))
            ba = np.maximum(exc(b_lo, a_lo, a_hi), exc(b_hi, a_lo, a_hi))
            out[i:i + step] = np.maximum(np.sqrt((ab ** 2).sum(axis=2)),
                                         np.sqrt((ba ** 2).sum(axis=2)))
        return out
    return np.array([[hausdorff(A, B) for B in others] for A in images])


# -- affine combinations -----------------------------------------------------

def convex_combine(points: Sequence, weights: Sequence[float]) -> np.ndarray:
    """Sum of weights[i] * points[i]; weights must be a probability vector.

    Evaluated as ``p0 + sum_i w_i (p_i - p0)`` so that combining copies of one
    point returns that point bit for bit.
    """
    if len(points) != len(weights) or not points:
        raise GeometryError("points and weights must be nonempty and of equal length")
    w = [float(v) for v in weights]
    if min(w) < 0:
        raise GeometryError(f"negative weight in {w}")
    if abs(math.fsum(w) - 1.0) > WEIGHT_SUM_TOL:
        raise GeometryError(f"weights sum to {math.fsum(w)!r}, not 1")
    base = as_vector(points[0])
    out = base.copy()
    for p, wi in zip(points[1:], w[1:]):
        p = as_vector(p)
        _check_dims(base, p)
        if wi:
            out += wi * (p - base)
    return _freeze(out)
