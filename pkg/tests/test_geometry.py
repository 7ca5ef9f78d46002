import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tristep.geometry import (
    AxisBox,
    Ball,
    DimensionMismatch,
    FinitePointSet,
    GeometryError,
    Singleton,
    as_vector,
    convex_combine,
    dist_point_to_set,
    hausdorff,
    hausdorff_flagged,
    hausdorff_sampled,
    pairwise_hausdorff,
    project,
    sample_uniform,
)

from _brute import brute_directed, brute_hausdorff, disc_cloud


# -- point-to-set distance ---------------------------------------------------

def test_dist_interior_point_of_interval():
    assert dist_point_to_set(0.5, AxisBox([0], [1])) == 0.0


def test_dist_clamps_to_interval_endpoint():
    assert dist_point_to_set(2.0, AxisBox([0], [1])) == 1.0


def test_dist_to_ball_matches_dense_boundary_sampling():
    t = np.linspace(0, 2 * np.pi, 200_001)
    circle = np.stack([np.cos(t), np.sin(t)], axis=1)
    oracle = np.linalg.norm(circle - [3, 4], axis=1).min()
    assert oracle == pytest.approx(4.0, abs=1e-8)
    assert dist_point_to_set([3, 4], Ball([0, 0], 1)) == pytest.approx(4.0, abs=1e-15)


def test_dist_errors():
    with pytest.raises(DimensionMismatch):
        dist_point_to_set([1.0, 2.0], AxisBox([0], [1]))
    with pytest.raises(GeometryError):
        dist_point_to_set([np.nan], AxisBox([0], [1]))
    with pytest.raises(GeometryError):
        as_vector([np.inf, 0.0])


def test_invalid_sets_rejected():
    with pytest.raises(GeometryError):
        Ball([0, 0], -1)
    with pytest.raises(GeometryError):
        AxisBox([1], [0])
    with pytest.raises(GeometryError):
        FinitePointSet(np.empty((0, 2)))


# -- Hausdorff distance ------------------------------------------------------

def test_hausdorff_same_set_is_zero():
    B = AxisBox([0], [1])
    assert hausdorff(B, B) == 0.0


def test_hausdorff_nested_intervals_against_grid():
    A, B = AxisBox([0], [0.5]), AxisBox([0], [0.25])
    GA = np.arange(0, 0.5 + 1e-12, 1e-4)[:, None]
    GB = np.arange(0, 0.25 + 1e-12, 1e-4)[:, None]
    oracle = brute_hausdorff(GA, GB)
    assert oracle == pytest.approx(0.25, abs=1e-9)
    assert hausdorff(A, B) == pytest.approx(0.25, abs=1e-15)


def test_hausdorff_balls_against_point_clouds():
    A, B = Ball([0, 0], 1), Ball([3, 0], 2)
    t = np.linspace(0, 2 * np.pi, 1000, endpoint=False)
    ring = np.stack([np.cos(t), np.sin(t)], axis=1)
    dA, dB = disc_cloud([0, 0], 1, 100, 1000), disc_cloud([3, 0], 2, 100, 1000)
    oracle = max(brute_directed(ring + [0, 0], dB), brute_directed(2 * ring + [3, 0], dA))
    assert oracle == pytest.approx(4.0, abs=0.02)
    assert hausdorff(A, B) == 4.0


def test_hausdorff_singletons_is_their_distance():
    assert hausdorff(Singleton([0, 0]), Singleton([3, 4])) == 5.0


def test_hausdorff_singleton_vs_sets_is_exact():
    p = Singleton([0.0, 0.0])
    assert hausdorff(p, Ball([3, 4], 1)) == 6.0
    assert hausdorff(p, AxisBox([1, 1], [2, 3])) == pytest.approx(np.hypot(2, 3))
    assert hausdorff(FinitePointSet([[1, 0], [0, 2]]), p) == 2.0
    assert not hausdorff_flagged(p, Ball([1, 1], 1)).approximate


def test_mixed_kind_hausdorff_is_flagged_approximate():
    h = hausdorff_flagged(AxisBox([0, 0], [1, 1]), Ball([0.5, 0.5], 0.1), 100_000, 0)
    assert h.approximate
    assert h.value == pytest.approx(np.sqrt(0.5) - 0.1, abs=2e-3)


def test_box_vertex_enumeration_refused_above_16_dims():
    A = AxisBox(np.zeros(17), np.ones(17))
    B = AxisBox(np.zeros(17), 2 * np.ones(17))
    with pytest.raises(GeometryError, match="sampled"):
        hausdorff(A, B)


def test_finite_sets_brute_force():
    A = FinitePointSet([[0, 0], [1, 0]])
    B = FinitePointSet([[0, 1], [5, 0]])
    # directed A->B: max(1, 1) = 1; B->A: max(1, 4) = 4
    assert hausdorff(A, B) == 4.0


def _box_vertices(lo, hi):
    return np.array(list(itertools.product(*zip(lo, hi))), dtype=float)


def _box_directed_by_projection(A, B):
    # sup over vertices of A of the distance to the clamp onto B
    V = _box_vertices(A.lower, A.upper)
    return max(np.linalg.norm(v - np.clip(v, B.lower, B.upper)) for v in V)


@pytest.mark.parametrize("dim", [1, 2, 3, 5])
def test_box_hausdorff_matches_vertex_clamp_oracle(dim, rng):
    for _ in range(20):
        lo1, lo2 = rng.uniform(-1, 1, dim), rng.uniform(-1, 1, dim)
        A = AxisBox(lo1, lo1 + rng.uniform(0, 1, dim))
        B = AxisBox(lo2, lo2 + rng.uniform(0, 1, dim))
        oracle = max(_box_directed_by_projection(A, B), _box_directed_by_projection(B, A))
        assert hausdorff(A, B) == pytest.approx(oracle, abs=1e-14)


# -- sampled Hausdorff -------------------------------------------------------

def test_sampled_singletons_zero():
    assert hausdorff_sampled(Singleton([1, 1]), Singleton([1, 1]), 10, 3) == 0.0


def test_sampled_balls_converge_to_closed_form():
    h = hausdorff_sampled(Ball([0, 0], 1), Ball([3, 0], 2), 100_000, 7)
    assert h <= 4.0 + 1e-12
    assert h == pytest.approx(4.0, abs=2e-3)


def test_sampled_box_vs_ball_against_grid():
    A, B = AxisBox([0, 0], [1, 1]), Ball([0.5, 0.5], 0.1)
    g = np.linspace(0, 1, 1001)
    G = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
    # the ball lies inside the box, so only the box -> ball direction counts
    oracle = max(np.linalg.norm(G - 0.5, axis=1).max() - 0.1, 0.0)
    assert hausdorff_sampled(A, B, 100_000, 11) == pytest.approx(oracle, abs=2e-3)


def test_sampled_is_deterministic_per_seed():
    A, B = AxisBox([0, 0], [1, 2]), Ball([0, 0], 1)
    assert hausdorff_sampled(A, B, 1000, 5) == hausdorff_sampled(A, B, 1000, 5)


def test_sampled_needs_two_samples():
    with pytest.raises(ValueError):
        hausdorff_sampled(Ball([0], 1), Ball([1], 1), 1, 0)


# -- projection --------------------------------------------------------------

def test_project_clamps():
    assert project(2.0, AxisBox([0], [1])).tolist() == [1.0]


def test_project_onto_ball_radial():
    y = project([3, 4], Ball([0, 0], 1))
    assert y == pytest.approx([0.6, 0.8], abs=1e-15)
    assert np.linalg.norm(y - [3, 4]) == pytest.approx(dist_point_to_set([3, 4], Ball([0, 0], 1)))


def test_project_finite_set_tie_breaks_to_lowest_index():
    assert project(0.5, FinitePointSet([[0.0], [1.0]])).tolist() == [0.0]
    assert project(0.5, FinitePointSet([[1.0], [0.0]])).tolist() == [1.0]


# -- convex combinations -----------------------------------------------------

def test_convex_combine_examples():
    assert convex_combine([[1, 0], [0, 1]], [0.5, 0.5]).tolist() == [0.5, 0.5]
    assert convex_combine([[0.3, -2.0]], [1.0]).tolist() == [0.3, -2.0]
    assert convex_combine([1.0, 0.5, 0.7], [0.5, 0.3, 0.2])[0] == pytest.approx(0.79, abs=1e-15)


def test_convex_combine_rejects_bad_weights():
    with pytest.raises(GeometryError):
        convex_combine([0.0, 1.0], [0.5, 0.5 + 1e-9])
    with pytest.raises(GeometryError):
        convex_combine([0.0, 1.0], [1.5, -0.5])
    with pytest.raises(GeometryError):
        convex_combine([0.0], [0.5, 0.5])


def test_convex_combine_of_copies_is_exact():
    p = np.array([0.1, 0.7, 1e-3])
    w = [1 - 0.3 - 0.2 - 0.1, 0.3, 0.2, 0.1]
    assert np.array_equal(convex_combine([p, p, p, p], w), p)


# -- properties --------------------------------------------------------------

coord = st.floats(-3, 3, allow_nan=False)


@st.composite
def compact_sets(draw, kind=None, dim=2):
    kind = kind or draw(st.sampled_from(["singleton", "points", "ball", "box"]))
    vec = st.lists(coord, min_size=dim, max_size=dim)
    if kind == "singleton":
        return Singleton(draw(vec))
    if kind == "points":
        return FinitePointSet(draw(st.lists(vec, min_size=1, max_size=6)))
    if kind == "ball":
        return Ball(draw(vec), draw(st.floats(0, 2)))
    lo = np.array(draw(vec))
    return AxisBox(lo, lo + np.array(draw(st.lists(st.floats(0, 2), min_size=dim,
                                                   max_size=dim))))


@given(st.sampled_from(["singleton", "points", "ball", "box"]).flatmap(
    lambda k: st.tuples(compact_sets(k), compact_sets(k), compact_sets(k))))
def test_hausdorff_metric_axioms_same_kind(triple):
    A, B, C = triple
    assert hausdorff(A, B) == pytest.approx(hausdorff(B, A), abs=1e-12)
    assert hausdorff(A, A) == 0.0
    assert hausdorff(A, C) <= hausdorff(A, B) + hausdorff(B, C) + 1e-9


@given(compact_sets(), st.lists(coord, min_size=2, max_size=2))
def test_projection_realizes_distance(E, x):
    y = project(x, E)
    assert np.linalg.norm(np.asarray(x) - y) == pytest.approx(dist_point_to_set(x, E),
                                                               abs=1e-12)
    assert dist_point_to_set(y, E) <= 1e-12


@given(compact_sets(), st.integers(0, 2 ** 32 - 1))
def test_members_have_zero_distance(E, seed):
    rng = np.random.default_rng(seed)
    for p in sample_uniform(E, rng, 20):
        assert dist_point_to_set(p, E) <= 1e-12


@given(st.sampled_from(["ball", "box", "points"]).flatmap(
    lambda k: st.tuples(compact_sets(k), compact_sets(k))), st.integers(0, 1000))
def test_sampled_never_exceeds_closed_form(pair, seed):
    A, B = pair
    assert hausdorff_sampled(A, B, 500, seed) <= hausdorff(A, B) + 1e-12


@given(st.lists(coord, min_size=3, max_size=3), st.lists(coord, min_size=3, max_size=3))
def test_singleton_hausdorff_is_norm(x, y):
    assert hausdorff(Singleton(x), Singleton(y)) == float(np.linalg.norm(np.subtract(x, y)))


@pytest.mark.parametrize("kind", ["singleton", "ball", "box", "mixed_box", "mixed_ball"])
def test_pairwise_matches_scalar(kind, rng):
    def make(i):
        c = rng.uniform(-1, 1, 2)
        if kind == "singleton" or (kind.startswith("mixed") and i % 3 == 0):
            return Singleton(c)
        if kind in ("ball", "mixed_ball"):
            return Ball(c, rng.uniform(0, 1))
        return AxisBox(c, c + rng.uniform(0, 1, 2))

    sets = [make(i) for i in range(15)]
    M = pairwise_hausdorff(sets)
    for i, A in enumerate(sets):
        for j, B in enumerate(sets):
            assert M[i, j] == pytest.approx(hausdorff(A, B), abs=1e-12)
