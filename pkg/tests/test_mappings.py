import numpy as np
import pytest

from tristep.geometry import AxisBox, Ball, FinitePointSet, Singleton, dist_point_to_set, hausdorff
from tristep.mappings import (
    ConditionGauge,
    DomainError,
    KnownFixedPoints,
    ProximalMap,
    catalog_map,
    catalog_problem,
    check_condition_c,
    check_condition_i,
    check_condition_ii,
    check_fixed_point_metadata,
    check_nonexpansive,
    check_quasi_nonexpansive,
    evaluate,
    grid_points,
    linear_gauge,
    proximal_evaluate,
    residual,
)

HALF = catalog_map("half_interval", divisor=2)
BALL = catalog_map("shrink_ball", index=1)
SUZUKI = catalog_map("suzuki_map")
EXPANDING = catalog_map("expanding_map")
ZERO = KnownFixedPoints(([0.0],))


def test_half_interval_images():
    assert evaluate(HALF, 1.0) == AxisBox([0], [0.5])
    assert evaluate(HALF, 0.0) == Singleton([0.0])


def test_shrink_ball_image():
    assert evaluate(BALL, [0.8, 0.0]) == Ball([0.4, 0.0], 0.2)


def test_evaluate_outside_domain():
    with pytest.raises(DomainError):
        evaluate(HALF, 1.5)
    with pytest.raises(DomainError):
        evaluate(BALL, [1.0, 1.0])
    # within the 1e-9 slack is accepted
    evaluate(HALF, 1.0 + 1e-10)


def test_proximal_images():
    P = ProximalMap(BALL)
    y = proximal_evaluate(P, [0.8, 0.0])
    assert isinstance(y, Singleton)
    assert y.point == pytest.approx([0.6, 0.0], abs=1e-15)
    assert np.linalg.norm(y.point - [0.8, 0]) == pytest.approx(0.2, abs=1e-15)
    assert proximal_evaluate(ProximalMap(HALF), 1.0) == Singleton([0.5])
    assert proximal_evaluate(P, [0.0, 0.0]) == Singleton([0.0, 0.0])


def test_proximal_keeps_finite_ties():
    pair = catalog_map("point_pair")
    # x = 0.6: images 0.3 and 0.15, nearest 0.3 only
    assert proximal_evaluate(ProximalMap(pair), 0.6) == Singleton([0.3])
    from tristep.mappings import nearest_points
    tie = nearest_points([0.5], FinitePointSet([[0.0], [1.0], [2.0]]))
    assert tie == FinitePointSet([[0.0], [1.0]])


def test_residuals():
    assert residual(HALF, 1.0) == 0.5
    assert residual(HALF, 0.0) == 0.0
    assert residual(BALL, [0.8, 0.0]) == pytest.approx(0.2, abs=1e-15)


def test_proximal_distance_equals_residual_on_grid():
    for T in (HALF, BALL, catalog_map("point_pair"), SUZUKI):
        P = ProximalMap(T)
        for x in grid_points(T.domain, 31):
            assert dist_point_to_set(x, proximal_evaluate(P, x)) == pytest.approx(
                residual(T, x), abs=1e-10)
            for y in np.atleast_2d(getattr(proximal_evaluate(P, x), "points",
                                           getattr(proximal_evaluate(P, x), "point", None))):
                assert dist_point_to_set(y, evaluate(T, x)) <= 1e-12


# -- condition (C) and friends ----------------------------------------------

def test_half_interval_condition_c():
    rep = check_condition_c(HALF, np.linspace(0, 1, 2001), 1e-9)
    assert rep.passed and rep.checked > 0


def test_calibration_map_condition_c_but_not_nonexpansive():
    grid = np.linspace(0, 3, 3001)
    assert 2.999 in np.round(grid, 12)
    assert check_condition_c(SUZUKI, grid, 1e-9).passed
    ne = check_nonexpansive(SUZUKI, grid, 1e-9)
    assert not ne.passed
    found = [v for v in ne.violations if v[0] == [3.0] and v[1] == pytest.approx([2.999])]
    assert found and found[0][2] == 1.0 and found[0][3] == pytest.approx(0.001)


def test_expanding_map_violates_condition_c():
    rep = check_condition_c(EXPANDING, np.linspace(0, 1, 101), 1e-9)
    assert not rep.passed
    pairs = {(v[0][0], v[1][0]) for v in rep.violations}
    assert (0.0, 1.0) in pairs
    x0 = [v for v in rep.violations if v[0] == [0.0] and v[1] == [1.0]][0]
    assert x0[2:] == (2.0, 1.0)


def test_quasi_nonexpansive():
    assert check_quasi_nonexpansive(HALF, ZERO, np.linspace(0, 1, 501)).passed
    assert check_quasi_nonexpansive(SUZUKI, ZERO, np.linspace(0, 3, 3001)).passed
    with pytest.raises(ValueError):
        check_quasi_nonexpansive(HALF, KnownFixedPoints(()), [0.5])


def test_condition_ii():
    maps = [catalog_map("half_interval", divisor=k) for k in (2, 3, 4)]
    grid = np.linspace(0, 1, 1001)
    assert check_condition_ii(maps, linear_gauge(0.5), ZERO, grid).passed
    rep = check_condition_ii(maps, linear_gauge(10.0), ZERO, grid)
    assert not rep.passed
    worst = [v for v in rep.violations if v[0] == [1.0]][0]
    assert worst[1] == pytest.approx(23 / 12) and worst[2] == 10.0
    # at the fixed point both sides vanish
    assert check_condition_ii(maps, linear_gauge(10.0), ZERO, [0.0]).passed
    with pytest.raises(ValueError):
        check_condition_ii(maps, linear_gauge(1.0), ZERO, [])


def test_condition_i_single_map():
    assert check_condition_i(HALF, linear_gauge(0.5), ZERO, np.linspace(0, 1, 101)).passed
    assert not check_condition_i(HALF, linear_gauge(0.6), ZERO, np.linspace(0, 1, 101)).passed


def test_gauge_validation():
    assert linear_gauge(2.0).validate(np.linspace(0, 5, 50)).passed
    bad = ConditionGauge(lambda r: np.sin(r) + (r == 0) * 0.0, "sin")
    assert not bad.validate(np.linspace(0, 6, 50)).passed
    assert not ConditionGauge(lambda r: 1.0 + r).validate([0, 1]).passed


@pytest.mark.parametrize("label", ["half_interval", "shrink_ball", "scaled_singleton",
                                   "point_pair", "expanding_map"])
def test_nonexpansive_catalog_maps_satisfy_condition_c(label):
    problem = catalog_problem(label)
    grid = grid_points(problem.domain, 201 if problem.dim == 1 else 15)
    for T in problem.maps:
        ne = check_nonexpansive(T, grid)
        cc = check_condition_c(T, grid)
        if ne.passed:
            assert cc.passed
        if cc.passed:
            assert check_quasi_nonexpansive(T, problem.fixed_points, grid).passed


@pytest.mark.parametrize("label", ["half_interval", "shrink_ball", "scaled_singleton",
                                   "point_pair", "suzuki_map", "expanding_map"])
def test_catalog_fixed_point_metadata(label):
    problem = catalog_problem(label)
    assert check_fixed_point_metadata(problem).passed
    for p in problem.fixed_points.points:
        for T in problem.maps:
            assert residual(T, p) <= 1e-10
            assert hausdorff(evaluate(T, p), Singleton(p)) <= 1e-10


def test_unknown_catalog_label():
    with pytest.raises(KeyError):
        catalog_problem("nope")
    with pytest.raises(KeyError):
        catalog_map("nope")
