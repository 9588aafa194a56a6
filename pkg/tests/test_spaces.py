"""Product spaces, combined distances, and curve length convergence."""
import math

import numpy as np
import pytest

from metricprod import norms, phi, spaces

E1 = norms.NormSpec("euclidean", 1)
E2 = norms.NormSpec("euclidean", 2)
L1_2 = norms.NormSpec("p_norm", 2, p=1.0)


def _pair():
    return spaces.standard_product([spaces.Leaf(E2), spaces.Leaf(E1)])


def test_distance_square_sum_of_factor_distances():
    space = _pair()
    x = np.array([0.0, 0.0, 0.0])
    y = np.array([3.0, 4.0, 12.0])
    # factor distances are 5 and 12
    assert spaces.distance(space, x, y) == pytest.approx(13.0)


def test_distance_broadcasts():
    space = _pair()
    x = np.zeros((4, 1, 3))
    y = np.ones((5, 3))
    out = spaces.distance(space, x, y)
    assert out.shape == (4, 5)
    assert np.allclose(out, math.sqrt(3.0))


def test_distance_nested_products():
    inner = spaces.standard_product([spaces.Leaf(E1), spaces.Leaf(E1)])
    outer = spaces.standard_product([spaces.Leaf(inner_norm := E2), inner])
    del inner_norm
    x = np.zeros(4)
    y = np.array([1.0, 1.0, 1.0, 1.0])
    # inner product distance is sqrt(2); outer combines with the E2 leaf
    assert spaces.distance(outer, x, y) == pytest.approx(2.0)


def test_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        spaces.distance(_pair(), np.zeros(2), np.zeros(2))


def test_standard_product_requires_two_children():
    with pytest.raises(ValueError):
        spaces.standard_product([spaces.Leaf(E2)])


def test_product_arity_must_match_phi():
    with pytest.raises(ValueError):
        spaces.Product((spaces.Leaf(E1), spaces.Leaf(E1)),
                       phi.PhiSpec("p_combination", 3, p=2.0))


def test_metric_axioms_pass_for_standard_products():
    report = spaces.check_metric_axioms(_pair(), sample_count=2000, seed=4)
    assert report.all_ok, report


def test_metric_axioms_pass_for_l1_leaf_product():
    space = spaces.standard_product([spaces.Leaf(L1_2), spaces.Leaf(E1)])
    report = spaces.check_metric_axioms(space, sample_count=2000, seed=4)
    assert report.all_ok


def test_metric_axioms_fail_for_squared_combination():
    square = lambda q: np.sum(np.square(np.asarray(q, float)), axis=-1)
    space = spaces.Product((spaces.Leaf(E1), spaces.Leaf(E1)), (square, 2))
    report = spaces.check_metric_axioms(space, sample_count=2000, seed=4)
    assert not report.triangle_ok
    assert report.witness is not None


def test_polygon_length_is_exact_at_any_refinement():
    space = spaces.Leaf(E2)
    poly = spaces.PolygonalCurve(np.array([[0.0, 0.0], [1.0, 0.0],
                                           [1.0, 1.0]]))
    exact = 2.0
    for refinement in (2, 7, 64, 1000):
        assert spaces.curve_length(space, poly, refinement) == \
            pytest.approx(exact, abs=1e-14)


def test_polygon_vertex_order_validation():
    with pytest.raises(ValueError):
        spaces.PolygonalCurve(np.array([[0.0, 0.0]]))
    with pytest.raises(ValueError):
        spaces.PolygonalCurve(np.array([[0.0], [1.0]]),
                              params=np.array([0.0, 0.9]))


def test_segment_and_circle_exact_lengths():
    seg = spaces.Segment(np.array([1.0]), np.array([4.0]))
    assert seg.exact_length(spaces.Leaf(E1)) == pytest.approx(3.0)
    circle = spaces.Circle(center=np.zeros(2), radius=2.0, axes=np.eye(2))
    assert circle.exact_length(spaces.Leaf(E2)) == pytest.approx(4 * math.pi)
    # no closed form under a non-euclidean leaf
    assert circle.exact_length(spaces.Leaf(L1_2)) is None


def test_circle_rejects_degenerate_axes():
    with pytest.raises(ValueError):
        spaces.Circle(center=np.zeros(2), radius=1.0,
                      axes=np.array([[1.0, 0.0], [2.0, 0.0]]))


def test_circle_chord_convergence_rate():
    space = spaces.Leaf(E2)
    circle = spaces.Circle(center=np.zeros(2), radius=1.0, axes=np.eye(2))
    err = [2 * math.pi - spaces.curve_length(space, circle, n)
           for n in (100, 200, 400)]
    assert err[0] > 0
    # chord deficit shrinks quadratically
    assert err[1] == pytest.approx(err[0] / 4, rel=0.05)
    assert err[2] == pytest.approx(err[1] / 4, rel=0.05)


def test_product_curve_length_circle_times_segment():
    space = _pair()
    circle = spaces.Circle(center=np.zeros(2), radius=1.0, axes=np.eye(2))
    seg = spaces.Segment(np.array([0.0]), np.array([1.0]))
    result = spaces.product_curve_length_check(space, [circle, seg],
                                               refinement=2000)
    target = math.sqrt(4 * math.pi ** 2 + 1.0)
    assert result.phi_of_lengths == pytest.approx(target, abs=1e-12)
    assert result.l_n <= result.phi_of_lengths + 1e-12
    assert abs(result.l_n - target) / target < 1e-3
    assert result.gap >= 0.0


def test_product_length_gap_shrinks_under_doubling():
    space = _pair()
    circle = spaces.Circle(center=np.zeros(2), radius=1.0, axes=np.eye(2))
    seg = spaces.Segment(np.array([0.0]), np.array([1.0]))
    gaps = [spaces.product_curve_length_check(space, [circle, seg],
                                              refinement=n).gap
            for n in (500, 1000, 2000, 4000)]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))


def test_polygon_pair_is_exact_in_the_product():
    space = spaces.standard_product([spaces.Leaf(E1), spaces.Leaf(E1)])
    a = spaces.PolygonalCurve(np.array([[0.0], [3.0]]))
    b = spaces.PolygonalCurve(np.array([[0.0], [4.0]]))
    result = spaces.product_curve_length_check(space, [a, b], refinement=16)
    assert result.l_n == pytest.approx(5.0, abs=1e-14)
    assert result.gap <= 1e-14


def test_speed_mismatch_is_reported_not_repaired():
    space = _pair()
    # same square path, but parametrized with uneven dwell on one edge
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0],
                      [0.0, 0.0]])
    skew = spaces.PolygonalCurve(verts,
                                 params=np.array([0.0, 0.7, 0.8, 0.9, 1.0]))
    seg = spaces.Segment(np.array([0.0]), np.array([1.0]))
    with pytest.raises(spaces.ParametrizationError):
        spaces.product_curve_length_check(space, [skew, seg],
                                          refinement=2000)


def test_constant_component_is_tolerated():
    space = _pair()
    circle = spaces.Circle(center=np.zeros(2), radius=1.0, axes=np.eye(2))
    still = spaces.Segment(np.array([0.4]), np.array([0.4]))
    result = spaces.product_curve_length_check(space, [circle, still],
                                               refinement=2000)
    assert result.phi_of_lengths == pytest.approx(2 * math.pi)
