"""The perturbed-norm pair: profile values, identities, and null set."""
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metricprod import counterexample as cx
from metricprod import norms, sampling


def test_profile_peak_value_is_frozen():
    # (2 + sqrt(2)) / 8 at the poles, exactly
    assert cx.epsilon_tilde(0.0, 1) == pytest.approx(0.42677669529663687,
                                                     abs=1e-16)
    assert cx.MAX_PERTURBATION == pytest.approx((2 + math.sqrt(2)) / 8,
                                                abs=0.0)
    assert cx.epsilon_tilde(math.pi, 1) == pytest.approx(cx.MAX_PERTURBATION,
                                                         abs=1e-16)


def test_profile_equator_value_is_frozen():
    # sin^2(pi/8) / 2 on the equator
    assert cx.epsilon_tilde(math.pi / 2, 1) == pytest.approx(
        0.07322330470336312, abs=1e-16)


def test_profile_closed_form_agreement():
    """Product of four shifted sines equals cos(2t)(cos(2t)+sqrt(2)/2)/4."""
    theta = np.linspace(0.0, math.pi, 1201)
    via_product = cx.epsilon_tilde(theta, 3)
    c = np.cos(2 * theta)
    via_closed = c * (c + math.sqrt(2) / 2) / 12.0
    assert np.max(np.abs(via_product - via_closed)) < 1e-15


def test_profile_vanishes_on_null_colatitudes():
    for theta in cx.NULL_COLATITUDES:
        assert abs(cx.epsilon_tilde(theta, 1)) < 1e-15


def test_profile_antipodal_symmetry():
    theta = np.linspace(0.0, math.pi, 301)
    assert np.max(np.abs(cx.epsilon_tilde(theta, 2)
                         - cx.epsilon_tilde(math.pi - theta, 2))) < 1e-15


def test_profile_scales_inversely_with_n():
    assert cx.epsilon_tilde(0.3, 4) == pytest.approx(
        cx.epsilon_tilde(0.3, 1) / 4, rel=1e-14)


def test_profile_domain():
    with pytest.raises(ValueError):
        cx.epsilon_tilde(-0.1, 1)
    with pytest.raises(ValueError):
        cx.epsilon_tilde(math.pi + 0.1, 1)
    # endpoint jitter at rounding scale is clipped, not rejected
    assert np.isfinite(cx.epsilon_tilde(-1e-13, 1))


def test_rotated_profile_at_rotated_pole():
    # the second profile's pole sits where the rotation sends the first's
    u = np.array([0.0, -1.0, 0.0])
    assert cx.epsilon_hat(u, 1) == pytest.approx(cx.MAX_PERTURBATION,
                                                 abs=1e-16)
    with pytest.raises(ValueError):
        cx.epsilon_hat(np.array([0.0, -0.5, 0.0]), 1)


def test_frame_is_a_rotation():
    r = cx.GAMMA_TO_DELTA
    assert np.allclose(r @ r.T, np.eye(3), atol=1e-15)
    assert np.linalg.det(r) == pytest.approx(1.0)


def test_energy_identity_on_the_sphere():
    rng = sampling.substream(123, 99)
    u = sampling.unit_vectors(rng, 2000, 3)
    for n in (1, 2, 8):
        total = cx.phi1(u, n) ** 2 + cx.phi2(u, n) ** 2
        assert np.max(np.abs(total - 2.0)) < 1e-14


def test_amplitude_bound_keeps_partner_real():
    rng = sampling.substream(124, 99)
    u = sampling.unit_vectors(rng, 2000, 3)
    prod = np.abs(cx.epsilon_tilde(cx.colatitude(u), 1) * cx.epsilon_hat(u, 1))
    assert prod.max() <= cx.MAX_PERTURBATION ** 2 + 1e-16
    assert np.all(2.0 - cx.phi1(u, 1) ** 2 > 0.5)


def test_perturbed_pair_are_certified_norms():
    for spec in cx.perturbed_pair(1):
        report = norms.check_norm_axioms(spec, sample_count=4000, seed=21)
        assert report.all_ok, (spec, report)


def test_perturbed_pair_strictly_convex_at_unit_sharpness():
    for spec in cx.perturbed_pair(1):
        ok, margin = norms.check_strict_convexity(spec, sample_count=4000,
                                                  seed=21)
        assert ok
        assert margin > 0.01


def test_choose_n_settles_on_the_first_admissible_sharpness():
    result = cx.choose_n(sample_count=2000, seed=42)
    assert result.n == 1
    assert result.history[-1].ok
    assert result.history[-1].n == 1


def test_choose_n_exhaustion():
    with pytest.raises(cx.SearchExhausted) as err:
        cx.choose_n(n_grid=[], sample_count=100, seed=42)
    assert err.value.history == ()


def test_diagonal_euclidean_identity():
    worst = cx.verify_diagonal_euclidean(1, sample_count=4000, seed=17)
    assert worst <= 1e-12
    worst = cx.verify_diagonal_euclidean(3, sample_count=4000, seed=17)
    assert worst <= 1e-12


def test_null_circles_lie_on_the_sphere_and_kill_the_perturbation():
    pts = cx.null_circle_points(200)
    assert pts.shape == (8, 200, 3)
    assert np.max(np.abs(np.linalg.norm(pts, axis=-1) - 1.0)) < 1e-14
    flat = pts.reshape(-1, 3)
    assert np.max(np.abs(cx.phi1(flat, 1) - 1.0)) <= 1e-14
    assert np.max(np.abs(cx.phi2(flat, 1) - 1.0)) <= 1e-14


def test_null_circle_labels_cover_both_frames():
    assert len(cx.NULL_CIRCLE_LABELS) == 8
    assert sum(1 for lab in cx.NULL_CIRCLE_LABELS if "gamma" in lab) == 4
    assert sum(1 for lab in cx.NULL_CIRCLE_LABELS if "delta" in lab) == 4


def test_great_circles_hit_the_null_set_at_least_eight_times():
    rng = sampling.substream(42, sampling.KEY_GREAT_CIRCLES)
    for _ in range(25):
        basis = rng.standard_normal((2, 3))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", cx.ZeroResolutionWarning)
            count = cx.great_circle_null_intersections(basis)
        assert count >= 8, count


def test_equator_and_meridian_cross_exactly_eight_times():
    """On the equator only the rotated profile vanishes; on the x-z
    meridian only the direct one does.  Each contributes two transversal
    crossings per null colatitude, so both counts are exactly 8."""
    equator = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    meridian = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert cx.great_circle_null_intersections(equator) == 8
    assert cx.great_circle_null_intersections(meridian) == 8


def test_great_circle_input_validation():
    with pytest.raises(ValueError):
        cx.great_circle_null_intersections(np.eye(3)[:2], resolution=500)
    with pytest.raises(ValueError):
        cx.great_circle_null_intersections(
            np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]))


@settings(max_examples=150, derandomize=True)
@given(theta=st.floats(min_value=0.0, max_value=math.pi, allow_nan=False),
       n=st.integers(min_value=1, max_value=50))
def test_profile_bounded_property(theta, n):
    value = cx.epsilon_tilde(theta, n)
    assert abs(value) <= cx.MAX_PERTURBATION / n + 1e-15
