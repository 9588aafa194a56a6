"""Combination-functional conditions and the reflected-norm bridge."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metricprod import norms, phi

P2 = phi.PhiSpec("p_combination", 2, p=2.0)
P4_3 = phi.PhiSpec("p_combination", 3, p=4.0)
L1 = phi.PhiSpec("l1_combination", 2)
MAX = phi.PhiSpec("max_combination", 2)
WE = phi.PhiSpec("weighted_euclidean", 2, weights=(2.0, 0.5))

ALL_BUILTINS = (P2, P4_3, L1, MAX, WE)


def test_phi_eval_closed_forms():
    q = np.array([3.0, 4.0])
    assert phi.phi_eval(P2, q) == pytest.approx(5.0)
    assert phi.phi_eval(L1, q) == pytest.approx(7.0)
    assert phi.phi_eval(MAX, q) == pytest.approx(4.0)
    assert phi.phi_eval(WE, q) == pytest.approx(np.sqrt(2 * 9 + 0.5 * 16))


def test_phi_eval_rejects_quadrant_violations():
    with pytest.raises(ValueError):
        phi.phi_eval(P2, np.array([1.0, -0.1]))
    with pytest.raises(ValueError):
        phi.phi_eval(P2, np.array([1.0, 2.0, 3.0]))


def test_phi_spec_validation():
    with pytest.raises(ValueError):
        phi.PhiSpec("p_combination", 2, p=0.5)
    with pytest.raises(ValueError):
        phi.PhiSpec("nope", 2)
    with pytest.raises(ValueError):
        phi.PhiSpec("weighted_euclidean", 2, weights=(1.0,))
    with pytest.raises(ValueError):
        phi.PhiSpec("p_combination", 0, p=2.0)


def test_resolve_phi_callable_needs_arity():
    fn = lambda q: np.sum(q, axis=-1)
    with pytest.raises(ValueError):
        phi.resolve_phi(fn)
    got, n = phi.resolve_phi(fn, 3)
    assert n == 3 and got is fn


@pytest.mark.parametrize("spec", ALL_BUILTINS)
def test_builtin_families_meet_core_conditions(spec):
    report = phi.validate_phi(spec, sample_count=4000, seed=9)
    assert report.passed(("A", "B", "1", "2", "3", "4")), report.conditions


def test_axis_split_separates_the_families():
    assert phi.validate_phi(P2, sample_count=4000, seed=9).conditions["5"].ok
    assert phi.validate_phi(WE, sample_count=4000, seed=9).conditions["5"].ok
    for spec in (L1, MAX, P4_3):
        cond = phi.validate_phi(spec, sample_count=4000, seed=9).conditions["5"]
        assert cond.status == "fail"
        assert cond.witness is not None
        assert cond.worst_violation > 1e-3


def test_square_functional_fails_subadditivity_and_b():
    square = lambda q: np.sum(np.square(np.asarray(q, float)), axis=-1)
    rep = phi.validate_phi(square, sample_count=4000, seed=9, arity=1)
    assert rep.conditions["3"].status == "fail"
    assert rep.conditions["B"].status == "fail"
    assert rep.conditions["5"].status == "not-checked"


def test_indicator_functional_satisfies_b():
    """Discontinuous-looking indicator that still respects metric triples.

    The domination system in (B) quantifies over simultaneous triples, so
    this functional (0 at 0, larger where the first component dominates)
    must pass; a naive single-pattern reading wrongly rejects it.
    """

    def indicator(q):
        q = np.asarray(q, dtype=float)
        nonzero = np.any(q > 0.0, axis=-1)
        bump = 1.5 + 0.5 * np.sign(q[..., 0] - q[..., 1])
        return np.where(nonzero, bump, 0.0)

    cond = phi.validate_condition_B(indicator, sample_count=4000, seed=9,
                                    arity=2)
    assert cond.ok, cond


def test_condition_2_catches_non_monotone():
    dip = lambda q: np.abs(np.asarray(q, float)[..., 0] - 1.0) + \
        np.asarray(q, float)[..., 1]
    conds = phi.validate_conditions_1_to_4(dip, sample_count=4000, seed=9,
                                           arity=2)
    assert conds["2"].status == "fail"


def test_condition_4_catches_non_homogeneous():
    affine = lambda q: np.sum(np.asarray(q, float), axis=-1) + 1.0
    conds = phi.validate_conditions_1_to_4(affine, sample_count=4000, seed=9,
                                           arity=2)
    assert conds["4"].status == "fail"
    assert conds["1"].status == "fail"   # affine offset breaks zero-at-zero


def test_psi_from_phi_is_the_reflected_norm():
    psi = phi.psi_from_phi(P2)
    assert psi.dim == 2
    v = np.array([-3.0, 4.0])
    assert psi(v) == pytest.approx(5.0)
    assert psi(np.array([3.0, 4.0])) == pytest.approx(psi(v))
    with pytest.raises(TypeError):
        phi.psi_from_phi(lambda q: q)


@pytest.mark.parametrize("spec", ALL_BUILTINS)
def test_psi_norm_axioms_follow_core_conditions(spec):
    # reflected functional passes the norm axioms iff (1)-(4) do
    report = phi.validate_phi(spec, sample_count=4000, seed=9)
    psi = phi.psi_from_phi(spec)
    axioms = norms.check_norm_axioms((psi, spec.arity), sample_count=4000,
                                     seed=9)
    assert axioms.all_ok == report.passed(("1", "2", "3", "4"))


@pytest.mark.parametrize("spec", ALL_BUILTINS)
def test_axis_split_matches_parallelogram(spec):
    report = phi.validate_phi(spec, sample_count=4000, seed=9)
    psi = phi.psi_from_phi(spec)
    par_ok, _ = norms.check_parallelogram((psi, spec.arity),
                                          sample_count=4000, seed=9)
    assert par_ok == report.conditions["5"].ok


def test_psi_strict_convexity():
    ok, margin = phi.check_psi_strict_convexity(P2, sample_count=4000, seed=9)
    assert ok and margin > 1e-2
    ok, _ = phi.check_psi_strict_convexity(P4_3, sample_count=4000, seed=9)
    assert ok
    for spec in (L1, MAX):
        ok, margin = phi.check_psi_strict_convexity(spec, sample_count=4000,
                                                    seed=9)
        assert not ok


quadrant_points = st.lists(
    st.floats(min_value=0.0, max_value=1e6, allow_nan=False),
    min_size=2, max_size=2)


@settings(max_examples=150, derandomize=True)
@given(q=quadrant_points, r=quadrant_points)
def test_monotone_and_subadditive_property(q, r):
    q, r = np.array(q), np.array(r)
    for spec in (P2, L1, MAX, WE):
        vq = phi.phi_eval(spec, q)
        vqr = phi.phi_eval(spec, q + r)
        assert vq <= vqr * (1 + 1e-12) + 1e-12
        assert vqr <= (vq + phi.phi_eval(spec, r)) * (1 + 1e-12) + 1e-12
