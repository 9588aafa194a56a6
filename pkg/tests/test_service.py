"""HTTP layer: request validation, handler plumbing, determinism."""
import pytest
from fastapi.testclient import TestClient

from metricprod import __version__
from metricprod.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


P2 = {"family": "p_combination", "arity": 2, "p": 2}
E3 = {"family": "euclidean", "dim": 3}
LINE = {"norm": {"family": "euclidean", "dim": 1}}


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok", "version": __version__}


def test_validate_phi_passes_for_square_sum(client):
    r = client.post("/validate-phi",
                    json={"phi": P2, "sample_count": 2000})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is True
    assert {c["key"] for c in body["conditions"]} >= {"A", "B", "1", "2",
                                                      "3", "4"}
    assert "condition_A: pass" in body["report"]
    assert body["tables"] == {}


def test_validate_phi_requirement_can_fail(client):
    r = client.post("/validate-phi",
                    json={"phi": {"family": "max_combination", "arity": 2},
                          "sample_count": 2000, "require": ["5"]})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is False
    fifth = next(c for c in body["conditions"] if c["key"] == "5")
    assert fifth["status"] == "fail"
    assert fifth["witness"]


def test_validate_phi_unknown_condition_is_a_request_error(client):
    r = client.post("/validate-phi",
                    json={"phi": P2, "require": ["seventeen"]})
    assert r.status_code == 422


def test_check_norm_euclidean(client):
    r = client.post("/check-norm", json={"norm": E3, "sample_count": 2000})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is True
    assert body["axioms_ok"] is True
    assert body["strictly_convex"] is True
    assert body["parallelogram_ok"] is True
    assert body["kernel_dim"] == 0


def test_check_norm_l1_keeps_axioms_loses_parallelogram(client):
    r = client.post("/check-norm",
                    json={"norm": {"family": "p_norm", "dim": 2, "p": 1},
                          "sample_count": 2000})
    body = r.json()
    assert body["passed"] is True
    assert body["strictly_convex"] is False
    assert body["parallelogram_ok"] is False


def test_extra_keys_are_rejected(client):
    r = client.post("/check-norm", json={"norm": E3, "bogus": 1})
    assert r.status_code == 422


@pytest.mark.filterwarnings("ignore::metricprod.counterexample.ZeroResolutionWarning")
def test_counterexample_small_run(client):
    req = {"n": 1, "samples": 2000, "null_points": 200, "circles": 10,
           "planes": 10, "section_points": 32}
    r = client.post("/counterexample", json=req)
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is True
    assert body["n"] == 1 and body["n_was_searched"] is False
    assert min(body["convexity_margins"]) > 0
    assert body["diagonal_worst"] <= 1e-12
    assert body["null_worst"] <= 1e-14
    assert body["min_circle_intersections"] >= 8
    assert body["obstruction_fractions"] == [1.0, 1.0]
    assert "sections" in body["tables"]
    assert body["tables"]["sections"].splitlines()[0].startswith("norm,")


def test_probe_rank_leaf_with_obstruction(client):
    req = {"space": {"norm": {"family": "perturbed_spherical", "dim": 3,
                              "variant": 1, "scale": 1}},
           "k_min": 1, "k_max": 1, "obstruction": True, "planes": 10}
    r = client.post("/probe-rank", json=req)
    assert r.status_code == 200
    body = r.json()
    assert body["distortions"]["1"] <= 1.0 + 1e-6
    assert body["rank_estimate"] >= 1
    assert body["obstruction_fraction"] == 1.0
    assert body["euclidean_rank_certificate"] == 1


def test_probe_rank_obstruction_needs_a_leaf(client):
    req = {"space": {"product": [LINE, LINE]}, "obstruction": True,
           "k_max": 1}
    r = client.post("/probe-rank", json=req)
    assert r.status_code == 422


def test_decompose_scenario(client):
    r = client.post("/decompose", json={"scenario": "coordinate-split-p2"})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is True
    assert body["refusal"] is None
    assert max(body["residuals"].values()) <= 1e-9
    assert body["table_error"] <= 1e-9
    assert "factors" in body["tables"]


def test_decompose_refusal_is_a_normal_response(client):
    r = client.post("/decompose", json={"scenario": "max-combination"})
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is False
    assert "strictly convex" in body["refusal"]


def test_decompose_unknown_scenario(client):
    r = client.post("/decompose", json={"scenario": "nope"})
    assert r.status_code == 422


def test_length_circle_times_segment(client):
    req = {"space": {"product": [
               {"norm": {"family": "euclidean", "dim": 2}}, LINE]},
           "curves": [
               {"kind": "circle", "center": [0, 0], "radius": 1.0,
                "axes": [[1, 0], [0, 1]]},
               {"kind": "segment", "start": [0], "end": [1]}],
           "refinement": 2000, "doublings": 2}
    r = client.post("/length", json=req)
    assert r.status_code == 200
    body = r.json()
    assert body["passed"] is True
    assert body["gap_monotone"] is True
    assert abs(body["length_estimate"] - body["phi_of_lengths"]) <= 1e-3
    assert len(body["gaps"]) == 3


def test_length_curve_count_must_match_factors(client):
    req = {"space": {"product": [LINE, LINE]},
           "curves": [{"kind": "segment", "start": [0], "end": [1]}]}
    r = client.post("/length", json=req)
    assert r.status_code == 422


def test_identical_requests_give_identical_reports(client):
    req = {"space": {"norm": {"family": "p_norm", "dim": 2, "p": 4}},
           "k_min": 2, "k_max": 2, "restarts": 2, "grid_side": 3}
    a = client.post("/probe-rank", json=req).json()
    b = client.post("/probe-rank", json=req).json()
    assert a["report"] == b["report"]
    assert a == b
