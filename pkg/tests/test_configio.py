"""YAML config loading and the NormSpec/PhiSpec/space/curve builders."""
import numpy as np
import pytest

from metricprod import configio as cio
from metricprod import spaces


def test_load_config_round_trip(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("norm:\n  family: euclidean\n  dim: 3\n")
    cfg = cio.load_config(p)
    assert cfg == {"norm": {"family": "euclidean", "dim": 3}}


def test_load_config_errors(tmp_path):
    with pytest.raises(cio.ConfigError, match="not found"):
        cio.load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("a: [1, 2\n")
    with pytest.raises(cio.ConfigError, match="parse"):
        cio.load_config(bad)
    scalar = tmp_path / "scalar.yaml"
    scalar.write_text("- just\n- a\n- list\n")
    with pytest.raises(cio.ConfigError, match="mapping"):
        cio.load_config(scalar)


def test_load_config_empty_file_is_empty_dict(tmp_path):
    p = tmp_path / "empty.yaml"
    p.write_text("")
    assert cio.load_config(p) == {}


def test_norm_spec_builder():
    spec = cio.norm_spec_from_config(
        {"family": "p_norm", "dim": 3, "p": 4})
    assert spec.family == "p_norm" and spec.p == 4.0
    spec = cio.norm_spec_from_config(
        {"family": "weighted_euclidean", "dim": 2, "weights": [2, 0.5]})
    assert spec.weights == (2.0, 0.5)
    spec = cio.norm_spec_from_config(
        {"family": "perturbed_spherical", "dim": 3, "variant": 2,
         "scale": 1})
    assert spec.variant == 2


def test_norm_spec_builder_errors():
    with pytest.raises(cio.ConfigError, match="missing config key"):
        cio.norm_spec_from_config({"dim": 3})
    with pytest.raises(cio.ConfigError, match="bad norm config"):
        cio.norm_spec_from_config({"family": "p_norm", "dim": 3, "p": 0.5})
    with pytest.raises(cio.ConfigError):
        cio.norm_spec_from_config(["euclidean", 3])


def test_phi_spec_builder():
    spec = cio.phi_spec_from_config(
        {"family": "p_combination", "arity": 3, "p": 4})
    assert spec.arity == 3
    with pytest.raises(cio.ConfigError, match="missing config key"):
        cio.phi_spec_from_config({"family": "p_combination"})
    with pytest.raises(cio.ConfigError, match="bad phi config"):
        cio.phi_spec_from_config({"family": "nope", "arity": 2})


def test_space_builder_leaf_and_products():
    leaf = cio.space_from_config({"norm": {"family": "euclidean", "dim": 2}})
    assert isinstance(leaf, spaces.Leaf)

    cfg = {"product": [{"norm": {"family": "euclidean", "dim": 1}},
                       {"norm": {"family": "euclidean", "dim": 1}}]}
    prod = cio.space_from_config(cfg)
    assert isinstance(prod, spaces.Product)
    assert prod.phi.family == "p_combination" and prod.phi.p == 2.0

    cfg["phi"] = {"family": "p_combination", "arity": 2, "p": 4}
    prod4 = cio.space_from_config(cfg)
    assert prod4.phi.p == 4.0

    nested = cio.space_from_config(
        {"product": [cfg, {"norm": {"family": "euclidean", "dim": 3}}]})
    assert nested.flat_dim == 5


def test_space_builder_errors():
    with pytest.raises(cio.ConfigError, match="'norm' or 'product'"):
        cio.space_from_config({"leaf": {}})
    with pytest.raises(cio.ConfigError, match="bad product config"):
        cio.space_from_config(
            {"product": [{"norm": {"family": "euclidean", "dim": 1}}],
             "phi": {"family": "p_combination", "arity": 2, "p": 2}})


def test_curve_builders(tmp_path):
    seg = cio.curve_from_config(
        {"kind": "segment", "start": [0, 0], "end": [3, 4]})
    assert isinstance(seg, spaces.Segment)

    circ = cio.curve_from_config(
        {"kind": "circle", "center": [0, 0], "radius": 2.0,
         "axes": [[1, 0], [0, 1]]})
    assert isinstance(circ, spaces.Circle)

    poly = cio.curve_from_config(
        {"kind": "polygon", "vertices": [[0, 0], [1, 0], [1, 1]]})
    assert isinstance(poly, spaces.PolygonalCurve)

    with pytest.raises(cio.ConfigError, match="unknown curve kind"):
        cio.curve_from_config({"kind": "spiral"})
    with pytest.raises(cio.ConfigError, match="bad curve config"):
        cio.curve_from_config({"kind": "circle", "center": [0, 0],
                               "radius": -1.0, "axes": [[1, 0], [0, 1]]})


def test_curve_vertices_file_resolution(tmp_path):
    table = tmp_path / "verts.csv"
    np.savetxt(table, np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0]]),
               delimiter=",")
    poly = cio.curve_from_config(
        {"kind": "polygon", "vertices_file": "verts.csv"}, base=tmp_path)
    assert poly.vertices.shape == (3, 2)
    with pytest.raises(cio.ConfigError, match="not found"):
        cio.curve_from_config(
            {"kind": "polygon", "vertices_file": "nope.csv"}, base=tmp_path)
    garbled = tmp_path / "garbled.csv"
    garbled.write_text("a,b\nc,d\n")
    with pytest.raises(cio.ConfigError, match="bad vertex table"):
        cio.curve_from_config(
            {"kind": "polygon", "vertices_file": "garbled.csv"},
            base=tmp_path)
    with pytest.raises(cio.ConfigError, match="'vertices'"):
        cio.curve_from_config({"kind": "polygon"})
