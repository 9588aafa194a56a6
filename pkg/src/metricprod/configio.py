"""Config-file loading and construction of specs, spaces, and curves.

Configs are YAML key-value documents.  The same dictionaries the CLI
reads from disk are accepted by the service layer as request bodies, so
both front ends share one vocabulary.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from . import norms, phi as phi_mod, spaces


class ConfigError(ValueError):
    """Malformed or incomplete configuration input."""


def load_config(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse {p}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    return data


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"missing config key: {key!r}")
    return cfg[key]


def norm_spec_from_config(cfg: dict) -> norms.NormSpec:
    """Build a NormSpec from {family, dim, p?, weights?, variant?, scale?}."""
    if not isinstance(cfg, dict):
        raise ConfigError("norm config must be a mapping")
    family = _require(cfg, "family")
    dim = int(_require(cfg, "dim"))
    kwargs = {}
    if "p" in cfg:
        kwargs["p"] = float(cfg["p"])
    if "weights" in cfg:
        kwargs["weights"] = tuple(float(w) for w in cfg["weights"])
    if "variant" in cfg:
        kwargs["variant"] = int(cfg["variant"])
    if "scale" in cfg:
        kwargs["scale"] = int(cfg["scale"])
    try:
        return norms.NormSpec(family, dim, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad norm config: {exc}") from exc


def phi_spec_from_config(cfg: dict) -> phi_mod.PhiSpec:
    """Build a PhiSpec from {family, arity, p?, weights?}."""
    if not isinstance(cfg, dict):
        raise ConfigError("phi config must be a mapping")
    family = _require(cfg, "family")
    arity = int(_require(cfg, "arity"))
    kwargs = {}
    if "p" in cfg:
        kwargs["p"] = float(cfg["p"])
    if "weights" in cfg:
        kwargs["weights"] = tuple(float(w) for w in cfg["weights"])
    try:
        return phi_mod.PhiSpec(family, arity, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad phi config: {exc}") from exc


def space_from_config(cfg: dict):
    """Build a Leaf or Product space.

    Leaf: {norm: {...}}.  Product: {product: [child, ...], phi?: {...}}
    with the square-sum combination as the default phi.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("space config must be a mapping")
    if "norm" in cfg:
        return spaces.Leaf(norm_spec_from_config(cfg["norm"]))
    if "product" in cfg:
        children = [space_from_config(c) for c in cfg["product"]]
        if "phi" in cfg:
            phi = phi_spec_from_config(cfg["phi"])
            try:
                return spaces.Product(tuple(children), phi)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad product config: {exc}") from exc
        try:
            return spaces.standard_product(children)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad product config: {exc}") from exc
    raise ConfigError("space config needs 'norm' or 'product'")


def _vertices_from(cfg: dict, base: Path | None):
    if "vertices" in cfg:
        return np.asarray(cfg["vertices"], dtype=float)
    if "vertices_file" in cfg:
        path = Path(cfg["vertices_file"])
        if base is not None and not path.is_absolute():
            path = base / path
        if not path.exists():
            raise ConfigError(f"vertex table not found: {path}")
        try:
            return np.loadtxt(path, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise ConfigError(f"bad vertex table {path}: {exc}") from exc
    raise ConfigError("curve config needs 'vertices' or 'vertices_file'")


def curve_from_config(cfg: dict, base: Path | None = None):
    """Build a curve: polygon {kind: polygon, vertices|vertices_file},
    segment {kind: segment, start, end}, or circle {kind: circle, center,
    radius, axes}."""
    if not isinstance(cfg, dict):
        raise ConfigError("curve config must be a mapping")
    kind = _require(cfg, "kind")
    try:
        if kind == "polygon":
            return spaces.PolygonalCurve(_vertices_from(cfg, base))
        if kind == "segment":
            return spaces.Segment(np.asarray(_require(cfg, "start"), dtype=float),
                                  np.asarray(_require(cfg, "end"), dtype=float))
        if kind == "circle":
            return spaces.Circle(
                center=np.asarray(_require(cfg, "center"), dtype=float),
                radius=float(_require(cfg, "radius")),
                axes=np.asarray(_require(cfg, "axes"), dtype=float))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad curve config: {exc}") from exc
    raise ConfigError(f"unknown curve kind: {kind!r}")
