"""Metric products over a combining functional, curves, and length.

A space is a tree: leaves are normed R^d, inner nodes combine child
distances through a PhiSpec.  Points are flat coordinate arrays; a
product's point is the concatenation of its children's points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import norms, phi as phi_mod, sampling

_TINY = 1e-300


@dataclass(frozen=True, eq=False)
class Leaf:
    norm: object  # NormSpec or norm-like callable with .dim

    @property
    def flat_dim(self) -> int:
        _, d = norms.resolve_norm(self.norm)
        return d

    @property
    def label(self) -> str:
        if isinstance(self.norm, norms.NormSpec):
            return f"leaf[{self.norm.family}:{self.flat_dim}]"
        return f"leaf[{getattr(self.norm, 'label', 'norm')}]"


@dataclass(frozen=True, eq=False)
class Product:
    children: tuple
    phi: object  # PhiSpec or callable with matching arity

    def __post_init__(self):
        if len(self.children) < 1:
            raise ValueError("a product needs at least one child")
        _, arity = phi_mod.resolve_phi(self.phi, len(self.children))
        if arity != len(self.children):
            raise ValueError("phi arity must match the number of children")

    @property
    def flat_dim(self) -> int:
        return sum(c.flat_dim for c in self.children)

    @property
    def offsets(self) -> tuple:
        out, acc = [], 0
        for c in self.children:
            out.append(acc)
            acc += c.flat_dim
        out.append(acc)
        return tuple(out)

    @property
    def label(self) -> str:
        inner = " x ".join(c.label for c in self.children)
        phi_label = self.phi.label if isinstance(self.phi, phi_mod.PhiSpec) else "phi"
        return f"product[{inner}; {phi_label}]"


def standard_product(children) -> Product:
    """Product combined through the square-sum functional."""
    children = tuple(children)
    if len(children) < 2:
        raise ValueError("standard_product needs at least two children")
    return Product(children, phi_mod.PhiSpec("p_combination", len(children), p=2.0))


def distance(space, x, y):
    """Metric of the space tree; batched over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != space.flat_dim or y.shape[-1] != space.flat_dim:
        raise ValueError("point dimension does not match the space")
    scalar = x.ndim == 1 and y.ndim == 1
    x, y = np.broadcast_arrays(x, y)
    out = _distance(space, x, y)
    return float(out) if scalar else out


def _distance(space, x, y):
    if isinstance(space, Leaf):
        fn, _ = norms.resolve_norm(space.norm)
        return fn(y - x)
    offs = space.offsets
    parts = [
        _distance(child, x[..., offs[i]: offs[i + 1]], y[..., offs[i]: offs[i + 1]])
        for i, child in enumerate(space.children)
    ]
    fn, _ = phi_mod.resolve_phi(space.phi, len(space.children))
    return fn(np.stack(parts, axis=-1))


@dataclass(frozen=True, eq=False)
class MetricAxiomReport:
    identity_ok: bool
    positivity_ok: bool
    symmetry_ok: bool
    triangle_ok: bool
    worst_violation: float
    witness: tuple | None

    @property
    def all_ok(self) -> bool:
        return (self.identity_ok and self.positivity_ok
                and self.symmetry_ok and self.triangle_ok)


def check_metric_axioms(space, sample_count: int = 10000, seed: int = 42,
                        tol: float = 1e-9) -> MetricAxiomReport:
    """Sampled metric axioms on random point triples."""
    d = space.flat_dim
    rng = sampling.substream(seed, sampling.KEY_METRIC_AXIOMS)
    x = sampling.mixed_scale_vectors(rng, sample_count, d)
    y = sampling.mixed_scale_vectors(rng, sample_count, d)
    z = sampling.mixed_scale_vectors(rng, sample_count, d)

    dxx = distance(space, x, x)
    dxy = distance(space, x, y)
    dyx = distance(space, y, x)
    dyz = distance(space, y, z)
    dxz = distance(space, x, z)

    ident = float(np.abs(dxx).max())
    sym = np.abs(dxy - dyx) / np.maximum(dxy, _TINY)
    tri = (dxz - dxy - dyz) / np.maximum(dxy + dyz, _TINY)
    gap = np.linalg.norm(y - x, axis=-1)
    ratio = dxy / np.maximum(gap, _TINY)
    med = float(np.median(ratio))
    pos = np.maximum(0.0, tol * med - ratio) / max(med, _TINY)

    checks = [
        ("identity", ident, 0),
        ("symmetry", float(sym.max()), int(sym.argmax())),
        ("triangle", float(tri.max()), int(tri.argmax())),
        ("positivity", float(pos.max()), int(pos.argmax())),
    ]
    flags = {name: viol <= tol for name, viol, _ in checks}
    worst = max(viol for name, viol, _ in checks)
    witness = None
    if not all(flags.values()):
        name, _, i = max((c for c in checks if not flags[c[0]]), key=lambda c: c[1])
        if name == "triangle":
            witness = (x[i].copy(), y[i].copy(), z[i].copy())
        elif name == "identity":
            witness = (x[int(np.abs(dxx).argmax())].copy(),)
        else:
            witness = (x[i].copy(), y[i].copy())
    return MetricAxiomReport(
        identity_ok=flags["identity"],
        positivity_ok=flags["positivity"],
        symmetry_ok=flags["symmetry"],
        triangle_ok=flags["triangle"],
        worst_violation=worst,
        witness=witness,
    )


# ---------------------------------------------------------------- curves


@dataclass(frozen=True, eq=False)
class PolygonalCurve:
    """Piecewise-linear curve through fixed vertices on [0, 1]."""

    vertices: np.ndarray
    params: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2:
            raise ValueError("need at least two vertices")
        object.__setattr__(self, "vertices", v)
        if self.params is None:
            t = np.linspace(0.0, 1.0, v.shape[0])
        else:
            t = np.asarray(self.params, dtype=float)
            if t.shape != (v.shape[0],):
                raise ValueError("one parameter per vertex")
            if t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) < 0.0):
                raise ValueError("parameters must ascend from 0 to 1")
        object.__setattr__(self, "params", t)

    @property
    def breakpoints(self) -> np.ndarray:
        return self.params

    def point(self, t) -> np.ndarray:
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        seg = np.clip(np.searchsorted(self.params, t, side="right") - 1,
                      0, len(self.params) - 2)
        t0, t1 = self.params[seg], self.params[seg + 1]
        width = np.maximum(t1 - t0, _TINY)
        frac = ((t - t0) / width)[..., None]
        return (1.0 - frac) * self.vertices[seg] + frac * self.vertices[seg + 1]

    def exact_length(self, space) -> float:
        return float(math.fsum(
            float(distance(space, a, b))
            for a, b in zip(self.vertices[:-1], self.vertices[1:])))


@dataclass(frozen=True, eq=False)
class Segment:
    """Constant-speed straight segment; arclength-parametrized in any norm."""

    start: np.ndarray
    end: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
        object.__setattr__(self, "end", np.asarray(self.end, dtype=float))

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([0.0, 1.0])

    def point(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)[..., None]
        return (1.0 - t) * self.start + t * self.end

    def exact_length(self, space) -> float:
        return float(distance(space, self.start, self.end))


@dataclass(frozen=True, eq=False)
class Circle:
    """Angle-parametrized circle in the plane of two orthonormal axes.

    Arclength-parametrized when the ambient leaf norm is euclidean on the
    circle's plane; exact_length is only available in that case.
    """

    center: np.ndarray
    radius: float
    axes: np.ndarray  # (2, dim), orthonormalized here

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        a = np.asarray(self.axes, dtype=float)
        if a.shape != (2, c.shape[0]):
            raise ValueError("axes must be two vectors matching the center")
        q, r = np.linalg.qr(a.T)
        if np.min(np.abs(np.diag(r))) < 1e-10:
            raise ValueError("degenerate circle axes")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "axes", q.T)
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([0.0, 1.0])

    def point(self, t) -> np.ndarray:
        ang = 2.0 * np.pi * np.asarray(t, dtype=float)[..., None]
        return (self.center + self.radius * np.cos(ang) * self.axes[0]
                + self.radius * np.sin(ang) * self.axes[1])

    def exact_length(self, space) -> float | None:
        if isinstance(space, Leaf) and isinstance(space.norm, norms.NormSpec) \
                and space.norm.family == "euclidean":
            return 2.0 * np.pi * self.radius
        return None


def _subdivision(curve, refinement: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, refinement + 1)
    breaks = getattr(curve, "breakpoints", None)
    if breaks is not None and len(breaks) > 2:
        t = np.unique(np.concatenate([t, np.asarray(breaks, dtype=float)]))
    return t


def curve_length(space, curve, refinement: int = 1024) -> float:
    """Chord-sum length at a uniform subdivision (merged with the curve's
    own breakpoints, so polygonal curves are measured exactly at any N)."""
    if refinement < 1:
        raise ValueError("refinement must be >= 1")
    t = _subdivision(curve, refinement)
    pts = curve.point(t)
    chords = distance(space, pts[:-1], pts[1:])
    return float(math.fsum(np.asarray(chords, dtype=float).tolist()))


class ParametrizationError(ValueError):
    """A component curve is not parametrized proportionally to arclength."""


class _CombinedCurve:
    def __init__(self, curves):
        self.curves = tuple(curves)

    def point(self, t):
        return np.concatenate([c.point(t) for c in self.curves], axis=-1)


def component_lengths(space: Product, curves, refinement: int = 10000) -> list:
    """Per-factor curve lengths, exact where a closed form exists."""
    out = []
    for child, curve in zip(space.children, curves):
        exact = getattr(curve, "exact_length", None)
        val = exact(child) if exact is not None else None
        if val is None:
            val = curve_length(child, curve, max(refinement, 1 << 14))
        out.append(float(val))
    return out


class ProductLengthResult(NamedTuple):
    l_n: float
    phi_of_lengths: float
    gap: float


def product_curve_length_check(space: Product, curves, refinement: int = 10000,
                               speed_tol: float = 1e-3) -> ProductLengthResult:
    """Compare the product curve's chord-sum length with Phi of the factor
    lengths.

    Every component must be parametrized proportionally to arclength; the
    check compares per-interval chord speeds against the component's total
    length and raises ParametrizationError beyond speed_tol relative.
    """
    if not isinstance(space, Product):
        raise TypeError("expected a Product space")
    curves = tuple(curves)
    if len(curves) != len(space.children):
        raise ValueError("one curve per product factor")
    lengths = component_lengths(space, curves, refinement)

    t = _subdivision(_CombinedCurve(curves), refinement)
    for c in curves:
        breaks = getattr(c, "breakpoints", None)
        if breaks is not None and len(breaks) > 2:
            t = np.unique(np.concatenate([t, np.asarray(breaks, dtype=float)]))
    dt = np.diff(t)
    for i, (child, curve, li) in enumerate(zip(space.children, curves, lengths)):
        pts = curve.point(t)
        chords = np.asarray(distance(child, pts[:-1], pts[1:]), dtype=float)
        if li <= 0.0:
            if np.any(chords > speed_tol):
                raise ParametrizationError(f"component {i} moves but has zero length")
            continue
        speeds = chords / np.maximum(dt, _TINY)
        dev = float(np.max(np.abs(speeds / li - 1.0)))
        if dev > speed_tol:
            raise ParametrizationError(
                f"component {i} chord speed deviates {dev:.3e} from "
                f"arclength parametrization (tol {speed_tol:.1e})")

    combined = _CombinedCurve(curves)
    pts = combined.point(t)
    chords = distance(space, pts[:-1], pts[1:])
    l_n = float(math.fsum(np.asarray(chords, dtype=float).tolist()))
    phi_l = float(phi_eval_lengths(space, lengths))
    return ProductLengthResult(l_n=l_n, phi_of_lengths=phi_l, gap=abs(phi_l - l_n))


def phi_eval_lengths(space: Product, lengths) -> float:
    fn, _ = phi_mod.resolve_phi(space.phi, len(space.children))
    return float(fn(np.asarray(lengths, dtype=float)))
