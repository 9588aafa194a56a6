"""Ellipse-section certificates and numerical rank probes.

A strictly convex norm admits an isometric euclidean plane only if some
central plane section of its unit ball is an ellipse, and an ellipse is
pinned down by any 5 of its points.  Fitting a conic to 5 section points
and measuring the algebraic residual on the rest therefore gives a sharp,
calibrated obstruction test.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import norms, phi as phi_mod, sampling, spaces

_TINY = 1e-300


class DegenerateConicError(ValueError):
    """The five fitting points do not determine a conic; resample."""


@dataclass(frozen=True, eq=False)
class PlaneSection:
    """Unit-ball boundary trace in a central 2-plane."""

    basis: np.ndarray   # (2, dim) orthonormal
    angles: np.ndarray  # (m,) strictly increasing in [0, 2pi)
    radii: np.ndarray   # (m,) positive

    @property
    def planar_points(self) -> np.ndarray:
        return self.radii[:, None] * np.stack(
            [np.cos(self.angles), np.sin(self.angles)], axis=-1)

    @property
    def ambient_points(self) -> np.ndarray:
        dirs = (np.cos(self.angles)[:, None] * self.basis[0]
                + np.sin(self.angles)[:, None] * self.basis[1])
        return self.radii[:, None] * dirs


def _orthonormal_plane(basis) -> np.ndarray:
    b = np.asarray(basis, dtype=float)
    if b.ndim != 2 or b.shape[0] != 2:
        raise ValueError("basis must be two spanning vectors")
    q, r = np.linalg.qr(b.T)
    if np.min(np.abs(np.diag(r))) < 1e-10:
        raise ValueError("degenerate basis")
    return q.T


def unit_ball_section(norm, basis, m: int = 64) -> PlaneSection:
    """Boundary points of the unit ball in the plane of `basis`.

    The radial solve is exact: by homogeneity the boundary along the unit
    direction u is u / ||u||.
    """
    if m < 16:
        raise ValueError("need at least 16 section points")
    fn, d = norms.resolve_norm(norm)
    b = _orthonormal_plane(basis)
    if b.shape[1] != d:
        raise ValueError("basis dimension does not match the norm")
    angles = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
    dirs = np.cos(angles)[:, None] * b[0] + np.sin(angles)[:, None] * b[1]
    vals = fn(dirs)
    if np.any(vals <= 0.0):
        raise ValueError("norm vanished on a section direction")
    return PlaneSection(basis=b, angles=angles, radii=1.0 / vals)


@dataclass(frozen=True)
class Conic:
    """Ax^2 + Bxy + Cy^2 + Dx + Ey + F = 0 with unit coefficient vector."""

    coefficients: tuple

    @property
    def is_ellipse(self) -> bool:
        a, b, c = self.coefficients[:3]
        return b * b - 4.0 * a * c < 0.0

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        a, b, c, d, e, f = self.coefficients
        return a * x * x + b * x * y + c * y * y + d * x + e * y + f


def _design_rows(points: np.ndarray) -> np.ndarray:
    x, y = points[:, 0], points[:, 1]
    return np.stack([x * x, x * y, y * y, x, y, np.ones_like(x)], axis=-1)


def fit_conic(points):
    """Exact conic through the first 5 points, residual on the rest.

    Returns (Conic, residual) where residual is the max algebraic value of
    the held-out points under the unit-normalized coefficients.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 5 or pts.shape[1] != 2:
        raise ValueError("need at least 5 plane points")
    d5 = _design_rows(pts[:5])
    _, s, vt = np.linalg.svd(d5)
    if s[4] < 1e-10 * s[0]:
        raise DegenerateConicError("first 5 points do not determine a conic")
    coeff = vt[-1]
    coeff = coeff / np.linalg.norm(coeff)
    pivot = int(np.argmax(np.abs(coeff)))
    if coeff[pivot] < 0:
        coeff = -coeff
    conic = Conic(coefficients=tuple(float(c) for c in coeff))
    rest = pts[5:]
    residual = float(np.max(np.abs(conic.evaluate(rest)))) if len(rest) else 0.0
    return conic, residual


def section_is_ellipse(norm, plane, m: int = 64, tol: float = 1e-9):
    """Fit 5 spread section points, judge the held-out residual.

    Returns (bool, residual): true iff the fitted conic classifies as an
    ellipse and every remaining section point lies on it within tol.
    """
    section = unit_ball_section(norm, plane, m)
    pts = section.planar_points
    for shift in range(5):
        pick = (np.arange(5) * (m // 5) + shift) % m
        rest = np.setdiff1d(np.arange(m), pick)
        try:
            conic, _ = fit_conic(np.vstack([pts[pick], pts[rest]]))
        except DegenerateConicError:
            continue
        residual = float(np.max(np.abs(conic.evaluate(pts[rest]))))
        return (conic.is_ellipse and residual <= tol), residual
    raise DegenerateConicError("all fitting subsets were degenerate")


@dataclass(frozen=True, eq=False)
class ObstructionReport:
    """Ellipse-sweep summary for one norm against the euclidean baseline."""

    plane_count: int
    fraction_not_ellipse: float
    residuals: tuple
    baseline_residuals: tuple
    threshold: float

    @property
    def min_residual(self) -> float:
        return min(self.residuals)

    @property
    def baseline_max(self) -> float:
        return max(self.baseline_residuals)

    @property
    def certifies_obstruction(self) -> bool:
        return self.fraction_not_ellipse == 1.0


def euclidean_flat_obstruction(norm, plane_count: int = 100, seed: int = 42,
                               tol: float | None = None, m: int = 64) -> ObstructionReport:
    """Sweep random central 2-planes and compare section residuals against
    the euclidean baseline at the same sampling density.

    A section counts as an ellipse only when its conic residual stays at
    the baseline scale; the cutoff is 100x the worst baseline residual
    (or the explicit tol).  fraction_not_ellipse == 1 certifies, at the
    sampled resolution, that no central isometric euclidean plane exists.
    """
    fn, d = norms.resolve_norm(norm)
    if d < 2:
        raise ValueError("need dimension >= 2")
    rng = sampling.substream(seed, sampling.KEY_OBSTRUCTION)
    planes = []
    for _ in range(plane_count):
        q, _ = np.linalg.qr(rng.standard_normal((d, 2)))
        planes.append(q.T)
    reference = norms.NormSpec("euclidean", d)
    baseline = tuple(section_is_ellipse(reference, pl, m, tol=np.inf)[1]
                     for pl in planes)
    threshold = tol if tol is not None else max(100.0 * max(baseline), 1e-13)
    residuals = []
    not_ellipse = 0
    for pl in planes:
        ok, res = section_is_ellipse(norm, pl, m, tol=threshold)
        residuals.append(res)
        not_ellipse += 0 if ok else 1
    return ObstructionReport(
        plane_count=plane_count,
        fraction_not_ellipse=not_ellipse / plane_count,
        residuals=tuple(residuals),
        baseline_residuals=baseline,
        threshold=float(threshold),
    )


# ------------------------------------------------------- distortion probe


@dataclass(frozen=True, eq=False)
class DistortionResult:
    distortion: float
    converged: bool
    per_restart: tuple
    k: int
    grid_side: int


def _source_lattice(k: int, grid_side: int) -> np.ndarray:
    axes = [np.arange(grid_side, dtype=float)] * k
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
    return pts - pts.mean(axis=0)


def _analytic_init(space, k: int):
    """Linear map whose image is expected isometric, when one is known."""
    if isinstance(space, spaces.Leaf):
        norm = space.norm
        d = space.flat_dim
        if k == 1:
            fn, _ = norms.resolve_norm(norm)
            col = np.zeros(d)
            col[0] = 1.0
            return (col / float(fn(col)))[:, None]
        if isinstance(norm, norms.NormSpec) and k <= d:
            if norm.family == "euclidean" or \
                    (norm.family == "p_norm" and norm.p == 2.0):
                return np.eye(d)[:, :k]
            if norm.family == "weighted_euclidean":
                cols = np.eye(d)[:, :k] / np.sqrt(np.asarray(norm.weights))[:, None]
                return cols[:, :k]
        return None
    if not isinstance(space, spaces.Product):
        return None
    phi = space.phi
    std = isinstance(phi, phi_mod.PhiSpec) and phi.family == "p_combination" \
        and phi.p == 2.0
    if not std:
        return None
    children = space.children
    # one source coordinate per 1-D child: the product is euclidean space
    if k <= len(children) and all(isinstance(c, spaces.Leaf) and c.flat_dim == 1
                                  for c in children):
        cols = []
        for i, child in enumerate(children[:k]):
            fn, _ = norms.resolve_norm(child.norm)
            unit = 1.0 / float(fn(np.ones(1)))
            col = np.zeros(space.flat_dim)
            col[i] = unit
            cols.append(col)
        return np.stack(cols, axis=-1)
    # diagonal into the perturbed pair: (v, v)/sqrt(2) is isometric from E^3,
    # and so is its restriction to any coordinate subspace
    if k <= 3 and len(children) == 2 and all(
            isinstance(c, spaces.Leaf) and isinstance(c.norm, norms.NormSpec)
            and c.norm.family == "perturbed_spherical" for c in children):
        n1, n2 = (c.norm for c in children)
        if {n1.variant, n2.variant} == {1, 2} and n1.scale == n2.scale:
            block = np.eye(3)[:, :k] / np.sqrt(2.0)
            return np.vstack([block, block])
    return None


def _pair_metrics(space, x: np.ndarray, iu: np.ndarray, ju: np.ndarray) -> np.ndarray:
    return np.asarray(spaces.distance(space, x[iu], x[ju]), dtype=float)


def distortion_probe(space, k: int, grid_side: int = 3, restarts: int = 4,
                     seed: int = 42, tol: float = 1e-9,
                     max_sweeps: int = 60) -> DistortionResult:
    """Best found max ratio-distortion of a euclidean lattice into `space`.

    Local coordinate search from an analytic initialization (when one
    exists) plus seeded random restarts.  The result is a lower-bound
    probe: distortion near 1 is evidence for an isometric copy, a large
    value proves nothing.
    """
    if k < 1 or grid_side < 3:
        raise ValueError("need k >= 1 and grid_side >= 3")
    src = _source_lattice(k, grid_side)
    npts, flat = len(src), space.flat_dim
    iu, ju = np.triu_indices(npts, 1)
    sdist = np.linalg.norm(src[iu] - src[ju], axis=-1)
    rng = sampling.substream(seed, sampling.KEY_DISTORTION)

    def objective(x):
        d = _pair_metrics(space, x, iu, ju)
        r = np.maximum(d / sdist, sdist / np.maximum(d, _TINY))
        return float(r.max())

    inits = []
    analytic = _analytic_init(space, k)
    if analytic is not None:
        inits.append(src @ analytic.T)
    for _ in range(restarts):
        m = rng.standard_normal((flat, k))
        x0 = src @ m.T
        d0 = _pair_metrics(space, x0, iu, ju)
        med = float(np.median(d0))
        if med > 0:
            x0 = x0 * (float(np.median(sdist)) / med)
        inits.append(x0 + 0.01 * rng.standard_normal(x0.shape))

    per_restart = []
    best = np.inf
    converged = False
    for x0 in inits:
        x = x0.copy()
        val = objective(x)
        step = 0.25
        run_converged = val <= 1.0 + tol
        for _ in range(max_sweeps):
            if val <= 1.0 + tol:
                run_converged = True
                break
            improved = False
            for p in range(npts):
                for c in range(flat):
                    base = x[p, c]
                    for cand in (base - step, base + step):
                        x[p, c] = cand
                        v = objective(x)
                        if v < val - 1e-15:
                            val, base, improved = v, cand, True
                    x[p, c] = base
            if not improved:
                step *= 0.5
                if step < 1e-10:
                    run_converged = True
                    break
        per_restart.append(val)
        if val < best:
            best = val
        converged = converged or run_converged
        if best <= 1.0 + tol:
            break
    return DistortionResult(distortion=float(best), converged=converged,
                            per_restart=tuple(per_restart), k=k,
                            grid_side=grid_side)


def minkowski_superadditive_embed(norm1, norm2, sample_count: int = 10000,
                                  seed: int = 42):
    """Combined square-sum norm on the direct sum, with the sampled
    residual of the inclusion into the standard product (identically 0 by
    construction; verified anyway)."""
    fn1, d1 = norms.resolve_norm(norm1)
    fn2, d2 = norms.resolve_norm(norm2)
    prod = spaces.standard_product([spaces.Leaf(norm1), spaces.Leaf(norm2)])

    def combined_fn(z):
        z = np.asarray(z, dtype=float)
        scalar = z.ndim == 1
        z2 = np.atleast_2d(z)
        out = spaces.distance(prod, np.zeros_like(z2), z2)
        out = np.asarray(out, dtype=float)
        return float(out[0]) if scalar else out.reshape(z.shape[:-1])

    combined = norms.Pseudonorm.from_callable(
        combined_fn, d1 + d2, label=f"combined[{d1}+{d2}]")
    rng = sampling.substream(seed, sampling.KEY_SUPERADDITIVE)
    z = sampling.mixed_scale_vectors(rng, sample_count, d1 + d2)
    w = sampling.mixed_scale_vectors(rng, sample_count, d1 + d2)
    lhs = combined(z - w)
    rhs = spaces.distance(prod, w, z)
    residual = float(np.max(np.abs(lhs - rhs)))
    return combined, residual
