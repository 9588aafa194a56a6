"""Spherically perturbed norm pair on R^3.

The construction perturbs the euclidean norm by a product of two copies of
a fixed trigonometric profile.  The first copy depends on the colatitude
Theta measured from the z-axis (its null set is four circles parallel to
the equator gamma), the second copy is the same profile read off after a
quarter-turn frame change (its null set is four circles parallel to the
great circle delta in the x-z plane).  Profile 1 is

    1 + eps_tilde(Theta) * eps_hat(u)

and profile 2 is sqrt(2 - profile_1^2), so the two squared profiles sum
to 2 at every point of the sphere.  Both profiles equal 1 exactly on the
union of the eight null circles.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import sampling

# Colatitudes of the four null circles of eps_tilde.
NULL_COLATITUDES = (np.pi / 4, 3 * np.pi / 8, 5 * np.pi / 8, 3 * np.pi / 4)

# Largest value of |eps_tilde| at n=1, attained at Theta in {0, pi}:
# sin^2(pi/4) * sin^2(3*pi/8) = (2 + sqrt(2)) / 8.
MAX_PERTURBATION = (2.0 + np.sqrt(2.0)) / 8.0

# Rotation taking the equator gamma (z = 0) to the orthogonal great
# circle delta (y = 0): (x, y, z) -> (x, -z, y).  The two circles meet
# at (+-1, 0, 0), which the rotation fixes.
GAMMA_TO_DELTA = np.array([[1.0, 0.0, 0.0],
                           [0.0, 0.0, -1.0],
                           [0.0, 1.0, 0.0]])

NULL_CIRCLE_LABELS = tuple(
    (family, theta)
    for family in ("gamma", "delta")
    for theta in NULL_COLATITUDES
)


class SearchExhausted(RuntimeError):
    """choose_n ran out of grid values; carries the per-n history."""

    def __init__(self, largest_n: int, history: tuple):
        super().__init__(f"no damping value up to n={largest_n} passed "
                         "axioms and strict convexity")
        self.largest_n = largest_n
        self.history = history


class ZeroResolutionWarning(UserWarning):
    """Two zeros may share one sample interval; local refinement was used."""


def epsilon_tilde(theta, n: int = 1):
    """Perturbation profile as a function of colatitude.

    (1/n) * prod_{k=2,3} sin(theta + k pi/8) sin(theta + (8-k) pi/8),
    vanishing exactly at the four NULL_COLATITUDES and symmetric under
    theta -> pi - theta, which is what antipodal symmetry needs.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < -1e-12) or np.any(theta > np.pi + 1e-12):
        raise ValueError("colatitude must lie in [0, pi]")
    if n < 1:
        raise ValueError("n must be a positive integer")
    theta = np.clip(theta, 0.0, np.pi)
    out = np.ones_like(theta)
    for k in (2, 3):
        out = out * np.sin(theta + k * np.pi / 8) * np.sin(theta + (8 - k) * np.pi / 8)
    out = out / n
    return float(out) if out.ndim == 0 else out


def colatitude(u) -> np.ndarray:
    """Angle from the north pole for unit vectors (coordinates last)."""
    u = np.asarray(u, dtype=float)
    return np.arccos(np.clip(u[..., 2], -1.0, 1.0))


def _require_unit(u: np.ndarray):
    r = np.linalg.norm(u, axis=-1)
    if np.any(np.abs(r - 1.0) > 1e-9):
        raise ValueError("expected unit vectors")


def epsilon_hat(u, n: int = 1, frame: np.ndarray = GAMMA_TO_DELTA):
    """The profile of epsilon_tilde with null circles parallel to delta.

    Evaluates epsilon_tilde at the colatitude of the rotated point
    frame^{-1}(u); with the default frame that colatitude is arccos(-u_y).
    """
    u = np.asarray(u, dtype=float)
    _require_unit(u)
    rotated = u @ frame
    return epsilon_tilde(colatitude(rotated), n)


def phi1(u, n: int = 1, frame: np.ndarray = GAMMA_TO_DELTA):
    """First radial profile, 1 + eps_tilde * eps_hat; antipodally symmetric."""
    u = np.asarray(u, dtype=float)
    _require_unit(u)
    return 1.0 + epsilon_tilde(colatitude(u), n) * epsilon_hat(u, n, frame)


def phi2(u, n: int = 1, frame: np.ndarray = GAMMA_TO_DELTA):
    """Second radial profile, sqrt(2 - phi1^2)."""
    p1 = phi1(u, n, frame)
    rad = 2.0 - np.asarray(p1) ** 2
    if np.any(rad <= 0.0):
        raise ArithmeticError("2 - phi1^2 must stay positive; "
                              "perturbation amplitude out of range")
    out = np.sqrt(rad)
    return float(out) if out.ndim == 0 else out


def perturbation_profile(variant: int, u, n: int = 1):
    if variant == 1:
        return phi1(u, n)
    if variant == 2:
        return phi2(u, n)
    raise ValueError("variant must be 1 or 2")


@dataclass(frozen=True, eq=False)
class SphericalPerturbation:
    """Bundles the damping denominator with the frame taking gamma to delta."""

    n: int = 1
    axis_frame: np.ndarray = field(default_factory=lambda: GAMMA_TO_DELTA.copy())

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        f = np.asarray(self.axis_frame, dtype=float)
        if f.shape != (3, 3) or not np.allclose(f @ f.T, np.eye(3), atol=1e-12):
            raise ValueError("axis_frame must be a 3x3 rotation")
        # Amplitude bound guarantees 2 - phi1^2 > 0 for every n >= 1.
        if (1.0 + MAX_PERTURBATION ** 2 / self.n ** 2) ** 2 >= 2.0:
            raise ValueError("perturbation amplitude violates 2 - phi1^2 > 0")

    def phi1(self, u):
        return phi1(u, self.n, np.asarray(self.axis_frame, dtype=float))

    def phi2(self, u):
        return phi2(u, self.n, np.asarray(self.axis_frame, dtype=float))


def perturbed_pair(n: int):
    """NormSpec pair (variant 1, variant 2) at damping n."""
    from .norms import NormSpec

    return (NormSpec("perturbed_spherical", 3, variant=1, scale=n),
            NormSpec("perturbed_spherical", 3, variant=2, scale=n))


@dataclass(frozen=True)
class ChooseNEntry:
    n: int
    axioms_ok: bool
    margin1: float
    margin2: float
    convex1: bool
    convex2: bool

    @property
    def ok(self) -> bool:
        return self.axioms_ok and self.convex1 and self.convex2


@dataclass(frozen=True)
class ChooseNResult:
    n: int
    history: tuple


def choose_n(n_grid=None, sample_count: int = 10000, seed: int = 42,
             tol: float = 1e-6) -> ChooseNResult:
    """Smallest grid n for which both perturbed norms pass axioms and
    strict convexity with margin above tol.

    The perturbation amplitude scales like 1/n^2, so the default grid is
    geometric: 1, 2, 4, ..., 2^20.
    """
    from . import norms

    if n_grid is None:
        n_grid = tuple(2 ** j for j in range(21))
    history = []
    for n in n_grid:
        spec1, spec2 = perturbed_pair(n)
        ax1 = norms.check_norm_axioms(spec1, sample_count, seed=seed)
        ax2 = norms.check_norm_axioms(spec2, sample_count, seed=seed)
        convex1, m1 = norms.check_strict_convexity(spec1, sample_count,
                                                   seed=seed, tol=tol)
        convex2, m2 = norms.check_strict_convexity(spec2, sample_count,
                                                   seed=seed, tol=tol)
        entry = ChooseNEntry(n=n, axioms_ok=ax1.all_ok and ax2.all_ok,
                             margin1=m1, margin2=m2,
                             convex1=convex1, convex2=convex2)
        history.append(entry)
        if entry.ok:
            return ChooseNResult(n=n, history=tuple(history))
    raise SearchExhausted(max(n_grid, default=0), tuple(history))


def verify_diagonal_euclidean(n: int, sample_count: int = 10000,
                              seed: int = 42) -> float:
    """Worst relative error of ||v||_1^2 + ||v||_2^2 against 2 ||v||_e^2."""
    from . import norms

    spec1, spec2 = perturbed_pair(n)
    rng = sampling.substream(seed, sampling.KEY_DIAGONAL)
    v = sampling.mixed_scale_vectors(rng, sample_count, 3)
    v[:3] = np.eye(3)
    v[3] = 0.0
    lhs = norms.norm_eval(spec1, v) ** 2 + norms.norm_eval(spec2, v) ** 2
    rhs = 2.0 * np.sum(v * v, axis=-1)
    err = np.abs(lhs - rhs) / np.maximum(rhs, 1e-300)
    return float(err.max())


def null_circle_points(count: int = 256) -> np.ndarray:
    """(8, count, 3) unit points on the null circles, gamma family first.

    Ordering matches NULL_CIRCLE_LABELS.
    """
    t = np.linspace(0.0, 2 * np.pi, count, endpoint=False)
    circles = []
    for theta in NULL_COLATITUDES:
        s, c = np.sin(theta), np.cos(theta)
        circles.append(np.stack([s * np.cos(t), s * np.sin(t),
                                 np.full_like(t, c)], axis=-1))
    for theta in NULL_COLATITUDES:
        s, c = np.sin(theta), np.cos(theta)
        base = np.stack([s * np.cos(t), s * np.sin(t),
                         np.full_like(t, c)], axis=-1)
        circles.append(base @ GAMMA_TO_DELTA.T)
    return np.stack(circles)


def _null_product(points: np.ndarray) -> np.ndarray:
    return epsilon_tilde(colatitude(points), 1) * epsilon_hat(points, 1)


def _refined_crossings(f, lo: float, hi: float, depth: int = 256) -> int:
    alphas = np.linspace(lo, hi, depth)
    vals = f(alphas)
    scale = np.max(np.abs(vals))
    if scale == 0.0:
        return 1
    zero = np.abs(vals) <= 1e-13 * scale
    signs = np.sign(vals)
    signs[zero] = 0.0
    count = 0
    prev = None
    for s in signs:
        if s == 0.0:
            if prev != 0.0:
                count += 1
            prev = 0.0
        else:
            if prev not in (None, 0.0, s):
                count += 1
            prev = s
    return count


def great_circle_null_intersections(basis, resolution: int = 2048) -> int:
    """Count zeros of eps_tilde * eps_hat along a great circle.

    basis is a pair of vectors spanning the circle's plane (orthonormalized
    here).  Zeros are counted from sign changes of the sampled restriction
    (each bracket proves a zero by continuity), with local grid refinement
    wherever |f| dips without a sign change, which would hide a zero pair.
    """
    if resolution < 1000:
        raise ValueError("resolution must be at least 1000")
    b = np.asarray(basis, dtype=float)
    if b.shape != (2, 3):
        raise ValueError("basis must be two vectors in R^3")
    q, r = np.linalg.qr(b.T)
    if np.min(np.abs(np.diag(r))) < 1e-10:
        raise ValueError("degenerate basis")
    b1, b2 = q[:, 0], q[:, 1]

    def f(alpha):
        alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        pts = np.outer(np.cos(alpha), b1) + np.outer(np.sin(alpha), b2)
        return _null_product(pts)

    alphas = np.linspace(0.0, 2 * np.pi, resolution, endpoint=False)
    vals = f(alphas)
    scale = float(np.max(np.abs(vals)))
    if scale == 0.0:
        raise ArithmeticError("restriction vanished identically; no great "
                              "circle lies inside the null set")
    zero = np.abs(vals) <= 1e-13 * scale
    signs = np.sign(vals)
    signs[zero] = 0.0

    # Compress the circular sample sequence into runs of constant sign.
    change = np.flatnonzero(signs != np.roll(signs, 1))
    if change.size == 0:
        # Single run of one sign and no zeros: nothing to count.
        return 0
    run_signs = signs[change]
    count = 0
    n_runs = run_signs.size
    for i in range(n_runs):
        s_here = run_signs[i]
        s_next = run_signs[(i + 1) % n_runs]
        if s_here == 0.0:
            count += 1
        elif s_next not in (0.0, s_here):
            # Transversal crossing inside one sample interval.
            count += 1

    # Dips toward zero without a sign change can hide an even number of
    # zeros between neighboring samples; refine those windows.
    interior = (~zero) & (np.abs(vals) < 0.01 * scale)
    refined = False
    for j in np.flatnonzero(interior):
        left = (j - 1) % resolution
        right = (j + 1) % resolution
        if np.abs(vals[left]) >= np.abs(vals[j]) and \
                np.abs(vals[right]) >= np.abs(vals[j]) and \
                signs[left] == signs[j] == signs[right]:
            lo = alphas[left]
            extra = _refined_crossings(f, lo, lo + 4 * np.pi / resolution)
            if extra:
                refined = True
                count += extra
    if refined:
        warnings.warn("sample interval held more than one zero; counted "
                      "after local refinement", ZeroResolutionWarning)
    return count
