"""Norm families on R^d plus sampled certification of norm properties.

Evaluation is vectorized: every norm callable in this package accepts an
array whose last axis holds coordinates and returns an array with that
axis dropped (a plain float for 1-D input).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import sampling

FAMILIES = ("euclidean", "p_norm", "weighted_euclidean", "perturbed_spherical")

# Floor used to avoid 0/0 in relative violation ratios.
_TINY = 1e-300

# Angular window for midpoint convexity sampling.  Pairs closer than the
# floor carry no curvature information at float precision; pairs near pi
# are almost antipodal and their midpoint shrinks for every norm.
_ANGLE_FLOOR = 0.05
_ANGLE_CEIL = np.pi - 0.05


class KernelRankAmbiguityWarning(UserWarning):
    """Vanishing directions sit within an order of magnitude of tol."""


@dataclass(frozen=True)
class NormSpec:
    """Closed-form norm family on R^dim.

    family one of:
      euclidean            standard inner-product norm
      p_norm               (sum |x_i|^p)^(1/p), p >= 1
      weighted_euclidean   sqrt(sum w_i x_i^2), w_i > 0
      perturbed_spherical  the spherically perturbed pair on R^3; `variant`
                           selects profile 1 or 2 and `scale` the positive
                           integer damping denominator
    """

    family: str
    dim: int
    p: float | None = None
    weights: tuple[float, ...] | None = None
    variant: int = 1
    scale: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown norm family {self.family!r}")
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if self.family == "p_norm":
            if self.p is None or not np.isfinite(self.p) or self.p < 1.0:
                raise ValueError("p_norm requires p >= 1")
        if self.family == "weighted_euclidean":
            if self.weights is None or len(self.weights) != self.dim:
                raise ValueError("weighted_euclidean requires dim weights")
            if any(w <= 0 or not np.isfinite(w) for w in self.weights):
                raise ValueError("weights must be strictly positive")
        if self.family == "perturbed_spherical":
            if self.dim != 3:
                raise ValueError("perturbed_spherical lives on R^3")
            if self.variant not in (1, 2):
                raise ValueError("variant must be 1 or 2")
            if self.scale < 1:
                raise ValueError("scale must be a positive integer")

    @property
    def label(self) -> str:
        # semicolon-joined so the label is safe inside comma-separated tables
        parts = [f"dim={self.dim}"]
        if self.family == "p_norm":
            parts.append(f"p={self.p:g}")
        if self.family == "weighted_euclidean":
            parts.append("weights=" + "|".join(f"{w:g}" for w in self.weights))
        if self.family == "perturbed_spherical":
            parts.append(f"variant={self.variant}")
            parts.append(f"n={self.scale}")
        return f"{self.family}({';'.join(parts)})"


def _stable_lp(a: np.ndarray, p: float) -> np.ndarray:
    """(sum a_i^p)^(1/p) for a >= 0, scaled to avoid overflow."""
    m = np.max(a, axis=-1)
    out = np.zeros_like(m)
    nz = m > 0
    if np.any(nz):
        ratio = a[nz] / m[nz][..., None]
        out[nz] = m[nz] * np.power(np.sum(np.power(ratio, p), axis=-1), 1.0 / p)
    return out


def norm_eval(spec: NormSpec, v) -> float | np.ndarray:
    """Evaluate the norm at v; v may be a batch with coordinates last."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != spec.dim:
        raise ValueError(f"expected dim {spec.dim}, got {v.shape[-1]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite input")
    scalar = v.ndim == 1
    if spec.family == "euclidean":
        out = _stable_lp(np.abs(v), 2.0)
    elif spec.family == "p_norm":
        out = _stable_lp(np.abs(v), spec.p)
    elif spec.family == "weighted_euclidean":
        w = np.asarray(spec.weights, dtype=float)
        m = np.max(np.abs(v), axis=-1)
        safe = np.where(m > 0, m, 1.0)
        r = v / safe[..., None]
        out = safe * np.sqrt(np.sum(w * r * r, axis=-1))
        out = np.where(m > 0, out, 0.0)
    else:
        from . import counterexample

        r = _stable_lp(np.abs(v), 2.0)
        out = np.zeros_like(r)
        nz = r > 0
        if np.any(nz):
            u = v[nz] / r[nz][..., None]
            prof = counterexample.perturbation_profile(spec.variant, u, spec.scale)
            out[nz] = prof * r[nz]
    return float(out) if scalar else out


def resolve_norm(norm, dim: int | None = None):
    """Accept a NormSpec, a norm-like object with .dim, or (callable, dim).

    Returns (fn, dim) where fn maps (..., dim) arrays to (...) arrays.
    """
    if isinstance(norm, NormSpec):
        return (lambda x: norm_eval(norm, np.asarray(x, float))), norm.dim
    if isinstance(norm, tuple) and len(norm) == 2:
        fn, d = norm
        if not callable(fn):
            raise TypeError("expected (callable, dim)")
        return fn, int(d)
    d = getattr(norm, "dim", dim)
    if d is None:
        raise ValueError("callable norms need an explicit dim")
    if not callable(norm):
        raise TypeError(f"cannot interpret {type(norm).__name__} as a norm")
    return norm, int(d)


@dataclass(frozen=True, eq=False)
class NormAxiomReport:
    positivity_ok: bool
    homogeneity_ok: bool
    triangle_ok: bool
    symmetry_ok: bool
    worst_violation: float
    witness: tuple | None

    @property
    def all_ok(self) -> bool:
        return (self.positivity_ok and self.homogeneity_ok
                and self.triangle_ok and self.symmetry_ok)


def check_norm_axioms(norm, sample_count: int = 10000, seed: int = 42,
                      tol: float = 1e-9, dim: int | None = None) -> NormAxiomReport:
    """Sampled certification of the norm axioms.

    Checks |lam| homogeneity, the triangle inequality, symmetry under
    negation, and positivity/definiteness on seeded samples with mixed
    magnitudes, plus the basis vectors and the zero vector.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    fn, d = resolve_norm(norm, dim)
    rng = sampling.substream(seed, sampling.KEY_NORM_AXIOMS)
    u = sampling.mixed_scale_vectors(rng, sample_count, d)
    v = sampling.mixed_scale_vectors(rng, sample_count, d)
    # Structured rows: basis vectors exercise axis-aligned kinks.
    basis = np.eye(d)
    v[: d] = basis
    v[d: 2 * d] = -basis
    lam = rng.uniform(-3.0, 3.0, size=sample_count)
    lam[:5] = [0.0, 1.0, -1.0, 2.0, -0.5][:min(5, sample_count)]

    nu = fn(u)
    nv = fn(v)
    n_sum = fn(u + v)
    n_lam = fn(lam[:, None] * v)
    n_neg = fn(-v)

    hom = np.abs(n_lam - np.abs(lam) * nv)
    hom_den = np.maximum(np.maximum(np.abs(lam) * nv, n_lam), _TINY)
    hom_viol = hom / hom_den
    tri_viol = np.maximum(0.0, n_sum - nu - nv) / np.maximum(nu + nv, _TINY)
    sym_viol = np.abs(nv - n_neg) / np.maximum(nv, _TINY)

    e_mag = np.linalg.norm(v, axis=-1)
    ratio = nv / np.maximum(e_mag, _TINY)
    med = float(np.median(ratio))
    pos_viol = np.maximum(0.0, tol * med - ratio) / max(med, _TINY)
    zero_excess = abs(float(fn(np.zeros(d))))

    checks = [
        ("homogeneity", float(hom_viol.max()), int(hom_viol.argmax())),
        ("triangle", float(tri_viol.max()), int(tri_viol.argmax())),
        ("symmetry", float(sym_viol.max()), int(sym_viol.argmax())),
        ("positivity", max(float(pos_viol.max()), zero_excess), int(pos_viol.argmax())),
    ]
    flags = {name: viol <= tol for name, viol, _ in checks}
    worst = max(viol for _, viol, _ in checks)
    witness = None
    if not all(flags.values()):
        name, _, i = max((c for c in checks if not flags[c[0]]), key=lambda c: c[1])
        if name == "homogeneity":
            witness = (v[i].copy(), lam[i] * v[i])
        elif name == "triangle":
            witness = (u[i].copy(), v[i].copy())
        elif name == "symmetry":
            witness = (v[i].copy(), -v[i])
        else:
            witness = (v[i].copy(), v[i].copy())
    return NormAxiomReport(
        positivity_ok=flags["positivity"],
        homogeneity_ok=flags["homogeneity"],
        triangle_ok=flags["triangle"],
        symmetry_ok=flags["symmetry"],
        worst_violation=worst,
        witness=witness,
    )


def check_strict_convexity(norm, sample_count: int = 10000, seed: int = 42,
                           tol: float = 1e-6, dim: int | None = None):
    """Midpoint test for strict convexity of the unit ball.

    Samples pairs u, w of norm-unit vectors with angular separation inside
    a fixed window, computes the sagitta m = 1 - ||(u+w)/2|| and returns
    (min margin > tol, min margin) where margin = m / angle^2.  The square
    makes the euclidean margin angle-independent (about 1/8), flat faces
    give 0, and concave dents go negative.
    """
    fn, d = resolve_norm(norm, dim)
    if d == 1:
        # A 1-D unit sphere is two points; midpoint convexity is vacuous.
        return True, float("inf")
    rng = sampling.substream(seed, sampling.KEY_STRICT_CONVEXITY)
    x = rng.standard_normal((sample_count, d))
    g = rng.standard_normal((sample_count, d))
    sig = np.tile([0.1, 0.3, 1.0, 3.0], sample_count // 4 + 1)[:sample_count]
    w_raw = x + sig[:, None] * g
    quarter = sample_count // 4
    w_raw[:quarter] = rng.standard_normal((quarter, d))

    nx = fn(x)
    nw = fn(w_raw)
    good = (nx > 1e-12) & (nw > 1e-12)
    u = x[good] / nx[good][:, None]
    w = w_raw[good] / nw[good][:, None]
    ue = u / np.linalg.norm(u, axis=1, keepdims=True)
    we = w / np.linalg.norm(w, axis=1, keepdims=True)
    ang = np.arccos(np.clip(np.sum(ue * we, axis=1), -1.0, 1.0))
    window = (ang >= _ANGLE_FLOOR) & (ang <= _ANGLE_CEIL)
    if not np.any(window):
        raise ValueError("no sample pairs fell in the angular window")
    mid = 0.5 * (u[window] + w[window])
    margin = (1.0 - fn(mid)) / ang[window] ** 2
    m = float(margin.min())
    return m > tol, m


def check_parallelogram(norm, sample_count: int = 10000, seed: int = 42,
                        tol: float = 1e-9, dim: int | None = None):
    """Sampled parallelogram law; true iff the norm comes from a scalar product."""
    fn, d = resolve_norm(norm, dim)
    rng = sampling.substream(seed, sampling.KEY_PARALLELOGRAM)
    x = sampling.mixed_scale_vectors(rng, sample_count, d)
    y = sampling.mixed_scale_vectors(rng, sample_count, d)
    x[: d] = np.eye(d)
    y[: d] = np.eye(d)[::-1]
    lhs = fn(x + y) ** 2 + fn(x - y) ** 2
    rhs = 2.0 * (fn(x) ** 2 + fn(y) ** 2)
    viol = np.abs(lhs - rhs) / np.maximum(rhs, _TINY)
    worst = float(viol.max())
    return worst <= tol, worst


@dataclass(frozen=True, eq=False)
class Pseudonorm:
    """Nonnegative 1-homogeneous functional, allowed to vanish on a subspace.

    base is either a NormSpec, an (directions, values) table pair with
    nearest-direction 1-homogeneous extension, or an arbitrary callable.
    """

    base: object
    dim: int
    kernel: tuple = ()
    label: str = "pseudonorm"
    _fn: object = field(default=None, repr=False)

    @classmethod
    def from_norm_spec(cls, spec: NormSpec) -> "Pseudonorm":
        fn, d = resolve_norm(spec)
        return cls(base=spec, dim=d, label=f"{spec.family}:{d}",
                   _fn=fn)

    @classmethod
    def from_callable(cls, fn, dim: int, label: str = "pseudonorm") -> "Pseudonorm":
        return cls(base=fn, dim=dim, label=label, _fn=fn)

    @classmethod
    def from_table(cls, directions, values, label: str = "table") -> "Pseudonorm":
        """Direction table with antipodally symmetric nearest-direction lookup."""
        dirs = np.asarray(directions, dtype=float)
        vals = np.asarray(values, dtype=float)
        if dirs.ndim != 2 or dirs.shape[0] != vals.shape[0]:
            raise ValueError("directions and values must align")
        dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)

        def fn(x):
            x = np.asarray(x, dtype=float)
            scalar = x.ndim == 1
            x2 = np.atleast_2d(x)
            r = np.linalg.norm(x2, axis=-1)
            out = np.zeros_like(r)
            nz = r > 0
            if np.any(nz):
                u = x2[nz] / r[nz][:, None]
                # antipodal fold: the table value at -u equals the value at u
                idx = np.argmax(np.abs(u @ dirs.T), axis=1)
                out[nz] = vals[idx] * r[nz]
            return float(out[0]) if scalar else out.reshape(x.shape[:-1])

        return cls(base=(dirs, vals), dim=dirs.shape[1], label=label, _fn=fn)

    @property
    def is_table(self) -> bool:
        return isinstance(self.base, tuple)

    def __call__(self, x):
        return self._fn(np.asarray(x, dtype=float))


def _orthonormal_complement(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(q columns) minus the direction v."""
    h = q - np.outer(v, v @ q)
    u, s, _ = np.linalg.svd(h, full_matrices=False)
    keep = s > 1e-10 * max(s[0], 1e-30)
    return u[:, keep]


def _minimize_on_sphere(fn, q: np.ndarray, y0: np.ndarray):
    """Minimize fn(q @ y / |y|) over unit y by Nelder-Mead."""
    def obj(y):
        r = np.linalg.norm(y)
        if r < 1e-12:
            return 1e6
        return float(fn(q @ (y / r)))

    res = optimize.minimize(obj, y0, method="Nelder-Mead",
                            options={"xatol": 1e-13, "fatol": 1e-15,
                                     "maxiter": 800, "maxfev": 1600})
    y = res.x / np.linalg.norm(res.x)
    return float(obj(res.x)), q @ y


def kernel_basis(p, tol: float = 1e-9) -> list:
    """Maximal independent set of directions on which p vanishes within tol.

    Empty for a true norm.  Vanishing is judged relative to the largest
    sampled value; when near-vanishing directions sit within a factor 10
    of the threshold a KernelRankAmbiguityWarning is emitted.
    """
    if isinstance(p, Pseudonorm) and p.is_table:
        dirs, vals = p.base
        scale = float(np.abs(vals).max()) if vals.size else 0.0
        if scale <= 1e-13:
            return [np.eye(p.dim)[i] for i in range(p.dim)]
        mask = vals <= tol * scale
        fuzzy = (~mask) & (vals <= 10 * tol * scale)
        if np.any(fuzzy):
            warnings.warn("directions within 10x tol of the kernel threshold",
                          KernelRankAmbiguityWarning)
        if not np.any(mask):
            return []
        k = dirs[mask]
        _, s, vt = np.linalg.svd(k, full_matrices=False)
        rank = int(np.sum(s > 1e-8 * s[0]))
        return [vt[i] for i in range(rank)]

    fn, d = resolve_norm(p) if not isinstance(p, Pseudonorm) else (p, p.dim)
    rng = sampling.substream(0, sampling.KEY_KERNEL)
    probes = np.vstack([np.eye(d), -np.eye(d),
                        sampling.unit_vectors(rng, 256, d)])
    scale = float(np.max(fn(probes)))
    if scale <= 1e-13:
        return [np.eye(d)[i] for i in range(d)]

    kernel: list = []
    q = np.eye(d)
    while q.shape[1] > 0:
        sub_dim = q.shape[1]
        cand = np.vstack([np.eye(sub_dim), -np.eye(sub_dim),
                          sampling.unit_vectors(rng, 128, sub_dim)])
        vals = fn((q @ cand.T).T)
        order = np.argsort(vals)
        best_val, best_vec = np.inf, None
        for i in order[:4]:
            if sub_dim == 1:
                val, vec = float(vals[i]), q[:, 0] * cand[i, 0]
            else:
                val, vec = _minimize_on_sphere(fn, q, cand[i])
            if val < best_val:
                best_val, best_vec = val, vec
        if best_val <= tol * scale:
            best_vec = best_vec / np.linalg.norm(best_vec)
            kernel.append(best_vec)
            if sub_dim == 1:
                break
            q = _orthonormal_complement(q, best_vec)
        else:
            if best_val <= 10 * tol * scale:
                warnings.warn("minimum within 10x tol of the kernel threshold",
                              KernelRankAmbiguityWarning)
            break
    return kernel
