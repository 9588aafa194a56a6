"""Combining functionals on the nonnegative quadrant Q^n.

A functional Phi turns a tuple of factor distances into a product
distance.  The validators here certify, by seeded sampling plus an
exhaustive small-grid check, the conditions under which the product is a
metric (A and B), a norm-induced metric (1-4), and a euclidean-compatible
one (5).  Condition B quantifies over distance triples, i.e. triples
satisfying the componentwise triangle system |q^k - q^l| <= q^j <=
q^k + q^l for every role assignment; samples are drawn so the whole
system holds by construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import norms, sampling

PHI_FAMILIES = ("p_combination", "weighted_euclidean",
                "max_combination", "l1_combination")

_TINY = 1e-300
_GRID_POINTS = 20
_GRID_SPAN = 2.0


@dataclass(frozen=True)
class PhiSpec:
    """Closed-form combining functional of fixed arity."""

    family: str
    arity: int
    p: float | None = None
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.family not in PHI_FAMILIES:
            raise ValueError(f"unknown phi family {self.family!r}")
        if self.arity < 1:
            raise ValueError("arity must be a positive integer")
        if self.family == "p_combination":
            if self.p is None or not np.isfinite(self.p) or self.p < 1.0:
                raise ValueError("p_combination requires p >= 1")
        if self.family == "weighted_euclidean":
            if self.weights is None or len(self.weights) != self.arity:
                raise ValueError("weighted_euclidean requires arity weights")
            if any(w <= 0 or not np.isfinite(w) for w in self.weights):
                raise ValueError("weights must be strictly positive")

    @property
    def label(self) -> str:
        if self.family == "p_combination":
            return f"p_combination(p={self.p:g},arity={self.arity})"
        if self.family == "weighted_euclidean":
            ws = ",".join(f"{w:g}" for w in self.weights)
            return f"weighted_euclidean(weights=[{ws}],arity={self.arity})"
        return f"{self.family}(arity={self.arity})"


def phi_eval(phi, q):
    """Evaluate on quadrant points; batch axes allowed before the last."""
    fn, n = resolve_phi(phi)
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != n:
        raise ValueError(f"expected arity {n}, got {q.shape[-1]}")
    if np.any(q < 0.0):
        raise ValueError("negative component outside the quadrant")
    out = fn(q)
    return float(out) if q.ndim == 1 else out


def resolve_phi(phi, arity: int | None = None):
    """(fn, arity) for a PhiSpec or a vectorized callable with known arity."""
    if isinstance(phi, PhiSpec):
        n = phi.arity
        if phi.family == "p_combination":
            p = phi.p
            fn = lambda q: norms._stable_lp(np.asarray(q, float), p)
        elif phi.family == "weighted_euclidean":
            w = np.asarray(phi.weights, dtype=float)
            fn = lambda q: np.sqrt(np.sum(w * np.square(np.asarray(q, float)), axis=-1))
        elif phi.family == "max_combination":
            fn = lambda q: np.max(np.asarray(q, float), axis=-1)
        else:
            fn = lambda q: np.sum(np.asarray(q, float), axis=-1)
        return fn, n
    if isinstance(phi, tuple) and len(phi) == 2 and callable(phi[0]):
        return phi[0], int(phi[1])
    if callable(phi):
        n = arity if arity is not None else getattr(phi, "arity", None)
        if n is None:
            raise ValueError("callable phi needs an explicit arity")
        return phi, int(n)
    raise TypeError(f"cannot interpret {type(phi).__name__} as a phi functional")


@dataclass(frozen=True, eq=False)
class ConditionResult:
    status: str                 # pass | fail | not-checked
    worst_violation: float
    witness: tuple | None

    @property
    def ok(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True, eq=False)
class PhiValidationReport:
    label: str
    conditions: dict

    def passed(self, keys=("A", "B", "1", "2", "3", "4")) -> bool:
        return all(self.conditions[k].status == "pass" for k in keys)

    @property
    def worst_violation(self) -> float:
        checked = [c.worst_violation for c in self.conditions.values()
                   if c.status != "not-checked"]
        return max(checked) if checked else 0.0


def _quadrant_samples(rng, count: int, n: int) -> np.ndarray:
    q = np.abs(sampling.mixed_scale_vectors(rng, count, n))
    structured = [np.eye(n), 1e-3 * np.eye(n), 1e3 * np.eye(n),
                  [np.ones(n)], [np.arange(1.0, n + 1.0)]]
    s = np.vstack([np.atleast_2d(b) for b in structured])
    q[: len(s)] = s[: len(q)]
    return q


def _check_definiteness(fn, n: int, sample_count: int, seed: int, tol: float) -> ConditionResult:
    rng = sampling.substream(seed, sampling.KEY_PHI_COND)
    zero_excess = abs(float(fn(np.zeros(n))))
    q = _quadrant_samples(rng, sample_count, n)
    vals = fn(q)
    neg = float(np.minimum(vals, 0.0).min())
    sizable = np.linalg.norm(q, axis=-1) >= 1e-3
    dead = sizable & (vals <= tol)
    worst = max(zero_excess, -neg)
    witness = None
    if zero_excess > tol:
        witness = (np.zeros(n),)
    elif np.any(dead):
        i = int(np.argmax(sizable & (vals <= tol)))
        witness = (q[i].copy(),)
        worst = max(worst, tol - float(vals[i]))
    elif neg < -tol:
        i = int(np.argmin(vals))
        witness = (q[i].copy(),)
    status = "pass" if witness is None else "fail"
    return ConditionResult(status, worst, witness)


def validate_condition_A(phi, sample_count: int = 10000, seed: int = 42,
                         tol: float = 1e-9, arity: int | None = None) -> ConditionResult:
    """Phi(q) = 0 exactly for q = 0, positive elsewhere (sampled)."""
    fn, n = resolve_phi(phi, arity)
    return _check_definiteness(fn, n, sample_count, seed, tol)


def _range_tables(vals: np.ndarray):
    """Min and max of vals[..., lo:hi+1] for all index ranges, last axis."""
    m = vals.shape[-1]
    tmin = np.full(vals.shape[:-1] + (m, m), np.inf)
    tmax = np.full(vals.shape[:-1] + (m, m), -np.inf)
    for lo in range(m):
        run_min = vals[..., lo].copy()
        run_max = vals[..., lo].copy()
        tmin[..., lo, lo] = run_min
        tmax[..., lo, lo] = run_max
        for hi in range(lo + 1, m):
            run_min = np.minimum(run_min, vals[..., hi])
            run_max = np.maximum(run_max, vals[..., hi])
            tmin[..., lo, hi] = run_min
            tmax[..., lo, hi] = run_max
    return tmin, tmax


def _grid_check_b(fn, n: int, tol: float):
    """Exhaustive condition-B check over a uniform quadrant lattice.

    On a uniform grid from 0 the domination system is pure index
    arithmetic: c is a valid third distance for (a, b) iff its index
    satisfies |i_a - i_b| <= i_c <= i_a + i_b per axis.
    """
    m = _GRID_POINTS
    g = np.linspace(0.0, _GRID_SPAN, m)
    if n == 1:
        v = fn(g[:, None])
        tmin, tmax = _range_tables(v)
        ia, ib = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        ia, ib = ia.ravel(), ib.ravel()
        lo, hi = np.abs(ia - ib), np.minimum(ia + ib, m - 1)
        va, vb = v[ia], v[ib]
        box_max, box_min = tmax[lo, hi], tmin[lo, hi]
        den = np.maximum(va + vb + box_max, _TINY)
        viol = np.maximum((box_max - va - vb),
                          (np.abs(va - vb) - box_min)) / den
        worst = float(viol.max())
        if worst <= tol:
            return worst, None
        k = int(viol.argmax())
        sub = v[lo[k]: hi[k] + 1]
        if (box_max[k] - va[k] - vb[k]) >= (np.abs(va[k] - vb[k]) - box_min[k]):
            ic = lo[k] + int(sub.argmax())
        else:
            ic = lo[k] + int(sub.argmin())
        return worst, (np.array([g[ic]]), np.array([g[ia[k]]]), np.array([g[ib[k]]]))

    v = fn(np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1))
    cmin, cmax = _range_tables(v)                      # (i, clo, chi)
    bmin = _range_tables(np.moveaxis(cmin, 0, -1))[0]  # (clo, chi, rlo, rhi)
    bmax = _range_tables(np.moveaxis(cmax, 0, -1))[1]
    bmin = np.moveaxis(bmin, (2, 3), (0, 1))           # (rlo, rhi, clo, chi)
    bmax = np.moveaxis(bmax, (2, 3), (0, 1))

    idx = np.arange(m)
    a1, a2, b1, b2 = (x.ravel() for x in np.meshgrid(idx, idx, idx, idx,
                                                     indexing="ij"))
    lo1, hi1 = np.abs(a1 - b1), np.minimum(a1 + b1, m - 1)
    lo2, hi2 = np.abs(a2 - b2), np.minimum(a2 + b2, m - 1)
    va, vb = v[a1, a2], v[b1, b2]
    box_max = bmax[lo1, hi1, lo2, hi2]
    box_min = bmin[lo1, hi1, lo2, hi2]
    den = np.maximum(va + vb + box_max, _TINY)
    viol = np.maximum((box_max - va - vb),
                      (np.abs(va - vb) - box_min)) / den
    worst = float(viol.max())
    if worst <= tol:
        return worst, None
    k = int(viol.argmax())
    sub = v[lo1[k]: hi1[k] + 1, lo2[k]: hi2[k] + 1]
    if (box_max[k] - va[k] - vb[k]) >= (np.abs(va[k] - vb[k]) - box_min[k]):
        flat = int(sub.argmax())
    else:
        flat = int(sub.argmin())
    ic1, ic2 = np.unravel_index(flat, sub.shape)
    c = np.array([g[lo1[k] + ic1], g[lo2[k] + ic2]])
    a = np.array([g[a1[k]], g[a2[k]]])
    b = np.array([g[b1[k]], g[b2[k]]])
    return worst, (c, a, b)


def validate_condition_B(phi, sample_count: int = 10000, seed: int = 42,
                         tol: float = 1e-9, arity: int | None = None) -> ConditionResult:
    """Triangle-compatibility over sampled distance triples.

    Draws q^k, q^l and places q^j componentwise inside
    [|q^k - q^l|, q^k + q^l], so all three domination patterns hold; then
    each Phi value must be at most the sum of the other two.  The first
    tenth of the samples pins q^j = q^k + q^l.  For arity <= 2 an
    exhaustive lattice check runs as well.
    """
    fn, n = resolve_phi(phi, arity)
    rng = sampling.substream(seed, sampling.KEY_PHI_COND + 100)
    qk = np.abs(sampling.mixed_scale_vectors(rng, sample_count, n))
    ql = np.abs(sampling.mixed_scale_vectors(rng, sample_count, n))
    r = rng.uniform(0.0, 1.0, size=(sample_count, n))
    r[: sample_count // 10] = 1.0
    total = qk + ql
    low = np.where(total > 0.0, np.abs(qk - ql) / np.maximum(total, _TINY), 0.0)
    u = low + r * (1.0 - low)
    qj = u * total

    fj, fk, fl = fn(qj), fn(qk), fn(ql)
    den = np.maximum(fj + fk + fl, _TINY)
    viol = np.maximum.reduce([fj - fk - fl, fk - fj - fl, fl - fj - fk]) / den
    worst = float(viol.max())
    witness = None
    if worst > tol:
        i = int(viol.argmax())
        witness = (qj[i].copy(), qk[i].copy(), ql[i].copy())

    if n <= 2:
        grid_worst, grid_witness = _grid_check_b(fn, n, tol)
        if grid_worst > worst:
            worst = grid_worst
        if witness is None and grid_witness is not None:
            witness = grid_witness
    status = "pass" if worst <= tol else "fail"
    return ConditionResult(status, max(worst, 0.0), witness)


def validate_conditions_1_to_4(phi, sample_count: int = 10000, seed: int = 42,
                               tol: float = 1e-9, arity: int | None = None) -> dict:
    """Definiteness, monotonicity, subadditivity, positive homogeneity."""
    fn, n = resolve_phi(phi, arity)
    out = {"1": _check_definiteness(fn, n, sample_count, seed, tol)}

    rng = sampling.substream(seed, sampling.KEY_PHI_COND + 200)
    p = np.abs(sampling.mixed_scale_vectors(rng, sample_count, n))
    shrink = rng.uniform(0.0, 1.0, size=(sample_count, n))
    # Structured rows: zero out single coordinates, the sharpest probes for
    # monotonicity kinks.
    shrink[:n] = 1.0 - np.eye(n)
    q = shrink * p
    fp, fq = fn(p), fn(q)
    mono = (fq - fp) / np.maximum(np.maximum(fp, fq), _TINY)
    worst2 = float(mono.max())
    wit2 = None
    if worst2 > tol:
        i = int(mono.argmax())
        wit2 = (q[i].copy(), p[i].copy())
    out["2"] = ConditionResult("pass" if worst2 <= tol else "fail",
                               max(worst2, 0.0), wit2)

    a = np.abs(sampling.mixed_scale_vectors(rng, sample_count, n))
    b = np.abs(sampling.mixed_scale_vectors(rng, sample_count, n))
    fa, fb, fab = fn(a), fn(b), fn(a + b)
    sub = (fab - fa - fb) / np.maximum(fa + fb, _TINY)
    worst3 = float(sub.max())
    wit3 = None
    if worst3 > tol:
        i = int(sub.argmax())
        wit3 = (a[i].copy(), b[i].copy(), a[i] + b[i])
    out["3"] = ConditionResult("pass" if worst3 <= tol else "fail",
                               max(worst3, 0.0), wit3)

    lam = rng.uniform(0.0, 4.0, size=sample_count)
    pattern = np.array([0.0, 0.5, 1.0, 2.0, 4.0])
    lam[:5] = pattern[:min(5, sample_count)]
    c = np.abs(sampling.mixed_scale_vectors(rng, sample_count, n))
    flc = fn(lam[:, None] * c)
    fc = fn(c)
    hom = np.abs(flc - lam * fc) / np.maximum(np.maximum(lam * fc, flc), _TINY)
    worst4 = float(hom.max())
    wit4 = None
    if worst4 > tol:
        i = int(hom.argmax())
        wit4 = (c[i].copy(), lam[i] * c[i])
    out["4"] = ConditionResult("pass" if worst4 <= tol else "fail",
                               max(worst4, 0.0), wit4)
    return out


def validate_condition_5(phi, sample_count: int = 10000, seed: int = 42,
                         tol: float = 1e-9, arity: int | None = None) -> ConditionResult:
    """Squared values split over the axes: Phi^2(q) = sum_i Phi^2(q_i e_i)."""
    fn, n = resolve_phi(phi, arity)
    rng = sampling.substream(seed, sampling.KEY_PHI_COND + 300)
    lam = np.abs(sampling.mixed_scale_vectors(rng, sample_count, n))
    lam[0] = 1.0
    f2 = fn(lam) ** 2
    axis_sq = np.zeros(sample_count)
    eye = np.eye(n)
    chunk = max(1, 200000 // max(n * n, 1))
    for start in range(0, sample_count, chunk):
        block = lam[start: start + chunk]
        axis_vals = fn(block[:, :, None] * eye)
        axis_sq[start: start + chunk] = np.sum(axis_vals ** 2, axis=-1)
    viol = np.abs(f2 - axis_sq) / np.maximum(np.maximum(axis_sq, f2), _TINY)
    worst = float(viol.max())
    witness = None
    if worst > tol:
        i = int(viol.argmax())
        witness = (lam[i].copy(),)
    return ConditionResult("pass" if worst <= tol else "fail", worst, witness)


def validate_phi(phi, sample_count: int = 10000, seed: int = 42,
                 tol: float = 1e-9, arity: int | None = None) -> PhiValidationReport:
    """Run all condition validators; (5) is skipped unless (1)-(4) pass."""
    fn, n = resolve_phi(phi, arity)
    conditions = {"A": validate_condition_A(phi, sample_count, seed, tol, arity),
                  "B": validate_condition_B(phi, sample_count, seed, tol, arity)}
    conditions.update(validate_conditions_1_to_4(phi, sample_count, seed, tol, arity))
    if all(conditions[k].status == "pass" for k in ("1", "2", "3", "4")):
        conditions["5"] = validate_condition_5(phi, sample_count, seed, tol, arity)
    else:
        conditions["5"] = ConditionResult("not-checked", 0.0, None)
    label = phi.label if isinstance(phi, PhiSpec) else getattr(phi, "__name__", "phi")
    ordered = {k: conditions[k] for k in ("A", "B", "1", "2", "3", "4", "5")}
    return PhiValidationReport(label=label, conditions=ordered)


@dataclass(frozen=True, eq=False)
class PsiNorm:
    """Reflection of a combining functional to all of R^n via absolute values."""

    source: PhiSpec

    @property
    def dim(self) -> int:
        return self.source.arity

    @property
    def label(self) -> str:
        return f"psi[{self.source.label}]"

    def __call__(self, x):
        fn, _ = resolve_phi(self.source)
        out = fn(np.abs(np.asarray(x, dtype=float)))
        return float(out) if np.ndim(out) == 0 else out


def psi_from_phi(phi: PhiSpec) -> PsiNorm:
    if not isinstance(phi, PhiSpec):
        raise TypeError("psi_from_phi expects a PhiSpec")
    return PsiNorm(phi)


def check_psi_strict_convexity(phi: PhiSpec, sample_count: int = 10000,
                               seed: int = 42, tol: float = 1e-6):
    """Midpoint strict-convexity certificate for the reflected norm."""
    return norms.check_strict_convexity(psi_from_phi(phi), sample_count,
                                        seed=seed, tol=tol)
