"""Command handlers shared by the HTTP endpoints and the CLI.

Each handler is a pure function from a request model to a response
model; all randomness is seeded through the request, so equal requests
produce byte-identical reports.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .. import (configio, counterexample, decomposition, flatness, norms,
                phi as phi_mod, reporting, sampling, spaces)
from . import models

_DEFAULT_REQUIRE = ["A", "B", "1", "2", "3", "4"]


def validate_phi(req: models.PhiValidationRequest) -> models.PhiValidationResponse:
    spec = configio.phi_spec_from_config(req.phi)
    report = phi_mod.validate_phi(spec, sample_count=req.sample_count,
                                  seed=req.seed, tol=req.tol)
    require = req.require if req.require is not None else list(_DEFAULT_REQUIRE)
    for key in require:
        if key not in report.conditions:
            raise configio.ConfigError(f"unknown condition {key!r}")
    conditions = []
    for key, cond in report.conditions.items():
        witness = None if cond.witness is None else reporting.fmt(cond.witness)
        conditions.append(models.ConditionStatus(
            key=key, status=cond.status,
            worst_violation=float(cond.worst_violation), witness=witness))
    passed = all(report.conditions[k].ok for k in require)
    items = [("phi", spec.label), ("sample_count", req.sample_count),
             ("seed", req.seed), ("tol", req.tol)]
    for cond in conditions:
        items.append((f"condition_{cond.key}", cond.status))
        items.append((f"condition_{cond.key}_worst", cond.worst_violation))
        if cond.witness is not None:
            items.append((f"condition_{cond.key}_witness", cond.witness))
    items += [("required", require), ("passed", passed)]
    return models.PhiValidationResponse(
        passed=passed, report=reporting.render_report("validate-phi", items),
        label=spec.label, conditions=conditions, required=require)


def check_norm(req: models.NormCheckRequest) -> models.NormCheckResponse:
    spec = configio.norm_spec_from_config(req.norm)
    axioms = norms.check_norm_axioms(spec, sample_count=req.sample_count,
                                     seed=req.seed, tol=req.tol)
    strict, margin = norms.check_strict_convexity(
        spec, sample_count=req.sample_count, seed=req.seed,
        tol=req.convexity_tol)
    par_ok, par_worst = norms.check_parallelogram(
        spec, sample_count=req.sample_count, seed=req.seed, tol=req.tol)
    kernel = norms.kernel_basis(norms.Pseudonorm.from_norm_spec(spec), req.tol)
    passed = axioms.all_ok
    items = [("norm", spec.label), ("sample_count", req.sample_count),
             ("seed", req.seed), ("tol", req.tol),
             ("positivity", axioms.positivity_ok),
             ("homogeneity", axioms.homogeneity_ok),
             ("triangle", axioms.triangle_ok),
             ("symmetry", axioms.symmetry_ok),
             ("worst_violation", axioms.worst_violation),
             ("strictly_convex", strict),
             ("convexity_margin", margin),
             ("parallelogram", par_ok),
             ("parallelogram_worst", par_worst),
             ("kernel_dim", len(kernel)),
             ("passed", passed)]
    return models.NormCheckResponse(
        passed=passed, report=reporting.render_report("check-norm", items),
        label=spec.label, axioms_ok=axioms.all_ok,
        worst_violation=float(axioms.worst_violation),
        strictly_convex=strict, convexity_margin=float(margin),
        parallelogram_ok=par_ok, parallelogram_worst=float(par_worst),
        kernel_dim=len(kernel))


_SECTION_PLANE = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])


def _section_table(specs, m: int) -> str:
    rows = []
    for spec in specs:
        section = flatness.unit_ball_section(spec, _SECTION_PLANE, m)
        pts = section.planar_points
        for i in range(m):
            rows.append((spec.label, i, section.angles[i], section.radii[i],
                         pts[i, 0], pts[i, 1]))
    return reporting.render_csv(
        ["norm", "index", "angle", "radius", "px", "py"], rows)


def run_counterexample(req: models.CounterexampleRequest) -> models.CounterexampleResponse:
    searched = req.n is None
    if searched:
        chosen = counterexample.choose_n(sample_count=req.samples,
                                         seed=req.seed, tol=req.convexity_tol)
        n = chosen.n
    else:
        n = req.n
        if n < 1:
            raise configio.ConfigError("n must be at least 1")
    spec1, spec2 = counterexample.perturbed_pair(n)

    margins = []
    convex_ok = True
    for spec in (spec1, spec2):
        ok, margin = norms.check_strict_convexity(
            spec, sample_count=req.samples, seed=req.seed,
            tol=req.convexity_tol)
        margins.append(float(margin))
        convex_ok = convex_ok and ok

    diagonal_worst = counterexample.verify_diagonal_euclidean(
        n, sample_count=req.samples, seed=req.seed)
    diagonal_ok = diagonal_worst <= req.diagonal_tol

    circles = counterexample.null_circle_points(req.null_points)
    flat_pts = circles.reshape(-1, 3)
    null_worst = float(max(
        np.max(np.abs(counterexample.phi1(flat_pts, n) - 1.0)),
        np.max(np.abs(counterexample.phi2(flat_pts, n) - 1.0))))
    null_ok = null_worst <= req.null_tol

    rng = sampling.substream(req.seed, sampling.KEY_GREAT_CIRCLES)
    counts = []
    for _ in range(req.circles):
        basis = rng.standard_normal((2, 3))
        counts.append(counterexample.great_circle_null_intersections(basis))
    min_count = min(counts) if counts else 0
    circles_ok = min_count >= 8

    fractions, min_residuals = [], []
    baseline_max = 0.0
    for spec in (spec1, spec2):
        rep = flatness.euclidean_flat_obstruction(
            spec, plane_count=req.planes, seed=req.seed, m=req.section_points)
        fractions.append(rep.fraction_not_ellipse)
        min_residuals.append(rep.min_residual)
        baseline_max = max(baseline_max, rep.baseline_max)
    obstruction_ok = all(f == 1.0 for f in fractions)

    passed = (convex_ok and diagonal_ok and null_ok and circles_ok
              and obstruction_ok)
    items = [("n", n), ("n_was_searched", searched), ("seed", req.seed),
             ("samples", req.samples),
             ("convexity_margin_1", margins[0]),
             ("convexity_margin_2", margins[1]),
             ("strictly_convex", convex_ok),
             ("diagonal_worst", diagonal_worst),
             ("diagonal_ok", diagonal_ok),
             ("null_worst", null_worst),
             ("null_ok", null_ok),
             ("circle_count", req.circles),
             ("min_circle_intersections", min_count),
             ("circles_ok", circles_ok),
             ("plane_count", req.planes),
             ("obstruction_fraction_1", fractions[0]),
             ("obstruction_fraction_2", fractions[1]),
             ("obstruction_min_residual_1", min_residuals[0]),
             ("obstruction_min_residual_2", min_residuals[1]),
             ("baseline_max_residual", baseline_max),
             ("obstruction_ok", obstruction_ok),
             ("passed", passed)]
    table = _section_table(
        [spec1, spec2, norms.NormSpec("euclidean", 3)], req.section_points)
    return models.CounterexampleResponse(
        passed=passed,
        report=reporting.render_report("counterexample", items),
        tables={"sections": table},
        n=n, n_was_searched=searched, convexity_margins=margins,
        diagonal_worst=float(diagonal_worst), null_worst=null_worst,
        min_circle_intersections=min_count,
        obstruction_fractions=[float(f) for f in fractions],
        obstruction_min_residuals=[float(r) for r in min_residuals],
        baseline_max_residual=float(baseline_max))


def probe_rank(req: models.RankProbeRequest) -> models.RankProbeResponse:
    space = configio.space_from_config(req.space)
    if req.k_min < 1 or req.k_max < req.k_min:
        raise configio.ConfigError("need 1 <= k_min <= k_max")
    distortions = {}
    warnings = []
    rank = 0
    for k in range(req.k_min, req.k_max + 1):
        result = flatness.distortion_probe(
            space, k, grid_side=req.grid_side, restarts=req.restarts,
            seed=req.seed, tol=req.tol)
        distortions[k] = float(result.distortion)
        if not result.converged:
            warnings.append(f"k={k}: search stopped at the sweep cap, "
                            f"best distortion {result.distortion:.6g}")
        if result.distortion <= 1.0 + req.tol:
            rank = k
    items = [("space", space.label), ("seed", req.seed), ("tol", req.tol),
             ("grid_side", req.grid_side), ("restarts", req.restarts)]
    for k in sorted(distortions):
        items.append((f"distortion_k{k}", distortions[k]))
    items.append(("rank_estimate", rank))

    fraction = None
    certificate = None
    if req.obstruction:
        if not isinstance(space, spaces.Leaf):
            raise configio.ConfigError(
                "obstruction sweep applies to a single normed space")
        rep = flatness.euclidean_flat_obstruction(
            space.norm, plane_count=req.planes, seed=req.seed)
        fraction = float(rep.fraction_not_ellipse)
        items.append(("obstruction_fraction", fraction))
        if rep.certifies_obstruction:
            certificate = 1
            items.append(("euclidean_rank_certificate", 1))
    for w in warnings:
        items.append(("warning", w))
    items.append(("passed", True))
    return models.RankProbeResponse(
        passed=True, report=reporting.render_report("probe-rank", items),
        distortions=distortions, rank_estimate=rank,
        obstruction_fraction=fraction,
        euclidean_rank_certificate=certificate, warnings=warnings)


def decompose(req: models.DecomposeRequest) -> models.DecomposeResponse:
    if req.scenario not in decomposition.SCENARIOS:
        known = ", ".join(sorted(decomposition.SCENARIOS))
        raise configio.ConfigError(
            f"unknown scenario {req.scenario!r}; known: {known}")
    grid = decomposition.GridSpec(side=req.side, scale=req.scale,
                                  direction_count=req.direction_count)
    try:
        result = decomposition.run_scenario(req.scenario, grid, req.tol, req.n)
    except (decomposition.NotIsometricError,
            decomposition.StrictConvexityError,
            decomposition.LemmaResidualError) as exc:
        reason = f"{type(exc).__name__}: {exc}"
        items = [("scenario", req.scenario), ("refused", reason),
                 ("passed", False)]
        return models.DecomposeResponse(
            passed=False, report=reporting.render_report("decompose", items),
            scenario=req.scenario, residuals={}, refusal=reason)

    table_error = None
    expected = decomposition.expected_alpha_table(
        req.scenario, result.directions, req.n)
    if expected is not None:
        got = np.stack([result.factor_values(i)
                        for i in range(len(result.factors))], axis=-1)
        table_error = float(np.max(np.abs(got - expected)))
    passed = max(result.residuals.values()) <= req.tol and (
        table_error is None or table_error <= req.tol)
    items = [("scenario", req.scenario), ("tol", req.tol),
             ("side", req.side), ("scale", req.scale),
             ("direction_count", req.direction_count)]
    for key, value in result.residuals.items():
        items.append((f"residual_{key}", value))
    if table_error is not None:
        items.append(("recovered_vs_analytic", table_error))
    items.append(("passed", passed))

    header = [f"d{j}" for j in range(result.directions.shape[1])]
    header += [f"alpha{i + 1}" for i in range(len(result.factors))]
    rows = []
    vals = [result.factor_values(i) for i in range(len(result.factors))]
    for m in range(len(result.directions)):
        rows.append(tuple(result.directions[m]) + tuple(v[m] for v in vals))
    table = reporting.render_csv(header, rows)
    residuals = {k: float(v) for k, v in result.residuals.items()}
    return models.DecomposeResponse(
        passed=passed, report=reporting.render_report("decompose", items),
        tables={"factors": table}, scenario=req.scenario,
        residuals=residuals, table_error=table_error)


def curve_length(req: models.LengthRequest) -> models.LengthResponse:
    space = configio.space_from_config(req.space)
    if not isinstance(space, spaces.Product):
        raise configio.ConfigError("length check needs a product space")
    if len(req.curves) != len(space.children):
        raise configio.ConfigError("need one curve per product factor")
    base = Path(req.config_dir) if req.config_dir else None
    curves = [configio.curve_from_config(c, base) for c in req.curves]
    if req.refinement < 2 or req.doublings < 0:
        raise configio.ConfigError("refinement must be >= 2, doublings >= 0")
    gaps = []
    result = None
    n = req.refinement
    for _ in range(req.doublings + 1):
        step = spaces.product_curve_length_check(
            space, curves, refinement=n, speed_tol=req.speed_tol)
        if result is None:
            result = step
        gaps.append(float(step.gap))
        n *= 2
    monotone = all(gaps[i + 1] <= gaps[i] * (1.0 + 1e-12) + 1e-15
                   for i in range(len(gaps) - 1))
    items = [("space", space.label), ("refinement", req.refinement),
             ("doublings", req.doublings),
             ("length_estimate", result.l_n),
             ("phi_of_lengths", result.phi_of_lengths),
             ("gap", result.gap),
             ("gaps", gaps),
             ("gap_monotone", monotone),
             ("passed", monotone)]
    return models.LengthResponse(
        passed=monotone, report=reporting.render_report("length", items),
        length_estimate=float(result.l_n),
        phi_of_lengths=float(result.phi_of_lengths),
        gap=float(result.gap), gaps=gaps, gap_monotone=monotone)
