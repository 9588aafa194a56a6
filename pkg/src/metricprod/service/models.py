"""Request and response bodies shared by the HTTP service and the CLI.

Requests mirror the config-file vocabulary: the dictionaries a config
file holds are valid request payloads, so both front ends validate
through one schema.
"""
from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class _Request(BaseModel):
    model_config = ConfigDict(extra="forbid")


class _Response(BaseModel):
    model_config = ConfigDict(extra="forbid")

    passed: bool
    report: str
    tables: dict[str, str] = Field(default_factory=dict)


class PhiValidationRequest(_Request):
    phi: dict
    sample_count: int = 20000
    seed: int = 42
    tol: float = 1e-9
    require: list[str] | None = None   # default: A, B, 1-4


class ConditionStatus(BaseModel):
    model_config = ConfigDict(extra="forbid")

    key: str
    status: str
    worst_violation: float
    witness: str | None = None


class PhiValidationResponse(_Response):
    label: str
    conditions: list[ConditionStatus]
    required: list[str]


class NormCheckRequest(_Request):
    norm: dict
    sample_count: int = 20000
    seed: int = 42
    tol: float = 1e-9
    convexity_tol: float = 1e-6


class NormCheckResponse(_Response):
    label: str
    axioms_ok: bool
    worst_violation: float
    strictly_convex: bool
    convexity_margin: float
    parallelogram_ok: bool
    parallelogram_worst: float
    kernel_dim: int


class CounterexampleRequest(_Request):
    n: int | None = None
    seed: int = 42
    samples: int = 10000
    null_points: int = 1000
    circles: int = 100
    planes: int = 100
    section_points: int = 64
    convexity_tol: float = 1e-6
    diagonal_tol: float = 1e-12
    null_tol: float = 1e-14


class CounterexampleResponse(_Response):
    n: int
    n_was_searched: bool
    convexity_margins: list[float]
    diagonal_worst: float
    null_worst: float
    min_circle_intersections: int
    obstruction_fractions: list[float]
    obstruction_min_residuals: list[float]
    baseline_max_residual: float


class RankProbeRequest(_Request):
    space: dict
    k_min: int = 1
    k_max: int = 3
    grid_side: int = 3
    restarts: int = 4
    seed: int = 42
    tol: float = 1e-6
    obstruction: bool = False
    planes: int = 100


class RankProbeResponse(_Response):
    distortions: dict[int, float]
    rank_estimate: int
    obstruction_fraction: float | None = None
    euclidean_rank_certificate: int | None = None
    warnings: list[str] = Field(default_factory=list)


class DecomposeRequest(_Request):
    scenario: str
    n: int = 1
    side: int = 5
    scale: float = 1.0
    direction_count: int = 16
    tol: float = 1e-9


class DecomposeResponse(_Response):
    scenario: str
    residuals: dict[str, float]
    table_error: float | None = None
    refusal: str | None = None


class LengthRequest(_Request):
    space: dict
    curves: list[dict]
    refinement: int = 10000
    speed_tol: float = 1e-3
    doublings: int = 3
    config_dir: str | None = None


class LengthResponse(_Response):
    length_estimate: float
    phi_of_lengths: float
    gap: float
    gaps: list[float]
    gap_monotone: bool
