"""Product metrics, norm validators, and the rank counterexample toolkit.

The library certifies, at sampling scale, the structure theory of metric
products combined through a norm-like functional: which combination
rules yield genuine metrics, how isometric embeddings into products
split into per-factor pseudonorms, and an explicit pair of perturbed
norms on 3-space whose product contains a euclidean 3-flat although
neither factor contains a euclidean plane.
"""
__version__ = "0.1.0"

from .counterexample import (choose_n, epsilon_hat, epsilon_tilde,
                             great_circle_null_intersections, perturbed_pair,
                             verify_diagonal_euclidean)
from .decomposition import (GridEmbedding, GridSpec,
                            factor_decomposition,
                            generalized_factor_decomposition, run_scenario)
from .flatness import (distortion_probe, euclidean_flat_obstruction,
                       fit_conic, minkowski_superadditive_embed,
                       section_is_ellipse, unit_ball_section)
from .norms import (NormSpec, Pseudonorm, check_norm_axioms,
                    check_parallelogram, check_strict_convexity, kernel_basis,
                    norm_eval)
from .phi import (PhiSpec, check_psi_strict_convexity, phi_eval, psi_from_phi,
                  validate_phi)
from .spaces import (Circle, Leaf, PolygonalCurve, Product, Segment,
                     check_metric_axioms, curve_length, distance,
                     product_curve_length_check, standard_product)

__all__ = [
    "__version__",
    "NormSpec", "Pseudonorm", "norm_eval", "check_norm_axioms",
    "check_strict_convexity", "check_parallelogram", "kernel_basis",
    "PhiSpec", "phi_eval", "validate_phi", "psi_from_phi",
    "check_psi_strict_convexity",
    "Leaf", "Product", "standard_product", "distance", "check_metric_axioms",
    "PolygonalCurve", "Segment", "Circle", "curve_length",
    "product_curve_length_check",
    "epsilon_tilde", "epsilon_hat", "perturbed_pair", "choose_n",
    "verify_diagonal_euclidean", "great_circle_null_intersections",
    "unit_ball_section", "fit_conic", "section_is_ellipse",
    "euclidean_flat_obstruction", "distortion_probe",
    "minkowski_superadditive_embed",
    "GridSpec", "GridEmbedding", "factor_decomposition",
    "generalized_factor_decomposition", "run_scenario",
]
