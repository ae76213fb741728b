"""Generalized alternating projections on subspaces, manifolds and convex sets."""

__version__ = "0.1.0"

from .errors import (DegenerateManifoldError, DomainError, GapKitError,
                     InconsistencyError, InsufficientDataError,
                     InvalidParametersError, NonsmoothPointError,
                     NotConvergentError, PreconditionError, ProjectionError,
                     SingularityError, TangentCaseError)
from .params import GapParams, classify_params
from .subspaces import (PrincipalAngleSet, Subspace, construct_pair_with_angles,
                        friedrichs_cosine, intersect, orthonormalize,
                        principal_angles, projector)
from .sets import (AbsConeR2, AffineSubspace, Ball, Halfspace, ImplicitManifold,
                   LinearSubspace, LineR2, ProjectableSet, Sphere,
                   TangentSpaceResult, paraboloid_curve, set_from_dict)
from .engine import (IterationTrace, RateFit, adaptive_theta_run,
                     estimate_rate, gap_step, run)
from .spectral import (OptimalChoice, SpectralReport, assemble_gap_matrix,
                       block_eigenvalues, full_spectrum, kappa_rate,
                       kappa_to_params, optimal_params, sigma_norm,
                       spectral_report, subdominant_magnitude, trdet_oracle)
from .local import (LocalRateReport, RegularityConstants, check_regularity,
                    classify_intersection, empirical_sr, predicted_local_rate,
                    regularity_constants, tangent_gap_operator,
                    transversality_check)
from .experiments import ExperimentConfig, ExperimentResult, run_experiment

__all__ = [
    "GapParams", "classify_params",
    "PrincipalAngleSet", "Subspace", "construct_pair_with_angles",
    "friedrichs_cosine", "intersect", "orthonormalize", "principal_angles",
    "projector",
    "AbsConeR2", "AffineSubspace", "Ball", "Halfspace", "ImplicitManifold",
    "LinearSubspace", "LineR2", "ProjectableSet", "Sphere",
    "TangentSpaceResult", "paraboloid_curve", "set_from_dict",
    "IterationTrace", "RateFit", "adaptive_theta_run", "estimate_rate",
    "gap_step", "run",
    "OptimalChoice", "SpectralReport", "assemble_gap_matrix",
    "block_eigenvalues", "full_spectrum", "kappa_rate", "kappa_to_params",
    "optimal_params", "sigma_norm", "spectral_report",
    "subdominant_magnitude", "trdet_oracle",
    "LocalRateReport", "RegularityConstants", "check_regularity",
    "classify_intersection", "empirical_sr", "predicted_local_rate",
    "regularity_constants", "tangent_gap_operator", "transversality_check",
    "ExperimentConfig", "ExperimentResult", "run_experiment",
    "GapKitError", "PreconditionError", "DomainError", "InvalidParametersError",
    "ProjectionError", "SingularityError", "DegenerateManifoldError",
    "NonsmoothPointError", "TangentCaseError", "NotConvergentError",
    "InconsistencyError", "InsufficientDataError",
]
