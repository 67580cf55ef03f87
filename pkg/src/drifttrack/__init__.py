"""Learning a drifting binary target from finitely many labeled samples.

The package computes how many samples guarantee a prescribed tracking
accuracy, fits the minimal-disagreement convex-polytope hypothesis with an
exact mixed-integer solver, and validates the resulting guarantee by Monte
Carlo simulation on an emergency-braking case study.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundParams,
    CurveRow,
    DisagreementReport,
    DominantTerm,
    M0Result,
    bound_curve,
    constant_target_bound,
    empirical_disagreement,
    hoeffding_tail,
    m0,
    m0_terms,
    theorem1_bound,
)
from .driftsim import (
    AebParams,
    DriftTrace,
    LabeledSample,
    MuEstimate,
    aeb_label,
    estimate_mu,
    facet_matrix,
    generate_trace,
    rotation_angle,
)
from .polytope import (
    BigM,
    BoxDomain,
    CoeffBox,
    Polytope,
    VolumeMode,
    big_m_bounds,
    volume_surrogate,
)
from .preprocess import (
    DiscardReport,
    ProjectionView,
    ThresholdSolution,
    discard_redundant,
    project,
    threshold_oracle,
)
from .validate import ValidationReport, histogram, monte_carlo_validate

__all__ = [
    "AebParams",
    "BigM",
    "BoundParams",
    "BoxDomain",
    "CoeffBox",
    "CurveRow",
    "DisagreementReport",
    "DiscardReport",
    "DominantTerm",
    "DriftTrace",
    "LabeledSample",
    "M0Result",
    "MuEstimate",
    "Polytope",
    "ProjectionView",
    "ThresholdSolution",
    "ValidationReport",
    "VolumeMode",
    "aeb_label",
    "big_m_bounds",
    "bound_curve",
    "constant_target_bound",
    "discard_redundant",
    "empirical_disagreement",
    "estimate_mu",
    "facet_matrix",
    "generate_trace",
    "histogram",
    "hoeffding_tail",
    "m0",
    "m0_terms",
    "monte_carlo_validate",
    "project",
    "rotation_angle",
    "theorem1_bound",
    "threshold_oracle",
    "volume_surrogate",
]
