"""Forge quadratic forms and epsilon-semimetrics that realize prescribed distances,
and use them to steer distance-based clustering."""

__version__ = "0.1.0"

from .attack import (
    AttackPlan,
    AttackReport,
    assign_target_distances,
    attack_dbscan,
    attack_kmeans,
    label_isomorphism,
    run_attack,
)
from .axioms import AxiomReport, check_axioms
from .clustering import ClusterAssignment, dbscan, kmeans
from .embedding import DistanceSpec, PointCloud, sample_neighbors, scaled_form, verify_relations
from .errors import (
    CapacityError,
    ConditioningWarning,
    DimensionError,
    DuplicatePointsError,
    EpsilonTooLargeError,
    IncompleteSpecError,
    MetricForgeError,
    NoiseMagnitudeError,
    NumericalFailure,
    RankDeficiencyError,
    SymmetryError,
)
from .quadform import IndependentSystem, QuadraticNorm, check_capacity, interpolating_form
from .semimetric import EpsilonSemimetric, build_semimetric

__all__ = [
    "__version__",
    "assign_target_distances",
    "attack_dbscan",
    "attack_kmeans",
    "AttackPlan",
    "AttackReport",
    "AxiomReport",
    "build_semimetric",
    "CapacityError",
    "check_axioms",
    "check_capacity",
    "ClusterAssignment",
    "ConditioningWarning",
    "dbscan",
    "DimensionError",
    "DistanceSpec",
    "DuplicatePointsError",
    "EpsilonSemimetric",
    "EpsilonTooLargeError",
    "IncompleteSpecError",
    "IndependentSystem",
    "interpolating_form",
    "kmeans",
    "label_isomorphism",
    "MetricForgeError",
    "NoiseMagnitudeError",
    "NumericalFailure",
    "PointCloud",
    "QuadraticNorm",
    "RankDeficiencyError",
    "run_attack",
    "sample_neighbors",
    "scaled_form",
    "SymmetryError",
    "verify_relations",
]
