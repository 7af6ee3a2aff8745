"""Correspondence-free similarity registration of planar contours.

Contours are complex vectors (one ``x + 1j*y`` entry per point).  The core
pipeline warps a target contour against a reference, weights the resulting
correspondences by their residual statistics, and fits a similarity pose;
iterating this registers pairs, and wrapping it in a mean-update loop
registers whole groups of unequal-length contours.
"""

__version__ = "0.1.0"

from .baseline import IcpResult, register_icp
from .contour import (
    Contour,
    Pose,
    as_contour,
    geodesic_distance,
    read_contour,
    to_preshape,
    transform,
    write_contour,
)
from .dtw import AlignedPair, WarpingPath, accumulated_cost, apply_path, dtw_path
from .errors import (
    BandTooNarrow,
    ComputationError,
    ConfigInfeasible,
    DegenerateContour,
    EmptySet,
    IndexOutOfRange,
    InputError,
    InsufficientSupport,
    LengthMismatch,
    MalformedRow,
    OrderRecoveryFailed,
    ParseError,
    ShapeRegError,
    SingularSystem,
    ZeroArea,
)
from .experiments import ExperimentConfig, run_experiment
from .groupwise import (
    GroupResult,
    MaskedResampledContour,
    SampleRegistration,
    ShapeModel,
    default_group_stop,
    learn_model,
    masked_variance_trace,
    register_group,
    resample_to_reference,
    total_variance,
)
from .metrics import MetricReport, d_test, iou, metric_report
from .pairwise import (
    RegistrationResult,
    StopCriteria,
    default_stop,
    register_pair,
)
from .procrustes import (
    DeformationStats,
    compute_weights,
    fit_pose,
    fit_pose_weighted,
    soft_boundary,
)
from .synth import (
    OutlierConfig,
    PoseRanges,
    SampleTruth,
    SynthFamilyConfig,
    femur_like_template,
    generate_family,
    inject_outliers,
    recover_order,
    shuffle_points,
)

__all__ = [
    "__version__",
    "AlignedPair",
    "BandTooNarrow",
    "ComputationError",
    "ConfigInfeasible",
    "Contour",
    "DeformationStats",
    "DegenerateContour",
    "EmptySet",
    "ExperimentConfig",
    "GroupResult",
    "IcpResult",
    "IndexOutOfRange",
    "InputError",
    "InsufficientSupport",
    "LengthMismatch",
    "MalformedRow",
    "MaskedResampledContour",
    "MetricReport",
    "OrderRecoveryFailed",
    "OutlierConfig",
    "ParseError",
    "Pose",
    "PoseRanges",
    "RegistrationResult",
    "SampleRegistration",
    "SampleTruth",
    "ShapeModel",
    "ShapeRegError",
    "SingularSystem",
    "StopCriteria",
    "SynthFamilyConfig",
    "WarpingPath",
    "ZeroArea",
    "accumulated_cost",
    "apply_path",
    "as_contour",
    "compute_weights",
    "d_test",
    "default_group_stop",
    "default_stop",
    "dtw_path",
    "femur_like_template",
    "fit_pose",
    "fit_pose_weighted",
    "generate_family",
    "geodesic_distance",
    "inject_outliers",
    "iou",
    "learn_model",
    "masked_variance_trace",
    "metric_report",
    "read_contour",
    "recover_order",
    "register_group",
    "register_icp",
    "register_pair",
    "resample_to_reference",
    "run_experiment",
    "shuffle_points",
    "soft_boundary",
    "to_preshape",
    "total_variance",
    "transform",
    "write_contour",
]
