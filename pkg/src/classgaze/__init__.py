"""Class-attention analytics from anonymized gaze streams."""

from .clustering import (
    ClusteringParams,
    ClusteringResult,
    dbscan,
    find_elbow,
    kdistance_curve,
)
from .errors import (
    ClassGazeError,
    ConfigError,
    DegenerateCurveError,
    DegenerateNullError,
    EmptyDistributionError,
    InsufficientPointsError,
    SessionAuthError,
    SessionClosedError,
)
from .heatmap import HeatmapGrid, bin_points
from .metrics import (
    Centroid,
    GazeDistribution,
    GazePoint,
    WindowConfig,
    centroid,
    cohesiveness,
    cohesiveness_diff,
    window_stream,
)
from .scoring import (
    AlertEvent,
    AlertPolicy,
    AttentionScore,
    evaluate_alert,
    score_window,
    score_window_statistical,
)
from .stats import (
    RandomizationConfig,
    RandomizationResult,
    null_distribution,
    random_focus_diff,
    randomization_test,
)

__version__ = "0.1.0"

__all__ = [
    "AlertEvent",
    "AlertPolicy",
    "AttentionScore",
    "Centroid",
    "ClassGazeError",
    "ClusteringParams",
    "ClusteringResult",
    "ConfigError",
    "DegenerateCurveError",
    "DegenerateNullError",
    "EmptyDistributionError",
    "GazeDistribution",
    "GazePoint",
    "HeatmapGrid",
    "InsufficientPointsError",
    "RandomizationConfig",
    "RandomizationResult",
    "SessionAuthError",
    "SessionClosedError",
    "WindowConfig",
    "bin_points",
    "centroid",
    "cohesiveness",
    "cohesiveness_diff",
    "dbscan",
    "evaluate_alert",
    "find_elbow",
    "kdistance_curve",
    "null_distribution",
    "random_focus_diff",
    "randomization_test",
    "score_window",
    "score_window_statistical",
    "window_stream",
]
