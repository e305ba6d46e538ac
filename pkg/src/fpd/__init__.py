"""Fuzzy c-means clustering of persistence diagrams."""
from .diagram import (
    DiagramFormatError,
    DiagramSet,
    PersistenceDiagram,
    cap_infinities,
    default_cap,
    read_diagram,
    write_diagram,
)
from .distances import DistanceKind, bottleneck, make_distance, wasserstein2
from .evaluation import crisp_rand, fuzzy_rand
from .fcm import ClusterState, FcmConfig, cluster, rank_by_centre
from .frechet import MeanState, WeightedMeanProblem, weighted_frechet_mean
from .rips import PointCloud, build_rips, rips_diagrams

__version__ = "0.1.0"

__all__ = [
    "DiagramFormatError",
    "DiagramSet",
    "PersistenceDiagram",
    "cap_infinities",
    "default_cap",
    "read_diagram",
    "write_diagram",
    "DistanceKind",
    "bottleneck",
    "make_distance",
    "wasserstein2",
    "crisp_rand",
    "fuzzy_rand",
    "ClusterState",
    "FcmConfig",
    "cluster",
    "rank_by_centre",
    "MeanState",
    "WeightedMeanProblem",
    "weighted_frechet_mean",
    "PointCloud",
    "build_rips",
    "rips_diagrams",
    "__version__",
]
