from .filters import cross_bilateral
from .pipeline import PipelineResult, TransferConfig, transfer_pipeline
from .poisson import grid_laplacian, poisson_energy, screened_poisson
from .smoothing import AffinityGraph, build_affinity_graph, smooth_affinity
from .stats import EIGENVALUE_FLOOR, RegionStats, region_stats, wct_region
from .stylize import stylize

__all__ = [
    "AffinityGraph",
    "EIGENVALUE_FLOOR",
    "PipelineResult",
    "RegionStats",
    "TransferConfig",
    "build_affinity_graph",
    "cross_bilateral",
    "grid_laplacian",
    "poisson_energy",
    "region_stats",
    "screened_poisson",
    "smooth_affinity",
    "stylize",
    "transfer_pipeline",
]
