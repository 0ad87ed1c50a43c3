"""Influence estimation and maximization in continuous-time diffusion networks.

Sketch-based estimator: each diffusion sample gets m independent
exponential node labelings; per-node least-label lists over reverse
shortest-path balls answer neighborhood-size queries in O(log) time,
and (m-1)/sum-of-minima turns them into an unbiased influence estimate.
"""

from .cascades import (
    Cascade,
    CascadeSet,
    empirical_influence,
    load_cascades,
    mae,
    save_cascades,
    split_cascades,
)
from .errors import (
    ConfigError,
    ContinestError,
    GenerationError,
    ParseError,
    ValidationError,
)
from .estimator import (
    EstimatorConfig,
    InfluenceEstimate,
    VarianceReport,
    estimate_influence,
    per_sample_estimate,
    sample_bound,
    variance_report,
)
from .graph import (
    DiffusionNetwork,
    EdgeRecord,
    highest_out_degree_node,
    load_network,
    save_network,
    validate_sources,
)
from .maximize import (
    GreedyConfig,
    GreedyResult,
    SketchBank,
    greedy_select,
    marginal_gain,
)
from .netgen import PRESETS, KroneckerSpec, generate, preset
from .neighborhood import (
    LeastLabelList,
    SketchSet,
    build_lists,
    draw_labels,
    estimate_size,
    first_least_labels,
    load_sketch_set,
    multi_source_least_label,
    query_least_label,
    save_sketch_set,
)
from .oracle import (
    InfectionTimes,
    NaiveEstimate,
    draw_sample,
    naive_influence,
    shortest_infection_times,
)
from .transmission import (
    Exponential,
    KernelHazard,
    Rayleigh,
    TransmissionModel,
    Weibull,
    load_kernel_spec,
    model_from_fields,
    model_to_fields,
    save_kernel_spec,
)

__version__ = "0.1.0"

__all__ = [
    "Cascade",
    "CascadeSet",
    "ConfigError",
    "ContinestError",
    "DiffusionNetwork",
    "EdgeRecord",
    "EstimatorConfig",
    "Exponential",
    "GenerationError",
    "GreedyConfig",
    "GreedyResult",
    "InfectionTimes",
    "InfluenceEstimate",
    "KernelHazard",
    "KroneckerSpec",
    "LeastLabelList",
    "NaiveEstimate",
    "PRESETS",
    "ParseError",
    "Rayleigh",
    "SketchBank",
    "SketchSet",
    "TransmissionModel",
    "ValidationError",
    "VarianceReport",
    "Weibull",
    "__version__",
    "build_lists",
    "draw_labels",
    "draw_sample",
    "empirical_influence",
    "estimate_influence",
    "estimate_size",
    "first_least_labels",
    "generate",
    "greedy_select",
    "highest_out_degree_node",
    "load_cascades",
    "load_kernel_spec",
    "load_network",
    "load_sketch_set",
    "mae",
    "marginal_gain",
    "model_from_fields",
    "model_to_fields",
    "multi_source_least_label",
    "naive_influence",
    "per_sample_estimate",
    "preset",
    "query_least_label",
    "sample_bound",
    "save_cascades",
    "save_kernel_spec",
    "save_network",
    "save_sketch_set",
    "shortest_infection_times",
    "split_cascades",
    "validate_sources",
    "variance_report",
]
