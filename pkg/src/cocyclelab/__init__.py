"""Numerical laboratory for lattice cocycles with a local-CLT core.

Exact integer-lattice distributions, seeded layer-built cocycle
trajectories, the partial-sum decomposition identities, range statistics
at polynomial times, and the two-transformation intersection experiments,
with a batch CLI in :mod:`cocyclelab.cli`.
"""

from .lattice import (
    LatticeDist,
    ProductDist,
    centered_pair_law,
    convolve,
    char_fn,
    moments,
    sup_lclt_gap,
    tail_truncate,
    ternary_law,
)
from .cocycle import (
    DecompositionReport,
    LayerTrajectory,
    cocycle_at,
    decompose,
    exact_dist_S,
    exact_dist_U,
    layer_value,
    trajectory,
    values_at_times,
    variance_U_closed_form,
)
from .schedule import index_sets, net_weight_profile, params, trapezoid_weight, truncation_level

__all__ = [
    "LatticeDist", "ProductDist", "ternary_law", "centered_pair_law",
    "convolve", "moments", "tail_truncate", "char_fn", "sup_lclt_gap",
    "LayerTrajectory", "trajectory", "layer_value", "cocycle_at",
    "values_at_times", "decompose", "DecompositionReport",
    "exact_dist_U", "exact_dist_S", "variance_U_closed_form",
    "params", "index_sets", "trapezoid_weight", "net_weight_profile",
    "truncation_level",
]
