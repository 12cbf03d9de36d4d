"""Singular value laws of block Markov chain frequency and transition matrices."""

from .errors import (CapExceeded, EmptyCluster, EmptyInput, NoConvergence, NumericalFailure, ParseError,
                     RejectedModel, ResourceLimit, ZeroClusterRow, ZeroRow)
from .model import BlockModel, ClusterLayout, build_layout, edge_rate, equilibrium_over_states, stationary_distribution

__version__ = "0.1.0"

__all__ = [
    "BlockModel", "ClusterLayout", "build_layout", "edge_rate", "equilibrium_over_states",
    "stationary_distribution", "CapExceeded", "EmptyCluster", "EmptyInput", "NoConvergence",
    "NumericalFailure", "ParseError", "RejectedModel", "ResourceLimit", "ZeroClusterRow", "ZeroRow",
]
