"""Large-scale Ricci curvature on weighted graphs.

Exact linear curvature by linear programming, certified bounds from
transport-map defects, upper estimates for the quadratic and exponential
variants, and numerical checks of heat-semigroup gradient estimates.
"""

__version__ = "0.1.0"

from .curvature_linear import CurvatureResult, all_pairs, edge_pairs, k_linear, k_linear_sampling_oracle, k_ollivier
from .curvature_nonlinear import OptimizerConfig, SandwichResult, k_exponential_estimate, k_quadratic_estimate
from .estimators import GradientOllivierCurvature, HeatSemigroup
from .generators import LatticeSpec, generate, hex_torus
from .graph_core import GraphError, WeightedGraph, load_graph
from .semigroup import HeatOperator, VerificationTrace, heat_apply, spectrum
from .transport import TransportCertificate, defect, defect_bruteforce

__all__ = [
    "CurvatureResult",
    "GradientOllivierCurvature",
    "GraphError",
    "HeatOperator",
    "HeatSemigroup",
    "LatticeSpec",
    "OptimizerConfig",
    "SandwichResult",
    "TransportCertificate",
    "VerificationTrace",
    "WeightedGraph",
    "all_pairs",
    "defect",
    "defect_bruteforce",
    "edge_pairs",
    "generate",
    "heat_apply",
    "hex_torus",
    "k_exponential_estimate",
    "k_linear",
    "k_linear_sampling_oracle",
    "k_ollivier",
    "k_quadratic_estimate",
    "load_graph",
    "spectrum",
]
