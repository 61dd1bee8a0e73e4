"""Bipartite hardcore model: uniqueness thresholds, samplers and exact oracles."""
__version__ = "0.1.0"

from .graph import BipartiteGraph, parse_graph, random_left_regular, serialize_graph
from .exact import (
    ExactDistribution, Fugacities, InfluenceMatrix, conditional_marginal, dist_side,
    influence_matrix, max_eigenvalue, partition_function,
)
from .recursion import TreeParams, F, dF, H, U, contraction_sup, find_fixpoints
from .uniqueness import (
    ThresholdReport, closed_form_pair, is_delta_unique, is_delta_unique_pair,
    is_delta_unique_tuple, lambda_hat, solve_critical_system, solve_w_delta,
)
from .samplers import ChainState, FieldDynamicsParams, field_dynamics_run, paper_parameters
from .diagnostics import MixingCurve, SIReport, mixing_curve, si_check, tv_distance
from .ising import IsingInstance, reduce, verify_reduction

__all__ = [
    "BipartiteGraph", "parse_graph", "random_left_regular", "serialize_graph",
    "ExactDistribution", "Fugacities", "InfluenceMatrix", "conditional_marginal",
    "dist_side", "influence_matrix", "max_eigenvalue", "partition_function",
    "TreeParams", "F", "dF", "H", "U", "contraction_sup", "find_fixpoints",
    "ThresholdReport", "closed_form_pair", "is_delta_unique", "is_delta_unique_pair",
    "is_delta_unique_tuple", "lambda_hat", "solve_critical_system", "solve_w_delta",
    "ChainState", "FieldDynamicsParams", "field_dynamics_run", "paper_parameters",
    "MixingCurve", "SIReport", "mixing_curve", "si_check", "tv_distance",
    "IsingInstance", "reduce", "verify_reduction",
]
