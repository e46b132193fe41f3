"""Linear structural equation models on mixed graphs: parametrization,
separation, decomposition, identifiability and polynomial constraints."""

__version__ = "0.1.0"

from .algebra import Polynomial, RationalFunction, parse_polynomial
from .cas import emit_cas_script
from .constraints import all_constraints, certify_constraint
from .decomposition import mixed_components, tian_tau, tian_tau_all, tian_tau_inverse
from .estimators import ConstraintTester, LinearSEM, TianDecomposer
from .graph import GraphError, MixedGraph, parse_graph, read_graph
from .identifiability import fiber_degree_estimate, global_id, htc_identifiable, identify, recover_parameters
from .numerics import phi_numeric, sample_params
from .parametrization import list_treks, phi_symbolic
from .separation import d_separated, trek_separation_rank

__all__ = [
    "__version__", "Polynomial", "RationalFunction", "parse_polynomial", "emit_cas_script",
    "all_constraints", "certify_constraint", "mixed_components", "tian_tau", "tian_tau_all",
    "tian_tau_inverse", "ConstraintTester", "LinearSEM", "TianDecomposer", "GraphError", "MixedGraph",
    "parse_graph", "read_graph", "fiber_degree_estimate", "global_id", "htc_identifiable", "identify",
    "recover_parameters", "phi_numeric", "sample_params", "list_treks", "phi_symbolic", "d_separated",
    "trek_separation_rank",
]
