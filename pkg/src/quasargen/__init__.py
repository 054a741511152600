"""Entropy-regularized exponential-family solution generators over exact
enumerations of small combinatorial problems."""

__version__ = "0.1.0"

from .problems import AssignmentProblem, CSPInstance, Graph, erdos_renyi, \
    load_instance, save_instance
from .encodings import ProblemEncoding, brute_force_optimum, encode_max_k_csp, \
    encode_maxcut, encode_mincut, encode_mwbm, encode_tsp, validate_encoding
from .generator import Distribution, MixtureParams, gibbs_density, \
    mixture_density, neg_entropy, regularizer, sample
from .objective import GradReport, PriorSpec, exact_grad, exact_loss, \
    exact_reg_loss, policy_grad_estimate
from .optimizer import SGDConfig, Trajectory, project, quasar_certificate, \
    run_psgd
from .landscape import GridSpec, find_bad_vertex, grid_eval, product_landscape, \
    vanishing_gradient_scan
from .scorer_nn import MLPParams, init_mlp, mlp_density, mlp_grad, mlp_score

__all__ = [
    "AssignmentProblem", "CSPInstance", "Graph", "erdos_renyi",
    "load_instance", "save_instance",
    "ProblemEncoding", "brute_force_optimum", "encode_max_k_csp",
    "encode_maxcut", "encode_mincut", "encode_mwbm", "encode_tsp",
    "validate_encoding",
    "Distribution", "MixtureParams", "gibbs_density", "mixture_density",
    "neg_entropy", "regularizer", "sample",
    "GradReport", "PriorSpec", "exact_grad", "exact_loss", "exact_reg_loss",
    "policy_grad_estimate",
    "SGDConfig", "Trajectory", "project", "quasar_certificate", "run_psgd",
    "GridSpec", "find_bad_vertex", "grid_eval", "product_landscape",
    "vanishing_gradient_scan",
    "MLPParams", "init_mlp", "mlp_density", "mlp_grad", "mlp_score",
]
