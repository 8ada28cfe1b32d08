"""Contraction certificates for reaction-diffusion systems and diffusively coupled networks."""

from .certificates import (
    ContractionCertificate,
    SweepSpec,
    certify_contraction,
    check_diffusion_compat,
    check_lemma_conditions,
    example1_analytic_verdict,
    example1_det,
    example1_weight,
    find_indefinite_point,
    lyapunov_residual,
    mu_from_lyapunov,
    remark_convert,
    sup_mu_over_domain,
)
from .lognorm import DiagWeight, Weight, mu1_weighted, mu2, mu2_weighted, muinf_weighted, network_norm, weighted_vec_norm
from .matrix_core import is_positive_definite, kron, sqrt_pd, sym_eig, symmetric_part
from .models import DiffusionSpec, ReactionSystem, example1, example2, linear_system, validate_jacobian
from .netsim import (
    Laplacian,
    NetworkSystem,
    TrajectoryLog,
    check_contraction_bound,
    fit_decay_rate,
    graph_laplacian,
    integrate,
    neumann_laplacian_1d,
    pair_divergence,
    pair_divergences,
    phi_monitor,
    stability_bound,
)

__version__ = "0.1.0"

__all__ = [
    "ContractionCertificate",
    "DiagWeight",
    "DiffusionSpec",
    "Laplacian",
    "NetworkSystem",
    "ReactionSystem",
    "SweepSpec",
    "TrajectoryLog",
    "Weight",
    "certify_contraction",
    "check_contraction_bound",
    "check_diffusion_compat",
    "check_lemma_conditions",
    "example1",
    "example1_analytic_verdict",
    "example1_det",
    "example1_weight",
    "example2",
    "find_indefinite_point",
    "fit_decay_rate",
    "graph_laplacian",
    "integrate",
    "is_positive_definite",
    "kron",
    "linear_system",
    "lyapunov_residual",
    "mu1_weighted",
    "mu2",
    "mu2_weighted",
    "mu_from_lyapunov",
    "muinf_weighted",
    "network_norm",
    "neumann_laplacian_1d",
    "pair_divergence",
    "pair_divergences",
    "phi_monitor",
    "remark_convert",
    "sqrt_pd",
    "stability_bound",
    "sup_mu_over_domain",
    "sym_eig",
    "symmetric_part",
    "validate_jacobian",
    "weighted_vec_norm",
]
