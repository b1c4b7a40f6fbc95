"""Markoff maps on the Farey tree: BQ tests, gap-function identities and their geometry."""

from .branch_kernel import DomainError, Psi, edge_psi, frak_h, frak_h_hat, h, nu_of_mu
from .bq_analyzer import BqVerdict, check_bq
from .identity_evaluator import IdentityReport, branch_sum, mcshane_sum
from .markoff_engine import MarkoffMap, from_mu, from_triple, reconstruct_representation

__all__ = [
    "BqVerdict",
    "DomainError",
    "IdentityReport",
    "MarkoffMap",
    "Psi",
    "branch_sum",
    "check_bq",
    "edge_psi",
    "frak_h",
    "frak_h_hat",
    "from_mu",
    "from_triple",
    "h",
    "mcshane_sum",
    "nu_of_mu",
    "reconstruct_representation",
]

__version__ = "0.1.0"
