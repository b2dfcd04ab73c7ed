"""q-middle convolution for q-Painleve VI, its integral transforms, the
W(D5^(1)) symmetry and the q-Heun specialisation.

The hot kernels come from a compiled extension when it is available and
from numpy otherwise; ``BACKEND`` says which one is active.
"""
from ._backend import BACKEND
from .campaign import (CampaignConfig, CampaignReport, run_campaign, run_heun_campaign,
                       run_identity_campaign, run_transform_campaign, run_weyl_campaign)
from .engine import (closed_form_mc, compute_subspaces, middle_convolution, parameter_map_mc,
                     q_convolution, quotient_matrices)
from .errors import InvalidInputError, QMiddleError, SingularityError
from .numerics import DEFAULT_TRUNCATION, ZETA, Truncation, p_lambda, q_pochhammer
from .qheun import QHeunParams, build_qheun, heun_to_qpvi, heun_transform_params, qpvi_to_heun
from .qpvi import PartialFractionSystem, QPVIParams, build_A, build_B, kernel_vectors, random_qpvi_params
from .weyl import KNYParams, WeylWord, apply_generator, apply_word, js_to_kny, kny_to_js

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CampaignConfig", "CampaignReport", "DEFAULT_TRUNCATION", "InvalidInputError",
    "KNYParams", "PartialFractionSystem", "QHeunParams", "QMiddleError", "QPVIParams",
    "SingularityError", "Truncation", "WeylWord", "ZETA", "apply_generator", "apply_word",
    "build_A", "build_B", "build_qheun", "closed_form_mc", "compute_subspaces", "heun_to_qpvi",
    "heun_transform_params", "js_to_kny", "kernel_vectors", "kny_to_js", "middle_convolution",
    "p_lambda", "parameter_map_mc", "q_convolution", "q_pochhammer", "qpvi_to_heun",
    "quotient_matrices", "random_qpvi_params", "run_campaign", "run_heun_campaign",
    "run_identity_campaign", "run_transform_campaign", "run_weyl_campaign",
]
