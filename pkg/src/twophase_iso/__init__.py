"""Minimizers of a two-phase weighted isoperimetric problem in R^N.

A set of prescribed weighted volumes on each side of a hyperplane pays
``rho_minus`` and ``rho_plus`` per unit boundary area on the two sides and
``gamma`` per unit area of boundary lying in the hyperplane.  Minimizers are
unions of two spherical caps; :func:`classify` decides which of the two
closed-form candidates wins.
"""

from .candidate_solver import ThresholdResult, candidate_type_I, candidate_type_II, gamma_star
from .cap_geometry import Candidate, CostBreakdown, Kind, ProblemParams, total_cost
from .classifier import ClassificationResult, Regime, classify
from .special_functions import DomainError, Side, cap_integrals, sine_power_integral

__all__ = [
    "Candidate",
    "ClassificationResult",
    "CostBreakdown",
    "DomainError",
    "Kind",
    "ProblemParams",
    "Regime",
    "Side",
    "ThresholdResult",
    "candidate_type_I",
    "candidate_type_II",
    "cap_integrals",
    "classify",
    "gamma_star",
    "sine_power_integral",
    "total_cost",
]

__version__ = "0.1.0"
