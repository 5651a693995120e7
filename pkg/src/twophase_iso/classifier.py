"""Global minimizer of the two-phase problem for a given parameter set.

In the canonical orientation ``V_minus/rho_minus >= V_plus/rho_plus`` the
threshold ``gamma*`` is nonnegative and

* ``gamma < gamma*``: the type II set ``Omega_gamma`` is the minimizer;
* ``gamma >= gamma*``: the type I set ``Omega*`` is the minimizer.

Reversed orientations are reflected through the hyperplane, classified, and
reflected back; there the type II minimizer satisfies
``rho_minus cos(alpha) = -gamma = rho_plus cos(beta)``.  Minimizers are unique up
to translations along the hyperplane, which are not represented.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .candidate_solver import (
    ThresholdResult,
    candidate_type_I,
    candidate_type_II,
    gamma_star,
)
from .cap_geometry import Candidate, CostBreakdown, Kind, ProblemParams, total_cost

__all__ = ["Regime", "ClassificationResult", "classify", "AT_THRESHOLD_RTOL"]

AT_THRESHOLD_RTOL = 1e-12


class Regime(str, Enum):
    BELOW = "BelowThreshold"
    AT = "AtThreshold"
    ABOVE = "AboveThreshold"


@dataclass(frozen=True)
class ClassificationResult:
    params: ProblemParams
    threshold: ThresholdResult
    minimizer: Candidate
    cost: CostBreakdown
    regime: Regime
    orientation_swapped: bool

    def to_dict(self) -> dict:
        """Flat JSON-ready record."""
        c = self.minimizer
        return {
            "params": self.params.to_dict(),
            "gamma_star": self.threshold.gamma_star,
            "regime": self.regime.value,
            "alpha": c.alpha,
            "beta": c.beta,
            "R_minus": c.R_minus,
            "R_plus": c.R_plus,
            "cost": self.cost.to_dict(),
            "orientation_swapped": self.orientation_swapped,
        }


def _classify_canonical(p: ProblemParams) -> tuple[ThresholdResult, Candidate, Regime]:
    threshold = gamma_star(p)
    g_star = threshold.gamma_star
    gamma = p.gamma
    if abs(gamma - g_star) <= AT_THRESHOLD_RTOL * max(1.0, abs(g_star)):
        return threshold, candidate_type_I(p, threshold), Regime.AT
    if gamma > g_star:
        return threshold, candidate_type_I(p, threshold), Regime.ABOVE
    # gamma < gamma* < min(rho), so Omega_gamma exists
    c = candidate_type_II(gamma, p)
    if c.kind is Kind.TYPE_I:
        # within the geometric tolerance of the threshold: Omega_gamma is Omega*
        return threshold, candidate_type_I(p, threshold), Regime.AT
    return threshold, c, Regime.BELOW


def classify(p: ProblemParams) -> ClassificationResult:
    """Classify ``p`` and return its minimizer with the cost breakdown.

    ``threshold`` and ``minimizer`` are reported in the caller's orientation,
    so ``threshold.gamma_star`` is negative when ``orientation_swapped`` is set.
    The regime compares ``gamma`` with ``|gamma*|``.
    """
    swapped = p.volume_ratio_sign() < 0
    q = p.mirrored() if swapped else p
    threshold, c, regime = _classify_canonical(q)
    if swapped:
        threshold = threshold.mirrored()
        c = c.mirrored()
    return ClassificationResult(
        params=p,
        threshold=threshold,
        minimizer=c,
        cost=total_cost(c, p),
        regime=regime,
        orientation_swapped=swapped,
    )
