"""Closed-form stationary candidates and the type I/II threshold.

For a signed cost ``g`` with ``|g| < min(rho_minus, rho_plus)`` the candidate
``Omega_g`` has ``rho_minus cos(alpha) = g = rho_plus cos(beta)`` and radii fixed
by the volume constraints.  The type I candidate is the member of this family
whose trace radii coincide; it is located as the root of the strictly
decreasing mismatch

    L(g) = (R_minus sin alpha)^N - (R_plus sin beta)^N
         = V_minus/(omega rho_minus) L1(alpha) - V_plus/(omega rho_plus) L2(beta),

with ``L1 = sin^N / I_minus`` increasing and ``L2 = sin^N / I_plus`` decreasing.
Existence of the root is argued from the limits of ``L`` at the ends of the
admissible interval (intermediate value theorem), not from existence of a
global minimizer.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .cap_geometry import Candidate, Kind, ProblemParams, radius_from_volume, traces_coincide
from .special_functions import DomainError, Side, cap_integrals

__all__ = [
    "RootFindingError",
    "ThresholdResult",
    "L1",
    "L2",
    "L_value",
    "gamma_star",
    "candidate_type_II",
    "candidate_type_I",
]

_MARGIN = 1e-12
_WIDTH = 1e-13
_EXPAND = 10.0


class RootFindingError(RuntimeError):
    """The threshold bisection could not bracket a sign change."""


@dataclass(frozen=True)
class ThresholdResult:
    gamma_star: float
    alpha_star: float
    beta_star: float
    iterations: int
    residual: float

    def mirrored(self) -> "ThresholdResult":
        """The threshold seen from the reflected problem."""
        return ThresholdResult(
            gamma_star=-self.gamma_star,
            alpha_star=math.pi - self.beta_star,
            beta_star=math.pi - self.alpha_star,
            iterations=self.iterations,
            residual=self.residual,
        )

    def to_dict(self) -> dict:
        return asdict(self)


def L1(alpha: float, N: int) -> float:
    """``sin(alpha)^N / I_minus(alpha)``; strictly increasing on (0, pi)."""
    I, _ = cap_integrals(alpha, N, Side.LEFT)
    return math.sin(alpha) ** N / I


def L2(beta: float, N: int) -> float:
    """``sin(beta)^N / I_plus(beta)``; strictly decreasing on (0, pi)."""
    I, _ = cap_integrals(beta, N, Side.RIGHT)
    return math.sin(beta) ** N / I


def _angles(gamma: float, p: ProblemParams) -> tuple[float, float]:
    m = p.rho_min
    if not abs(gamma) < m:
        raise DomainError(f"|gamma| = {abs(gamma)!r} must be below min(rho) = {m!r}")
    return math.acos(gamma / p.rho_minus), math.acos(gamma / p.rho_plus)


def L_value(gamma: float, p: ProblemParams) -> float:
    """Trace mismatch ``(R_minus sin alpha)^N - (R_plus sin beta)^N`` of ``Omega_gamma``.

    ``p.gamma`` is ignored; the signed cost is the ``gamma`` argument.
    """
    alpha, beta = _angles(gamma, p)
    omega = p.omega
    return (p.V_minus / (omega * p.rho_minus)) * L1(alpha, p.N) - (
        p.V_plus / (omega * p.rho_plus)
    ) * L2(beta, p.N)


def _threshold(gamma: float, p: ProblemParams, iterations: int) -> ThresholdResult:
    alpha, beta = _angles(gamma, p)
    return ThresholdResult(gamma, alpha, beta, iterations, abs(L_value(gamma, p)))


def gamma_star(p: ProblemParams) -> ThresholdResult:
    """Root of ``L`` by bisection on ``(-m, m)``, ``m = min(rho_minus, rho_plus)``.

    The search starts at the margin ``1e-12 m`` from each end and moves the
    offending end geometrically closer to ``+-m`` until the sign change is
    bracketed; ``L`` diverges at one end so this always succeeds in exact
    arithmetic.  The first split is at zero so the sign of the result follows
    the sign of ``V_minus/rho_minus - V_plus/rho_plus`` exactly.
    """
    m = p.rho_min
    if p.volume_ratio_sign() == 0:
        return _threshold(0.0, p, 0)

    floor = 4.0 * math.ulp(m)
    lo_margin = hi_margin = _MARGIN * m
    lo, hi = -m + lo_margin, m - hi_margin
    while L_value(lo, p) <= 0.0:
        lo_margin /= _EXPAND
        if lo_margin < floor:
            raise RootFindingError(f"no positive value of L found near gamma = -{m!r} for {p}")
        lo = -m + lo_margin
    while L_value(hi, p) >= 0.0:
        hi_margin /= _EXPAND
        if hi_margin < floor:
            raise RootFindingError(f"no negative value of L found near gamma = {m!r} for {p}")
        hi = m - hi_margin

    iterations = 0
    mid = 0.0
    while True:
        iterations += 1
        value = L_value(mid, p)
        if value == 0.0:
            return _threshold(mid, p, iterations)
        if value > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _WIDTH * m:
            break
        mid = 0.5 * (lo + hi)
    return _threshold(0.5 * (lo + hi), p, iterations)


def candidate_type_II(signed_gamma: float, p: ProblemParams) -> Candidate:
    """The stationary candidate ``Omega_g`` for the signed cost ``g = signed_gamma``.

    Pass ``+gamma`` for ``Omega_gamma`` and ``-gamma`` for ``Omega_{-gamma}``.  The
    tag is ``TYPE_II_PLUS`` for a nonnegative argument and ``TYPE_II_MINUS`` for a
    negative one, unless the traces coincide, in which case it is ``TYPE_I``.
    """
    alpha, beta = _angles(signed_gamma, p)
    R_minus = radius_from_volume(alpha, Side.LEFT, p)
    R_plus = radius_from_volume(beta, Side.RIGHT, p)
    if traces_coincide(R_minus, alpha, R_plus, beta):
        kind = Kind.TYPE_I
    elif signed_gamma >= 0.0:
        kind = Kind.TYPE_II_PLUS
    else:
        kind = Kind.TYPE_II_MINUS
    return Candidate(alpha, beta, R_minus, R_plus, kind)


def candidate_type_I(p: ProblemParams, threshold: ThresholdResult | None = None) -> Candidate:
    """The type I candidate ``Omega*``: ``Omega_g`` at ``g = gamma*``."""
    if threshold is None:
        threshold = gamma_star(p)
    c = candidate_type_II(threshold.gamma_star, p)
    if c.kind is not Kind.TYPE_I:
        raise RootFindingError(
            f"trace radii {c.trace_minus!r} and {c.trace_plus!r} do not coincide at "
            f"gamma* = {threshold.gamma_star!r}"
        )
    return c
