"""Two-cap candidate sets and their closed-form measures.

A candidate is the union of two spherical caps glued along the hyperplane
``x1 = 0``.  The left cap is the part of the ball of radius ``R_minus`` centred
at ``(-R_minus cos(alpha), 0, ..., 0)`` lying in ``x1 < 0``; the right cap is the
part of the ball of radius ``R_plus`` centred at ``(-R_plus cos(beta), 0, ..., 0)``
lying in ``x1 > 0``.  The centre convention is inferred from the Cavalieri
substitution ``x = R cos(theta)`` and is checked against slab integration in the
test-suite; the source only labels the centres in a figure.

Weighted volumes are ``rho * |Omega_pm|``, never raw Lebesgue volumes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum

import numpy as np

from .special_functions import DomainError, Side, cap_integrals, unit_ball_volume

__all__ = [
    "TOL_GEOM",
    "Kind",
    "ProblemParams",
    "Candidate",
    "CostBreakdown",
    "CrossSection",
    "cap_volume",
    "cap_perimeter",
    "interface_area",
    "total_cost",
    "reduced_cost",
    "radius_from_volume",
    "dF_dalpha",
    "cross_section",
    "traces_coincide",
]

#: relative tolerance for the coincidence of the two trace radii (type I test)
TOL_GEOM = 1e-9

_ROUND_TRIP_RTOL = 1e-12
_CONSTRAINED_RTOL = 1e-9


class Kind(str, Enum):
    """Which transmission condition a candidate satisfies."""

    TYPE_I = "TypeI"
    TYPE_II_PLUS = "TypeII_plus"
    TYPE_II_MINUS = "TypeII_minus"

    def mirrored(self) -> "Kind":
        if self is Kind.TYPE_II_PLUS:
            return Kind.TYPE_II_MINUS
        if self is Kind.TYPE_II_MINUS:
            return Kind.TYPE_II_PLUS
        return self


@dataclass(frozen=True)
class ProblemParams:
    """One instance of the two-phase problem.

    ``V_minus`` and ``V_plus`` are *weighted* volumes: the constraint reads
    ``rho_minus * |Omega_-| = V_minus`` and likewise on the right.
    """

    N: int
    rho_minus: float
    rho_plus: float
    V_minus: float
    V_plus: float
    gamma: float = 0.0

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 2:
            raise DomainError(f"N must be an integer >= 2, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        for name in ("rho_minus", "rho_plus", "V_minus", "V_plus"):
            value = float(getattr(self, name))
            if not (value > 0.0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)
        gamma = float(self.gamma)
        if not (gamma >= 0.0 and math.isfinite(gamma)):
            raise DomainError(f"gamma must be nonnegative and finite, got {gamma!r}")
        object.__setattr__(self, "gamma", gamma)

    @property
    def omega(self) -> float:
        """Volume of the unit (N-1)-ball."""
        return unit_ball_volume(self.N - 1)

    @property
    def rho_min(self) -> float:
        return min(self.rho_minus, self.rho_plus)

    def volume_ratio_sign(self) -> int:
        """Sign of ``V_minus/rho_minus - V_plus/rho_plus`` (exact comparison)."""
        lhs = self.V_minus * self.rho_plus
        rhs = self.V_plus * self.rho_minus
        return (lhs > rhs) - (lhs < rhs)

    def mirrored(self) -> "ProblemParams":
        """Reflect through the hyperplane: the two phases swap sides."""
        return replace(
            self,
            rho_minus=self.rho_plus,
            rho_plus=self.rho_minus,
            V_minus=self.V_plus,
            V_plus=self.V_minus,
        )

    def with_gamma(self, gamma: float) -> "ProblemParams":
        return replace(self, gamma=gamma)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemParams":
        return cls(**{k: data[k] for k in ("N", "rho_minus", "rho_plus", "V_minus", "V_plus")},
                   gamma=data.get("gamma", 0.0))


def traces_coincide(R_minus: float, alpha: float, R_plus: float, beta: float) -> bool:
    """True when the caps meet the hyperplane in spheres of equal radius."""
    gap = abs(R_minus * math.sin(alpha) - R_plus * math.sin(beta))
    return gap <= TOL_GEOM * max(R_minus, R_plus)


@dataclass(frozen=True)
class Candidate:
    """Two caps with incidence angles ``alpha``, ``beta`` and radii ``R_minus``, ``R_plus``.

    ``kind`` defaults to the geometric guess: ``TYPE_I`` if the trace radii
    coincide, else ``TYPE_II_PLUS`` when the left trace is the larger one.
    An explicit type II tag on coincident traces is rejected, and so is a type I
    tag on distinct ones.
    """

    alpha: float
    beta: float
    R_minus: float
    R_plus: float
    kind: Kind | None = field(default=None)

    def __post_init__(self):
        for name in ("alpha", "beta"):
            value = float(getattr(self, name))
            if not 0.0 < value < math.pi:
                raise DomainError(f"{name} must lie strictly inside (0, pi), got {value!r}")
            object.__setattr__(self, name, value)
        for name in ("R_minus", "R_plus"):
            value = float(getattr(self, name))
            if not (value > 0.0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive, got {value!r}")
            object.__setattr__(self, name, value)
        coincide = traces_coincide(self.R_minus, self.alpha, self.R_plus, self.beta)
        if self.kind is None:
            if coincide:
                kind = Kind.TYPE_I
            elif self.trace_minus > self.trace_plus:
                kind = Kind.TYPE_II_PLUS
            else:
                kind = Kind.TYPE_II_MINUS
            object.__setattr__(self, "kind", kind)
        else:
            kind = Kind(self.kind)
            object.__setattr__(self, "kind", kind)
            if (kind is Kind.TYPE_I) != coincide:
                raise DomainError(
                    f"kind {kind.value} inconsistent with trace radii "
                    f"{self.trace_minus!r} and {self.trace_plus!r}"
                )

    @property
    def center_minus(self) -> float:
        """First coordinate of the left ball's centre."""
        return -self.R_minus * math.cos(self.alpha)

    @property
    def center_plus(self) -> float:
        """First coordinate of the right ball's centre."""
        return -self.R_plus * math.cos(self.beta)

    @property
    def trace_minus(self) -> float:
        return self.R_minus * math.sin(self.alpha)

    @property
    def trace_plus(self) -> float:
        return self.R_plus * math.sin(self.beta)

    def mirrored(self) -> "Candidate":
        """The same set reflected through ``x1 = 0`` (left and right swap)."""
        return Candidate(
            alpha=math.pi - self.beta,
            beta=math.pi - self.alpha,
            R_minus=self.R_plus,
            R_plus=self.R_minus,
            kind=self.kind.mirrored(),
        )


@dataclass(frozen=True)
class CostBreakdown:
    perim_minus: float
    perim_plus: float
    interface: float
    total: float

    @classmethod
    def from_terms(cls, perim_minus: float, perim_plus: float, interface: float) -> "CostBreakdown":
        return cls(perim_minus, perim_plus, interface, perim_minus + perim_plus + interface)

    def to_dict(self) -> dict:
        return asdict(self)


def cap_volume(R: float, angle: float, side: Side | str, N: int) -> float:
    """Lebesgue volume ``omega R^N I`` of one cap."""
    I, _ = cap_integrals(angle, N, side)
    return unit_ball_volume(N - 1) * R**N * I


def cap_perimeter(R: float, angle: float, side: Side | str, N: int) -> float:
    """(N-1)-measure ``(N-1) omega R^(N-1) J`` of one cap's curved boundary."""
    _, J = cap_integrals(angle, N, side)
    return (N - 1) * unit_ball_volume(N - 1) * R ** (N - 1) * J


def interface_area(R_minus: float, alpha: float, R_plus: float, beta: float, N: int) -> float:
    """Measure of the flat annulus between the two traces on the hyperplane."""
    omega = unit_ball_volume(N - 1)
    return omega * abs((R_minus * math.sin(alpha)) ** (N - 1) - (R_plus * math.sin(beta)) ** (N - 1))


def total_cost(c: Candidate, p: ProblemParams) -> CostBreakdown:
    """Weighted perimeter of a candidate, split into its three terms.

    A type I candidate has no interface by definition, so its interface term
    is exactly zero rather than the round-off left in the trace mismatch.
    """
    perim_minus = p.rho_minus * cap_perimeter(c.R_minus, c.alpha, Side.LEFT, p.N)
    perim_plus = p.rho_plus * cap_perimeter(c.R_plus, c.beta, Side.RIGHT, p.N)
    if c.kind is Kind.TYPE_I:
        interface = 0.0
    else:
        interface = p.gamma * interface_area(c.R_minus, c.alpha, c.R_plus, c.beta, p.N)
    return CostBreakdown.from_terms(perim_minus, perim_plus, interface)


def radius_from_volume(angle: float, side: Side | str, p: ProblemParams) -> float:
    """Radius of the cap with incidence ``angle`` that carries the prescribed weighted volume."""
    side = Side(side)
    I, _ = cap_integrals(angle, p.N, side)
    if side is Side.LEFT:
        rho, V = p.rho_minus, p.V_minus
    else:
        rho, V = p.rho_plus, p.V_plus
    R = (V / (rho * p.omega * I)) ** (1.0 / p.N)
    got = rho * p.omega * R**p.N * I
    if abs(got - V) > _ROUND_TRIP_RTOL * V:
        raise ArithmeticError(f"volume round-trip failed: {got!r} != {V!r}")
    return R


def reduced_cost(alpha: float, beta: float, p: ProblemParams) -> CostBreakdown:
    """Cost of the volume-constrained two-cap set with angles ``(alpha, beta)``.

    Radii are forced by the volume constraints; the interface term keeps its
    absolute value, so this is the two-variable reduced functional on the
    whole of ``(0, pi)^2``.
    """
    R_minus = radius_from_volume(alpha, Side.LEFT, p)
    R_plus = radius_from_volume(beta, Side.RIGHT, p)
    perim_minus = p.rho_minus * cap_perimeter(R_minus, alpha, Side.LEFT, p.N)
    perim_plus = p.rho_plus * cap_perimeter(R_plus, beta, Side.RIGHT, p.N)
    interface = p.gamma * interface_area(R_minus, alpha, R_plus, beta, p.N)
    return CostBreakdown.from_terms(perim_minus, perim_plus, interface)


def _check_constrained(c: Candidate, p: ProblemParams) -> None:
    for R, angle, side, rho, V in (
        (c.R_minus, c.alpha, Side.LEFT, p.rho_minus, p.V_minus),
        (c.R_plus, c.beta, Side.RIGHT, p.rho_plus, p.V_plus),
    ):
        got = rho * cap_volume(R, angle, side, p.N)
        if abs(got - V) > _CONSTRAINED_RTOL * V:
            raise DomainError(
                f"candidate is off the volume-constrained family on the {side.value} side: "
                f"weighted volume {got!r} != {V!r}"
            )


def dF_dalpha(c: Candidate, p: ProblemParams, sign_branch: int) -> float:
    """Partial alpha-derivative of the reduced cost along the constrained family.

    ``sign_branch`` picks the side of the absolute value in the interface
    term: ``+1`` where ``R_minus sin(alpha) > R_plus sin(beta)``, ``-1`` where
    it is smaller.  At a type I configuration the two branches give the two
    one-sided derivatives.

    The result is ``A(alpha) * (sign_branch * gamma - rho_minus cos(alpha))``
    with the positive prefactor

        A = (N-1) omega R^(N-1) s^(N-2) ((N-1) J c + s^(N-1)) / (N I).

    The bracket is evaluated in the equivalent form ``N c I + s^(N+1)``, which
    does not cancel as ``alpha -> pi``.
    """
    if sign_branch not in (1, -1):
        raise ValueError(f"sign_branch must be +1 or -1, got {sign_branch!r}")
    _check_constrained(c, p)
    N = p.N
    I, _ = cap_integrals(c.alpha, N, Side.LEFT)
    s, co = math.sin(c.alpha), math.cos(c.alpha)
    bracket = N * co * I + s ** (N + 1)
    prefactor = (N - 1) * p.omega * c.R_minus ** (N - 1) * s ** (N - 2) * bracket / (N * I)
    return prefactor * (sign_branch * p.gamma - p.rho_minus * co)


@dataclass(frozen=True)
class CrossSection:
    """Generatrix of a candidate in the half-plane ``x2 >= 0``.

    Both polylines start at their on-axis endpoint.  ``interface`` is the
    ``(low, high)`` pair of heights of the flat annulus on the axis, or ``None``
    when the traces coincide.
    """

    left_theta: np.ndarray
    left: np.ndarray
    right_theta: np.ndarray
    right: np.ndarray
    interface: tuple[float, float] | None


def cross_section(c: Candidate, resolution: int = 64) -> CrossSection:
    if resolution < 8:
        raise ValueError(f"resolution must be at least 8, got {resolution!r}")
    left_theta = np.linspace(c.alpha, math.pi, resolution)
    left = np.column_stack(
        (c.R_minus * (np.cos(left_theta) - math.cos(c.alpha)), c.R_minus * np.sin(left_theta))
    )
    right_theta = np.linspace(c.beta, 0.0, resolution)
    right = np.column_stack(
        (c.R_plus * (np.cos(right_theta) - math.cos(c.beta)), c.R_plus * np.sin(right_theta))
    )
    # endpoints exactly on the axis and on the symmetry line
    left[0] = (0.0, c.trace_minus)
    right[0] = (0.0, c.trace_plus)
    left[-1, 1] = 0.0
    right[-1, 1] = 0.0
    if c.kind is Kind.TYPE_I:
        interface = None
    else:
        lo, hi = sorted((c.trace_minus, c.trace_plus))
        interface = (lo, hi)
    return CrossSection(left_theta, left, right_theta, right, interface)
