"""Sine-power integrals and unit-ball volumes.

Everything here is evaluated in closed form: the reduction recurrence

    W_n(a, b) = [cos a sin^{n-1} a - cos b sin^{n-1} b] / n + (n - 1)/n W_{n-2}(a, b)

seeded with W_0 = b - a and W_1 = cos a - cos b.  Short arcs touching 0 or pi
(where the recurrence cancels catastrophically) switch to the positive series
obtained from the substitution u = sin(theta).  No quadrature is used; the
quadrature reference lives in :mod:`twophase_iso.verification_oracle`.
"""

from __future__ import annotations

import math
from enum import Enum
from functools import lru_cache

__all__ = [
    "DomainError",
    "Side",
    "sine_power_integral",
    "cap_integrals",
    "unit_ball_volume",
    "wallis_half",
]

# arcs with sin^2(x) <= 1/2 use the series (ratio of successive terms <= 1/2)
_SERIES_LIMIT = math.pi / 4
_SERIES_RTOL = 1e-17
_SERIES_MAX_TERMS = 400


class DomainError(ValueError):
    """An argument lies outside the domain of a closed-form formula."""


class Side(str, Enum):
    """Half-space of a cap: LEFT integrates over [alpha, pi], RIGHT over [0, beta]."""

    LEFT = "left"
    RIGHT = "right"


def _check_exponent(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"exponent must be a nonnegative integer, got {n!r}")
    return int(n)


def _recurrence(n: int, a: float, b: float) -> float:
    """Forward reduction recurrence on [a, b]; accurate in absolute terms."""
    if n % 2 == 0:
        w = b - a
        k = 2
    else:
        # cos a - cos b without cancellation for nearby endpoints
        w = 2.0 * math.sin(0.5 * (a + b)) * math.sin(0.5 * (b - a))
        k = 3
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)
    while k <= n:
        w = (ca * sa ** (k - 1) - cb * sb ** (k - 1)) / k + (k - 1) / k * w
        k += 2
    return w


def _series(n: int, x: float) -> float:
    # int_0^x sin^n = sum_k C(2k,k)/4^k * s^(n+2k+1)/(n+2k+1), s = sin x
    s = math.sin(x)
    if s == 0.0:
        return 0.0
    s2 = s * s
    power = s ** (n + 1)
    coeff = 1.0
    total = 0.0
    for k in range(_SERIES_MAX_TERMS):
        term = coeff * power / (n + 2 * k + 1)
        total += term
        if term <= _SERIES_RTOL * total:
            break
        coeff *= (2 * k + 1) / (2 * k + 2)
        power *= s2
    return total


@lru_cache(maxsize=None)
def wallis_half(n: int) -> float:
    """Return the integral of sin^n over [0, pi/2]."""
    n = _check_exponent(n)
    w = math.pi / 2 if n % 2 == 0 else 1.0
    for k in range(2 + n % 2, n + 1, 2):
        w *= (k - 1) / k
    return w


def _primitive(n: int, x: float) -> float:
    """Integral of sin^n over [0, x], relatively accurate for every x in [0, pi]."""
    if x <= _SERIES_LIMIT:
        return _series(n, x)
    if x <= math.pi / 2:
        return _recurrence(n, 0.0, x)
    return 2.0 * wallis_half(n) - _primitive(n, math.pi - x)


def sine_power_integral(n: int, a: float, b: float) -> float:
    """Integral of ``sin(theta)**n`` over ``[a, b]`` with ``0 <= a <= b <= pi``.

    Integrals anchored at 0 or at pi keep full relative accuracy even for very
    short arcs, which is what the cap integrals near degenerate angles need.

    Raises
    ------
    DomainError
        If ``n`` is not a nonnegative integer, or the angles are out of order
        or outside ``[0, pi]``.
    """
    n = _check_exponent(n)
    a = float(a)
    b = float(b)
    if not (0.0 <= a <= math.pi and 0.0 <= b <= math.pi):
        raise DomainError(f"angles must lie in [0, pi], got a={a!r}, b={b!r}")
    if a > b:
        raise DomainError(f"lower angle {a!r} exceeds upper angle {b!r}")
    if n == 0:
        return b - a
    if a == b:
        return 0.0
    if a == 0.0:
        return _primitive(n, b)
    if b == math.pi:
        return _primitive(n, math.pi - a)
    return _recurrence(n, a, b)


def cap_integrals(angle: float, N: int, side: Side | str) -> tuple[float, float]:
    """Return ``(I, J)`` for one cap: integrals of sin^N and sin^(N-2).

    For ``side="left"`` the range is ``[angle, pi]`` (the ``I_-(alpha)``,
    ``J_-(alpha)`` pair); for ``side="right"`` it is ``[0, angle]``.
    """
    side = Side(side)
    if isinstance(N, bool) or int(N) != N or N < 2:
        raise DomainError(f"dimension N must be an integer >= 2, got {N!r}")
    N = int(N)
    angle = float(angle)
    if not 0.0 < angle < math.pi:
        raise DomainError(f"cap angle must lie strictly inside (0, pi), got {angle!r}")
    if side is Side.LEFT:
        lo, hi = angle, math.pi
    else:
        lo, hi = 0.0, angle
    return sine_power_integral(N, lo, hi), sine_power_integral(N - 2, lo, hi)


@lru_cache(maxsize=None)
def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d, pi^(d/2) / Gamma(d/2 + 1).

    Gamma is evaluated at integers and half-integers only, through
    Gamma(x + 1) = x Gamma(x) seeded with Gamma(1) = 1 and Gamma(1/2) = sqrt(pi).
    """
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise DomainError(f"ball dimension must be an integer >= 1, got {d!r}")
    d = int(d)
    if d % 2 == 0:
        x, gamma = 1.0, 1.0
    else:
        x, gamma = 0.5, math.sqrt(math.pi)
    target = d / 2 + 1
    while x < target:
        gamma *= x
        x += 1.0
    return math.pi ** (d / 2) / gamma
