"""Independent numerical checks of the closed-form solution.

Nothing in this module calls :mod:`twophase_iso.special_functions`.  Integrals
are computed by quadrature (adaptive Simpson for the scalar reference,
Gauss-Legendre on the generatrix for the vectorised cost), and the unit-ball
volume comes from :func:`math.gamma`.  The classifier is only consulted by
:func:`compare`, to have something to compare against.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import brentq

from .cap_geometry import ProblemParams
from .polygon_flow import FlowResult, PolygonState, polygon_flow_2d, write_flow_frames

__all__ = [
    "QuadratureDepthError",
    "reference_sine_integral",
    "omega_reference",
    "generatrix_integrals",
    "oracle_cost",
    "oracle_trace_mismatch",
    "reference_L",
    "reference_gamma_star",
    "slab_volume",
    "polyline_revolution_area",
    "golden_section",
    "GridResult",
    "grid_minimize",
    "oracle_is_type_I",
    "locate_transition",
    "OracleReport",
    "compare",
    "PolygonState",
    "FlowResult",
    "polygon_flow_2d",
    "write_flow_frames",
]

logger = logging.getLogger(__name__)

TOL_ORACLE = 1e-5

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


class QuadratureDepthError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# scalar reference quadrature


def reference_sine_integral(n: int, a: float, b: float, tol: float = 1e-13,
                            max_depth: int = 50) -> float:
    """Adaptive Simpson estimate of the integral of sin^n over [a, b]."""
    if not 0.0 <= a <= b <= math.pi:
        raise ValueError(f"need 0 <= a <= b <= pi, got a={a!r}, b={b!r}")
    if a == b:
        return 0.0

    def f(t):
        return math.sin(t) ** n

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        fl = f(0.5 * (lo + mid))
        fr = f(0.5 * (mid + hi))
        left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * fr + fhi)
        delta = left + right - s
        if abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        elif depth >= max_depth:
            raise QuadratureDepthError(f"tolerance {tol} not reached on [{lo}, {hi}]")
        else:
            stack.append((lo, mid, flo, fl, fmid, left, 0.5 * eps, depth + 1))
            stack.append((mid, hi, fmid, fr, fhi, right, 0.5 * eps, depth + 1))
    return total


def omega_reference(N: int) -> float:
    """Volume of the unit (N-1)-ball from the Gamma function."""
    d = N - 1
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


# --------------------------------------------------------------------------
# vectorised generatrix quadrature


def generatrix_integrals(lo, hi, N: int):
    """Volume and area integrals of a unit-radius arc of revolution.

    The arc is ``x = cos(t), y = sin(t)`` for ``t`` in ``[lo, hi]``.  Returns
    ``(integral of y^(N-1) |dx/dt|, integral of y^(N-2) |ds/dt|)`` computed by
    64-point Gauss-Legendre; ``lo`` and ``hi`` broadcast.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    t = (0.5 * (hi + lo))[..., None] + half[..., None] * _GL_NODES
    y = np.sin(t)
    dx = np.abs(np.sin(t))
    ds = 1.0
    vol = half * np.sum(_GL_WEIGHTS * y ** (N - 1) * dx, axis=-1)
    area = half * np.sum(_GL_WEIGHTS * y ** (N - 2) * ds, axis=-1)
    return vol, area


def _side_terms(angle, N, omega, rho, V, left: bool):
    angle = np.asarray(angle, dtype=float)
    if left:
        vol, area = generatrix_integrals(angle, np.full_like(angle, math.pi), N)
    else:
        vol, area = generatrix_integrals(np.zeros_like(angle), angle, N)
    R = (V / (rho * omega * vol)) ** (1.0 / N)
    perim = rho * (N - 1) * omega * R ** (N - 1) * area
    trace = (R * np.sin(angle)) ** (N - 1)
    return perim, trace, R


def oracle_cost(alpha, beta, p: ProblemParams):
    """Reduced cost on the volume-constrained family, by quadrature.

    ``alpha`` and ``beta`` broadcast against each other.
    """
    omega = omega_reference(p.N)
    perim_m, trace_m, _ = _side_terms(alpha, p.N, omega, p.rho_minus, p.V_minus, True)
    perim_p, trace_p, _ = _side_terms(beta, p.N, omega, p.rho_plus, p.V_plus, False)
    return perim_m + perim_p + p.gamma * omega * np.abs(trace_m - trace_p)


def oracle_trace_mismatch(alpha: float, beta: float, p: ProblemParams) -> float:
    """``R_minus sin(alpha) - R_plus sin(beta)`` with quadrature radii, relative to the larger radius."""
    omega = omega_reference(p.N)
    _, tm, Rm = _side_terms(alpha, p.N, omega, p.rho_minus, p.V_minus, True)
    _, tp, Rp = _side_terms(beta, p.N, omega, p.rho_plus, p.V_plus, False)
    e = 1.0 / (p.N - 1)
    return float((tm**e - tp**e) / max(Rm, Rp))


def reference_L(gamma: float, p: ProblemParams) -> float:
    """Trace mismatch of the stationary family, evaluated with adaptive Simpson."""
    alpha = math.acos(gamma / p.rho_minus)
    beta = math.acos(gamma / p.rho_plus)
    omega = omega_reference(p.N)
    Rm_N = p.V_minus / (p.rho_minus * omega * reference_sine_integral(p.N, alpha, math.pi))
    Rp_N = p.V_plus / (p.rho_plus * omega * reference_sine_integral(p.N, 0.0, beta))
    return Rm_N * math.sin(alpha) ** p.N - Rp_N * math.sin(beta) ** p.N


def reference_gamma_star(p: ProblemParams, xtol: float = 1e-12) -> float:
    """Plain bisection on :func:`reference_L` over ``(-m, m)``."""
    m = min(p.rho_minus, p.rho_plus)
    lo, hi = -m * (1 - 1e-9), m * (1 - 1e-9)
    if reference_L(lo, p) <= 0 or reference_L(hi, p) >= 0:
        raise RuntimeError("reference L not bracketed")
    while hi - lo > xtol * m:
        mid = 0.5 * (lo + hi)
        if reference_L(mid, p) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --------------------------------------------------------------------------
# direct geometric measures of a cap given centre and radius


def slab_volume(center: float, R: float, x_lo: float, x_hi: float, N: int,
                n_slabs: int = 2_000_000) -> float:
    """Midpoint-rule Cavalieri integration of a ball slice.

    Integrates ``omega * (R^2 - (x - center)^2)^((N-1)/2)`` over ``[x_lo, x_hi]``.
    """
    edges = np.linspace(x_lo, x_hi, n_slabs + 1)
    mids = 0.5 * (edges[1:] + edges[:-1])
    r2 = np.clip(R * R - (mids - center) ** 2, 0.0, None)
    return omega_reference(N) * float(np.sum(r2 ** ((N - 1) / 2))) * (x_hi - x_lo) / n_slabs


def polyline_revolution_area(points: np.ndarray, N: int) -> float:
    """(N-1)-measure of the hypersurface swept by a polyline rotated about the x1 axis.

    Each segment is a frustum: the integral of ``(N-1) omega y^(N-2) ds`` with
    ``y`` linear in arc length is done exactly.
    """
    p = np.asarray(points, dtype=float)
    y0, y1 = p[:-1, 1], p[1:, 1]
    ds = np.hypot(np.diff(p[:, 0]), np.diff(p[:, 1]))
    dy = y1 - y0
    k = N - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = (y1**k - y0**k) / (k * dy)
    flat = 0.5 * (y0 + y1)
    mean_pow = np.where(np.abs(dy) > 1e-14, exact, flat ** (N - 2))
    return (N - 1) * omega_reference(N) * float(np.sum(mean_pow * ds))


# --------------------------------------------------------------------------
# brute-force minimisation of the reduced cost

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable[[float], float], a: float, b: float, iters: int):
    """Golden-section search on ``[a, b]``; returns ``(x_best, f_best)``."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


class GridResult(NamedTuple):
    alpha_hat: float
    beta_hat: float
    F_hat: float


def _beta_on_curve(alpha: float, p: ProblemParams, omega: float) -> float:
    """``beta`` whose right trace radius equals the left one at ``alpha``."""
    _, target, _ = _side_terms(alpha, p.N, omega, p.rho_minus, p.V_minus, True)
    log_target = math.log(float(target))

    def g(beta):
        _, tp, _ = _side_terms(beta, p.N, omega, p.rho_plus, p.V_plus, False)
        return math.log(float(tp)) - log_target

    lo, hi = 1e-9, math.pi - 1e-9
    if g(lo) <= 0.0:
        return lo
    if g(hi) >= 0.0:
        return hi
    return brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _grid_search(p: ProblemParams, coarse: int):
    h = math.pi / coarse
    nodes = (np.arange(coarse) + 0.5) * h
    F = oracle_cost(nodes[:, None], nodes[None, :], p)
    # argmin returns the first minimum in row-major order: smallest alpha, then beta
    i, j = np.unravel_index(int(np.argmin(F)), F.shape)
    return nodes, h, F, i, j


def grid_minimize(p: ProblemParams, coarse: int = 256, refine_iters: int = 60,
                  sweeps: int = 4) -> GridResult:
    """Exhaustive grid over ``(0, pi)^2`` followed by golden-section refinement.

    The coarse grid uses cell centres, so the degenerate angles 0 and pi are
    avoided by half a cell.  Two refinements start from the best cell:

    * alternating golden-section line searches in ``alpha`` and ``beta``, which
      converge wherever the cost is smooth (type II minima);
    * a golden-section search along the curve of coincident traces, where the
      interface term has its kink and coordinate searches stall (type I minima).

    The best of the grid point and both refinements is returned.
    """
    if coarse < 64:
        raise ValueError("coarse grid must have at least 64 cells per axis")
    if refine_iters < 20:
        raise ValueError("refine_iters must be at least 20")
    nodes, h, F, i, j = _grid_search(p, coarse)
    best = GridResult(float(nodes[i]), float(nodes[j]), float(F[i, j]))

    def cost(a, b):
        return float(oracle_cost(a, b, p))

    def window(x, width):
        return max(0.5 * h * 1e-3, x - width), min(math.pi - 0.5 * h * 1e-3, x + width)

    # coordinate-wise refinement
    a, b = best.alpha_hat, best.beta_hat
    fab = best.F_hat
    for _ in range(sweeps):
        a, _ = golden_section(lambda x: cost(x, b), *window(a, 2 * h), refine_iters)
        b, f_new = golden_section(lambda y: cost(a, y), *window(b, 2 * h), refine_iters)
        done = f_new >= fab
        fab = min(fab, f_new)
        if done:
            break
    coord = GridResult(a, b, cost(a, b))

    # refinement along the coincident-trace curve
    omega = omega_reference(p.N)

    def on_curve(x):
        return cost(x, _beta_on_curve(x, p, omega))

    a_c, f_c = golden_section(on_curve, *window(best.alpha_hat, 4 * h), refine_iters)
    curve = GridResult(a_c, _beta_on_curve(a_c, p, omega), f_c)

    return min((best, coord, curve), key=lambda r: (r.F_hat, r.alpha_hat, r.beta_hat))


def oracle_is_type_I(result: GridResult, p: ProblemParams, tol: float = 1e-7) -> bool:
    """Whether the brute-force minimizer has coincident traces."""
    return abs(oracle_trace_mismatch(result.alpha_hat, result.beta_hat, p)) <= tol


def locate_transition(p: ProblemParams, lo: float, hi: float, xtol: float,
                      coarse: int = 64, refine_iters: int = 60) -> float:
    """Bisection in ``gamma`` for the switch from a type II to a type I brute-force minimizer.

    Requires a type II minimizer at ``gamma = lo`` and a type I one at ``gamma = hi``.
    """
    def is_I(gamma):
        q = p.with_gamma(gamma)
        return oracle_is_type_I(grid_minimize(q, coarse, refine_iters), q)

    if is_I(lo) or not is_I(hi):
        raise ValueError(f"transition not bracketed by [{lo}, {hi}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if is_I(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class OracleReport:
    params: ProblemParams
    analytic_cost: float
    brute_cost: float
    arg_gap: float
    cost_gap: float
    passed: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = self.params.to_dict()
        return d


def compare(p: ProblemParams, coarse: int = 256, refine_iters: int = 60) -> OracleReport:
    """Check the classifier's minimizer against :func:`grid_minimize`."""
    from .classifier import classify

    result = classify(p)
    brute = grid_minimize(p, coarse, refine_iters)
    analytic = result.cost.total
    c = result.minimizer
    arg_gap = max(abs(brute.alpha_hat - c.alpha), abs(brute.beta_hat - c.beta))
    cost_gap = abs(analytic - brute.F_hat) / analytic
    passed = cost_gap <= TOL_ORACLE and brute.F_hat >= analytic * (1.0 - TOL_ORACLE)
    if not passed:
        logger.warning("oracle mismatch for %s: analytic %r, brute %r", p, analytic, brute.F_hat)
    return OracleReport(p, analytic, brute.F_hat, arg_gap, cost_gap, passed)
