"""Planar polygonal descent for the weighted perimeter (N = 2).

Each half of the boundary is an open polygonal chain whose vertices sit on
fixed rays from the origin: the left chain on rays at angles ``pi/2 .. 3pi/2``
(top endpoint, through ``x1 < 0``, to the bottom endpoint), the right chain on
rays at ``-pi/2 .. pi/2``.  Only the radii move, so both endpoints of each chain
stay on the axis ``x1 = 0`` and vertices cannot slide along the curve (a
tangential freedom that costs nothing geometrically but stalls descent).  Both
caps are convex, hence star-shaped about the origin, so no admissible shape is
lost.  The enclosed area is an exact triangle fan.

The discrete cost is

    rho_minus * len(left) + rho_plus * len(right)
        + gamma * (|top_left - top_right| + |bottom_left - bottom_right|),

minimised under ``rho_pm * area_pm = V_pm``.  Endpoint radii are carried as a
mean and a gap per axis crossing, so the interface term acts on the gaps alone
and is handled exactly by its proximal map (soft thresholding).  Each step is

1. a gradient step on the chain lengths in a constant H^1 metric (identity
   plus a multiple of the graph Laplacian on the closed loop of radii),
   projected onto the tangent space of the two area constraints;
2. soft thresholding of the two gaps;
3. Newton projection back onto the area constraints along metric-gradient
   directions that leave the gaps untouched.

A backtracking line search accepts a step only if the projected state lowers
the cost by a sufficient amount.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .cap_geometry import ProblemParams

__all__ = [
    "GRAD_TOL",
    "PolygonState",
    "FlowResult",
    "polygon_flow_2d",
    "fit_circle",
    "discrete_cost",
    "chain_area",
    "write_flow_frames",
]

logger = logging.getLogger(__name__)

GRAD_TOL = 1e-8
_POLISH_START = 1e-3
_POLISH_EVERY = 100


@dataclass
class PolygonState:
    vertices_left: np.ndarray
    vertices_right: np.ndarray
    multipliers: tuple[float, float]
    step: float


@dataclass
class FlowResult:
    state: PolygonState
    circle_fit_residuals: tuple[float, float]
    cost_trace: list[float]
    converged: bool
    steps: int
    grad_norm: float
    fitted_radii: tuple[float, float] = (math.nan, math.nan)
    frames: list[tuple[int, np.ndarray]] = field(default_factory=list)

    def __iter__(self):
        # unpacks as (state, circle_fit_residuals, cost_trace)
        return iter((self.state, self.circle_fit_residuals, self.cost_trace))


def chain_area(P: np.ndarray) -> float:
    """Area enclosed by a chain and the axis segment joining its endpoints (shoelace)."""
    x, y = P[:, 0], P[:, 1]
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def _length(P: np.ndarray) -> float:
    return float(np.sum(np.hypot(*np.diff(P, axis=0).T)))


def discrete_cost(L: np.ndarray, R: np.ndarray, p: ProblemParams) -> float:
    """Weighted length of two chains plus the interface gaps on the axis."""
    interface = abs(L[0, 1] - R[-1, 1]) + abs(L[-1, 1] - R[0, 1])
    return p.rho_minus * _length(L) + p.rho_plus * _length(R) + p.gamma * interface


class _RayChains:
    """Two chains on fixed rays and the packing of their radii.

    ``z = [mean_top, left interior radii, mean_bottom, right interior radii,
    gap_top, gap_bottom]``; the first ``2n - 2`` entries form a closed loop
    around the shape.
    """

    def __init__(self, n: int):
        self.n = n
        self.k = n - 2
        self.loop = slice(0, 2 * n - 2)
        self.gaps = slice(2 * n - 2, 2 * n)
        self.size = 2 * n
        self.dtheta = math.pi / (n - 1)
        self.cos_d = math.cos(self.dtheta)
        self.sin_d = math.sin(self.dtheta)
        tl = np.linspace(0.5 * math.pi, 1.5 * math.pi, n)
        tr = np.linspace(-0.5 * math.pi, 0.5 * math.pi, n)
        self.dir_left = np.column_stack((np.cos(tl), np.sin(tl)))
        self.dir_right = np.column_stack((np.cos(tr), np.sin(tr)))
        for d in (self.dir_left, self.dir_right):
            d[[0, -1], 0] = 0.0
            d[0, 1], d[-1, 1] = np.sign(d[0, 1]), np.sign(d[-1, 1])

    # radii <-> packed variables -------------------------------------------------

    def pack(self, rl: np.ndarray, rr: np.ndarray) -> np.ndarray:
        k = self.k
        z = np.empty(self.size)
        z[0] = 0.5 * (rl[0] + rr[-1])
        z[1:k + 1] = rl[1:-1]
        z[k + 1] = 0.5 * (rl[-1] + rr[0])
        z[k + 2:2 * k + 2] = rr[1:-1]
        z[self.gaps] = rl[0] - rr[-1], rl[-1] - rr[0]
        return z

    def unpack(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        k, n = self.k, self.n
        rl = np.empty(n)
        rr = np.empty(n)
        d_top, d_bot = z[self.gaps]
        rl[0], rr[-1] = z[0] + 0.5 * d_top, z[0] - 0.5 * d_top
        rl[1:-1] = z[1:k + 1]
        rl[-1], rr[0] = z[k + 1] + 0.5 * d_bot, z[k + 1] - 0.5 * d_bot
        rr[1:-1] = z[k + 2:2 * k + 2]
        return rl, rr

    def pack_grad(self, gl: np.ndarray, gr: np.ndarray) -> np.ndarray:
        k = self.k
        z = np.empty(self.size)
        z[0] = gl[0] + gr[-1]
        z[1:k + 1] = gl[1:-1]
        z[k + 1] = gl[-1] + gr[0]
        z[k + 2:2 * k + 2] = gr[1:-1]
        z[self.gaps] = 0.5 * (gl[0] - gr[-1]), 0.5 * (gl[-1] - gr[0])
        return z

    def points(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        rl, rr = self.unpack(z)
        return rl[:, None] * self.dir_left, rr[:, None] * self.dir_right

    # per-chain measures in radial form ------------------------------------------

    def lengths(self, r: np.ndarray) -> tuple[float, np.ndarray]:
        a, b = r[:-1], r[1:]
        e = np.sqrt(a * a + b * b - 2.0 * a * b * self.cos_d)
        g = np.zeros_like(r)
        g[:-1] += (a - b * self.cos_d) / e
        g[1:] += (b - a * self.cos_d) / e
        return float(np.sum(e)), g

    def length_hessian(self, r: np.ndarray) -> np.ndarray:
        a, b = r[:-1], r[1:]
        e = np.sqrt(a * a + b * b - 2.0 * a * b * self.cos_d)
        u = (a - b * self.cos_d) / e
        v = (b - a * self.cos_d) / e
        diag = np.zeros_like(r)
        diag[:-1] += (1.0 - u * u) / e
        diag[1:] += (1.0 - v * v) / e
        off = (-self.cos_d - u * v) / e
        return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)

    def area_hessian(self) -> np.ndarray:
        n = self.n
        return 0.5 * self.sin_d * (np.eye(n, k=1) + np.eye(n, k=-1))

    def unpack_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """Linear maps ``z -> r_left`` and ``z -> r_right``."""
        cols = [self.unpack(e) for e in np.eye(self.size)]
        return np.column_stack([c[0] for c in cols]), np.column_stack([c[1] for c in cols])

    def length_change(self, r: np.ndarray, dr: np.ndarray) -> float:
        """``length(r + dr) - length(r)`` without cancellation."""
        a, b = r[:-1], r[1:]
        da, db = dr[:-1], dr[1:]
        a1, b1 = a + da, b + db
        e = np.sqrt(a * a + b * b - 2.0 * a * b * self.cos_d)
        e1 = np.sqrt(a1 * a1 + b1 * b1 - 2.0 * a1 * b1 * self.cos_d)
        de2 = da * (a1 + a) + db * (b1 + b) - 2.0 * self.cos_d * (da * b1 + a * db)
        return float(np.sum(de2 / (e1 + e)))

    def area(self, r: np.ndarray) -> float:
        return 0.5 * self.sin_d * float(np.sum(r[:-1] * r[1:]))

    def area_grad(self, r: np.ndarray) -> np.ndarray:
        g = np.zeros_like(r)
        g[:-1] += r[1:]
        g[1:] += r[:-1]
        return 0.5 * self.sin_d * g

    def metric(self, c: float) -> tuple[np.ndarray, np.ndarray]:
        """``(M, M^-1)`` for identity plus ``c`` times the loop Laplacian."""
        m = 2 * self.n - 2
        loop = 2.0 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)
        loop[0, -1] = loop[-1, 0] = -1.0
        M = np.zeros((self.size, self.size))
        M[:m, :m] = np.eye(m) + c * loop
        # gaps: same ratio of stiffness to metric as the loop nodes they split
        M[m:, m:] = np.eye(2) * (1.0 + 2.0 * c) / 4.0
        return M, np.linalg.inv(M)


def fit_circle(P: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Least-squares circle through points: algebraic fit plus one Gauss-Newton step.

    Returns ``(center, radius, max |distance - radius| / radius)``.
    """
    x, y = P[:, 0], P[:, 1]
    A = np.column_stack((x, y, np.ones_like(x)))
    D, E, F = np.linalg.lstsq(A, -(x * x + y * y), rcond=None)[0]
    c = np.array([-0.5 * D, -0.5 * E])
    r = math.sqrt(max(c @ c - F, 0.0))
    diff = P - c
    d = np.hypot(diff[:, 0], diff[:, 1])
    J = np.column_stack((-diff[:, 0] / d, -diff[:, 1] / d, -np.ones_like(d)))
    delta = np.linalg.lstsq(J, -(d - r), rcond=None)[0]
    c = c + delta[:2]
    r = r + delta[2]
    d = np.hypot(*(P - c).T)
    return c, float(r), float(np.max(np.abs(d - r)) / r)


def _soft(d: np.ndarray, t: float) -> np.ndarray:
    return np.sign(d) * np.maximum(np.abs(d) - t, 0.0)


def polygon_flow_2d(p: ProblemParams, n_vertices: int = 128, max_steps: int = 5000,
                    seed: int = 0, noise: float = 0.01, snapshot_every: int = 0) -> FlowResult:
    """Run the constrained descent from two noisy half-disks.

    Parameters
    ----------
    p : ProblemParams
        Must have ``N == 2``.
    n_vertices : int
        Vertices per chain, endpoints included.
    max_steps : int
        Upper bound on accepted steps.
    seed, noise
        Initial radii are the half-disk radii times ``1 + noise * U(-1, 1)``.
    snapshot_every : int
        Record ``(step, vertices)`` every so many steps (0 disables).

    Returns
    -------
    FlowResult
        Unpacks as ``(state, circle_fit_residuals, cost_trace)``.  ``converged``
        is set once the projected gradient mapping, divided by
        ``max(rho_minus, rho_plus)``, drops to ``GRAD_TOL``; a
        line-search stall or ``max_steps`` before that is logged as
        non-convergence.
    """
    if p.N != 2:
        raise ValueError("the polygonal flow is planar: N must be 2")
    if n_vertices < 32:
        raise ValueError("need at least 32 vertices per chain")
    n = n_vertices
    ch = _RayChains(n)
    M, Minv = ch.metric((n / math.pi) ** 2)
    targets = np.array([p.V_minus / p.rho_minus, p.V_plus / p.rho_plus])
    # gradients in the radii carry the units of rho; stationarity is measured relative to it
    rho_scale = max(p.rho_minus, p.rho_plus)
    rng = np.random.default_rng(seed)
    rl = math.sqrt(2 * targets[0] / math.pi) * (1.0 + noise * rng.uniform(-1, 1, n))
    rr = math.sqrt(2 * targets[1] / math.pi) * (1.0 + noise * rng.uniform(-1, 1, n))

    free = np.ones(ch.size, dtype=bool)
    free[ch.gaps] = False

    def smooth(z):
        rl, rr = ch.unpack(z)
        len_l, gl = ch.lengths(rl)
        len_r, gr = ch.lengths(rr)
        value = p.rho_minus * len_l + p.rho_plus * len_r
        return value, ch.pack_grad(p.rho_minus * gl, p.rho_plus * gr)

    def cost_of(z):
        return smooth(z)[0] + p.gamma * float(np.sum(np.abs(z[ch.gaps])))

    def cost_change(z, trial):
        # accurate where cost_of(trial) - cost_of(z) would be pure round-off
        rl, rr = ch.unpack(z)
        dl, dr = ch.unpack(trial - z)
        return (p.rho_minus * ch.length_change(rl, dl) + p.rho_plus * ch.length_change(rr, dr)
                + p.gamma * float(np.sum(np.abs(trial[ch.gaps]) - np.abs(z[ch.gaps]))))

    def constraint_grads(z):
        rl, rr = ch.unpack(z)
        zero = np.zeros(n)
        return np.column_stack(
            (ch.pack_grad(ch.area_grad(rl), zero), ch.pack_grad(zero, ch.area_grad(rr)))
        )

    def residual(z):
        rl, rr = ch.unpack(z)
        return np.array([ch.area(rl), ch.area(rr)]) - targets

    def retract(z, tol=1e-14):
        V = Minv @ np.where(free[:, None], constraint_grads(z), 0.0)
        mu = np.zeros(2)
        for _ in range(30):
            w = z + V @ mu
            r = residual(w)
            if np.all(np.abs(r) <= tol * targets):
                break
            mu -= np.linalg.solve(constraint_grads(w).T @ V, r)
        return z + V @ mu

    T_left, T_right = ch.unpack_matrices()
    H_area = ch.area_hessian()
    gap_idx = np.arange(ch.size)[ch.gaps]

    def kkt_residual(z):
        """Stationarity residual with the gap pattern of ``z`` held fixed.

        Returns ``(residual, multipliers, free mask)``; the residual is ``inf``
        when a zero gap violates its subgradient condition.
        """
        _, g = smooth(z)
        gaps = z[ch.gaps]
        g[ch.gaps] += p.gamma * np.sign(gaps)
        F = np.ones(ch.size, dtype=bool)
        F[gap_idx[gaps == 0.0]] = False
        A = constraint_grads(z)
        lam = np.linalg.lstsq(A[F], g[F], rcond=None)[0]
        r = g - A @ lam
        if np.any(np.abs(r[~F]) > p.gamma):
            return math.inf, lam, F
        return float(np.max(np.abs(r[F]))) / rho_scale, lam, F

    def newton_polish(z, cost, max_iter=20):
        """Newton iterations on the KKT system for a fixed gap pattern.

        Returns ``(z, costs, residual)`` of the last accepted iterate.
        """
        costs = []
        res, lam, F = kkt_residual(z)
        logger.debug("polish start: residual %.3e, gaps %s", res, z[ch.gaps])
        for _ in range(max_iter):
            if res <= GRAD_TOL or not math.isfinite(res):
                break
            rl, rr = ch.unpack(z)
            _, g = smooth(z)
            g[ch.gaps] += p.gamma * np.sign(z[ch.gaps])
            H = T_left.T @ (p.rho_minus * ch.length_hessian(rl) - lam[0] * H_area) @ T_left
            H += T_right.T @ (p.rho_plus * ch.length_hessian(rr) - lam[1] * H_area) @ T_right
            A = constraint_grads(z)
            idx = np.flatnonzero(F)
            k = idx.size
            K = np.zeros((k + 2, k + 2))
            K[:k, :k] = H[np.ix_(idx, idx)]
            K[:k, k:] = -A[idx]
            K[k:, :k] = A[idx].T
            rhs = np.concatenate((-g[idx], -residual(z)))
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                break
            step = np.zeros(ch.size)
            step[idx] = sol[:k]
            accepted = False
            for t in (1.0, 0.5, 0.25, 0.125):
                trial = retract(z + t * step)
                if np.any(np.sign(trial[ch.gaps]) != np.sign(z[ch.gaps])):
                    continue
                if not np.all(np.concatenate(ch.unpack(trial)) > 0.0):
                    continue
                delta = cost_change(z, trial)
                if delta <= 0.0:
                    accepted = True
                    break
            if not accepted:
                logger.debug("newton step rejected at residual %.3e", res)
                break
            z, cost = trial, cost + delta
            costs.append(cost)
            res, lam, F = kkt_residual(z)
        return z, costs, res

    z = ch.pack(rl, rr)
    z[ch.gaps] = 0.0  # start without an interface gap
    z = retract(z)
    cost = cost_of(z)
    trace = [cost]
    frames = []
    w_gap = M[-1, -1]
    tau = math.sqrt(float(targets.max())) / (n * max(p.rho_minus, p.rho_plus))
    tau_floor = 1e-16 * tau
    grad_norm = math.inf
    converged = False
    steps = 0
    last_polish = -_POLISH_EVERY
    while steps < max_steps:
        _, g = smooth(z)
        A = constraint_grads(z)
        MA = Minv @ A
        lam = np.linalg.solve(A.T @ MA, MA.T @ g)
        direction = -(Minv @ g - MA @ lam)
        accepted = False
        while tau > tau_floor:
            trial = z + tau * direction
            trial[ch.gaps] = _soft(trial[ch.gaps], tau * p.gamma / w_gap)
            trial = retract(trial)
            if np.all(trial[ch.loop] > 0.0) and np.all(np.concatenate(ch.unpack(trial)) > 0.0):
                delta = cost_change(z, trial)
                dz = trial - z
                if delta < 0.0 and delta <= -1e-4 * float(dz @ M @ dz) / tau:
                    accepted = True
                    break
            tau *= 0.5
        if accepted:
            grad_norm = float(np.max(np.abs(M @ dz))) / (tau * rho_scale)
            z, cost = trial, cost + delta
            trace.append(cost)
            steps += 1
            if snapshot_every and steps % snapshot_every == 0:
                frames.append((steps, np.vstack(ch.points(z))))
            tau *= 2.0
        stalled = not accepted
        if stalled or (grad_norm <= _POLISH_START and steps - last_polish >= _POLISH_EVERY):
            # first-order steps identify the gap pattern; Newton finishes the solve
            last_polish = steps
            z, costs, res = newton_polish(z, cost)
            if costs:
                cost = costs[-1]
                trace.extend(costs)
                steps += len(costs)
            if res <= GRAD_TOL:
                grad_norm = res
                converged = True
                break
            if stalled and not costs:
                grad_norm = res if math.isfinite(res) else grad_norm
                break
            tau = max(tau, tau_floor * 4.0)

    if not converged:
        logger.warning("polygon flow not converged after %d steps: gradient mapping %.3e",
                       steps, grad_norm)
    L, R = ch.points(z)
    # least-squares multipliers of the area constraints (pressures rho / R at a circle)
    _, mult, _ = kkt_residual(z)
    _, rad_l, res_l = fit_circle(L)
    _, rad_r, res_r = fit_circle(R)
    state = PolygonState(L, R, (float(mult[0]), float(mult[1])), tau)
    return FlowResult(state, (res_l, res_r), trace, converged, steps, grad_norm,
                      (rad_l, rad_r), frames)


def write_flow_frames(path, frames) -> None:
    """CSV dump of snapshots with columns ``step, vertex, x1, x2``.

    Vertices are numbered left chain first, then right chain.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "vertex", "x1", "x2"])
        for step, V in frames:
            for k, (x1, x2) in enumerate(V):
                w.writerow([step, k, repr(float(x1)), repr(float(x2))])
