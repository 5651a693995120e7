import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twophase_iso.cap_geometry import (
    TOL_GEOM,
    Candidate,
    CostBreakdown,
    Kind,
    ProblemParams,
    cap_perimeter,
    cap_volume,
    cross_section,
    dF_dalpha,
    interface_area,
    radius_from_volume,
    reduced_cost,
    total_cost,
)
from twophase_iso.candidate_solver import candidate_type_II
from twophase_iso.special_functions import DomainError, Side, cap_integrals
from twophase_iso.verification_oracle import oracle_cost, polyline_revolution_area, slab_volume

from conftest import draw_params

inner = st.floats(0.05, math.pi - 0.05)
positive = st.floats(0.2, 5.0)
dims = st.integers(2, 6)


def constrained(alpha, beta, p):
    return Candidate(alpha, beta, radius_from_volume(alpha, Side.LEFT, p),
                     radius_from_volume(beta, Side.RIGHT, p))


# ------------------------------------------------------------ ProblemParams


@pytest.mark.parametrize("kwargs", [
    dict(N=1, rho_minus=1, rho_plus=1, V_minus=1, V_plus=1),
    dict(N=2.5, rho_minus=1, rho_plus=1, V_minus=1, V_plus=1),
    dict(N=2, rho_minus=0, rho_plus=1, V_minus=1, V_plus=1),
    dict(N=2, rho_minus=1, rho_plus=1, V_minus=-1, V_plus=1),
    dict(N=2, rho_minus=1, rho_plus=1, V_minus=1, V_plus=math.inf),
    dict(N=2, rho_minus=1, rho_plus=1, V_minus=1, V_plus=1, gamma=-0.1),
])
def test_params_validation(kwargs):
    with pytest.raises(DomainError):
        ProblemParams(**kwargs)


def test_params_round_trip():
    p = ProblemParams(3, 1.5, 0.25, 2.0, 7.0, 0.1)
    assert ProblemParams.from_dict(p.to_dict()) == p
    assert p.mirrored().mirrored() == p
    # 2.0 / 1.5 < 7.0 / 0.25
    assert p.volume_ratio_sign() == -1
    assert p.mirrored().volume_ratio_sign() == 1
    assert ProblemParams(2, 1.0, 3.0, 2.0, 6.0).volume_ratio_sign() == 0


# ------------------------------------------------------------ measures


def test_cap_volume_examples():
    assert cap_volume(1.0, math.pi / 2, Side.LEFT, 2) == pytest.approx(math.pi / 2, rel=1e-15)
    assert cap_volume(2.0, math.pi / 2, Side.RIGHT, 3) == pytest.approx(16 * math.pi / 3, rel=1e-15)


def test_cap_volume_against_slabs():
    # also validates the centre convention a = -R cos(alpha)
    R, alpha, N = 1.3, 2.0, 4
    a = -R * math.cos(alpha)
    ref = slab_volume(a, R, a - R, 0.0, N)
    assert cap_volume(R, alpha, Side.LEFT, N) == pytest.approx(ref, rel=1e-8)


def test_right_cap_volume_against_slabs():
    R, beta, N = 0.8, 0.7, 3
    b = -R * math.cos(beta)
    ref = slab_volume(b, R, 0.0, b + R, N)
    assert cap_volume(R, beta, Side.RIGHT, N) == pytest.approx(ref, rel=1e-8)


def test_cap_perimeter_examples():
    assert cap_perimeter(1.0, math.pi / 2, Side.LEFT, 2) == pytest.approx(math.pi, rel=1e-15)
    assert cap_perimeter(1.0, math.pi / 2, Side.RIGHT, 3) == pytest.approx(2 * math.pi, rel=1e-15)


def test_cap_perimeter_against_revolution():
    R, beta, N = 0.7, 1.1, 5
    theta = np.linspace(0.0, beta, 200_001)
    pts = np.column_stack((R * (np.cos(theta) - math.cos(beta)), R * np.sin(theta)))
    ref = polyline_revolution_area(pts, N)
    assert cap_perimeter(R, beta, Side.RIGHT, N) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("args, expected", [
    ((1, math.pi / 2, 1, math.pi / 2, 2), 0.0),
    ((2, math.pi / 2, 1, math.pi / 2, 2), 2.0),
    ((2, math.pi / 2, 1, math.pi / 2, 3), 3 * math.pi),
])
def test_interface_area_examples(args, expected):
    assert interface_area(*args) == pytest.approx(expected, rel=1e-15, abs=0)


def test_total_cost_examples():
    half = math.pi / 2
    p = ProblemParams(2, 1, 1, half, half, 0.7)
    cost = total_cost(Candidate(half, half, 1.0, 1.0), p)
    assert cost.total == pytest.approx(2 * math.pi, rel=1e-15)
    assert cost.interface == 0.0
    p = ProblemParams(2, 1, 1, 1, 1, 1.0)
    cost = total_cost(Candidate(half, half, 2.0, 1.0), p)
    assert cost.total == pytest.approx(3 * math.pi + 2, rel=1e-15)


def test_total_cost_against_oracle(rng):
    for _ in range(30):
        p = draw_params(rng)
        alpha, beta = rng.uniform(0.1, math.pi - 0.1, 2)
        c = constrained(alpha, beta, p)
        assert total_cost(c, p).total == pytest.approx(float(oracle_cost(alpha, beta, p)), rel=1e-8)


def test_cost_breakdown_sum():
    b = CostBreakdown.from_terms(0.1, 0.2, 0.3)
    assert b.total == 0.1 + 0.2 + 0.3
    assert set(b.to_dict()) == {"perim_minus", "perim_plus", "interface", "total"}


# ------------------------------------------------------------ radius from volume


def test_radius_examples():
    assert radius_from_volume(math.pi / 2, Side.LEFT,
                              ProblemParams(2, 1, 1, math.pi / 2, 1)) == pytest.approx(1, rel=1e-15)
    assert radius_from_volume(math.pi / 2, Side.RIGHT,
                              ProblemParams(3, 1, 2, 1, 4 * math.pi / 3)) == pytest.approx(1, rel=1e-15)
    p = ProblemParams(4, 0.5, 1, 3.0, 1)
    R = radius_from_volume(2.3, Side.LEFT, p)
    assert 0.5 * cap_volume(R, 2.3, Side.LEFT, 4) == pytest.approx(3.0, rel=1e-12)


@given(inner, st.sampled_from(list(Side)), dims, positive, positive, positive, positive)
def test_volume_round_trip(angle, side, N, rm, rp, vm, vp):
    p = ProblemParams(N, rm, rp, vm, vp)
    R = radius_from_volume(angle, side, p)
    rho, V = (rm, vm) if side is Side.LEFT else (rp, vp)
    assert rho * cap_volume(R, angle, side, N) == pytest.approx(V, rel=1e-12)


@given(st.floats(0.1, math.pi - 0.1), dims, st.sampled_from(list(Side)))
def test_radius_derivative(angle, N, side):
    p = ProblemParams(N, 1.3, 0.6, 2.0, 0.9)
    h = 1e-5
    fd = (radius_from_volume(angle + h, side, p) - radius_from_volume(angle - h, side, p)) / (2 * h)
    R = radius_from_volume(angle, side, p)
    I, _ = cap_integrals(angle, N, side)
    sign = 1.0 if side is Side.LEFT else -1.0
    assert fd == pytest.approx(sign * math.sin(angle) ** N * R / (N * I), rel=1e-6)


# ------------------------------------------------------------ invariants


@given(inner, inner, dims, positive, positive, positive, positive,
       st.floats(0.0, 3.0), st.floats(0.1, 20.0))
def test_scaling_law(alpha, beta, N, rm, rp, vm, vp, gamma, lam):
    p = ProblemParams(N, rm, rp, vm, vp, gamma)
    q = ProblemParams(N, rm, rp, lam * vm, lam * vp, gamma)
    assert reduced_cost(alpha, beta, q).total == pytest.approx(
        lam ** ((N - 1) / N) * reduced_cost(alpha, beta, p).total, rel=1e-10)


@given(inner, inner, dims, positive, positive, positive, positive, st.floats(0.0, 3.0))
def test_mirror_symmetry(alpha, beta, N, rm, rp, vm, vp, gamma):
    p = ProblemParams(N, rm, rp, vm, vp, gamma)
    c = constrained(alpha, beta, p)
    assert total_cost(c.mirrored(), p.mirrored()).total == pytest.approx(
        total_cost(c, p).total, rel=1e-12)


@given(inner, inner, positive, dims)
def test_interface_zero_iff_traces_match(alpha, beta, Rm, N):
    Rp = Rm * math.sin(alpha) / math.sin(beta)
    c = Candidate(alpha, beta, Rm, Rp)
    assert c.kind is Kind.TYPE_I
    assert interface_area(Rm, alpha, Rp, beta, N) <= 1e-13 * Rm ** (N - 1)
    assert interface_area(Rm, alpha, Rm * 1.01, alpha, N) > 0
    assert Candidate(alpha, alpha, Rm, Rm * 1.01).kind is not Kind.TYPE_I


def test_candidate_validation():
    with pytest.raises(DomainError):
        Candidate(0.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        Candidate(1.0, 1.0, -1.0, 1.0)
    with pytest.raises(DomainError):
        Candidate(1.0, 1.0, 1.0, 1.0, Kind.TYPE_II_PLUS)
    with pytest.raises(DomainError):
        Candidate(1.0, 1.0, 2.0, 1.0, Kind.TYPE_I)
    assert Candidate(1.0, 1.0, 2.0, 1.0).kind is Kind.TYPE_II_PLUS
    assert Candidate(1.0, 1.0, 1.0, 2.0).kind is Kind.TYPE_II_MINUS


def test_candidate_mirror_kind():
    c = Candidate(1.0, 1.2, 2.0, 1.0)
    m = c.mirrored()
    assert m.kind is Kind.TYPE_II_MINUS
    assert m.mirrored() == c
    assert c.center_minus == pytest.approx(-2.0 * math.cos(1.0))


# ------------------------------------------------------------ derivative


def test_dF_zero_at_stationary_candidates(rng):
    for _ in range(50):
        p = draw_params(rng, gamma_scale=0.99)
        c = candidate_type_II(p.gamma, p)
        assert abs(dF_dalpha(c, p, 1)) <= 1e-10


def test_dF_zero_at_half_disks():
    p = ProblemParams(3, 1.0, 2.0, 1.0, 1.0, 0.0)
    c = constrained(math.pi / 2, 1.0, p)
    assert dF_dalpha(c, p, 1) == pytest.approx(0.0, abs=1e-15)
    assert dF_dalpha(c, p, -1) == pytest.approx(0.0, abs=1e-15)


def test_dF_finite_difference(rng):
    checked = 0
    while checked < 40:
        p = draw_params(rng)
        alpha, beta = rng.uniform(0.2, math.pi - 0.2, 2)
        c = constrained(alpha, beta, p)
        gap = c.trace_minus - c.trace_plus
        if abs(gap) < 1e-2 * max(c.R_minus, c.R_plus):
            continue  # too close to the kink of the absolute value
        h = 1e-5
        fd = (reduced_cost(alpha + h, beta, p).total - reduced_cost(alpha - h, beta, p).total) / (2 * h)
        got = dF_dalpha(c, p, 1 if gap > 0 else -1)
        assert got == pytest.approx(fd, rel=1e-6, abs=1e-9)
        checked += 1


def test_dF_requires_constrained_candidate():
    p = ProblemParams(2, 1, 1, 1, 1, 0.2)
    with pytest.raises(DomainError):
        dF_dalpha(Candidate(1.0, 1.0, 5.0, 1.0), p, 1)
    c = constrained(1.0, 1.0, p)
    with pytest.raises(ValueError):
        dF_dalpha(c, p, 0)


# ------------------------------------------------------------ cross-section


def test_cross_section_half_disks():
    cs = cross_section(Candidate(math.pi / 2, math.pi / 2, 1.0, 1.0), 64)
    assert cs.interface is None
    np.testing.assert_allclose(np.hypot(*cs.left.T), 1.0, rtol=1e-15)
    np.testing.assert_allclose(np.hypot(*cs.right.T), 1.0, rtol=1e-15)
    assert tuple(cs.left[0]) == (0.0, 1.0) and tuple(cs.right[0]) == (0.0, 1.0)
    assert cs.left[-1] == pytest.approx((-1.0, 0.0)) and cs.right[-1] == pytest.approx((1.0, 0.0))


def test_cross_section_type_I_endpoints():
    c = Candidate(2.0, 0.6, 1.0, math.sin(2.0) / math.sin(0.6))
    cs = cross_section(c, 32)
    assert abs(cs.left[0, 1] - cs.right[0, 1]) <= TOL_GEOM * max(c.R_minus, c.R_plus)


@given(inner, inner, positive, positive, st.integers(8, 200))
def test_cross_section_sides(alpha, beta, Rm, Rp, res):
    cs = cross_section(Candidate(alpha, beta, Rm, Rp), res)
    assert np.all(cs.left[:, 0] <= 1e-12)
    assert np.all(cs.right[:, 0] >= -1e-12)
    assert np.all(cs.left[:, 1] >= 0) and np.all(cs.right[:, 1] >= 0)
    if cs.interface is not None:
        lo, hi = cs.interface
        assert {lo, hi} == {cs.left[0, 1], cs.right[0, 1]}


def test_cross_section_resolution():
    with pytest.raises(ValueError):
        cross_section(Candidate(1.0, 1.0, 1.0, 1.0), 4)
