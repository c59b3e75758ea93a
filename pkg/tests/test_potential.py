"""Tests for bump functions, group translates, and the zero-counting identity."""

import math

import pytest

from modzero.eigen import eisenstein_form
from modzero.evaluate import GroupElement, UpperHalfPoint
from modzero.measure import BoxRegion
from modzero.potential import (
    BumpFunction,
    F_phi,
    bump_eval,
    check_zero_identity,
    enumerate_translates,
    phi_measure_integral,
)

from conftest import cached_zeros


def test_bump_support_and_smoothness():
    phi = BumpFunction(UpperHalfPoint(0.0, 1.5), 0.3)
    assert float(phi.value_many([0.0], [1.5])[0]) == pytest.approx(1.0)
    # zero outside the support, tiny near the edge
    assert float(phi.value_many([0.35], [1.5])[0]) == 0.0
    assert float(phi.value_many([0.299], [1.5])[0]) < 1e-3


def test_bump_validation():
    with pytest.raises(ValueError):
        BumpFunction(UpperHalfPoint(0.0, 0.2), 0.3)  # support crosses the real line
    with pytest.raises(ValueError):
        BumpFunction(UpperHalfPoint(0.0, 1.0), 0.0)


def test_laplacian_finite_difference_oracle():
    phi = BumpFunction(UpperHalfPoint(0.1, 1.4), 0.25)
    h = 1e-5
    pts = [(0.1, 1.4), (0.15, 1.45), (0.02, 1.3), (0.1, 1.55)]
    for x, y in pts:
        v0 = float(phi.value_many([x], [y])[0])
        vxp = float(phi.value_many([x + h], [y])[0])
        vxm = float(phi.value_many([x - h], [y])[0])
        vyp = float(phi.value_many([x], [y + h])[0])
        vym = float(phi.value_many([x], [y - h])[0])
        fd = (vxp + vxm + vyp + vym - 4.0 * v0) / (h * h)
        lap = float(phi.laplacian_many([x], [y])[0])
        assert lap == pytest.approx(fd, abs=1e-3 * (1.0 + abs(lap)))


def test_laplacian_integrates_to_zero():
    # integral of Laplacian(phi) over the support vanishes for compactly supported phi
    phi = BumpFunction(UpperHalfPoint(0.0, 1.5), 0.3)
    from modzero.potential import _adaptive_quad2d
    b = phi.support_box()
    val = _adaptive_quad2d(lambda xs, ys: phi.laplacian_many(xs, ys),
                           b.x_lo, b.x_hi, b.y_lo, b.y_hi, 1e-10)
    assert abs(val) < 1e-8


def test_enumerate_translates_are_group_elements_landing_in_box():
    z = UpperHalfPoint(0.21, 0.9)
    K = BoxRegion(-0.4, 0.4, 1.1, 1.9)
    gs = enumerate_translates(z, K)
    tol = 1e-9
    for g in gs:
        assert g.a * g.d - g.b * g.c == 1
        x1, y1 = g.apply_xy(z.x, z.y)
        assert K.x_lo - tol <= x1 <= K.x_hi + tol
        assert K.y_lo - tol <= y1 <= K.y_hi + tol
    assert len(gs) == len(set(gs))


def test_enumerate_translates_brute_force_oracle():
    z = UpperHalfPoint(-0.13, 1.02)
    K = BoxRegion(-0.45, 0.45, 0.95, 2.1)
    got = {(g.a, g.b, g.c, g.d) for g in enumerate_translates(z, K)}
    tol = 1e-9
    want = set()
    R = 6
    for c in range(0, R + 1):
        for d in range(-R, R + 1):
            if c == 0 and d != 1:
                continue
            if c > 0 and math.gcd(c, abs(d)) != 1:
                continue
            for b_shift in range(-R, R + 1):
                try:
                    if c == 0:
                        g = GroupElement.make(1, b_shift, 0, 1)
                    else:
                        from modzero.potential import _inv_mod
                        a = _inv_mod(d, c) + b_shift * c
                        b = (a * d - 1) // c
                        g = GroupElement.make(a, b, c, d)
                except ValueError:
                    continue
                x1, y1 = g.apply_xy(z.x, z.y)
                if (K.x_lo - tol <= x1 <= K.x_hi + tol
                        and K.y_lo - tol <= y1 <= K.y_hi + tol):
                    want.add((g.a, g.b, g.c, g.d))
    assert got == want


def test_F_phi_group_invariance():
    phi = BumpFunction(UpperHalfPoint(0.0, 1.5), 0.3)
    z = UpperHalfPoint(0.2, 1.45)
    base = F_phi(phi, z)
    assert base > 0.0
    for g in [GroupElement.make(1, 1, 0, 1),
              GroupElement.make(0, -1, 1, 0),
              GroupElement.make(2, 1, 1, 1)]:
        gz = g.apply(z)
        assert F_phi(phi, gz) == pytest.approx(base, rel=1e-12)


def test_phi_measure_integral_positive_and_scaled():
    phi_small = BumpFunction(UpperHalfPoint(0.0, 1.5), 0.15)
    phi_big = BumpFunction(UpperHalfPoint(0.0, 1.5), 0.3)
    a = phi_measure_integral(phi_small)
    b = phi_measure_integral(phi_big)
    assert 0.0 < a < b
    # approximate scale: integral ~ C r^2 / y0^2 for small supports
    assert b / a == pytest.approx(4.0, rel=0.1)


def test_bump_eval_consistency():
    phi = BumpFunction(UpperHalfPoint(0.0, 1.5), 0.3)
    z = UpperHalfPoint(0.1, 1.6)
    v, lap, lap_h = bump_eval(phi, z)
    assert lap_h == pytest.approx(z.y * z.y * lap)
    assert v == float(phi.value_many([z.x], [z.y])[0])


def test_zero_identity_eisenstein():
    f = eisenstein_form(24)
    zs = cached_zeros(f)
    phi = BumpFunction(UpperHalfPoint(0.0, 1.5), 0.3)
    out = check_zero_identity(f, zs, phi, quad_eps=1e-5)
    scale = 1.0 + abs(out["lhs"]) + abs(out["rhs"])
    assert out["diff"] <= 1e-4 * scale
    assert out["diff_invariant"] <= 1e-4 * scale


def test_zero_identity_bump_off_zeros_gives_volume_term_only(delta):
    # Delta has no zeros in H, so the weighted zero sum is zero and the identity
    # reduces to the volume term cancelling the potential integral
    zs = cached_zeros(delta)
    phi = BumpFunction(UpperHalfPoint(0.0, 1.5), 0.3)
    out = check_zero_identity(delta, zs, phi, quad_eps=1e-5)
    assert out["lhs"] == 0.0
    assert abs(out["rhs"]) <= 1e-4 * (1.0 + abs(out["rhs"]))
