"""Bump test functions, group-sum F_phi, and the zero-counting identity check.

The identity being verified: the weighted zero sum of a form equals the
volume term k*vol/(4 pi) * integral of F_phi plus the electrostatic
term (1/2 pi) * integral of log(y^{k/2}|f|) Laplacian(phi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from mpmath import mp

from .eigen import FormNumeric
from .evaluate import GroupElement, UpperHalfPoint, log_abs_many, reduce_to_fundamental
from .measure import BoxRegion

VOL = math.pi / 3.0  # hyperbolic volume of the modular domain


@dataclass(frozen=True)
class BumpFunction:
    """phi(z) = exp(1 - 1/(1 - t^2)), t = |z - z0|/r, smooth with support |z-z0| <= r."""

    center: UpperHalfPoint
    radius: float

    def __post_init__(self):
        if not 0 < self.radius < self.center.y:
            raise ValueError("support must stay inside the upper half-plane")

    def support_box(self) -> BoxRegion:
        return BoxRegion(
            self.center.x - self.radius, self.center.x + self.radius,
            self.center.y - self.radius, self.center.y + self.radius,
        )

    def value_many(self, xs, ys):
        dx = np.asarray(xs, dtype=float) - self.center.x
        dy = np.asarray(ys, dtype=float) - self.center.y
        s = (dx * dx + dy * dy) / (self.radius * self.radius)
        inside = s < 1.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            val = np.where(inside, np.exp(1.0 - 1.0 / np.where(inside, 1.0 - s, 1.0)), 0.0)
        return val

    def laplacian_many(self, xs, ys):
        """Euclidean Laplacian; radial closed form from phi_s = -phi u^2, u = 1/(1-s)."""
        dx = np.asarray(xs, dtype=float) - self.center.x
        dy = np.asarray(ys, dtype=float) - self.center.y
        s = (dx * dx + dy * dy) / (self.radius * self.radius)
        inside = s < 0.999999999
        safe = np.where(inside, s, 0.0)
        u = 1.0 / (1.0 - safe)
        phi = np.exp(1.0 - u)
        phi_s = -phi * u * u
        phi_ss = phi * u ** 3 * (u - 2.0)
        lap = 4.0 / (self.radius * self.radius) * (safe * phi_ss + phi_s)
        return np.where(inside, lap, 0.0)


def bump_eval(phi: BumpFunction, z: UpperHalfPoint):
    """(value, Euclidean Laplacian, hyperbolic Laplacian) at a point."""
    v = float(phi.value_many([z.x], [z.y])[0])
    lap = float(phi.laplacian_many([z.x], [z.y])[0])
    return v, lap, z.y * z.y * lap


def enumerate_translates(z: UpperHalfPoint, K: BoxRegion) -> list:
    """All gamma in SL2(Z)/{+-I} with gamma z inside the compact box K."""
    if math.isinf(K.y_hi):
        raise ValueError("K must be compact")
    out = []
    r2_max = z.y / K.y_lo  # |cz+d|^2 <= y / y_lo
    c_max = int(math.sqrt(r2_max) / z.y) + 1
    for c in range(0, c_max + 1):
        rem = r2_max - c * c * z.y * z.y
        if rem < 0:
            continue
        half = math.sqrt(rem)
        d_lo = math.ceil(-c * z.x - half - 1e-12)
        d_hi = math.floor(-c * z.x + half + 1e-12)
        for d in range(d_lo, d_hi + 1):
            if math.gcd(c, abs(d)) != 1 if c != 0 else abs(d) != 1:
                continue
            if c == 0 and d == -1:
                continue  # same as d = 1 mod +-
            # base (a, b) with a d - b c = 1
            if c == 0:
                a, b = 1, 0
            else:
                a = _inv_mod(d, c)
                b = (a * d - 1) // c
            g0 = GroupElement.make(a, b, c, d)
            x1, y1 = g0.apply_xy(z.x, z.y)
            if not (K.y_lo - 1e-12 <= y1 <= K.y_hi + 1e-12):
                continue
            t_lo = math.ceil(K.x_lo - x1 - 1e-12)
            t_hi = math.floor(K.x_hi - x1 + 1e-12)
            for t in range(t_lo, t_hi + 1):
                gt = GroupElement.make(g0.a + t * g0.c, g0.b + t * g0.d, g0.c, g0.d)
                xt, yt = gt.apply_xy(z.x, z.y)
                if K.x_lo - 1e-12 <= xt <= K.x_hi + 1e-12:
                    if gt not in out:
                        out.append(gt)
    return out


def _ext_gcd(a, b):
    if b == 0:
        return a, 1, 0
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


def _inv_mod(d, c):
    g, x, _ = _ext_gcd(d % c, c)
    return x % c


def F_phi(phi: BumpFunction, z: UpperHalfPoint) -> float:
    """Group sum sum_{gamma} phi(gamma z); finitely many terms contribute."""
    total = 0.0
    for g in enumerate_translates(z, phi.support_box()):
        x1, y1 = g.apply_xy(z.x, z.y)
        total += float(phi.value_many([x1], [y1])[0])
    return total


# ---------------------------------------------------------------------------
# adaptive quadrature over the bump support


def _adaptive_quad2d(fun, x0, x1, y0, y1, tol, singular_pts=(), depth=0, max_depth=11):
    """Recursive panel quadrature; `fun(xs, ys)` returns integrand values."""
    gx, wx = np.polynomial.legendre.leggauss(8)
    coarse = _panel(fun, x0, x1, y0, y1, gx, wx)
    xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    quads = [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]
    fine = sum(_panel(fun, *q, gx, wx) for q in quads)
    near_singular = any(x0 - 1e-12 <= sx <= x1 + 1e-12 and y0 - 1e-12 <= sy <= y1 + 1e-12
                        for sx, sy in singular_pts)
    if depth >= max_depth:
        return fine
    if abs(fine - coarse) < tol and not (near_singular and depth < 5):
        return fine
    return sum(
        _adaptive_quad2d(fun, *q, tol / 4.0, singular_pts, depth + 1, max_depth) for q in quads
    )


def _panel(fun, x0, x1, y0, y1, gx, wx):
    xs = 0.5 * (x1 - x0) * gx + 0.5 * (x0 + x1)
    ys = 0.5 * (y1 - y0) * gx + 0.5 * (y0 + y1)
    X, Y = np.meshgrid(xs, ys)
    vals = fun(X.ravel(), Y.ravel()).reshape(Y.shape)
    w2 = np.outer(wx, wx) * 0.25 * (x1 - x0) * (y1 - y0)
    return float(np.sum(vals * w2))


def _log_invariant_mass(f: FormNumeric, xs, ys):
    """log(y_red^{k/2} |f(z_red)|) with z reduced to F first (Gamma-invariant)."""
    out = np.empty(len(xs))
    red_x = np.empty(len(xs))
    red_y = np.empty(len(xs))
    for i, (x, y) in enumerate(zip(xs, ys)):
        zr, _ = reduce_to_fundamental(UpperHalfPoint(float(x), float(y)))
        red_x[i] = zr.x
        red_y[i] = zr.y
    la = log_abs_many(f, red_x, red_y)
    out = 0.5 * f.weight * np.log(red_y) + la
    return out


def phi_measure_integral(phi: BumpFunction, tol: float = 1e-9) -> float:
    """integral of phi dx dy / y^2 over the support."""
    b = phi.support_box()
    fun = lambda xs, ys: phi.value_many(xs, ys) / np.asarray(ys) ** 2
    return _adaptive_quad2d(fun, b.x_lo, b.x_hi, b.y_lo, b.y_hi, tol)


def check_zero_identity(f: FormNumeric, zs, phi: BumpFunction, quad_eps: float = 1e-6):
    """Both sides of the zero-counting identity.

    Returns dict with lhs, rhs (Euclidean form), rhs_invariant (hyperbolic
    Laplacian route through the fundamental domain) and the differences.
    """
    k = f.weight
    lhs = 0.0
    singular = []
    box = phi.support_box()
    for rec in zs.records:
        lhs += float(rec.stab_weight) * rec.multiplicity * F_phi(phi, rec.point)
        for g in enumerate_translates(rec.point, box):
            singular.append(g.apply_xy(rec.point.x, rec.point.y))

    term_vol = k / (4.0 * math.pi) * phi_measure_integral(phi, tol=quad_eps * 1e-3)

    def integrand_euclid(xs, ys):
        ys = np.asarray(ys, dtype=float)
        la = log_abs_many(f, np.asarray(xs, dtype=float), ys)
        logmass = 0.5 * k * np.log(ys) + la
        logmass = np.where(np.isfinite(logmass), logmass, 0.0)  # measure-zero dips
        return logmass * phi.laplacian_many(xs, ys)

    i2 = _adaptive_quad2d(integrand_euclid, box.x_lo, box.x_hi, box.y_lo, box.y_hi,
                          quad_eps * 1e-2, singular_pts=singular) / (2.0 * math.pi)

    def integrand_invariant(xs, ys):
        ys_arr = np.asarray(ys, dtype=float)
        lm = _log_invariant_mass(f, np.asarray(xs, dtype=float), ys_arr)
        lm = np.where(np.isfinite(lm), lm, 0.0)
        lap_h = ys_arr * ys_arr * phi.laplacian_many(xs, ys_arr)
        return lm * lap_h / (ys_arr * ys_arr)

    i2_inv = _adaptive_quad2d(integrand_invariant, box.x_lo, box.x_hi, box.y_lo, box.y_hi,
                              quad_eps * 1e-2, singular_pts=singular) / (2.0 * math.pi)

    rhs = term_vol + i2
    rhs_inv = term_vol + i2_inv
    return {
        "lhs": lhs,
        "rhs": rhs,
        "rhs_invariant": rhs_inv,
        "diff": abs(lhs - rhs),
        "diff_invariant": abs(lhs - rhs_inv),
    }
