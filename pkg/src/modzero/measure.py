"""Empirical zero measures, hyperbolic volumes, Petersson norms and mass integrals.

The 2-D quadrature works in log-scale throughout: node values are
ln(integrand) and the panel sums are assembled with a log-sum-exp, so
y^k |f|^2 at weight 300 never overflows a float.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from mpmath import mp

from .eigen import FormNumeric
from .evaluate import UpperHalfPoint, log_abs_many
from .incgamma import gamma_inc

SQRT3_2 = math.sqrt(3.0) / 2.0


class QuadratureError(RuntimeError):
    pass


class EmptyZeroSetError(RuntimeError):
    pass


@dataclass(frozen=True)
class BoxRegion:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float  # math.inf allowed for the cusp tail cell

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and 0 < self.y_lo < self.y_hi):
            raise ValueError("degenerate box")

    def contains(self, z: UpperHalfPoint) -> bool:
        return self.x_lo <= z.x < self.x_hi and self.y_lo <= z.y < self.y_hi


@dataclass(frozen=True)
class MeasureReport:
    weight: int
    kind: str
    eigen_index: int | None
    rows: tuple  # (box, empirical: float, volume: float, diff: float)
    sup_diff: float


# ---------------------------------------------------------------------------
# geometry


def _x_segments(y: float, x_lo: float, x_hi: float, clip: bool):
    """Admissible x-intervals at height y, clipped against |z| >= 1."""
    if not clip or y >= 1.0:
        return [(x_lo, x_hi)]
    xc = math.sqrt(1.0 - y * y)
    segs = []
    if x_lo < -xc:
        segs.append((x_lo, min(x_hi, -xc)))
    if x_hi > xc:
        segs.append((max(x_lo, xc), x_hi))
    return [(a, b) for a, b in segs if b > a]


def hyper_volume(box: BoxRegion, clip: bool = True) -> float:
    """Normalized hyperbolic volume (3/pi) integral of dx dy / y^2 over box (clip: against F)."""
    inv_hi = 0.0 if math.isinf(box.y_hi) else 1.0 / box.y_hi
    if not clip or box.y_lo >= 1.0:
        return 3.0 / math.pi * (box.x_hi - box.x_lo) * (1.0 / box.y_lo - inv_hi)
    # 1-D quadrature of the arc-clipped inner integral
    nodes, weights = np.polynomial.legendre.leggauss(80)
    a, b = box.x_lo, box.x_hi
    xs = 0.5 * (b - a) * nodes + 0.5 * (a + b)
    y_floor = np.where(np.abs(xs) < 1.0, np.sqrt(np.maximum(1.0 - xs * xs, 0.0)), 0.0)
    y_floor = np.maximum(y_floor, box.y_lo)
    vals = np.where(y_floor < box.y_hi, 1.0 / y_floor - inv_hi, 0.0)
    return 3.0 / math.pi * 0.5 * (b - a) * float(np.dot(weights, vals))


def full_domain_box() -> BoxRegion:
    return BoxRegion(-0.5, 0.5, SQRT3_2, math.inf)


def empirical_measure(zs, box: BoxRegion) -> Fraction:
    """Weighted fraction of the zero set inside the box."""
    if zs.nu == 0:
        raise EmptyZeroSetError("form has no zeros in H (power of the discriminant)")
    acc = Fraction(0)
    for rec in zs.records:
        if box.contains(rec.point):
            acc += rec.stab_weight * rec.multiplicity
    return acc / zs.nu


def default_grid(nx: int = 6, ny: int = 6, y_top: float = 3.0) -> list:
    """nx x ny partition of [-1/2,1/2] x [sqrt3/2, y_top] plus the cusp tail cell."""
    boxes = []
    xs = np.linspace(-0.5, 0.5, nx + 1)
    ys = np.linspace(SQRT3_2, y_top, ny + 1)
    for i in range(nx):
        for j in range(ny):
            boxes.append(BoxRegion(float(xs[i]), float(xs[i + 1]), float(ys[j]), float(ys[j + 1])))
    boxes.append(BoxRegion(-0.5, 0.5, y_top, math.inf))
    return boxes


def discrepancy(zs, grid: list) -> float:
    """Max over grid boxes of |empirical - clipped volume|."""
    worst = 0.0
    for box in grid:
        emp = float(empirical_measure(zs, box))
        vol = hyper_volume(box)
        worst = max(worst, abs(emp - vol))
    return worst


def arc_star_discrepancy(zs) -> float:
    """Star discrepancy of the zero angles against uniform measure on the
    arc between rho and i (representatives have x <= 0 on |z| = 1)."""
    items = []
    for rec in zs.records:
        theta = math.atan2(rec.point.y, rec.point.x)
        items.append((theta, float(rec.stab_weight * rec.multiplicity)))
    if not items:
        raise EmptyZeroSetError("no zeros")
    lo, hi = math.pi / 2.0, 2.0 * math.pi / 3.0
    total = sum(w for _, w in items)
    items.sort()
    worst = 0.0
    cum = 0.0
    for theta, w in items:
        t = min(max((theta - lo) / (hi - lo), 0.0), 1.0)
        worst = max(worst, abs(cum - t))
        cum += w / total
        worst = max(worst, abs(cum - t))
    return worst


# ---------------------------------------------------------------------------
# quadrature engine


def _n_cut(f: FormNumeric, y: float, drop: float = 46.0) -> int:
    """Number of q-terms contributing at height y (others > `drop` nats below peak)."""
    sgn, loga = f.log_coeff_arrays()
    n = np.arange(len(loga))
    t = loga - 2.0 * math.pi * y * n
    t = np.where(np.isfinite(t), t, -np.inf)
    M = t.max()
    idx = np.nonzero(t > M - drop)[0]
    return int(idx[-1]) + 1 if idx.size else 1


@lru_cache(maxsize=None)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def _box_log_terms(f: FormNumeric, y_lo: float, y_hi: float,
                   x_lo: float, x_hi: float, ny_panel: int, refine: int) -> list:
    """Log-scale quadrature terms of y^{k-2}|f|^2 over a plain box."""
    k = f.weight
    n_y_panels = max(2, int((y_hi - y_lo) * ny_panel)) * (1 + refine)
    gy, wy = _leggauss(10 + 4 * refine)
    logs = []
    edges = np.linspace(y_lo, y_hi, n_y_panels + 1)
    for ya, yb in zip(edges, edges[1:]):
        ys_nodes = 0.5 * (yb - ya) * gy + 0.5 * (ya + yb)
        wys = 0.5 * (yb - ya) * wy
        for y, wyv in zip(ys_nodes, wys):
            ncut = _n_cut(f, float(y))
            nx = int(2.6 * ncut * (x_hi - x_lo)) + 12 + 4 * refine
            gx, wx = _leggauss(min(nx, 192))
            xs_nodes = 0.5 * (x_hi - x_lo) * gx + 0.5 * (x_lo + x_hi)
            wxs = 0.5 * (x_hi - x_lo) * wx
            la = log_abs_many(f, xs_nodes, np.full_like(xs_nodes, y))
            logs.append((k - 2.0) * math.log(y) + 2.0 * la + np.log(wxs) + math.log(wyv))
    return logs


def _arc_log_terms(f: FormNumeric, y_lo: float, y_mid: float,
                   x_lo: float, x_hi: float, refine: int) -> list:
    """Terms over the arc-clipped strip {x in box, y_lo <= y <= y_mid, |z| >= 1}.

    Integrated with x outermost: the boundary y = sqrt(1 - x^2) is smooth in
    x, whereas a y-outer sweep sees a square-root kink at the top of the arc
    and loses the spectral convergence of the panels.
    """
    k = f.weight
    if y_mid <= y_lo:
        return []
    breaks = {x_lo, x_hi}
    for yy in (y_lo, y_mid):
        if yy < 1.0:
            xb = math.sqrt(1.0 - yy * yy)
            for s in (-xb, xb):
                if x_lo < s < x_hi:
                    breaks.add(s)
    xs_b = sorted(breaks)
    ncut = _n_cut(f, y_lo)
    order_x = 24 + 4 * refine
    logs = []
    for a, b in zip(xs_b, xs_b[1:]):
        if b - a < 1e-14:
            continue
        npx = max(1, int(math.ceil((2.6 * ncut * (b - a) + 12) / 24.0)))
        gx, wx = _leggauss(order_x)
        edges = np.linspace(a, b, npx + 1)
        for xa, xb2 in zip(edges, edges[1:]):
            xn = 0.5 * (xb2 - xa) * gx + 0.5 * (xa + xb2)
            wn = 0.5 * (xb2 - xa) * wx
            for x, wxv in zip(xn, wn):
                ylo_x = max(y_lo, math.sqrt(max(0.0, 1.0 - x * x)))
                if ylo_x >= y_mid - 1e-15:
                    continue
                # keep the exponential variation per y-panel moderate
                nats = abs(k - 2) * math.log(y_mid / ylo_x) + 12.0
                npy = max(1, int(math.ceil(nats / 20.0)))
                gy, wy = _leggauss(16 + 4 * refine)
                ye = np.linspace(ylo_x, y_mid, npy + 1)
                for ya, yb in zip(ye, ye[1:]):
                    yn = 0.5 * (yb - ya) * gy + 0.5 * (ya + yb)
                    wyn = 0.5 * (yb - ya) * wy
                    la = log_abs_many(f, np.full_like(yn, x), yn)
                    logs.append((k - 2.0) * np.log(yn) + 2.0 * la
                                + np.log(wyn) + math.log(wxv))
    return logs


def _log_norm_integral(f: FormNumeric, y_lo: float, y_hi: float,
                       x_lo: float, x_hi: float, clip: bool,
                       ny_panel: int, refine: int = 0):
    """ln of integral of y^{k-2} |f|^2 over the (optionally F-clipped) box."""
    logs = []
    if clip and y_lo < 1.0:
        y_mid = min(y_hi, 1.0)
        logs += _arc_log_terms(f, y_lo, y_mid, x_lo, x_hi, refine)
        if y_hi > 1.0:
            logs += _box_log_terms(f, 1.0, y_hi, x_lo, x_hi, ny_panel, refine)
    else:
        logs += _box_log_terms(f, y_lo, y_hi, x_lo, x_hi, ny_panel, refine)
    allv = np.concatenate(logs)
    allv = allv[np.isfinite(allv)]
    M = allv.max()
    return M + math.log(float(np.sum(np.exp(allv - M))))


def _logaddexp_mp(la, lb):
    if la < lb:
        la, lb = lb, la
    return la + math.log1p(math.exp(lb - la))


def _mass_log_integral(f: FormNumeric, box: BoxRegion, clip: bool, eps: float) -> float:
    """ln integral of y^{k-2}|f|^2 over box (finite y_hi), with refinement check."""
    prev = None
    for refine in range(3):
        val = _log_norm_integral(f, box.y_lo, box.y_hi, box.x_lo, box.x_hi,
                                 clip, ny_panel=6, refine=refine)
        if prev is not None and abs(val - prev) < eps:
            return val
        prev = val
    raise QuadratureError(
        f"quadrature did not converge to {eps} on box ({box.x_lo},{box.x_hi},{box.y_lo},{box.y_hi})"
    )


def _cusp_cut(f: FormNumeric, eps: float) -> float:
    """Height above which the remaining mass is certified below eps (relative)."""
    sgn, loga = f.log_coeff_arrays()
    # mass above Y is dominated by the first nonzero coefficient's term
    n0 = f.ord_infinity if f.ord_infinity >= 1 else 1
    k = f.weight
    # peak of e^{-4 pi n0 y} y^{k-2}
    y_peak = max((k - 2) / (4.0 * math.pi * n0), 1.0)
    Y = y_peak
    while True:
        Y *= 1.3
        tail = float(loga[n0]) * 2 - 4.0 * math.pi * n0 * Y + (k - 2) * math.log(Y) + math.log(Y)
        peak = float(loga[n0]) * 2 - 4.0 * math.pi * n0 * y_peak + (k - 2) * math.log(y_peak)
        if tail < peak + math.log(eps) - 10:
            return Y


def petersson_norm(f: FormNumeric, eps: float = 1e-9):
    """<f, f> over F via adaptive log-scale quadrature (cusp forms only). Returns mpf."""
    if f.petersson_norm is not None:
        return f.petersson_norm
    if f.ord_infinity < 1:
        raise ValueError("Petersson norm integral requires a cusp form")
    Y = _cusp_cut(f, eps)
    prev = None
    for refine in range(4):
        log_low_r = _log_norm_integral(f, SQRT3_2, 1.0, -0.5, 0.5, True,
                                       ny_panel=24, refine=refine)
        log_up_r = _log_norm_integral(f, 1.0, Y, -0.5, 0.5, False,
                                      ny_panel=6, refine=refine)
        val = _logaddexp_mp(log_low_r, log_up_r)
        if prev is not None and abs(val - prev) < eps:
            break
        prev = val
    else:
        raise QuadratureError(f"Petersson quadrature did not reach eps={eps} at weight {f.weight}")
    with mp.workprec(96):
        norm = mp.exp(mp.mpf(val))
    f.petersson_norm = norm
    return norm


def siegel_norm_quadrature(f: FormNumeric, eps: float = 1e-8):
    """Direct quadrature of |f|^2 y^k dxdy/y^2 over the Siegel set [0,1] x (1/4pi, inf)."""
    if f.ord_infinity < 1:
        raise ValueError("requires a cusp form")
    Y = _cusp_cut(f, eps)
    y0 = 1.0 / (4.0 * math.pi)
    prev = None
    for refine in range(4):
        # dense panels near the bottom where |q| is not yet small
        v1 = _log_norm_integral(f, y0, 0.6, 0.0, 1.0, False, ny_panel=40, refine=refine)
        v2 = _log_norm_integral(f, 0.6, Y, 0.0, 1.0, False, ny_panel=8, refine=refine)
        val = _logaddexp_mp(v1, v2)
        if prev is not None and abs(val - prev) < eps:
            with mp.workprec(96):
                return mp.exp(mp.mpf(val))
        prev = val
    raise QuadratureError("Siegel-set quadrature did not converge")


def siegel_norm_coefficient_sum(f: FormNumeric):
    """sum_{n>=1} |a(n)|^2 / (4 pi n)^{k-1} * Gamma(k-1, n)  (mpf).

    Parseval evaluation of the Siegel-set integral.
    """
    if f.ord_infinity < 1:
        raise ValueError("requires a cusp form")
    k = f.weight
    sgn, loga = f.log_coeff_arrays()
    logs = []
    for n in range(1, len(loga)):
        if not np.isfinite(loga[n]):
            continue
        t = 2.0 * loga[n] - (k - 1) * math.log(4.0 * math.pi * n) + float(gamma_inc(k - 1, n))
        logs.append(t)
        if len(logs) > 3 and t < max(logs) - 60 and t < logs[-2]:
            break
    M = max(logs)
    total = M + math.log(sum(math.exp(t - M) for t in logs))
    with mp.workprec(96):
        return mp.exp(mp.mpf(total))


def parseval_band(f: FormNumeric, Y: float):
    """ln of the full-period integral of y^{k-2}|f|^2 over [x period] x [Y, inf),
    via term-wise integration: sum |a(n)|^2 Gamma(k-1, 4 pi n Y) / (4 pi n)^{k-1}."""
    k = f.weight
    sgn, loga = f.log_coeff_arrays()
    logs = []
    for n in range(max(1, f.ord_infinity), len(loga)):
        if not np.isfinite(loga[n]):
            continue
        t = 2.0 * loga[n] - (k - 1) * math.log(4.0 * math.pi * n) + float(gamma_inc(k - 1, 4.0 * math.pi * n * Y))
        logs.append(t)
        if len(logs) > 3 and t < max(logs) - 60 and t < logs[-2]:
            break
    M = max(logs)
    return M + math.log(sum(math.exp(t - M) for t in logs))


def mass_measure(f: FormNumeric, box: BoxRegion, eps: float = 1e-7) -> float:
    """Normalized mass of the box: integral of y^k|f|^2/<f,f> dxdy/y^2 over box cap F."""
    norm = petersson_norm(f)
    log_norm = float(mp.log(norm))
    if math.isinf(box.y_hi):
        if not (box.x_lo <= -0.5 + 1e-12 and box.x_hi >= 0.5 - 1e-12):
            raise QuadratureError("infinite-height boxes must span the full x-period")
        if box.y_lo >= 1.0:
            return math.exp(parseval_band(f, box.y_lo) - log_norm)
        # below y = 1 the box cap F is arc-clipped; quadrature up to 1,
        # coefficient series beyond
        low = _mass_log_integral(f, BoxRegion(box.x_lo, box.x_hi, box.y_lo, 1.0),
                                 clip=True, eps=eps)
        return math.exp(_logaddexp_mp(low, parseval_band(f, 1.0)) - log_norm)
    val = _mass_log_integral(f, box, clip=True, eps=eps)
    return math.exp(val - log_norm)


def measure_report(f: FormNumeric, zs, grid: list | None = None) -> MeasureReport:
    grid = grid if grid is not None else default_grid()
    rows = []
    sup = 0.0
    for box in grid:
        emp = float(empirical_measure(zs, box))
        vol = hyper_volume(box)
        diff = emp - vol
        sup = max(sup, abs(diff))
        rows.append((box, emp, vol, diff))
    return MeasureReport(zs.weight, zs.kind, zs.eigen_index, tuple(rows), sup)
