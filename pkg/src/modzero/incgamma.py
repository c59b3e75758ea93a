"""Integer-parameter incomplete gamma numerics in log-scale.

Everything is carried as logarithms with >= 128-bit significands: the
central quantities subtract nearly equal numbers scaled by e^k, and the
sums have ~sqrt(x)-wide peaks that a windowed compensated sum captures.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from mpmath import mp

MIN_PRECISION_BITS = 128


def _log_exp_partial_sum(x, mmax: int, precision_bits: int):
    """ln sum_{m=0}^{mmax} x^m / m!  (mpf), windowed around the peak m ~ x."""
    if mmax < 0:
        raise ValueError("mmax must be >= 0")
    with mp.workprec(precision_bits + 32):
        xm = mp.mpf(x)
        m_hat = min(mmax, max(0, int(xm)))
        width = int(math.sqrt(2.0 * float(xm) * (precision_bits + 32) * math.log(2))) + 8
        lo = max(0, m_hat - width)
        hi = min(mmax, m_hat + width)
        t_hat = m_hat * mp.log(xm) - mp.loggamma(m_hat + 1)
        total = mp.mpf(1)
        r = mp.mpf(1)
        for m in range(m_hat + 1, hi + 1):
            r = r * xm / m
            total += r
        r = mp.mpf(1)
        for m in range(m_hat - 1, lo - 1, -1):
            r = r * (m + 1) / xm
            total += r
        return t_hat + mp.log(total)


@lru_cache(maxsize=100000)
def gamma_inc(a: int, x) -> object:
    """ln Gamma(a, x) for integer a >= 1, x > 0 (upper incomplete gamma).

    Closed form: Gamma(a, x) = (a-1)! e^{-x} sum_{m=0}^{a-1} x^m/m!.
    """
    if a < 1 or int(a) != a:
        raise ValueError("integer a >= 1 required")
    if not x > 0:
        raise ValueError("x must be positive")
    with mp.workprec(MIN_PRECISION_BITS + 32):
        return mp.loggamma(a) - mp.mpf(x) + _log_exp_partial_sum(x, a - 1, MIN_PRECISION_BITS)


def ratio_half(k: int) -> float:
    """Gamma(k-1, k) / Gamma(k-1); tends to 1/2."""
    if k < 3:
        raise ValueError("k >= 3 required")
    with mp.workprec(MIN_PRECISION_BITS + 32):
        return float(mp.exp(gamma_inc(k - 1, k) - mp.loggamma(k - 1)))


def poisson_cdf_half(k: int) -> float:
    """e^{-k} sum_{m<=k} k^m/m! = Prob(Poisson(k) <= k); tends to 1/2."""
    if k < 1:
        raise ValueError("k >= 1 required")
    with mp.workprec(MIN_PRECISION_BITS + 32):
        return float(mp.exp(-mp.mpf(k) + _log_exp_partial_sum(k, k, MIN_PRECISION_BITS)))


def ramanujan_theta(k: int) -> float:
    """theta(k) solving e^{-k}(sum_{m<=k-1} k^m/m! + theta k^k/k!) = 1/2."""
    if k < 1:
        raise ValueError("k >= 1 required")
    prec = MIN_PRECISION_BITS
    while True:
        with mp.workprec(prec + 32):
            log_sum = _log_exp_partial_sum(k, k - 1, prec)
            half = mp.mpf(1) / 2
            a_val = mp.exp(-mp.mpf(k) + log_sum)
            diff = half - a_val
            if abs(diff) > half * mp.mpf(2) ** (-prec // 2):
                theta = diff * mp.exp(mp.loggamma(k + 1) + k - k * mp.log(k))
                return float(theta)
        prec *= 2
        if prec > 4096:
            raise RuntimeError("theta extraction failed to resolve cancellation")


def bound_series(k: int, y: float, N: int | None = None) -> float:
    """ln of  y^k sum_{n>=1} e^{-4 pi n y} (4 pi n)^{k-1} / Gamma(k-1, n).

    The series from the sup-norm proof; terms for n > k decay like
    e^{-n(4 pi y - 1)}, which certifies the truncation.
    """
    if y < math.sqrt(3.0) / 2.0 - 1e-12:
        raise ValueError("bound valid for y >= sqrt(3)/2")
    if N is None:
        N = max(3 * k, 60)
    logs = []
    l4p = math.log(4.0 * math.pi)
    for n in range(1, N + 1):
        t = (k * math.log(y) - 4.0 * math.pi * n * y
             + (k - 1) * (l4p + math.log(n)) - float(gamma_inc(k - 1, n)))
        logs.append(t)
    logs = np.array(logs)
    M = logs.max()
    total = float(np.sum(np.exp(logs - M)))
    # geometric tail certificate from the last two terms
    ratio = math.exp(logs[-1] - logs[-2])
    if ratio >= 1.0:
        raise ValueError(f"N={N} too small to certify the tail at k={k}, y={y}")
    tail_rel = math.exp(logs[-1] - M) * ratio / (1.0 - ratio)
    if tail_rel > 1e-12 * total:
        raise ValueError(f"N={N} too small: tail {tail_rel / total} relative")
    return M + math.log(total)


def sup_mass_experiment(forms: list, grid: list):
    """Sup of y^k |f|^2 / <f,f> over the grid per form, and the ln-ln slope.

    Requires Petersson norms cached on the forms. Returns
    (list of ln sup per form, regression slope of ln sup vs ln k).
    """
    from .evaluate import log_abs_many  # local import avoids a cycle

    xs = np.array([p.x for p in grid])
    ys = np.array([p.y for p in grid])
    sups = []
    for f in forms:
        if f.petersson_norm is None:
            raise ValueError(f"Petersson norm missing on weight-{f.weight} form")
        la = log_abs_many(f, xs, ys)
        vals = f.weight * np.log(ys) + 2.0 * la - float(mp.log(f.petersson_norm))
        sups.append(float(vals.max()))
    ks = np.log([f.weight for f in forms])
    slope = float(np.polyfit(ks, np.array(sups), 1)[0])
    return sups, slope


def default_sup_grid(nx: int = 24, ny: int = 36) -> list:
    """Grid on the compact set [-1/2, 1/2] x [sqrt(3)/2, 3]."""
    from .evaluate import UpperHalfPoint

    pts = []
    for x in np.linspace(-0.5, 0.5, nx):
        for y in np.geomspace(math.sqrt(3.0) / 2.0, 3.0, ny):
            if x * x + y * y >= 1.0:
                pts.append(UpperHalfPoint(float(x), float(y)))
    return pts
