"""Point reduction to the fundamental domain and log-scale form evaluation.

Two evaluation paths coexist: an mpmath path at the form's precision
(used by the root refiner and the identity checks) and a vectorized
float64 path in log-scale (used by quadrature and grid sweeps, where
1e-13 relative is plenty and speed matters).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from mpmath import mp

from .eigen import FormNumeric

SQRT3_2 = math.sqrt(3.0) / 2.0
LOG_FLOOR = -1e6  # log|f| below this reports phase 0 by convention


class InsufficientTruncationError(RuntimeError):
    pass


@dataclass(frozen=True)
class UpperHalfPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError("point must lie in the upper half-plane")

    def as_complex(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class GroupElement:
    """Element of SL2(Z)/{+-I}, normalized so c > 0, or c == 0 and d > 0."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError("determinant must be 1")
        if self.c < 0 or (self.c == 0 and self.d < 0):
            raise ValueError("use GroupElement.make for canonical sign")

    @staticmethod
    def make(a: int, b: int, c: int, d: int) -> "GroupElement":
        if c < 0 or (c == 0 and d < 0):
            a, b, c, d = -a, -b, -c, -d
        return GroupElement(a, b, c, d)

    @staticmethod
    def identity() -> "GroupElement":
        return GroupElement(1, 0, 0, 1)

    def compose(self, other: "GroupElement") -> "GroupElement":
        return GroupElement.make(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def apply_xy(self, x, y):
        """Act on x + iy; works for floats and mpmath values alike."""
        cxd = self.c * x + self.d
        den = cxd * cxd + self.c * self.c * y * y
        xn = ((self.a * x + self.b) * cxd + self.a * self.c * y * y) / den
        return xn, y / den

    def apply(self, z: UpperHalfPoint) -> UpperHalfPoint:
        x, y = self.apply_xy(z.x, z.y)
        return UpperHalfPoint(x, y)


@dataclass(frozen=True)
class LogValue:
    log_abs: float
    phase: float


def reduce_to_fundamental(z: UpperHalfPoint):
    """Reduce z to F = {|z| >= 1, |x| <= 1/2} with deterministic tie-breaks.

    Ties: x in [-1/2, 1/2), and on the arc |z| = 1 the representative has
    x <= 0. Returns (reduced point, gamma) with gamma z = reduced point.
    """
    x, y = z.x, z.y
    g = GroupElement.identity()
    for _ in range(10000):
        n = math.floor(x + 0.5)
        if x - n >= 0.5:  # floor boundary: keep x in [-1/2, 1/2)
            n += 1
        if n != 0:
            x -= n
            g = GroupElement.make(1, -n, 0, 1).compose(g)
        r2 = x * x + y * y
        if r2 < 1.0:
            s = GroupElement.make(0, -1, 1, 0)
            x, y = s.apply_xy(x, y)
            g = s.compose(g)
        else:
            break
    else:
        raise RuntimeError("reduction did not terminate")
    if x >= 0.5:
        x -= 1.0
        g = GroupElement.make(1, -1, 0, 1).compose(g)
    if x * x + y * y == 1.0 and x > 0:
        s = GroupElement.make(0, -1, 1, 0)
        x, y = s.apply_xy(x, y)
        g = s.compose(g)
    return UpperHalfPoint(x, y), g


def in_fundamental_domain(z: UpperHalfPoint, tol: float = 1e-12) -> bool:
    return abs(z.x) <= 0.5 + tol and z.x * z.x + z.y * z.y >= 1.0 - tol


def hyperbolic_distance(z1: UpperHalfPoint, z2: UpperHalfPoint) -> float:
    dx, dy = z1.x - z2.x, z1.y - z2.y
    arg = 1.0 + (dx * dx + dy * dy) / (2.0 * z1.y * z2.y)
    return math.acosh(max(arg, 1.0))


def _coefficient_log_bound(f: FormNumeric):
    """Callable n -> certified ln bound on |a(n)|, valid for all n >= 1."""
    k = f.weight
    if f.kind == "eigenform":
        return lambda n: 0.5 * (k + 1) * math.log(n)
    if f.kind == "eisenstein":
        sgn, loga = f.log_coeff_arrays()
        c1 = loga[1]
        # sigma_{k-1}(n) <= zeta(k-1) n^{k-1} <= 1.21 n^{k-1} for k >= 6
        return lambda n: c1 + (k - 1) * math.log(n) + math.log(1.3)
    sgn, loga = f.log_coeff_arrays()
    shape = 0.5 * (k + 1)
    scale = max(
        (loga[n] - shape * math.log(n) for n in range(1, len(loga)) if np.isfinite(loga[n])),
        default=0.0,
    )
    return lambda n: scale + shape * math.log(n) + math.log(10.0)  # safety factor 10


def tail_terms_needed(f: FormNumeric, y_min: float, eps_log: float) -> int:
    """Smallest N with the certified coefficient tail below exp(eps_log) * partial-sum scale."""
    if y_min <= 0:
        raise ValueError("y_min must be positive")
    bound = _coefficient_log_bound(f)
    w = 2.0 * math.pi * y_min
    term = lambda n: bound(n) - w * n
    peak = max(term(n) for n in range(1, max(3, int(f.weight / w) + 3)))
    target = peak + eps_log
    n = 1
    while True:
        t = term(n)
        # past the peak and individually small: geometric tail certificate
        if n > 1 and t < target and t < term(n - 1):
            ratio = math.exp(t - term(n - 1))
            tail = t + math.log(1.0 / max(1.0 - ratio, 1e-12))
            if tail < target:
                break
        n += 1
        if n > f.trunc:
            raise InsufficientTruncationError(
                f"need more than {f.trunc} coefficients for y_min={y_min}, eps_log={eps_log}"
            )
    return n


def eval_log(f: FormNumeric, z: UpperHalfPoint) -> LogValue:
    """log|f(z)| and phase at the form's precision; reduces z first if needed."""
    auto_log = mp.mpf(0)
    auto_phase = 0.0
    if z.y < SQRT3_2 * 0.999 or abs(z.x) > 0.5 + 1e-12:
        zr, g = reduce_to_fundamental(z)
        with mp.workprec(f.precision_bits + 32):
            czd = mp.mpc(g.c * z.x + g.d, g.c * z.y)
            auto_log = -f.weight * mp.log(abs(czd))
            auto_phase = -f.weight * float(mp.arg(czd))
        z = zr
    N = tail_terms_needed(f, z.y, -0.9 * f.precision_bits * math.log(2))
    with mp.workprec(f.precision_bits + 32):
        q = mp.exp(2j * mp.pi * mp.mpc(z.x, z.y))
        acc = mp.mpc(0)
        for n in range(min(N, f.trunc), -1, -1):
            acc = acc * q + f.coeffs[n]
        if acc == 0:
            return LogValue(float("-inf"), 0.0)
        log_abs = float(mp.log(abs(acc)) + auto_log)
        phase = float(mp.arg(acc)) + auto_phase
    if log_abs < LOG_FLOOR:
        return LogValue(log_abs, 0.0)
    phase = math.remainder(phase, 2.0 * math.pi)
    if phase <= -math.pi:
        phase += 2.0 * math.pi
    return LogValue(log_abs, phase)


def log_mass(f: FormNumeric, z: UpperHalfPoint) -> float:
    """ln of the normalized mass density y^k |f(z)|^2 / <f,f>."""
    if f.petersson_norm is None:
        raise ValueError("Petersson norm not cached on form")
    lv = eval_log(f, z)
    if lv.log_abs == float("-inf"):
        return float("-inf")
    return f.weight * math.log(z.y) + 2.0 * lv.log_abs - float(mp.log(f.petersson_norm))


def v_k(f: FormNumeric, z: UpperHalfPoint) -> float:
    """(1/k) log|f(z)^2|, the log-mass potential without the y^k factor."""
    return 2.0 * eval_log(f, z).log_abs / f.weight


# ---------------------------------------------------------------------------
# fast float64 path


def eval_scaled_many(f: FormNumeric, xs: np.ndarray, ys: np.ndarray, n_terms: int | None = None):
    """Vectorized evaluation: returns (M, s) with f(z_j) = s_j * e^{M_j}, |s| = O(1).

    Points must satisfy y >= ~sqrt(3)/2 (no reduction on this path).
    """
    sgn, loga = f.log_coeff_arrays()
    N = len(loga) - 1 if n_terms is None else min(n_terms, len(loga) - 1)
    n = np.arange(N + 1)
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    logmag = loga[None, : N + 1] - 2.0 * math.pi * ys[:, None] * n[None, :]
    M = np.max(logmag, axis=1)
    amp = sgn[None, : N + 1] * np.exp(logmag - M[:, None])
    phase = np.exp(2j * math.pi * xs[:, None] * n[None, :])
    s = np.sum(amp * phase, axis=1)
    return M, s


def log_abs_many(f: FormNumeric, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized log|f| at float64 accuracy."""
    M, s = eval_scaled_many(f, xs, ys)
    with np.errstate(divide="ignore"):
        return M + np.log(np.abs(s))
