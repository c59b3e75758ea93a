"""Zeros of a form in the fundamental domain, validated by the valence formula.

The search happens in the q-disk |q| <= e^{-pi sqrt 3} (1 + 1e-3): every
point of F has y >= sqrt(3)/2, so all fundamental-domain zeros land in
that disk. Initial roots come from the double-precision companion
matrix of the rescaled polynomial; each root is then Newton-polished at
the form's precision against the exact coefficient series.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import mp

from .eigen import FormNumeric
from .evaluate import (
    UpperHalfPoint,
    eval_log,
    eval_scaled_many,
    hyperbolic_distance,
    reduce_to_fundamental,
)

Q_DISK_RADIUS = math.exp(-math.pi * math.sqrt(3.0)) * (1.0 + 1e-3)
CLUSTER_TOL_Q = 1e-8
MERGE_TOL_HYP = 1e-8
ELLIPTIC_TOL_HYP = 1e-6
BOUNDARY_SNAP = 1e-9

POINT_I = UpperHalfPoint(0.0, 1.0)
POINT_RHO = UpperHalfPoint(-0.5, math.sqrt(3.0) / 2.0)


class ValenceMismatchError(RuntimeError):
    pass


class RootConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ZeroRecord:
    point: UpperHalfPoint
    multiplicity: int
    stab_weight: Fraction
    residual_log: float


@dataclass(frozen=True)
class ZeroSet:
    weight: int
    kind: str
    eigen_index: int | None
    records: tuple
    ord_infinity: int
    nu: Fraction


def ord_infinity(f: FormNumeric) -> int:
    """Order of vanishing at the cusp.

    The declared value on the form is authoritative; this only rejects forms
    whose coefficients below that order carry non-negligible weight on the
    search disk.
    """
    sgn, loga = f.log_coeff_arrays()
    t = loga + np.arange(len(loga)) * math.log(Q_DISK_RADIUS)
    finite = t[np.isfinite(t)]
    if finite.size == 0:
        raise ValueError("all-zero form")
    floor = finite.max() - f.precision_bits / 2 * math.log(2)
    for n in range(min(f.ord_infinity, len(t))):
        if t[n] > floor:
            raise ValueError(
                f"declared cusp order {f.ord_infinity} disagrees with "
                f"coefficients (significant term at n={n})"
            )
    return f.ord_infinity


def _certified_degree(f: FormNumeric, radius: float) -> int:
    """Working polynomial degree: coefficient tail at |q|=radius is 0.75*prec bits
    below the largest term, with 25% headroom left for the raise check."""
    sgn, loga = f.log_coeff_arrays()
    n = np.arange(len(loga))
    t = loga + n * math.log(radius * 1.001)
    t_finite = np.where(np.isfinite(t), t, -np.inf)
    M = t_finite.max()
    slack = 0.75 * f.precision_bits * math.log(2)
    Nw = None
    for i in range(int(np.argmax(t_finite)) + 1, len(t)):
        if t_finite[i] < M - slack and np.all(t_finite[i:] < M - slack):
            Nw = i
            break
    if Nw is None or int(1.25 * Nw) > f.trunc:
        raise RootConvergenceError(
            f"insufficient truncation {f.trunc} for certified roots at weight {f.weight}"
        )
    return Nw


def _poly_eval(coeffs, q):
    """Horner evaluation of sum coeffs[m] q^m and its derivative (mpmath)."""
    p = mp.mpc(0)
    dp = mp.mpc(0)
    for c in reversed(coeffs):
        dp = dp * q + p
        p = p * q + c
    return p, dp


def _newton_polish(coeffs, q0, precision_bits):
    """Newton with multiplicity acceleration; returns (root, |P(root)|).

    Tracks the best iterate seen: near a multiple root the steps bottom out
    at the evaluation noise floor and the last iterate can be much worse
    than the best one.
    """
    with mp.workprec(precision_bits + 32):
        q = mp.mpc(q0)
        mult = 1.0
        prev_step = None
        tol = mp.mpf(2) ** (-(precision_bits - 8))
        best_q, best_p = q, mp.inf
        for _ in range(80):
            p, dp = _poly_eval(coeffs, q)
            if abs(p) < best_p:
                best_q, best_p = q, abs(p)
            if dp == 0 or p == 0:
                break
            step = p / dp
            q_new = q - mult * step
            if prev_step is not None and abs(step) > 0:
                ratio = float(abs(step) / prev_step) if prev_step > 0 else 0.0
                if 0.25 < ratio < 0.95:
                    mult = max(1.0, round(1.0 / (1.0 - ratio)))
            prev_step = float(abs(step))
            if abs(q_new - q) <= tol * max(abs(q), mp.mpf(1e-300)):
                q = q_new
                break
            q = q_new
        p, _ = _poly_eval(coeffs, q)
        if abs(p) < best_p:
            best_q, best_p = q, abs(p)
        return best_q, best_p


def _upper_hull(xs, ys):
    """Concave majorant of the points (xs[i], ys[i]); xs strictly increasing.

    Returns hull vertex indices into xs/ys.
    """
    stack: list[int] = []
    for i in range(len(xs)):
        while len(stack) >= 2:
            j, k = stack[-2], stack[-1]
            s1 = (ys[k] - ys[j]) / (xs[k] - xs[j])
            s2 = (ys[i] - ys[k]) / (xs[i] - xs[k])
            if s2 >= s1:
                stack.pop()
            else:
                break
        stack.append(i)
    return stack


def _multiplicity_at(coeffs, lc, q, prec):
    """Order of vanishing of sum coeffs[m] x^m at the root x = q.

    Repeated synthetic division yields the Taylor coefficients P^(d)(q)/d!,
    each compared against the magnitude of its own largest term so that the
    test is scale free.  coeffs are mpf/mpc, lc[m] = log|coeffs[m]|.
    """
    lq = math.log(float(abs(q)))
    m = np.arange(len(lc))
    lgm = np.array([math.lgamma(x + 1.0) for x in range(len(lc))])
    aq = mp.mpc(q)
    work = list(coeffs)
    for d in range(0, 9):
        acc = mp.mpc(0)
        quot = []
        for c in reversed(work[1:]):
            acc = acc * aq + c
            quot.append(acc)
        rem = work[0] + aq * acc if len(work) > 1 else work[0]
        if d >= 1:
            valid = (m >= d) & np.isfinite(lc)
            mv = m[valid]
            log_binom = lgm[mv] - math.lgamma(d + 1.0) - lgm[mv - d]
            lt = lc[valid] + log_binom + (mv - d) * lq
            thresh = mp.exp(mp.mpf(float(lt.max()))) * mp.mpf(2) ** (-(prec // 3))
            if abs(rem) > thresh:
                return d
        work = list(reversed(quot))
        if len(work) == 0:
            break
    raise RootConvergenceError(f"unresolved multiplicity at root {complex(q)}")


def roots_in_qdisk(f: FormNumeric, radius: float = Q_DISK_RADIUS,
                   precision_bits: int | None = None) -> list:
    """All roots of the cuspidal-factor-removed q-series with |q| <= radius.

    Returns (root: mpc, residual: mpf) pairs, multiple roots repeated.
    Root moduli can span hundreds of orders of magnitude, far beyond what a
    single double-precision companion matrix resolves.  The coefficient
    Newton polygon localises the root moduli, so candidates are produced one
    modulus shell at a time from a window of terms that dominate there, then
    polished against the full series at working precision.
    """
    prec = precision_bits or f.precision_bits
    ord_inf = ord_infinity(f)
    Nw = _certified_degree(f, radius)
    sgn, loga = f.log_coeff_arrays()
    la = loga[ord_inf: Nw + 1]
    finite_idx = np.flatnonzero(np.isfinite(la))
    hull = _upper_hull(finite_idx.astype(float), la[finite_idx])

    log_r_max = math.log(radius)
    shells = []
    for a, b in zip(hull, hull[1:]):
        i, j = finite_idx[a], finite_idx[b]
        slope = (la[j] - la[i]) / (j - i)
        log_r = -slope
        if log_r >= log_r_max:
            break
        if not shells or log_r - shells[-1] > 0.5:
            shells.append(log_r)
    shells.append(log_r_max)

    candidates = []  # (q0 complex, shell id)
    for sid, L in enumerate(shells):
        t = la + np.arange(len(la)) * L
        tf = np.where(np.isfinite(t), t, -np.inf)
        M = tf.max()
        above = np.flatnonzero(tf >= M - 80.0)
        w0, w1 = int(above[0]), int(above[-1])
        c = sgn[ord_inf + w0: ord_inf + w1 + 1] * np.exp(
            np.where(np.isfinite(t[w0: w1 + 1]), t[w0: w1 + 1] - M, -np.inf))
        if len(c) < 2:
            continue
        raw = np.roots(c[::-1])
        # wide keep-band: shells overlap and duplicates are merged after polish
        raw = raw[(np.abs(raw) > 0.05) & (np.abs(raw) < 20.0)]
        for u in raw:
            candidates.append((cmath.exp(L) * complex(u), sid))

    with mp.workprec(prec + 32):
        N_hi = min(f.trunc, max(int(1.25 * Nw), Nw + 20))
        coeffs_lo = [f.coeffs[m] for m in range(ord_inf, Nw + 1)]
        coeffs_hi = [f.coeffs[m] for m in range(ord_inf, N_hi + 1)]
        kept = []  # (q mpc, residual, shell id)
        for q0, sid in candidates:
            if abs(q0) > radius * 1.2:
                continue
            q_lo, res_lo = _newton_polish(coeffs_lo, q0, prec)
            q_hi, res_hi = _newton_polish(coeffs_hi, q_lo, prec)
            if abs(q_hi) > radius * (1.0 + 1e-9):
                continue
            # local magnitude scale of the series at this root
            lq = math.log(float(abs(q_hi))) if abs(q_hi) > 0 else -1e6
            tloc = la + np.arange(len(la)) * lq
            scale = mp.exp(mp.mpf(float(np.max(np.where(np.isfinite(tloc), tloc, -np.inf)))))
            # spurious-root rejection: residual must not degrade at higher
            # truncation, and must be far below the local term size (Newton
            # can stagnate at a near-miss between two close genuine roots)
            if res_hi > (res_lo + scale * mp.mpf(2) ** (-prec + 16)) * 10:
                continue
            if res_hi > scale * mp.mpf(2) ** (-prec // 3):
                continue
            kept.append((q_hi, res_hi, sid))

        # merge duplicates found by overlapping shells, then read the
        # multiplicity off the first derivative that is genuinely nonzero
        out = []
        used = [False] * len(kept)
        for i, (qi, ri, _si) in enumerate(kept):
            if used[i]:
                continue
            group = [j for j in range(len(kept))
                     if not used[j] and abs(kept[j][0] - qi) < 1e-6 * abs(qi)]
            for j in group:
                used[j] = True
            best = min(group, key=lambda j: kept[j][1])
            q_best = kept[best][0]
            lc_hi = loga[ord_inf: ord_inf + len(coeffs_hi)]
            mult = _multiplicity_at(coeffs_hi, lc_hi, q_best, prec)
            for _ in range(mult):
                out.append((q_best, kept[best][1]))
    return out


def _cluster(points: list, tol: float) -> list:
    """Greedy clustering at relative tolerance; returns index lists."""
    clusters: list[list[int]] = []
    for i, p in enumerate(points):
        for cl in clusters:
            if abs(points[cl[0]] - p) < tol * max(abs(points[cl[0]]), 1e-300):
                cl.append(i)
                break
        else:
            clusters.append([i])
    return clusters


def zeros_in_F(f: FormNumeric, eigen_index: int | None = None) -> ZeroSet:
    """Gamma-inequivalent zeros in F with multiplicities and stabilizer weights."""
    k = f.weight
    ord_inf = ord_infinity(f)
    if eigen_index is None:
        eigen_index = f.eigen_index
    roots = roots_in_qdisk(f)
    qs = [complex(r[0]) for r in roots]
    clusters = _cluster(qs, CLUSTER_TOL_Q)

    sites = []  # (reduced point, multiplicity)
    for cl in clusters:
        q = qs[cl[0]]
        mult = len(cl)
        x = cmath.phase(q) / (2.0 * math.pi)
        if x >= 0.5:
            x -= 1.0
        y = -math.log(abs(q)) / (2.0 * math.pi)
        zr, _ = reduce_to_fundamental(UpperHalfPoint(x, y))
        x, y = zr.x, zr.y
        # snap boundary representatives deterministically
        r2 = x * x + y * y
        if abs(r2 - 1.0) < BOUNDARY_SNAP and x > 0:
            x = -x
        if x >= 0.5 - BOUNDARY_SNAP:
            x -= 1.0
            if abs(x * x + y * y - 1.0) < BOUNDARY_SNAP and x > 0:
                x = -x
        sites.append((UpperHalfPoint(x, y), mult))

    merged: list[list] = []  # [point, mult]
    for pt, mult in sites:
        for row in merged:
            if hyperbolic_distance(row[0], pt) < max(MERGE_TOL_HYP, 1e-7):
                row[1] = max(row[1], mult)
                break
        else:
            merged.append([pt, mult])

    records = []
    nu = Fraction(0)
    for pt, mult in merged:
        if hyperbolic_distance(pt, POINT_I) < ELLIPTIC_TOL_HYP:
            w = Fraction(1, 2)
        elif hyperbolic_distance(pt, POINT_RHO) < ELLIPTIC_TOL_HYP:
            w = Fraction(1, 3)
        else:
            w = Fraction(1)
        residual = eval_log(f, pt).log_abs
        records.append(ZeroRecord(pt, mult, w, residual))
        nu += w * mult

    if nu + ord_inf != Fraction(k, 12):
        raise ValenceMismatchError(
            f"weight {k} {f.kind}: nu={nu} + ord_inf={ord_inf} != k/12={Fraction(k, 12)}"
        )
    records.sort(key=lambda r: (-r.point.y, r.point.x))
    return ZeroSet(k, f.kind, eigen_index, tuple(records), ord_inf, nu)


def strip_roots(f: FormNumeric) -> list:
    """All zeros of f in the strip covered by the q-disk, multiplicity repeated,
    as raw (un-merged) points. Used by the argument-principle oracle."""
    pts = []
    for q, _res in roots_in_qdisk(f):
        q = complex(q)
        x = cmath.phase(q) / (2.0 * math.pi)
        if x >= 0.5:
            x -= 1.0
        y = -math.log(abs(q)) / (2.0 * math.pi)
        pts.append(UpperHalfPoint(x, y))
    return pts


def argument_principle_count(f: FormNumeric, box) -> int:
    """Winding number of f around the box boundary via adaptive phase tracking.

    `box` is any object with x_lo, x_hi, y_lo, y_hi. Counts zeros of f
    (as a function on H, Gamma-copies included) inside the box.
    """
    corners = [
        (box.x_lo, box.y_lo), (box.x_hi, box.y_lo),
        (box.x_hi, box.y_hi), (box.x_lo, box.y_hi), (box.x_lo, box.y_lo),
    ]
    total = 0.0
    for (x0, y0), (x1, y1) in zip(corners, corners[1:]):
        total += _edge_phase_change(f, x0, y0, x1, y1)
    winding = total / (2.0 * math.pi)
    rounded = round(winding)
    if abs(winding - rounded) > 0.05:
        raise RootConvergenceError(f"non-integer winding {winding}")
    return int(rounded)


def _edge_phase_change(f: FormNumeric, x0, y0, x1, y1, max_refine: int = 14) -> float:
    n_samples = 33
    for _ in range(max_refine):
        ts = np.linspace(0.0, 1.0, n_samples)
        xs = x0 + (x1 - x0) * ts
        ys = y0 + (y1 - y0) * ts
        _, s = eval_scaled_many(f, xs, ys)
        if np.any(np.abs(s) < 1e-12):
            raise RootConvergenceError("zero on contour; perturb the box")
        phases = np.angle(s)
        jumps = np.diff(phases)
        jumps = (jumps + math.pi) % (2.0 * math.pi) - math.pi
        if np.all(np.abs(jumps) < math.pi / 2):
            return float(np.sum(jumps))
        n_samples = 2 * (n_samples - 1) + 1
    raise RootConvergenceError("phase tracking did not resolve after max refinement")
