"""Acceptance suite: eight end-to-end checks at the tolerances they ship with.

Each test prints a single summary line with the measured quantity so a log
scan shows what was achieved, not just pass/fail. The tests are ordered so
expensive shared computations happen once (criterion 1 populates the zero-set
cache that criterion 2 reads).
"""

import math
import time
from fractions import Fraction

import mpmath as mp
import numpy as np

from modzero.eigen import (
    FormNumeric,
    check_multiplicativity,
    eigenform,
    eisenstein_form,
)
from modzero.evaluate import UpperHalfPoint
from modzero.incgamma import (
    bound_series,
    default_sup_grid,
    poisson_cdf_half,
    ramanujan_theta,
    ratio_half,
    sup_mass_experiment,
)
from modzero.measure import (
    BoxRegion,
    arc_star_discrepancy,
    empirical_measure,
    hyper_volume,
    petersson_norm,
    siegel_norm_coefficient_sum,
    siegel_norm_quadrature,
)
from modzero.potential import BumpFunction, check_zero_identity
from modzero.qseries import dim_cusp
from modzero.zerofind import argument_principle_count, strip_roots, zeros_in_F

VALENCE_WEIGHTS = list(range(12, 201, 2))

# zero sets computed by criterion 1 and reused afterwards,
# keyed (k, kind, eigen_index)
_zeros = {}


def _zeros_for(f):
    key = (f.weight, f.kind, f.eigen_index)
    if key not in _zeros:
        _zeros[key] = zeros_in_F(f)
    return _zeros[key]


def test_criterion_1_valence_formula_all_forms_under_budget():
    """nu(f) + ord_inf(f) = k/12 exactly, all forms, even k in [12, 200]."""
    start = time.monotonic()
    checked = 0
    for k in VALENCE_WEIGHTS:
        forms = [eisenstein_form(k)]
        forms += [eigenform(k, i) for i in range(dim_cusp(k))]
        for f in forms:
            zs = _zeros_for(f)
            assert zs.nu + zs.ord_infinity == Fraction(k, 12), (k, f.kind, f.eigen_index)
            checked += 1
    elapsed = time.monotonic() - start
    print(f"\n[criterion 1] valence exact for {checked} forms, "
          f"k in [12,200], {elapsed:.1f}s (budget 600s)")
    assert elapsed < 600.0


def test_criterion_2_eisenstein_zeros_on_arc_and_discrepancy_trend():
    """E_k zeros on the unit arc; angular discrepancy drops from k=24 to k=200."""
    worst = 0.0
    for k in VALENCE_WEIGHTS:
        zs = _zeros_for(eisenstein_form(k))
        for rec in zs.records:
            dev = abs(math.hypot(rec.point.x, rec.point.y) - 1.0)
            worst = max(worst, dev)
            assert dev < 1e-8, (k, rec.point)
    d24 = arc_star_discrepancy(_zeros_for(eisenstein_form(24)))
    d200 = arc_star_discrepancy(_zeros_for(eisenstein_form(200)))
    print(f"\n[criterion 2] max |.|z|-1| = {worst:.2e}; "
          f"star discrepancy k=24: {d24:.4f}, k=200: {d200:.4f}")
    assert d200 < d24


def test_criterion_3_eigenform_zero_equidistribution_trend():
    """Mean |empirical(Omega) - vol(Omega)| smaller at k ~ 300 than k ~ 72."""
    box = BoxRegion(0.0, 0.5, 1.0, 2.0)
    vol = hyper_volume(box)

    def mean_gap(weights):
        gaps = []
        for k in weights:
            for i in range(dim_cusp(k)):
                zs = _zeros_for(eigenform(k, i))
                gaps.append(abs(float(empirical_measure(zs, box)) - vol))
        return sum(gaps) / len(gaps)

    low = mean_gap(range(60, 85, 2))
    high = mean_gap(range(276, 301, 2))
    print(f"\n[criterion 3] mean |emp - vol|: k in [60,84]: {low:.5f}, "
          f"k in [276,300]: {high:.5f}")
    assert high <= low


def test_criterion_4_zero_counting_identity():
    """Zero-counting identity for Delta, E4, and the first weight-24 eigenform."""
    phi = BumpFunction(UpperHalfPoint(0.0, 1.5), 0.3)
    results = []
    for f in [eigenform(12, 0), eisenstein_form(4), eigenform(24, 0)]:
        zs = _zeros_for(f)
        out = check_zero_identity(f, zs, phi, quad_eps=1e-6)
        tol = 1e-4 * (1.0 + abs(out["lhs"]) + abs(out["rhs"]))
        results.append((f.weight, f.kind, out["diff"], out["diff_invariant"], tol))
        assert out["diff"] <= tol, (f.weight, f.kind, out)
        assert out["diff_invariant"] <= tol, (f.weight, f.kind, out)
        if f.weight == 12:
            assert out["lhs"] == 0.0
    line = ", ".join(f"k={k} {kind}: {d:.1e}/{di:.1e} (tol {t:.1e})"
                     for k, kind, d, di, t in results)
    print(f"\n[criterion 4] {line}")


def test_criterion_5_incomplete_gamma_asymptotics():
    """CLT-scale bounds on the gamma ratio, Poisson median, and theta limit."""
    for k in [100, 1000, 10000]:
        assert abs(ratio_half(k) - 0.5) <= 1.0 / math.sqrt(k)
        assert abs(poisson_cdf_half(k) - 0.5) <= 1.0 / math.sqrt(k)
        th = ramanujan_theta(k)
        assert 1.0 / 3.0 <= th <= 0.5
    gap = abs(ramanujan_theta(10000) - 1.0 / 3.0)
    print(f"\n[criterion 5] |theta(10^4) - 1/3| = {gap:.2e} (tol 5e-3)")
    assert gap < 5e-3


def test_criterion_6_siegel_set_parseval_identity():
    """Coefficient-sum and direct quadrature of the Siegel-set norm agree."""
    f = eigenform(12, 0)
    series = siegel_norm_coefficient_sum(f)
    quad = siegel_norm_quadrature(f, eps=1e-8)
    rel = float(abs(series - quad) / series)
    print(f"\n[criterion 6] Siegel norm relative gap = {rel:.2e} (tol 1e-6)")
    assert rel < 1e-6


def test_criterion_7_sup_norm_growth():
    """Regression slope of ln sup mass vs ln k is at most 1.2; sup under bound."""
    grid = default_sup_grid()
    heights = sorted({p.y for p in grid})
    forms = []
    for k in range(60, 301, 24):
        f = eigenform(k, 0)
        petersson_norm(f)
        forms.append(f)
    sups, slope = sup_mass_experiment(forms, grid)
    for f, s in zip(forms, sups):
        adjust = float(mp.log(siegel_norm_coefficient_sum(f)) - mp.log(f.petersson_norm))
        bound = max(bound_series(f.weight, y) for y in heights) + adjust
        assert s <= bound + 1e-9, (f.weight, s, bound)
    print(f"\n[criterion 7] slope = {slope:.3f} (tol 1.2), "
          f"sup under series bound at all {len(forms)} weights")
    assert slope <= 1.2


def _clear_edges(candidates, pts, axis, step=1.7e-3, tol=5e-4):
    """Nudge partition edge coordinates away from zero coordinates."""
    out = []
    coords = [p.x if axis == "x" else p.y for p in pts]
    for e in candidates:
        while any(abs(c - e) < tol for c in coords):
            e += step
        out.append(e)
    return out


def test_criterion_8_oracle_equivalence():
    """Winding counts, multiplicativity, and eigenform orthogonality oracles."""
    # (a) argument principle vs strip roots on a 3x3 partition, eigenforms k <= 60
    boxes_checked = 0
    for k in range(12, 61, 2):
        for i in range(dim_cusp(k)):
            f = eigenform(k, i)
            pts = strip_roots(f)
            xs = _clear_edges(np.linspace(-0.49, 0.47, 4), pts, "x")
            ys = _clear_edges(np.linspace(0.88, 2.5, 4), pts, "y")
            for a, b in zip(xs, xs[1:]):
                for c, d in zip(ys, ys[1:]):
                    box = BoxRegion(a, b, c, d)
                    want = sum(1 for p in pts if a < p.x < b and c < p.y < d)
                    assert argument_principle_count(f, box) == want, (k, i, box)
                    boxes_checked += 1

    # (b) Hecke multiplicativity residual for all eigenforms k <= 120
    worst_mult = 0.0
    for k in range(12, 121, 2):
        for i in range(dim_cusp(k)):
            err = check_multiplicativity(eigenform(k, i), [(2, 3)])
            worst_mult = max(worst_mult, err)
    assert worst_mult <= 2.0 ** (-64)

    # (c) the two weight-24 eigenforms are Petersson-orthogonal
    f0, f1 = eigenform(24, 0), eigenform(24, 1)
    n0, n1 = petersson_norm(f0), petersson_norm(f1)
    with mp.workprec(f0.precision_bits):
        plus = [a + b for a, b in zip(f0.coeffs, f1.coeffs)]
        minus = [a - b for a, b in zip(f0.coeffs, f1.coeffs)]
    fp = FormNumeric(weight=24, kind="custom", coeffs=plus, ord_infinity=1,
                     precision_bits=f0.precision_bits)
    fm = FormNumeric(weight=24, kind="custom", coeffs=minus, ord_infinity=2,
                     precision_bits=f0.precision_bits)
    # polarization: <f0, f1> = (|f0+f1|^2 - |f0-f1|^2) / 4 (real coefficients)
    inner = (petersson_norm(fp) - petersson_norm(fm)) / 4
    cos = float(abs(inner) / mp.sqrt(n0 * n1))
    print(f"\n[criterion 8] {boxes_checked} boxes matched; "
          f"mult residual {worst_mult:.1e}; orthogonality {cos:.1e} (tol 1e-6)")
    assert cos < 1e-6
