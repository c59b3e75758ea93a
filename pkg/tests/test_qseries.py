"""Exact q-expansion layer: Bernoulli numbers, divisor sums, series algebra,
echelon basis and Hecke matrices."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp

from modzero.qseries import (
    ExactSeries,
    bernoulli,
    delta_qexp,
    dim_cusp,
    eisenstein_qexp,
    hecke_coefficient,
    hecke_matrix,
    miller_basis,
    series_mul,
    sigma_power,
)


def test_bernoulli_small_values():
    known = {
        0: Fraction(1),
        2: Fraction(1, 6),
        4: Fraction(-1, 30),
        12: Fraction(-691, 2730),
        20: Fraction(-174611, 330),
    }
    for n, val in known.items():
        assert bernoulli(n) == val
    with pytest.raises(ValueError):
        bernoulli(3)


def test_bernoulli_against_mpmath():
    for n in range(0, 60, 2):
        mine = bernoulli(n)
        ref = mp.bernoulli(n)
        assert abs(mp.mpf(mine.numerator) / mine.denominator - ref) <= abs(ref) * mp.mpf(2) ** -40


@given(st.integers(min_value=1, max_value=400), st.integers(min_value=1, max_value=6))
def test_sigma_power_by_divisor_enumeration(n, p):
    brute = sum(d ** p for d in range(1, n + 1) if n % d == 0)
    assert sigma_power(n, p) == brute


def test_eisenstein_leading_coefficients():
    e4 = eisenstein_qexp(4, 6)
    assert [e4.coeffs[i] for i in range(4)] == [1, 240, 2160, 6720]
    e6 = eisenstein_qexp(6, 4)
    assert [e6.coeffs[i] for i in range(3)] == [1, -504, -16632]


def test_delta_matches_product_expansion():
    """q * prod (1 - q^n)^24 expanded directly."""
    N = 40
    prod = [Fraction(0)] * (N + 1)
    prod[0] = Fraction(1)
    for n in range(1, N + 1):
        for _ in range(24):
            nxt = list(prod)
            for i in range(N + 1 - n):
                nxt[i + n] -= prod[i]
            prod = nxt
    expect = [Fraction(0)] + prod[:N]
    dl = delta_qexp(N)
    assert list(dl.coeffs[: N + 1]) == expect


def test_delta_first_coefficients():
    dl = delta_qexp(8)
    assert [dl.coeffs[i] for i in range(8)] == [0, 1, -24, 252, -1472, 4830, -6048, -16744]


@given(
    st.lists(st.integers(min_value=-50, max_value=50), min_size=1, max_size=8),
    st.lists(st.integers(min_value=-50, max_value=50), min_size=1, max_size=8),
)
@settings(max_examples=60)
def test_series_mul_cauchy_oracle(a, b):
    N = max(len(a), len(b)) + 2
    fa = ExactSeries(4, N, tuple(Fraction(c) for c in a) + (Fraction(0),) * (N + 1 - len(a)))
    fb = ExactSeries(4, N, tuple(Fraction(c) for c in b) + (Fraction(0),) * (N + 1 - len(b)))
    fc = series_mul(fa, fb)
    for n in range(N + 1):
        brute = sum(fa.coeffs[i] * fb.coeffs[n - i] for i in range(n + 1))
        assert fc.coeffs[n] == brute


def test_dim_cusp_table():
    table = {4: 0, 10: 0, 12: 1, 14: 0, 22: 1, 24: 2, 26: 1, 36: 3, 48: 4, 120: 10, 122: 9}
    for k, d in table.items():
        assert dim_cusp(k) == d


def test_dim_cusp_rejects_odd_or_tiny():
    with pytest.raises(ValueError):
        dim_cusp(13)
    with pytest.raises(ValueError):
        dim_cusp(2)


@pytest.mark.parametrize("k", [12, 24, 36, 48, 60])
def test_miller_basis_is_echelon(k):
    d = dim_cusp(k)
    basis = miller_basis(k, 4 * d + 4)
    assert len(basis) == d
    for i, f in enumerate(basis, start=1):
        for j in range(1, d + 1):
            assert f.coeffs[j] == (1 if j == i else 0)
        assert all(c == int(c) for c in f.coeffs)


def test_hecke_coefficient_total_vs_definition():
    """T_m acting on Delta must scale it by the known eigenvalue tau(m)."""
    dl = delta_qexp(60)
    tau = {2: -24, 3: 252, 4: -1472, 6: -6048}
    for m, lam in tau.items():
        for n in range(1, 10):
            assert hecke_coefficient(dl.coeffs, n, m, 12) == lam * dl.coeffs[n]


@pytest.mark.parametrize("k", [24, 36, 48])
def test_hecke_matrices_commute(k):
    d = dim_cusp(k)
    N = 8 * d + 8
    basis = miller_basis(k, N)
    t2 = hecke_matrix(2, k, basis)
    t3 = hecke_matrix(3, k, basis)
    assert t2.matmul(t3).entries == t3.matmul(t2).entries


def test_hecke_t2_weight24_known_matrix():
    basis = miller_basis(24, 40)
    t2 = hecke_matrix(2, 24, basis)
    # trace = sum of the two T_2 eigenvalues 540 +- 12*sqrt(144169)
    assert t2.entries[0][0] + t2.entries[1][1] == 1080
    # determinant = product of the eigenvalues
    det = t2.entries[0][0] * t2.entries[1][1] - t2.entries[0][1] * t2.entries[1][0]
    assert det == 540 ** 2 - 144 * 144169
