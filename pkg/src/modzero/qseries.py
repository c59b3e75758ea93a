"""Exact arithmetic on truncated q-expansions of level-1 modular forms.

Everything here is exact: coefficients are rationals (integers in
practice for the Miller basis), so reruns are bit-identical and the
Hecke matrices come out as exact integer matrices.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

MAX_BERNOULLI = 1000

_bernoulli_cache: list[Fraction] = [Fraction(1)]


def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n for even n >= 0 (B_1 convention irrelevant here)."""
    if n < 0 or n % 2 == 1 or n > MAX_BERNOULLI:
        raise ValueError(f"bernoulli defined here for even 0 <= n <= {MAX_BERNOULLI}, got {n}")
    while len(_bernoulli_cache) <= n:
        m = len(_bernoulli_cache)
        # sum_{j=0}^{m} C(m+1, j) B_j = 0, with B_1 = -1/2
        acc = Fraction(0)
        for j, bj in enumerate(_bernoulli_cache):
            acc += math.comb(m + 1, j) * bj
        _bernoulli_cache.append(-acc / (m + 1))
    return _bernoulli_cache[n]


def sigma_power(n: int, r: int) -> int:
    """Divisor power sum sum_{d | n} d^r."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d ** r
            e = n // d
            if e != d:
                total += e ** r
        d += 1
    return total


@dataclass(frozen=True)
class ExactSeries:
    """Truncated q-expansion sum_{n=0}^{trunc} coeffs[n] q^n of a given weight."""

    weight: int
    trunc: int
    coeffs: tuple

    def __post_init__(self):
        if self.weight % 2 != 0 or self.weight < 0:
            raise ValueError("weight must be even and >= 0")
        if len(self.coeffs) != self.trunc + 1:
            raise ValueError("coefficient list length must be trunc + 1")

    def __getitem__(self, n: int) -> Fraction:
        return self.coeffs[n]

    def truncate(self, new_trunc: int) -> "ExactSeries":
        if new_trunc > self.trunc:
            raise ValueError("cannot extend a truncated series")
        return ExactSeries(self.weight, new_trunc, self.coeffs[: new_trunc + 1])

    def to_json(self) -> str:
        return json.dumps(
            {
                "weight": self.weight,
                "trunc": self.trunc,
                "coeffs": [_rat_str(c) for c in self.coeffs],
            }
        )

    @staticmethod
    def from_json(text: str) -> "ExactSeries":
        obj = json.loads(text)
        coeffs = tuple(Fraction(c) for c in obj["coeffs"])
        return ExactSeries(obj["weight"], obj["trunc"], coeffs)


def _rat_str(c: Fraction) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _as_tuple(coeffs) -> tuple:
    return tuple(Fraction(c) for c in coeffs)


def series_add(a: ExactSeries, b: ExactSeries) -> ExactSeries:
    if a.weight != b.weight:
        raise ValueError(f"weight mismatch in add: {a.weight} vs {b.weight}")
    n = min(a.trunc, b.trunc)
    return ExactSeries(a.weight, n, tuple(a.coeffs[i] + b.coeffs[i] for i in range(n + 1)))


def series_scale(a: ExactSeries, c) -> ExactSeries:
    c = Fraction(c)
    return ExactSeries(a.weight, a.trunc, tuple(c * x for x in a.coeffs))


def series_mul(a: ExactSeries, b: ExactSeries) -> ExactSeries:
    n = min(a.trunc, b.trunc)
    ca, cb = a.coeffs[: n + 1], b.coeffs[: n + 1]
    # integer fast path: the Miller-basis pipeline stays integral throughout
    if all(x.denominator == 1 for x in ca) and all(x.denominator == 1 for x in cb):
        ia = [x.numerator for x in ca]
        ib = [x.numerator for x in cb]
        out = [0] * (n + 1)
        for i, ai in enumerate(ia):
            if ai == 0:
                continue
            for j in range(n + 1 - i):
                out[i + j] += ai * ib[j]
        coeffs = tuple(Fraction(x) for x in out)
    else:
        out = [Fraction(0)] * (n + 1)
        for i in range(n + 1):
            ai = ca[i]
            if ai == 0:
                continue
            for j in range(n + 1 - i):
                out[i + j] += ai * cb[j]
        coeffs = tuple(out)
    return ExactSeries(a.weight + b.weight, n, coeffs)


def eisenstein_qexp(k: int, N: int) -> ExactSeries:
    """Normalized Eisenstein series E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n."""
    if k % 2 != 0 or k < 4:
        raise ValueError("Eisenstein series requires even k >= 4")
    factor = Fraction(-2 * k) / bernoulli(k)
    coeffs = [Fraction(1)] + [factor * sigma_power(n, k - 1) for n in range(1, N + 1)]
    return ExactSeries(k, N, tuple(coeffs))


def delta_qexp(N: int) -> ExactSeries:
    """Modular discriminant (E4^3 - E6^2)/1728, weight 12, c_1 = 1."""
    if N < 1:
        raise ValueError("N must be >= 1")
    e4 = eisenstein_qexp(4, N)
    e6 = eisenstein_qexp(6, N)
    num = series_add(series_mul(series_mul(e4, e4), e4), series_scale(series_mul(e6, e6), -1))
    return series_scale(num, Fraction(1, 1728))


def dim_cusp(k: int) -> int:
    """Dimension of level-1 cusp forms of even weight k >= 4."""
    if k % 2 != 0 or k < 4:
        raise ValueError("even k >= 4 required")
    return k // 12 - 1 if k % 12 == 2 else k // 12


def _monomial_exponents(m: int) -> tuple:
    """(a, b) with 4a + 6b = m, b in {0, 1}; m even, m != 2."""
    if m % 4 == 0:
        return m // 4, 0
    if m >= 6 and (m - 6) % 4 == 0:
        return (m - 6) // 4, 1
    raise ValueError(f"no monomial E4^a E6^b of weight {m}")


@lru_cache(maxsize=None)
def _power_chain(kind: str, exponent: int, N: int) -> ExactSeries:
    if kind == "delta":
        base = delta_qexp(N)
    elif kind == "e4":
        base = eisenstein_qexp(4, N)
    elif kind == "e6":
        base = eisenstein_qexp(6, N)
    else:
        raise ValueError(kind)
    if exponent == 0:
        return ExactSeries(0, N, (Fraction(1),) + (Fraction(0),) * N)
    if exponent == 1:
        return base
    return series_mul(_power_chain(kind, exponent - 1, N), base)


def miller_basis(k: int, N: int) -> list:
    """Echelonized integral basis f_i = q^i + O(q^{d+1}) of weight-k cusp forms."""
    d = dim_cusp(k)
    if d == 0:
        return []
    if N < 2 * d + 1:
        raise ValueError(f"truncation {N} too small for dim {d}")
    monomials = []
    for i in range(1, d + 1):
        a, b = _monomial_exponents(k - 12 * i)
        g = series_mul(_power_chain("delta", i, N), _power_chain("e4", a, N))
        if b:
            g = series_mul(g, _power_chain("e6", 1, N))
        monomials.append(g)
    # Delta^i E4^a E6^b = q^i + ...: unitriangular, eliminate by back-substitution
    basis = [None] * (d + 1)
    for i in range(d, 0, -1):
        f = monomials[i - 1]
        for j in range(i + 1, d + 1):
            cj = f.coeffs[j]
            if cj != 0:
                f = series_add(f, series_scale(basis[j], -cj))
        basis[i] = f
    return basis[1:]


@dataclass(frozen=True)
class HeckeMatrix:
    """Exact integer matrix of T_n on the Miller basis (column action)."""

    n: int
    weight: int
    dim: int
    entries: tuple  # tuple of rows, each a tuple of ints

    def __post_init__(self):
        if len(self.entries) != self.dim or any(len(r) != self.dim for r in self.entries):
            raise ValueError("entry shape must be dim x dim")

    def matmul(self, other: "HeckeMatrix") -> "HeckeMatrix":
        d = self.dim
        rows = tuple(
            tuple(sum(self.entries[i][l] * other.entries[l][j] for l in range(d)) for j in range(d))
            for i in range(d)
        )
        return HeckeMatrix(self.n * other.n, self.weight, d, rows)


def hecke_coefficient(coeffs, m: int, n: int, k: int) -> Fraction:
    """Coefficient b(m) of T_n f where f has q-coefficients `coeffs`.

    b(m) = sum_{d | gcd(m, n)} d^{k-1} a(mn/d^2); validated for prime n
    against the double-coset definition of T_n.
    """
    total = Fraction(0)
    for d in range(1, min(m, n) + 1):
        if m % d == 0 and n % d == 0:
            idx = m * n // (d * d)
            if idx > len(coeffs) - 1:
                raise ValueError(f"need coefficient {idx}, have only {len(coeffs) - 1}")
            total += d ** (k - 1) * coeffs[idx]
    return total


def hecke_matrix(n: int, k: int, basis: list) -> HeckeMatrix:
    """Matrix of T_n on the Miller basis: T_n f_j = sum_i M[i][j] f_i."""
    if n < 2:
        raise ValueError("Hecke index must be >= 2")
    d = len(basis)
    if d == 0:
        return HeckeMatrix(n, k, 0, ())
    if basis[0].trunc < n * d:
        raise ValueError(f"basis truncation {basis[0].trunc} < {n * d} required for T_{n}")
    rows = []
    cols = []
    for j in range(d):
        bj = [hecke_coefficient(basis[j].coeffs, m, n, k) for m in range(1, d + 1)]
        if any(x.denominator != 1 for x in bj):
            raise ValueError("Hecke action on an integral basis must be integral")
        cols.append([x.numerator for x in bj])
    for i in range(d):
        rows.append(tuple(cols[j][i] for j in range(d)))
    return HeckeMatrix(n, k, d, tuple(rows))
