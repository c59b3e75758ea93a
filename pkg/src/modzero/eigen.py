"""Numeric Hecke eigenforms via extended-precision diagonalization of T_2.

Initial eigenpairs come from a double-precision dense solver; each pair is
then polished by Rayleigh-quotient iteration against the exact integer
matrix at the requested precision, so the final values do not depend on
the double-precision solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from mpmath import mp

from .qseries import HeckeMatrix, dim_cusp, eisenstein_qexp, hecke_matrix, miller_basis

DEFAULT_PRECISION_BITS = 192


class NearDegenerateSpectrumError(RuntimeError):
    """Raised when two T_2 eigenvalues are closer than the working precision resolves."""


@dataclass
class FormNumeric:
    """A concrete modular form given by extended-precision Fourier coefficients."""

    weight: int
    kind: str  # "eisenstein" | "eigenform" | "custom"
    coeffs: list  # mpmath mpf values a(0)..a(N)
    ord_infinity: int
    precision_bits: int
    eigen_index: int | None = None
    petersson_norm: object | None = None  # cached mpf
    _log_coeff_cache: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.precision_bits < 64:
            raise ValueError("precision_bits must be >= 64")
        if self.kind == "eigenform":
            if self.coeffs[0] != 0 or self.coeffs[1] != 1:
                raise ValueError("eigenform must have a(0) = 0, a(1) = 1")
            if self.ord_infinity != 1:
                raise ValueError("eigenform has a simple zero at the cusp")
        if self.kind == "eisenstein" and (self.coeffs[0] != 1 or self.ord_infinity != 0):
            raise ValueError("eisenstein form must have a(0) = 1, ord_infinity = 0")

    @property
    def trunc(self) -> int:
        return len(self.coeffs) - 1

    def log_coeff_arrays(self):
        """(sign, log|a|) float64 arrays for fast double-precision evaluation."""
        if self._log_coeff_cache is None or len(self._log_coeff_cache[0]) != len(self.coeffs):
            sgn = np.zeros(len(self.coeffs))
            loga = np.full(len(self.coeffs), -np.inf)
            for n, a in enumerate(self.coeffs):
                if a != 0:
                    sgn[n] = 1.0 if a > 0 else -1.0
                    loga[n] = float(mp.log(abs(a)))
            self._log_coeff_cache = (sgn, loga)
        return self._log_coeff_cache

    def to_json_dict(self) -> dict:
        return {
            "schema": "modzero/1",
            "weight": self.weight,
            "kind": self.kind,
            "eigen_index": self.eigen_index,
            "ord_infinity": self.ord_infinity,
            "precision_bits": self.precision_bits,
            "coeffs": [mp.nstr(c, int(self.precision_bits * 0.302) + 2) for c in self.coeffs],
        }

    @staticmethod
    def from_json_dict(obj: dict) -> "FormNumeric":
        prec = obj["precision_bits"]
        with mp.workprec(prec + 16):
            coeffs = [mp.mpf(c) for c in obj["coeffs"]]
        return FormNumeric(
            weight=obj["weight"],
            kind=obj["kind"],
            coeffs=coeffs,
            ord_infinity=obj["ord_infinity"],
            precision_bits=prec,
            eigen_index=obj.get("eigen_index"),
        )


def _charpoly_int(entries, d: int) -> list:
    """Characteristic polynomial of an integer matrix, exactly.

    Faddeev-LeVerrier recurrence; returns coefficients [1, c1, ..., cd]
    of lambda^d + c1 lambda^(d-1) + ... + cd as Python ints.
    """
    coeffs = [1]
    M = [[0] * d for _ in range(d)]
    for step in range(1, d + 1):
        for i in range(d):
            M[i][i] += coeffs[-1]
        AM = [[sum(entries[i][l] * M[l][j] for l in range(d)) for j in range(d)]
              for i in range(d)]
        tr = sum(AM[i][i] for i in range(d))
        if tr % step != 0:
            raise ArithmeticError("non-integer trace in characteristic polynomial")
        coeffs.append(-tr // step)
        M = AM
    return coeffs


def _balance_exponents(entries, d: int) -> list:
    """Power-of-two balancing exponents for an integer matrix.

    Returns ints e such that B[i][j] = entries[i][j] * 2^(e[j]-e[i]) has
    roughly equal row and column sums; B is similar to the input.
    """
    lg = [[math.log2(abs(x)) if x else None for x in row] for row in entries]
    ex = [0.0] * d
    for _sweep in range(30):
        moved = False
        for i in range(d):
            row = [lg[i][j] + ex[j] - ex[i] for j in range(d) if j != i and lg[i][j] is not None]
            col = [lg[j][i] + ex[i] - ex[j] for j in range(d) if j != i and lg[j][i] is not None]
            if not row or not col:
                continue
            shift = round((max(row) - max(col)) / 2.0)
            if shift != 0:
                ex[i] += shift
                moved = True
        if not moved:
            break
    return [int(e) for e in ex]


def eigen_decompose(T: HeckeMatrix, precision_bits: int = DEFAULT_PRECISION_BITS) -> list:
    """All eigenpairs of the exact integer matrix T, eigenvalues ascending.

    Returns a list of (eigenvalue, eigenvector, residual) with the vector
    normalized to sup-norm 1 and residual = ||Tv - lam v||_inf / ||v||_inf.
    """
    d = T.dim
    if d == 0:
        return []
    # float64 eigenvalues are useless here: the integer entries can exceed
    # 1e40 while eigenvalue gaps sit far below eps * ||T||, so the initial
    # values come from the exact characteristic polynomial instead
    char = _charpoly_int(T.entries, d)
    work = precision_bits + 64
    with mp.workprec(work):
        # balance with powers of two: raw entries can reach ~1e80 while the
        # eigenvalues sit near 1e30, which makes every shifted solve look
        # numerically singular; a similarity transform fixes the scaling
        # without touching the spectrum
        ex = _balance_exponents(T.entries, d)
        A = [[mp.mpf(T.entries[i][j]) * mp.mpf(2) ** (ex[j] - ex[i])
              for j in range(d)] for i in range(d)]
        norm_T = max(sum(abs(x) for x in row) for row in A)
        # rescale so the roots are O(1), otherwise the polynomial solver
        # stalls on coefficients spanning hundreds of orders of magnitude
        s = mp.mpf(2) ** ((T.weight + 1) / 2 + 2)
        scaled = [mp.mpf(c) / s ** i for i, c in enumerate(char)]
        roots = mp.polyroots(scaled, maxsteps=1000, extraprec=work)
        results = []
        for r in sorted(roots, key=lambda z: mp.re(z)):
            lam = mp.re(r) * s
            v = [mp.mpf(1) for _ in range(d)]
            lam, v = _rayleigh_polish(A, lam, v, d)
            res = _residual(A, lam, v, d)
            if res > mp.mpf(2) ** (-(precision_bits - 24)) * norm_T:
                raise NearDegenerateSpectrumError(
                    f"eigenpair residual {float(res)} too large at weight {T.weight}"
                )
            v = [v[i] * mp.mpf(2) ** ex[i] for i in range(d)]
            vmax = max(abs(x) for x in v)
            v = [x / vmax for x in v]
            results.append((lam, v, float(res)))
    results.sort(key=lambda t: t[0])
    gap_floor = mp.mpf(2) ** (-(precision_bits - 16)) * norm_T
    for (l1, _, _), (l2, _, _) in zip(results, results[1:]):
        if abs(l2 - l1) < gap_floor:
            raise NearDegenerateSpectrumError(
                f"T_{T.n} eigenvalue gap {abs(l2 - l1)} below resolution at weight {T.weight}"
            )
    return results


def _matvec(A, v, d):
    return [sum(A[i][j] * v[j] for j in range(d)) for i in range(d)]


def _residual(A, lam, v, d):
    Av = _matvec(A, v, d)
    num = max(abs(Av[i] - lam * v[i]) for i in range(d))
    den = max(abs(x) for x in v)
    return num / den


def _rayleigh_polish(A, lam, v, d, iterations: int = 5):
    norm_A = max(sum(abs(x) for x in row) for row in A)
    for _ in range(iterations):
        # the nudge competes with pivots of size ~||A||, so it must be
        # scaled to the matrix norm or the solve stays numerically singular
        jitter = mp.mpf(2) ** (8 - mp.prec) * norm_A
        shift = lam
        w = None
        for _attempt in range(6):
            M = mp.matrix(d, d)
            for i in range(d):
                for j in range(d):
                    M[i, j] = A[i][j]
                M[i, i] -= shift
            try:
                w = mp.lu_solve(M, mp.matrix(v))
                break
            except ZeroDivisionError:
                shift = lam + jitter
                jitter *= 2 ** 16
        if w is None:
            break
        w = [w[i] for i in range(d)]
        scale = max(abs(x) for x in w)
        v = [x / scale for x in w]
        Av = _matvec(A, v, d)
        num = sum(v[i] * Av[i] for i in range(d))
        den = sum(v[i] * v[i] for i in range(d))
        lam = num / den
    return lam, v


# per-process caches; everything here is deterministic and immutable
_basis_cache: dict = {}
_eigen_cache: dict = {}
_form_cache: dict = {}


def _root_trunc_estimate(k: int, precision_bits: int) -> int:
    """Truncation needed so the q-series tail at |q| = e^{-pi sqrt(3)} is negligible.

    Uses the Deligne-type bound |a(n)| <= n^{(k+1)/2}; the target is
    0.75*precision_bits bits below the largest term on the disk.
    """
    logr = -math.pi * math.sqrt(3.0)
    expo = (k + 1) / 2.0
    nstar = max(1, int(expo / -logr))
    gmax = max(expo * math.log(n) + n * logr for n in range(1, nstar + 2))
    target = gmax - 0.75 * precision_bits * math.log(2) - 10
    n = nstar
    while expo * math.log(n) + n * logr > target:
        n += 1
    return n


def working_truncation(k: int, precision_bits: int = DEFAULT_PRECISION_BITS, n_max: int = 3) -> int:
    d = max(dim_cusp(k), 1)
    return max(16 * d, n_max * d + d, int(1.3 * _root_trunc_estimate(k, precision_bits)) + 20)


def cached_miller_basis(k: int, N: int) -> list:
    key = k
    cached = _basis_cache.get(key)
    if cached is None or (cached and cached[0].trunc < N):
        _basis_cache[key] = miller_basis(k, max(N, working_truncation(k)))
    return _basis_cache[key]


def hecke_eigendata(k: int, precision_bits: int = DEFAULT_PRECISION_BITS):
    """Sorted T_2 eigenpairs for weight k, cached per (k, precision)."""
    key = (k, precision_bits)
    if key not in _eigen_cache:
        N = working_truncation(k, precision_bits)
        basis = cached_miller_basis(k, N)
        T2 = hecke_matrix(2, k, basis)
        _eigen_cache[key] = eigen_decompose(T2, precision_bits)
    return _eigen_cache[key]


def eigenform(k: int, index: int, N: int | None = None,
              precision_bits: int = DEFAULT_PRECISION_BITS) -> FormNumeric:
    """The index-th Hecke eigenform of weight k (sorted by T_2 eigenvalue), a(1) = 1."""
    d = dim_cusp(k)
    if not 0 <= index < d:
        raise ValueError(f"index {index} out of range for dim {d} at weight {k}")
    if N is None:
        N = working_truncation(k, precision_bits)
    key = (k, index, precision_bits)
    form = _form_cache.get(key)
    if form is None or form.trunc < N:
        N_full = max(N, working_truncation(k, precision_bits))
        basis = cached_miller_basis(k, N_full)
        pairs = hecke_eigendata(k, precision_bits)
        lam, vec, _res = pairs[index]
        with mp.workprec(precision_bits + 64):
            c = [vi / vec[0] for vi in vec] if vec[0] != 0 else None
            if c is None:
                raise NearDegenerateSpectrumError(f"eigenvector with a(1) = 0 at weight {k}")
            coeffs = [mp.mpf(0)] * (N_full + 1)
            for j, cj in enumerate(c):
                bj = basis[j].coeffs
                for n in range(1, N_full + 1):
                    if bj[n] != 0:
                        coeffs[n] += cj * mp.mpf(bj[n].numerator)
            coeffs = [+x for x in coeffs]
        form = FormNumeric(
            weight=k, kind="eigenform", coeffs=coeffs, ord_infinity=1,
            precision_bits=precision_bits, eigen_index=index,
        )
        _form_cache[key] = form
    if form.trunc > N:
        # share cache storage; callers rarely need a shorter view
        return form
    return form


def eisenstein_form(k: int, N: int | None = None,
                    precision_bits: int = DEFAULT_PRECISION_BITS) -> FormNumeric:
    """E_k as a numeric form (exact rational coefficients rounded once)."""
    if N is None:
        N = working_truncation(k, precision_bits)
    key = (k, "eis", precision_bits)
    form = _form_cache.get(key)
    if form is None or form.trunc < N:
        series = eisenstein_qexp(k, N)
        with mp.workprec(precision_bits + 16):
            coeffs = [mp.mpf(c.numerator) / mp.mpf(c.denominator) for c in series.coeffs]
        form = FormNumeric(
            weight=k, kind="eisenstein", coeffs=coeffs,
            ord_infinity=0, precision_bits=precision_bits,
        )
        _form_cache[key] = form
    return form


def check_multiplicativity(f: FormNumeric, pairs: list) -> float:
    """Max over coprime (m, n) of |a(m)a(n) - a(mn)| / (|a(mn)| + 1)."""
    if f.kind != "eigenform":
        raise ValueError("multiplicativity applies to eigenforms")
    worst = mp.mpf(0)
    with mp.workprec(f.precision_bits + 16):
        for m, n in pairs:
            if math.gcd(m, n) != 1:
                raise ValueError(f"({m},{n}) not coprime")
            err = abs(f.coeffs[m] * f.coeffs[n] - f.coeffs[m * n]) / (abs(f.coeffs[m * n]) + 1)
            worst = max(worst, err)
    return float(worst)
