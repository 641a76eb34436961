"""Eichler-Selberg traces of normalized Hecke operators and their oracles.

The normalized operator is the classical T_n divided by n^{(m-1)/2}, so the
normalized trace of T(n) on S_12(SL_2(Z)) is tau(n) / n^{11/2}.

Level one uses

    Tr T_n = -1/2 sum_{t^2 <= 4n} P_{m-2}(t, n) H(4n - t^2) - 1/2 sum_{d d' = n} min(d, d')^{m-1}

with H the Hurwitz class number (H(0) = -1/12) and P_j the polynomials
P_0 = 1, P_1 = t, P_j = t P_{j-1} - n P_{j-2}, so that
P_{m-2}(t, n) = (rho^{m-1} - rhobar^{m-1}) / (rho - rhobar) for the roots of
x^2 - t x + n.  General level with nebentypus follows Cohen's formula and is
marked experimental.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate

from kloostrace.arith import divisors, euler_phi, factorize
from kloostrace.characters import DirichletCharacter, trivial

TAU_CAP = 100_000


# ---------------------------------------------------------------------------
# Class numbers
# ---------------------------------------------------------------------------


def _reduced_forms(D: int, primitive: bool):
    """Reduced forms (a, b, c) with b^2 - 4ac = -D."""
    if D <= 0 or D % 4 not in (0, 3):
        return
    a = 1
    while 3 * a * a <= D:
        for b in range(-a + 1, a + 1):
            if (b * b + D) % (4 * a):
                continue
            c = (b * b + D) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if primitive and math.gcd(math.gcd(a, abs(b)), c) != 1:
                continue
            yield a, b, c
        a += 1


def twelve_H(n: int) -> int:
    """12 H(n) as an exact integer; H(0) = -1/12."""
    if n == 0:
        return -1
    total = 0
    for a, b, c in _reduced_forms(n, primitive=False):
        if a == b == c:
            total += 4
        elif b == 0 and a == c:
            total += 6
        else:
            total += 12
    return total


def hurwitz_H(n: int) -> Fraction:
    if n < 0:
        raise ValueError("H(n) needs n >= 0")
    return Fraction(twelve_H(n), 12)


@lru_cache(maxsize=8)
def twelve_H_table(limit: int) -> np.ndarray:
    """12 H(n) for 0 <= n <= limit, by sweeping reduced forms with 4ac - b^2 <= limit."""
    out = np.zeros(limit + 1, dtype=np.int64)
    out[0] = -1
    a = 1
    while 3 * a * a <= limit:
        for b in range(-a + 1, a + 1):
            c_lo = a
            c_hi = (limit + b * b) // (4 * a)
            if c_hi < c_lo:
                continue
            c = np.arange(c_lo, c_hi + 1, dtype=np.int64)
            if b < 0:
                c = c[c > a]
            n = 4 * a * c - b * b
            w = np.full(c.shape, 12, dtype=np.int64)
            w[(c == a) & (b == 0)] = 6
            w[(c == a) & (b == a)] = 4
            np.add.at(out, n, w)
        a += 1
    return out


def weighted_class_number(disc: int) -> Fraction:
    """h_w(disc) for a negative discriminant: primitive classes, weight 1/3 at -3 and 1/2 at -4."""
    if disc >= 0 or disc % 4 not in (0, 1):
        raise ValueError(f"{disc} is not a negative discriminant")
    h = sum(1 for _ in _reduced_forms(-disc, primitive=True))
    if disc == -3:
        return Fraction(h, 3)
    if disc == -4:
        return Fraction(h, 2)
    return Fraction(h)


# ---------------------------------------------------------------------------
# The weight polynomial
# ---------------------------------------------------------------------------


def es_weight_poly(m: int, t: int, n: int) -> int:
    """P_{m-2}(t, n) = (rho^{m-1} - rhobar^{m-1}) / (rho - rhobar), exact integer."""
    if m < 2:
        raise ValueError("weight must be at least 2")
    p_prev, p = 1, t
    if m == 2:
        return 1
    for _ in range(m - 3):
        p_prev, p = p, t * p - n * p_prev
    return p


def es_weight_poly_complex(m: int, t: float, n: float) -> complex:
    disc = complex(t * t - 4 * n)
    r = np.sqrt(disc)
    rho, rhob = (t + r) / 2, (t - r) / 2
    if abs(rho - rhob) < 1e-12:
        return (m - 1) * (t / 2) ** (m - 2)
    return complex((rho ** (m - 1) - rhob ** (m - 1)) / (rho - rhob))


# ---------------------------------------------------------------------------
# Trace engine
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceQuery:
    m: int
    n: int
    N: int = 1
    chi: DirichletCharacter | None = None

    def __post_init__(self) -> None:
        if self.m <= 2:
            raise ValueError("weight must exceed 2")
        if self.N < 1 or self.n < 1:
            raise ValueError("level and index must be positive")
        if math.gcd(self.n, self.N) != 1:
            raise ValueError(f"gcd(n, N) = gcd({self.n}, {self.N}) must be 1")
        if self.chi is not None and self.N % self.chi.modulus:
            raise ValueError("character modulus must divide the level")

    @property
    def character(self) -> DirichletCharacter:
        if self.chi is None:
            return trivial(self.N)
        if self.chi.modulus == self.N:
            return self.chi
        return self.chi * trivial(self.N)

    @property
    def experimental(self) -> bool:
        squarefree = all(k == 1 for k in factorize(self.N).values()) if self.N > 1 else True
        return not (self.N == 1 or (squarefree and self.character.is_principal))


@dataclass(frozen=True)
class TraceResult:
    query: TraceQuery
    exact: Fraction
    normalized: float
    experimental: bool
    note: str = ""


def _psi(N: int) -> Fraction:
    out = Fraction(N)
    for p in factorize(N) if N > 1 else {}:
        out *= Fraction(p + 1, p)
    return out


@lru_cache(maxsize=None)
def _trace_level_one(m: int, n: int) -> Fraction:
    if m % 2:
        return Fraction(0)
    elliptic = 0
    t = 0
    while t * t <= 4 * n:
        h12 = twelve_H(4 * n - t * t)
        if h12:
            term = es_weight_poly(m, t, n) * h12
            elliptic += term if t == 0 else 2 * term
        t += 1
    hyper = sum(min(d, n // d) ** (m - 1) for d in divisors(n))
    return Fraction(-elliptic, 24) - Fraction(hyper, 2)


def _lifted_chi_sum(chi: DirichletCharacter, N: int, Nf: int, t: int, n: int) -> complex:
    total = 0j
    mod = N * Nf
    for x in range(N):
        if any(((x + j * N) ** 2 - t * (x + j * N) + n) % mod == 0 for j in range(Nf)):
            total += chi(x)
    return total


def _trace_general(m: int, n: int, N: int, chi: DirichletCharacter) -> complex:
    """Cohen's trace formula on S_m(Gamma_0(N), chi), m >= 3, gcd(n, N) = 1."""
    psiN = _psi(N)
    total = 0j
    r = math.isqrt(n)
    if r * r == n:
        # n^{m/2 - 1} = r^{m-2}
        total += float(Fraction(m - 1, 12) * psiN) * r ** (m - 2) * chi(r)
    ell = 0j
    T = math.isqrt(4 * n - 1)
    for t in range(-T, T + 1):
        D = t * t - 4 * n
        inner = 0j
        f = 1
        while f * f <= -D:
            if D % (f * f) == 0 and (D // (f * f)) % 4 in (0, 1):
                Nf = math.gcd(N, f)
                mu = float(psiN / _psi(N // Nf)) * _lifted_chi_sum(chi, N, Nf, t, n)
                if mu:
                    inner += float(weighted_class_number(D // (f * f))) * mu
            f += 1
        ell += es_weight_poly(m, t, n) * inner
    total -= ell / 2
    fchi = chi.conductor
    hyp = 0j
    for d in divisors(n):
        dd = n // d
        w = 0j
        for tau in divisors(N):
            g = math.gcd(tau, N // tau)
            if math.gcd(N // fchi, dd - d) % g:
                continue
            y = next(y for y in range(N) if (y - d) % tau == 0 and (y - dd) % (N // tau) == 0)
            w += euler_phi(g) * chi(y)
        hyp += min(d, dd) ** (m - 1) * w
    total -= hyp / 2
    return total


def hecke_trace(q: TraceQuery) -> TraceResult:
    """Trace of T(n) on S_m(Gamma_0(N), chi): exact (classical) and normalized by n^{(m-1)/2}."""
    chi = q.character
    norm = q.n ** ((q.m - 1) / 2)
    if round(chi(-1).real) != (-1) ** q.m:
        return TraceResult(q, Fraction(0), 0.0, q.experimental, "parity: chi(-1) != (-1)^m, the space is zero")
    if q.N == 1:
        ex = _trace_level_one(q.m, q.n)
        return TraceResult(q, ex, float(ex) / norm, False)
    val = _trace_general(q.m, q.n, q.N, chi)
    re = round(val.real)
    if abs(val.imag) > 1e-6 or abs(val.real - re) > 1e-6 * max(1.0, abs(val.real)):
        raise ArithmeticError(f"trace {val} is not a rational integer")
    return TraceResult(q, Fraction(re), re / norm, q.experimental, "experimental" if q.experimental else "")


def dimension_level_one(m: int) -> int:
    if m % 2 or m < 4:
        return 0
    return m // 12 - 1 if m % 12 == 2 else m // 12


# ---------------------------------------------------------------------------
# Fast float traces over a range of n (level one)
# ---------------------------------------------------------------------------


def normalized_traces_fast(m: int, X: int, chunk: int = 2_000_000) -> np.ndarray:
    """Normalized Tr T(n) for 1 <= n < X (index n), level one, vectorized in floats.

    With t = 2 sqrt(n) cos(theta) the normalized elliptic weight is
    sin((m-1) theta) / (sin(theta) sqrt(n)).
    """
    out = np.zeros(X, dtype=float)
    if m % 2 or X <= 1:
        return out
    H12 = twelve_H_table(4 * X)
    # elliptic part, in chunks of (n, t) pairs
    n_start = 1
    while n_start < X:
        n_end = n_start
        count = 0
        while n_end < X and count < chunk:
            count += 2 * math.isqrt(4 * n_end) + 1
            n_end += 1
        ns = np.arange(n_start, n_end, dtype=np.int64)
        tmax = np.array([math.isqrt(4 * int(v)) for v in ns])
        reps = 2 * tmax + 1
        nn = np.repeat(ns, reps)
        offs = np.repeat(np.cumsum(reps) - reps, reps)
        t = np.arange(nn.size) - offs - np.repeat(tmax, reps)
        D = 4 * nn - t * t
        h = H12[D].astype(float) / 12.0
        sq = np.sqrt(nn.astype(float))
        cos = np.clip(t / (2 * sq), -1.0, 1.0)
        theta = np.arccos(cos)
        sin = np.sin(theta)
        with np.errstate(invalid="ignore", divide="ignore"):
            wgt = np.where(D == 0, (m - 1) * np.sign(t) ** m, np.sin((m - 1) * theta) / np.where(sin == 0, 1, sin))
        contrib = -0.5 * wgt * h / sq
        out[n_start:n_end] += np.bincount(nn - n_start, weights=contrib, minlength=n_end - n_start)
        n_start = n_end
    # hyperbolic part: -1/2 sum_{d d' = n} min(d, d')^{m-1} / n^{(m-1)/2} = -1/2 sum (min/max)^{(m-1)/2}
    for d in range(1, math.isqrt(X - 1) + 1):
        e = np.arange(d, (X - 1) // d + 1, dtype=np.int64)
        ratio = (d / e) ** ((m - 1) / 2)
        mult = np.where(e == d, 1.0, 2.0)
        np.add.at(out, d * e, -0.5 * mult * ratio)
    out[0] = 0.0
    return out


# ---------------------------------------------------------------------------
# q-expansion oracles
# ---------------------------------------------------------------------------


def _euler_product_sparse(bound: int, d: int = 1) -> dict[int, int]:
    """prod_k (1 - q^{dk}) up to q^bound via the pentagonal number theorem."""
    out: dict[int, int] = {0: 1}
    k = 1
    while True:
        added = False
        for sgn, e in ((-1, k * (3 * k - 1) // 2), (-1, k * (3 * k + 1) // 2)):
            if d * e <= bound:
                out[d * e] = out.get(d * e, 0) + (sgn if k % 2 else -sgn)
                added = True
        if not added:
            break
        k += 1
    return out


def _power_series_pow(f: dict[int, int], r: int, bound: int) -> list[int]:
    """f^r up to q^bound for f with constant term 1 (Miller recurrence, exact integers)."""
    g = [0] * (bound + 1)
    g[0] = 1
    terms = sorted((k, c) for k, c in f.items() if k > 0 and c)
    for n in range(1, bound + 1):
        acc = 0
        for k, c in terms:
            if k > n:
                break
            acc += (k * (r + 1) - n) * c * g[n - k]
        if acc % n:
            raise ArithmeticError("non-integral power series coefficient")
        g[n] = acc // n
    return g


def series_mul(a: Sequence[int], b: Sequence[int], bound: int) -> list[int]:
    out = [0] * (bound + 1)
    bnz = [(j, v) for j, v in enumerate(b[: bound + 1]) if v]
    for i, x in enumerate(a[: bound + 1]):
        if x:
            for j, y in bnz:
                if i + j > bound:
                    break
                out[i + j] += x * y
    return out


def eta_product(exponents: dict[int, int], bound: int) -> list[int]:
    """Coefficients c_0..c_bound of prod_d eta(d z)^{r_d}, whose q-order must be an integer."""
    shift = Fraction(sum(d * r for d, r in exponents.items()), 24)
    if shift.denominator != 1:
        raise ValueError("eta quotient has non-integral q-order")
    s = int(shift)
    core = [1] + [0] * bound
    for d, r in exponents.items():
        part = _power_series_pow(_euler_product_sparse(bound, d), r, bound)
        core = series_mul(core, part, bound)
    return ([0] * s + core)[: bound + 1]


def tau_oracle(bound: int) -> list[int]:
    """tau(0..bound) from q prod (1 - q^k)^24."""
    if bound > TAU_CAP:
        raise ValueError(f"bound {bound} exceeds cap {TAU_CAP}")
    return eta_product({1: 24}, bound)


def eisenstein_series(k: int, bound: int) -> list[int]:
    """E_4 = 1 + 240 sum sigma_3 q^n and E_6 = 1 - 504 sum sigma_5 q^n."""
    c = {4: 240, 6: -504}[k]
    out = [1] + [0] * bound
    for d in range(1, bound + 1):
        p = d ** (k - 1)
        for nn in range(d, bound + 1, d):
            out[nn] += c * p
    return out


def level_one_eigenform(m: int, bound: int) -> list[int]:
    """The unique normalized eigenform of weight m in {12, 16, 18, 20, 22, 26}: Delta E_4^a E_6^b."""
    a, b = {12: (0, 0), 16: (1, 0), 18: (0, 1), 20: (2, 0), 22: (1, 1), 26: (2, 1)}[m]
    f = tau_oracle(bound)
    for _ in range(a):
        f = series_mul(f, eisenstein_series(4, bound), bound)
    for _ in range(b):
        f = series_mul(f, eisenstein_series(6, bound), bound)
    return f


# Newforms spanning one-dimensional spaces S_m(Gamma_0(N), chi), as eta products.
ETA_NEWFORMS: dict[tuple[int, int], dict[int, int]] = {
    (8, 2): {1: 8, 2: 8},
    (6, 3): {1: 6, 3: 6},
    (4, 5): {1: 4, 5: 4},
    (4, 6): {1: 2, 2: 2, 3: 2, 6: 2},
    (4, 8): {2: 4, 4: 4},
    (3, 7): {1: 3, 7: 3},
}


# ---------------------------------------------------------------------------
# The discrete-series function theta_inf^+
# ---------------------------------------------------------------------------


def theta_inf_plus(m: int, x: float | np.ndarray) -> float | np.ndarray:
    """-(2/pi) sin((m-1) arccos x) on [-1, 1] (zero at the endpoints)."""
    if m < 3:
        raise ValueError("weight must be at least 3")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1):
        raise ValueError("theta^+ is defined on [-1, 1]")
    inside = np.abs(xa) < 1
    val = np.where(inside, -(2 / math.pi) * np.sin((m - 1) * np.arccos(np.clip(xa, -1, 1))), 0.0)
    return float(val) if np.ndim(x) == 0 else val


def theta_inf_plus_radical(m: int, x: float) -> float:
    """(i/pi)[(x + i sqrt(1-x^2))^{m-1} - (x - i sqrt(1-x^2))^{m-1}] on |x| < 1."""
    if abs(x) >= 1:
        return 0.0
    r = math.sqrt(1 - x * x)
    z = (1j / math.pi) * ((x + 1j * r) ** (m - 1) - (x - 1j * r) ** (m - 1))
    return z.real


def eisenstein_integral(m: int) -> float:
    """2 int_{-1}^{1} theta^+(x) / sqrt(1 - x^2) dx in closed form."""
    if m < 3:
        raise ValueError("weight must be at least 3")
    return 0.0 if m % 2 else -8 / (math.pi * (m - 1))


def eisenstein_integral_numeric(m: int) -> tuple[float, float]:
    """Adaptive quadrature with the Jacobi weight (1-x)^{-1/2} (1+x)^{-1/2}."""
    val, err = integrate.quad(
        lambda x: theta_inf_plus(m, x), -1, 1, weight="alg", wvar=(-0.5, -0.5), epsabs=1e-13, epsrel=1e-13, limit=200
    )
    return 2 * val, 2 * err
