"""Partial, local and transformed generalized Kloosterman sums.

Three independent routes to the transformed local sum are provided:

* ``local_klhat_bruteforce``: the defining double sum over (m, a);
* ``klhat_fft_rows``: the factorization Klhat = A * B, with
  A(xi, alpha) = sum_a e((beta a^2 + xi a) / l^N) evaluated for all xi at once by FFT
  and B(alpha) = sum_{n mod l^u} (n / l)^u e(-beta n / l^u), beta = alpha / 4;
* ``local_klhat_closed``: the Gauss-sum closed form.

The closed form as printed needs two repairs, both pinned by the exhaustive
comparison:

* when v(alpha) = u - 1 with u odd the bracket carries an extra
  l^(u - 1/2) kappa(l) (``printed_bracket=True`` drops it);
* the phase e_l(xi^2 / (alpha l^N)) is only correct after reducing xi and
  alpha modulo l^N, so globally one must assemble local factors instead of
  using the single adelic phase (``printed_phase=True`` keeps the single phase).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sympy import isprime

from kloostrace.approx import TERM_EPS, ComplexApprox, e_ratio
from kloostrace.arith import (
    RationalLike,
    SSet,
    as_rational,
    euler_phi,
    factorize,
    int_valuation,
    jacobi_symbol,
    local_fractional_part,
    reduce_mod,
    semilocal_char,
    valuation,
)

MODULUS_CAP = 8
GLOBAL_CAP = 4000


class KloostermanCapError(ValueError):
    """Raised when a brute-force modulus exceeds its configured cap."""


# ---------------------------------------------------------------------------
# Local parameters and exact phase bookkeeping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalKlParams:
    ell: int
    u: int
    v: int
    cap: int = MODULUS_CAP

    def __post_init__(self) -> None:
        if self.ell < 3 or not isprime(self.ell):
            raise ValueError(f"ell must be an odd prime, got {self.ell}")
        if self.u < 0 or self.v < 0:
            raise ValueError("u and v must be nonnegative")
        if self.N > self.cap:
            raise KloostermanCapError(f"u + 2v = {self.N} exceeds cap {self.cap}")

    @property
    def N(self) -> int:
        return self.u + 2 * self.v

    @property
    def M(self) -> int:
        return self.ell**self.N


class KappaUnit(enum.Enum):
    ONE = 0
    I = 1

    @classmethod
    def of(cls, m: int) -> KappaUnit:
        if m % 2 == 0:
            raise ValueError("kappa is defined on odd integers")
        return cls.ONE if m % 4 == 1 else cls.I

    @property
    def numeric(self) -> complex:
        return 1 if self is KappaUnit.ONE else 1j


@dataclass(frozen=True)
class GaussValue:
    """coeff * ell^(half_exp / 2) * i^i_power, kept exact until ``numeric``."""

    coeff: int
    ell: int
    half_exp: int
    i_power: int

    @property
    def is_zero(self) -> bool:
        return self.coeff == 0

    def numeric(self) -> complex:
        if self.coeff == 0:
            return 0j
        mag = self.ell ** (self.half_exp // 2) * (math.sqrt(self.ell) if self.half_exp % 2 else 1.0)
        return self.coeff * mag * (1j ** (self.i_power % 4))

    def abs_value(self) -> float:
        return abs(self.numeric())


def _legendre_power(x: int, ell: int, k: int) -> int:
    """(x / ell^k) = (x / ell)^k, with the empty symbol equal to 1."""
    if k == 0:
        return 1
    s = jacobi_symbol(x, ell)
    return s if k % 2 else s * s


def e_local(ell: int, x: RationalLike) -> complex:
    """e_ell(x) = e(-<x>_ell)."""
    f = local_fractional_part(ell, x)
    return e_ratio(-f.numerator, f.denominator)


# ---------------------------------------------------------------------------
# Local sums
# ---------------------------------------------------------------------------


def _local_weights(p: LocalKlParams) -> np.ndarray:
    """W[a, m] = ((a^2 - 4m) / l^2v over l^u) when l^2v | a^2 - 4m, else 0."""
    M = p.M
    a = np.arange(M, dtype=np.int64)
    D = (a[:, None] * a[:, None] - 4 * a[None, :]) % M
    l2v = p.ell ** (2 * p.v)
    ok = D % l2v == 0
    n = (D // l2v) % p.ell if p.u else np.zeros_like(D)
    leg = np.array([_legendre_power(t, p.ell, p.u) for t in range(p.ell)], dtype=np.int64)
    return np.where(ok, leg[n], 0)


def local_kl_bruteforce(p: LocalKlParams, xi: RationalLike, m: RationalLike) -> ComplexApprox:
    """Kl^(l)_{l^u,l^v}(xi, m) summed straight from the definition (xi, m in Z_(l))."""
    M = p.M
    xr = reduce_mod(xi, M)
    mr = reduce_mod(m, M)
    l2v = p.ell ** (2 * p.v)
    total = 0j
    terms = 0
    for a in range(M):
        d = a * a - 4 * mr
        if d % l2v:
            continue
        w = _legendre_power((d // l2v) % p.ell, p.ell, p.u) if p.u else 1
        if w:
            total += w * e_local(p.ell, Fraction(-a * xr, M))
            terms += 1
    return ComplexApprox.of(total, TERM_EPS * max(terms, 1))


def local_klhat_bruteforce(p: LocalKlParams, xi: RationalLike, alpha: RationalLike) -> ComplexApprox:
    """Klhat^(l)(xi, alpha) = sum_m Kl(xi, m) e_l(-m alpha / l^N), as a full double sum."""
    M = p.M
    xr = reduce_mod(xi, M)
    ar = reduce_mod(alpha, M)
    W = _local_weights(p)
    # e_l(-x/M) = e(x/M) for integers x: the orientation is pinned by tests against e_local
    phase_a = np.exp(2j * np.pi * ((np.arange(M) * xr) % M) / M)
    phase_m = np.exp(2j * np.pi * ((np.arange(M) * ar) % M) / M)
    kl = phase_a @ W
    total = complex(kl @ phase_m)
    return ComplexApprox.of(total, TERM_EPS * M * M)


def local_c(p: LocalKlParams, alpha: RationalLike, printed_bracket: bool = False) -> GaussValue:
    """The coefficient c^(l)_{l^u,l^v}(alpha); alpha = 0 gives the alpha-zero constant."""
    ell, u, N = p.ell, p.u, p.N
    M = p.M
    ar = reduce_mod(alpha, M)
    w = int_valuation(ell, ar, cap=N)
    phi_lu = ell ** (u - 1) * (ell - 1) if u else 1
    if w >= N:
        return GaussValue(phi_lu if u % 2 == 0 else 0, ell, 2 * N, 0)
    a0 = ar // ell**w
    K = N - w
    kappa = KappaUnit.of(ell**K).value
    coeff = _legendre_power(a0, ell, K)
    half = N + w
    ipow = kappa
    if w >= u and u % 2 == 0:
        coeff *= phi_lu
    elif w == u - 1 and u % 2 == 0:
        coeff *= -(ell ** (u - 1))
    elif w == u - 1 and u % 2 == 1:
        coeff *= jacobi_symbol(-a0, ell)
        if not printed_bracket:
            half += 2 * u - 1
            ipow += KappaUnit.of(ell).value
    else:
        coeff = 0
    return GaussValue(coeff, ell, half, ipow)


def local_klhat_closed(
    p: LocalKlParams,
    xi: RationalLike,
    alpha: RationalLike,
    printed_bracket: bool = False,
    printed_phase: bool = False,
) -> ComplexApprox:
    """Closed-form Klhat^(l)(xi, alpha).

    The support condition is v(xi) >= min(v(alpha), u + 2v) and the phase is
    e_l(xi^2 / (alpha l^N)) evaluated on representatives mod l^N.  With
    ``printed_phase`` the phase is evaluated on the arguments as given.
    """
    M = p.M
    xr = reduce_mod(xi, M)
    ar = reduce_mod(alpha, M)
    c = local_c(p, ar, printed_bracket=printed_bracket)
    w = int_valuation(p.ell, ar, cap=p.N)
    if c.is_zero or int_valuation(p.ell, xr, cap=p.N) < w:
        return ComplexApprox.of(0)
    if w >= p.N:
        phase = 1
    elif printed_phase:
        x, a = as_rational(xi), as_rational(alpha)
        phase = e_local(p.ell, x * x / (a * M)) if x else 1
    else:
        K = p.N - w
        lk = p.ell**K
        xi1 = xr // p.ell**w
        a0 = ar // p.ell**w
        phase = e_ratio(-(xi1 * xi1 * pow(a0, -1, lk)), lk)
    val = c.numeric() * phase
    return ComplexApprox.of(val, TERM_EPS * (abs(val) + 1))


def closed_row(p: LocalKlParams, alpha: int) -> np.ndarray:
    """local_klhat_closed for every xi mod l^N at fixed alpha, vectorized."""
    M = p.M
    ar = alpha % M
    c = local_c(p, ar)
    out = np.zeros(M, dtype=complex)
    if c.is_zero:
        return out
    w = int_valuation(p.ell, ar, cap=p.N)
    lw = p.ell ** min(w, p.N)
    xi = np.arange(M, dtype=np.int64)
    supp = xi % lw == 0
    if w >= p.N:
        out[supp] = c.numeric()
        return out
    K = p.N - w
    lk = p.ell**K
    inv = pow(ar // lw, -1, lk)
    xi1 = (xi[supp] // lw) % lk
    idx = (xi1 * xi1 % lk) * inv % lk
    out[supp] = c.numeric() * np.exp(-2j * np.pi * idx / lk)
    return out


def _gauss_B(ell: int, u: int, N: int, alpha: int) -> complex:
    """B(alpha) = sum_{n mod l^u} (n/l)^u e(-beta n / l^u), beta = alpha * 4^{-1} mod l^N."""
    if u == 0:
        return 1
    lu = ell**u
    beta = alpha * pow(4, -1, ell**N) % lu
    n = np.arange(lu)
    leg = np.array([_legendre_power(t, ell, u) for t in range(ell)])[n % ell]
    return complex(np.sum(leg * np.exp(-2j * np.pi * ((beta * n) % lu) / lu)))


def klhat_fft_rows(ell: int, N: int):
    """Yield (alpha, A_row) where A_row[xi] = sum_a e((beta a^2 + xi a) / l^N)."""
    M = ell**N
    inv4 = pow(4, -1, M)
    a = np.arange(M, dtype=np.int64)
    a2 = a * a % M
    for alpha in range(M):
        beta = alpha * inv4 % M
        g = np.exp(2j * np.pi * ((beta * a2) % M) / M)
        yield alpha, np.fft.ifft(g) * M


def klhat_fft(p: LocalKlParams, xi: int, alpha: int) -> ComplexApprox:
    """Single value through the A * B factorization (mostly for tests)."""
    M = p.M
    xr, ar = xi % M, alpha % M
    beta = ar * pow(4, -1, M) % M
    a = np.arange(M, dtype=np.int64)
    A = complex(np.sum(np.exp(2j * np.pi * ((beta * a * a + xr * a) % M) / M)))
    val = A * _gauss_B(p.ell, p.u, p.N, ar)
    return ComplexApprox.of(val, TERM_EPS * M * p.ell**p.u)


@dataclass
class SweepResult:
    ell: int
    u: int
    v: int
    cases: int
    failures: int
    max_abs_diff: float
    max_budget: float
    first_failure: tuple[int, int] | None = None


def sweep_closed_vs_fft(ell: int, max_N: int = 5, tol: float = 1e-9) -> list[SweepResult]:
    """Exhaustive comparison of the closed form with the FFT oracle for all (u, v), xi, alpha."""
    results = []
    for N in range(0, max_N + 1):
        uvs = [(N - 2 * v, v) for v in range(N // 2 + 1)]
        ps = [LocalKlParams(ell, u, v) for u, v in uvs]
        res = {pp: SweepResult(ell, pp.u, pp.v, 0, 0, 0.0, 0.0) for pp in ps}
        M = ell**N
        if N == 0:
            for pp in ps:
                val = local_klhat_closed(pp, 0, 0)
                r = res[pp]
                r.cases = 1
                r.max_abs_diff = abs(val.value - 1)
                r.failures = int(r.max_abs_diff > tol)
            results.extend(res.values())
            continue
        for alpha, A in klhat_fft_rows(ell, N):
            for pp in ps:
                B = _gauss_B(ell, pp.u, N, alpha)
                oracle = A * B
                closed = closed_row(pp, alpha)
                diff = np.abs(oracle - closed)
                budget = TERM_EPS * M * ell**pp.u
                r = res[pp]
                r.cases += M
                bad = diff > budget + tol
                nb = int(bad.sum())
                if nb and r.first_failure is None:
                    r.first_failure = (int(np.argmax(bad)), alpha)
                r.failures += nb
                r.max_abs_diff = max(r.max_abs_diff, float(diff.max()))
                r.max_budget = budget
        results.extend(res.values())
    return results


# ---------------------------------------------------------------------------
# Global sums
# ---------------------------------------------------------------------------


def _check_kf(S: SSet, k: int, f: int) -> None:
    if k < 1 or f < 1:
        raise ValueError("k and f must be positive")
    if not (S.coprime(k) and S.coprime(f)):
        raise ValueError(f"k={k} and f={f} must be prime to S={S}")


def _global_weights(k: int, f: int) -> np.ndarray:
    M = k * f * f
    f2 = f * f
    a = np.arange(M, dtype=np.int64)
    D = a[:, None] * a[:, None] - 4 * a[None, :]
    ok = D % f2 == 0
    jac = np.array([jacobi_symbol(t, k) for t in range(k)], dtype=np.int64)
    return np.where(ok, jac[(D // f2) % k], 0)


def _semilocal_row(S: SSet, x: Fraction, M: int) -> np.ndarray:
    """semilocal_char(S, j x / M) for j = 0..M-1."""
    return np.array([semilocal_char(S, j * x / M).value for j in range(M)])


def global_kl_bruteforce(
    S: SSet, k: int, f: int, xi: RationalLike, m: RationalLike, cap: int = GLOBAL_CAP
) -> ComplexApprox:
    """Kl^S_{k,f}(xi, m) by direct summation over a mod k f^2."""
    _check_kf(S, k, f)
    M = k * f * f
    if M > cap:
        raise KloostermanCapError(f"k f^2 = {M} exceeds cap {cap}")
    mr = reduce_mod(m, M)
    x = as_rational(xi)
    total = 0j
    f2 = f * f
    for a in range(M):
        d = a * a - 4 * mr
        if d % f2:
            continue
        w = jacobi_symbol(d // f2, k)
        if w:
            total += w * semilocal_char(S, a * x / M).value
    return ComplexApprox.of(total, TERM_EPS * M)


def global_klhat_bruteforce(
    S: SSet, k: int, f: int, xi: RationalLike, alpha: RationalLike, cap: int = GLOBAL_CAP
) -> ComplexApprox:
    """sum_{m mod k f^2} Kl^S_{k,f}(xi, m) e(m alpha / k f^2) e_q(m alpha / k f^2)."""
    _check_kf(S, k, f)
    M = k * f * f
    if M > cap:
        raise KloostermanCapError(f"k f^2 = {M} exceeds cap {cap}")
    W = _global_weights(k, f)
    kl = _semilocal_row(S, as_rational(xi), M) @ W
    total = complex(kl @ _semilocal_row(S, as_rational(alpha), M))
    return ComplexApprox.of(total, TERM_EPS * M * M)


def _local_pieces(k: int, f: int):
    M = k * f * f
    for ell in sorted(factorize(M)):
        u = int_valuation(ell, k)
        v = int_valuation(ell, f)
        p = LocalKlParams(ell, u, v, cap=10**6)
        pk = p.M
        inv = pow(M // pk, -1, pk)
        yield p, inv


def c_kf(S: SSet, k: int, f: int, alpha: RationalLike, printed_bracket: bool = False) -> ComplexApprox:
    """c_{k,f}(alpha) = prod_{l | k f^2} c^(l)(((k f^2)^(l))^{-1} alpha)."""
    _check_kf(S, k, f)
    if as_rational(alpha) == 0:
        raise ValueError("c_{k,f} is defined for alpha != 0")
    val = 1 + 0j
    for p, inv in _local_pieces(k, f):
        val *= local_c(p, inv * reduce_mod(alpha, p.M), printed_bracket=printed_bracket).numeric()
    return ComplexApprox.of(val, TERM_EPS * (abs(val) + 1))


def _divides_locally(k: int, f: int, d_val: dict[int, int], x: RationalLike) -> bool:
    """True when v_l(x) >= d_val[l] for every l in d_val."""
    x = as_rational(x)
    if x == 0:
        return True
    return all(valuation(ell, x) >= e for ell, e in d_val.items())


def global_klhat_closed(
    S: SSet,
    k: int,
    f: int,
    xi: RationalLike,
    alpha: RationalLike,
    printed_phase: bool = False,
    printed_bracket: bool = False,
) -> ComplexApprox:
    """Closed-form Klhat^S_{k,f}(xi, alpha).

    Default route: product over l | k f^2 of local closed forms at the
    CRT-shifted arguments.  ``printed_phase`` instead uses
    c_{k,f}(alpha) e(-xi^2 / alpha k f^2) e_q(-xi^2 / alpha k f^2), which is
    only correct when alpha has no prime factor outside S and k f^2 and
    v_l(alpha) < v_l(k f^2) for every l.
    """
    _check_kf(S, k, f)
    x, a = as_rational(xi), as_rational(alpha)
    M = k * f * f
    fac = factorize(M) if M > 1 else {}
    if a == 0:
        ok = _divides_locally(k, f, fac, x) and math.isqrt(k) ** 2 == k
        return ComplexApprox.of(M * euler_phi(k) if ok else 0)
    if not printed_phase:
        val = ComplexApprox.of(1)
        for p, inv in _local_pieces(k, f):
            val = val * local_klhat_closed(
                p, inv * reduce_mod(x, p.M), inv * reduce_mod(a, p.M), printed_bracket=printed_bracket
            )
        return val
    g = {ell: min(e, valuation(ell, a)) for ell, e in fac.items()}
    if not _divides_locally(k, f, g, x):
        return ComplexApprox.of(0)
    c = c_kf(S, k, f, a, printed_bracket=printed_bracket)
    return c * semilocal_char(S, -x * x / (a * M))


def gcd_local(k: int, f: int, alpha: RationalLike) -> int:
    """gcd(k f^2, alpha) for alpha in Z^S (only primes of k f^2 matter)."""
    a = as_rational(alpha)
    M = k * f * f
    if a == 0:
        return M
    out = 1
    for ell, e in factorize(M).items() if M > 1 else []:
        out *= ell ** min(e, valuation(ell, a))
    return out


@dataclass(frozen=True)
class BoundCheck:
    holds: bool
    c_abs: float
    bound: float
    support_ok: bool
    vanishes: bool


def c_bound_check(S: SSet, k: int, f: int, alpha: RationalLike) -> BoundCheck:
    """|c_{k,f}(alpha)| <= k^{3/2} f sqrt(gcd(k f^2, alpha)), and c = 0 unless (k / rad k) | alpha."""
    c = c_kf(S, k, f, alpha)
    fac_k = factorize(k) if k > 1 else {}
    a = as_rational(alpha)
    support_ok = all(valuation(ell, a) >= e - 1 for ell, e in fac_k.items())
    bound = k**1.5 * f * math.sqrt(gcd_local(k, f, a))
    vanishes = abs(c.value) <= 1e-9 * max(1.0, bound)
    holds = abs(c.value) <= bound * (1 + 1e-12) + c.abs_err and (support_ok or vanishes)
    return BoundCheck(holds, abs(c.value), bound, support_ok, vanishes)


__all__ = [
    "LocalKlParams",
    "KappaUnit",
    "GaussValue",
    "local_kl_bruteforce",
    "local_klhat_bruteforce",
    "local_klhat_closed",
    "local_c",
    "closed_row",
    "klhat_fft",
    "klhat_fft_rows",
    "sweep_closed_vs_fft",
    "global_kl_bruteforce",
    "global_klhat_bruteforce",
    "global_klhat_closed",
    "c_kf",
    "c_bound_check",
    "gcd_local",
]
