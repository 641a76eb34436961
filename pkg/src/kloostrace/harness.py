"""Desk-scale asymptotic checks: divisor sums, hyperbola sums, mollified sums, trace sums.

Every asymptotic check produces (X, |error|) pairs on a geometric grid and is
judged by the log-log slope of the running maximum of |error|, since the
partial sums oscillate through zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Sequence

import numpy as np

from kloostrace.arith import SSet
from kloostrace.characters import DirichletCharacter, principal_prime_to
from kloostrace.hecke import TraceQuery, dimension_level_one, hecke_trace, normalized_traces_fast
from kloostrace.special import gauss_legendre_nodes, mellin_numeric, zeta_S

X_CAP = 10**7
TRACE_X_CAP = 10**6
DEFAULT_GRID = (10_000, 20_000, 30_000, 50_000, 100_000, 200_000, 300_000, 500_000, 1_000_000)
TRACE_GRID = tuple(int(round(10 ** (3 + k / 6))) for k in range(13))


# ---------------------------------------------------------------------------
# Reports and slope fits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlopeFit:
    X: tuple[float, ...]
    observed: tuple[float, ...]
    slope: float
    intercept: float
    residual_rms: float
    identically_zero: bool = False

    def __post_init__(self) -> None:
        if len(self.X) < 6:
            raise ValueError(f"slope fit needs at least 6 grid points, got {len(self.X)}")
        if max(self.X) < 100 * min(self.X) * (1 - 1e-12):
            raise ValueError("slope fit grid must span at least 2 decades")
        if not math.isfinite(self.slope):
            raise ValueError("slope is not finite")


def fit_slope(X: Sequence[float], values: Sequence[float]) -> SlopeFit:
    """Least-squares line through (log X, log |v|) using the running maximum of |v|."""
    X = tuple(float(x) for x in X)
    env = tuple(float(v) for v in np.maximum.accumulate(np.abs(np.asarray(values, dtype=float))))
    if len(X) != len(env):
        raise ValueError("grid and values differ in length")
    if len(X) >= 1 and max(env, default=0.0) == 0.0:
        return SlopeFit(X, env, 0.0, 0.0, 0.0, identically_zero=True)
    lx = np.log(X)
    ly = np.log(np.maximum(env, 1e-300))
    keep = np.asarray(env) > 0
    slope, intercept = np.polyfit(lx[keep], ly[keep], 1)
    resid = ly[keep] - (slope * lx[keep] + intercept)
    return SlopeFit(X, env, float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))))


@dataclass
class VerificationReport:
    id: str
    anchor: str
    inputs: dict[str, Any]
    expected: Any
    observed: Any
    tol: float
    passed: bool
    seconds: float = 0.0
    provenance: str = ""
    details: dict[str, Any] = field(default_factory=dict)

    def record(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "inputs": self.inputs,
            "expected": self.expected,
            "observed": self.observed,
            "tol": self.tol,
            "pass": bool(self.passed),
            "seconds": self.seconds,
            "provenance": self.provenance,
            "details": self.details,
        }


# ---------------------------------------------------------------------------
# Sieves and character tables
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4)
def sigma_table(limit: int) -> np.ndarray:
    """sigma(n) for 0 <= n <= limit (sigma(0) = 0)."""
    if limit > X_CAP:
        raise ValueError(f"limit {limit} exceeds cap {X_CAP}")
    out = np.zeros(limit + 1, dtype=np.int64)
    for d in range(1, limit + 1):
        out[d::d] += d
    return out


def char_table(chi: DirichletCharacter, limit: int) -> np.ndarray:
    vals = np.asarray(chi.values, dtype=complex)
    idx = np.arange(limit + 1) % chi.modulus
    t = vals[idx]
    return t.real.copy() if chi.is_real else t


def _check_character(S: SSet, chi: DirichletCharacter) -> None:
    """chi must vanish exactly on integers meeting S."""
    M = chi.modulus
    for n in range(1, M * math.prod(S.primes) + 1):
        if (chi(n) == 0) != (not S.coprime(n)) and math.gcd(n, M) == 1:
            raise ValueError(f"character must vanish exactly on integers meeting S (n = {n})")
    for q in S.primes:
        if chi(q) != 0:
            raise ValueError(f"character does not vanish at {q}")


def _fsum(x: np.ndarray) -> complex | float:
    if np.iscomplexobj(x):
        return complex(math.fsum(x.real.tolist()), math.fsum(x.imag.tolist()))
    return math.fsum(x.tolist())


def _density(S: SSet) -> float:
    return float(S.density())


# ---------------------------------------------------------------------------
# Divisor sums
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SumResult:
    X: float
    observed: complex | float
    main: float

    @property
    def error(self) -> float:
        return abs(self.observed - self.main)


def divisor_main_coefficient(S: SSet, chi: DirichletCharacter) -> float:
    """delta(chi) prod (1 - 1/q) (2/3) zeta^S(2)."""
    return chi.delta() * _density(S) * (2 / 3) * zeta_S(2, S).re


def divisor_sum_sharp(S: SSet, chi: DirichletCharacter, X: float) -> SumResult:
    """sum_{n < X} sigma(n) chi(n) / sqrt(n) with compensated summation."""
    if X > X_CAP:
        raise ValueError(f"X = {X} exceeds cap {X_CAP}")
    _check_character(S, chi)
    top = math.ceil(X) - 1
    main = divisor_main_coefficient(S, chi) * X**1.5
    if top < 1:
        return SumResult(X, 0.0, main)
    n = np.arange(1, top + 1)
    terms = sigma_table(top)[1:] * char_table(chi, top)[1:] / np.sqrt(n)
    return SumResult(X, _fsum(terms), main)


def divisor_error_curve(S: SSet, chi: DirichletCharacter, grid: Sequence[int]) -> tuple[list[SumResult], SlopeFit]:
    """Observed sums at the grid (compensated) and the envelope of |error| over every integer X <= grid point."""
    _check_character(S, chi)
    top = int(max(grid))
    if top > X_CAP:
        raise ValueError(f"X = {top} exceeds cap {X_CAP}")
    n = np.arange(1, top + 1)
    terms = sigma_table(top)[1:] * char_table(chi, top)[1:] / np.sqrt(n)
    coef = divisor_main_coefficient(S, chi)
    # S(X) for integer X is the sum over n <= X - 1
    partial = np.concatenate(([0.0], np.cumsum(terms)))[:top]
    Xs = np.arange(1, top + 1, dtype=float)
    err = np.abs(partial - coef * Xs**1.5)
    env = np.maximum.accumulate(err)
    results = [SumResult(float(X), _fsum(terms[: int(X) - 1]), coef * float(X) ** 1.5) for X in grid]
    return results, fit_slope(grid, [env[int(X) - 1] for X in grid])


# ---------------------------------------------------------------------------
# Mollifier
# ---------------------------------------------------------------------------


def bump(x: np.ndarray | float) -> np.ndarray:
    """exp(-1 / (1 - x^2)) on (-1, 1), unnormalized."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1
    out = np.zeros_like(x)
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


@lru_cache(maxsize=1)
def bump_mass() -> float:
    x, w = gauss_legendre_nodes(-1.0, 1.0, 64, 24)
    return math.fsum((bump(x) * w).tolist())


def phi(x: np.ndarray | float) -> np.ndarray:
    """The normalized bump, integral 1."""
    return bump(x) / bump_mass()


def phi_d1(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = np.abs(x) < 1
    out[m] = phi(x[m]) * (-2 * x[m] / (1 - x[m] ** 2) ** 2)
    return out


def phi_d2(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = np.abs(x) < 1
    xm = x[m]
    out[m] = phi(xm) * (6 * xm**4 - 2) / (1 - xm**2) ** 4
    return out


_CDF_PANELS = 8
_CDF_ORDER = 24


def phi_cdf(z: np.ndarray | float) -> np.ndarray:
    """int_{-1}^{z} phi by composite Gauss-Legendre on [-1, clip(z)]."""
    z = np.clip(np.atleast_1d(np.asarray(z, dtype=float)), -1.0, 1.0)
    xg, wg = np.polynomial.legendre.leggauss(_CDF_ORDER)
    u = (np.arange(_CDF_PANELS)[:, None] + (xg[None, :] + 1) / 2) / _CDF_PANELS  # nodes in (0, 1)
    u = u.ravel()
    w = np.tile(wg / 2, _CDF_PANELS) / _CDF_PANELS
    span = z + 1.0
    t = -1.0 + span[:, None] * u[None, :]
    return span * (phi(t) @ w)


@dataclass(frozen=True)
class Mollifier:
    """G = 1_[beta, 1] convolved with phi_eps, eps = Y^{delta - 1}, in the scaled variable x = n / Y."""

    delta: float
    beta: float
    Y: float

    def __post_init__(self) -> None:
        if not 0.5 < self.delta < 1:
            raise ValueError("delta must lie in (1/2, 1)")
        if not 0.5 <= self.beta < 1:
            raise ValueError("beta must lie in [1/2, 1)")
        if self.Y <= 1:
            raise ValueError("Y must exceed 1")
        if self.beta + self.eps > 1 - self.eps:
            raise ValueError("collars overlap: Y too small for this delta, beta")

    @property
    def eps(self) -> float:
        return self.Y ** (self.delta - 1)

    @property
    def support(self) -> tuple[float, float]:
        return (self.beta - self.eps, 1 + self.eps)

    @property
    def plateau(self) -> tuple[float, float]:
        return (self.beta + self.eps, 1 - self.eps)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        b, e = self.beta, self.eps
        return (b - e, b + e, 1 - e, 1 + e)

    def __call__(self, x: np.ndarray | float) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        lo, hi = self.plateau
        out[(x >= lo) & (x <= hi)] = 1.0
        b, e = self.beta, self.eps
        left = (x > b - e) & (x < b + e)
        right = (x > 1 - e) & (x < 1 + e)
        out[left] = phi_cdf((x[left] - b) / e)
        out[right] = 1.0 - phi_cdf((x[right] - 1) / e)
        return out

    def derivative(self, x: np.ndarray, j: int) -> np.ndarray:
        if j == 0:
            return self(x)
        kern = {1: phi, 2: phi_d1, 3: phi_d2}[j]
        e = self.eps
        x = np.asarray(x, dtype=float)
        return (kern((x - self.beta) / e) - kern((x - 1) / e)) / e**j

    def mellin(self, u: complex | Sequence[complex], derivative: int = 0, panels: int = 2000) -> np.ndarray:
        return mellin_numeric(self, self.support, u, panels=panels, derivative=derivative, breakpoints=self.breakpoints)

    def l1_norm(self, j: int, panels: int = 400) -> float:
        total = 0.0
        pts = self.breakpoints
        for a, b in zip(pts[:-1], pts[1:]):
            x, w = gauss_legendre_nodes(a, b, panels)
            total += float(np.abs(self.derivative(x, j)) @ w)
        return total


def mollifier_build(delta: float, beta: float, Y: float) -> Mollifier:
    return Mollifier(delta, beta, Y)


def mollifier_first_moment_target(beta: float) -> float:
    """-1 - beta log beta + beta, the limit of int G(x) log x dx."""
    return -1 - beta * math.log(beta) + beta


def mellin_decay_ratio(G: Mollifier, sigma: float, t: float) -> float:
    """|G~(sigma + it)| (1 + |t|)^3 divided by its three-integrations-by-parts bound."""
    val = abs(G.mellin(sigma + 1j * t)[0])
    lo, hi = G.support
    # |G~(s)| <= int |G'''| x^{sigma+2} / |s(s+1)(s+2)|
    s = complex(sigma, t)
    bound_ibp = G.l1_norm(3) * max(lo ** (sigma + 2), hi ** (sigma + 2)) / abs(s * (s + 1) * (s + 2))
    bound_triv = G.l1_norm(0) * max(lo ** (sigma - 1), hi ** (sigma - 1))
    return val / min(bound_ibp, bound_triv)


# ---------------------------------------------------------------------------
# Smoothed divisor sum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothedResult:
    X: float
    observed: complex | float
    main_single: float
    main_squared: float
    G32: float

    @property
    def rel_err_single(self) -> float:
        return abs(self.observed - self.main_single) / abs(self.main_single) if self.main_single else abs(self.observed)

    @property
    def rel_err_squared(self) -> float:
        return abs(self.observed - self.main_squared) / abs(self.main_squared) if self.main_squared else abs(self.observed)


def divisor_sum_smoothed(S: SSet, chi: DirichletCharacter, G: Callable[[np.ndarray], np.ndarray] | Mollifier | None, X: float) -> SmoothedResult:
    """sum_n G(n / X) sigma(n) chi(n) / sqrt(n) with both candidate main terms.

    The single-power candidate is delta(chi) prod(1 - 1/q) G~(3/2) zeta^S(2) X^{3/2}
    and the squared one carries prod(1 - 1/q)^2.
    """
    _check_character(S, chi)
    if G is None:
        return SmoothedResult(X, 0.0, 0.0, 0.0, 0.0)
    if isinstance(G, Mollifier):
        lo, hi = G.support
        G32 = float(G.mellin(1.5)[0].real)
    else:
        lo, hi = 0.25, 1.25
        G32 = float(mellin_numeric(G, (lo, hi), 1.5)[0].real)
    if lo <= 0.25 or hi >= 1.25:
        raise ValueError("G must be supported inside (1/4, 5/4)")
    top = math.floor(hi * X)
    if top > X_CAP:
        raise ValueError(f"X = {X} exceeds cap {X_CAP}")
    first = max(1, math.ceil(lo * X))
    n = np.arange(first, top + 1)
    g = np.asarray(G(n / X), dtype=float)
    terms = g * sigma_table(top)[first:] * char_table(chi, top)[first:] / np.sqrt(n)
    dens = _density(S)
    base = chi.delta() * G32 * zeta_S(2, S).re * X**1.5
    return SmoothedResult(X, _fsum(terms), dens * base, dens**2 * base, G32)


# ---------------------------------------------------------------------------
# Hyperbola character sums
# ---------------------------------------------------------------------------


def _s_power(S: SSet, exps: Sequence[int]) -> Fraction:
    out = Fraction(1)
    for q, a in zip(S.primes, exps):
        out *= Fraction(q) ** a
    return out


def hyperbola_main(S: SSet, m: int, chi: DirichletCharacter, chi2: DirichletCharacter, X: float) -> float:
    if m % 2:
        return 0.0
    return _density(S) ** 2 * 2 * X / (m - 1) * chi.delta() * chi2.delta()


def _hyperbola_prefix(S: SSet, m: int, alpha: Sequence[int], beta: Sequence[int], chi, chi2, top: int):
    h = (m - 1) / 2
    ratio = _s_power(S, alpha) / _s_power(S, beta)  # q^{alpha - beta}
    num, den = ratio.numerator, ratio.denominator
    rho = float(ratio)
    ca = char_table(chi, top)
    cb = char_table(chi2, top)
    b = np.arange(top + 1, dtype=float)
    w1 = cb * np.where(b > 0, b, 0.0) ** h
    P1 = np.cumsum(w1)  # P1[B] = sum_{b <= B} chi'(b) b^h
    w2 = np.zeros_like(w1)
    w2[1:] = cb[1:] * b[1:] ** (-h)
    Q2 = np.concatenate((np.cumsum(w2[::-1])[::-1][1:], [0.0]))  # Q2[B] = sum_{B < b <= top}
    return h, num, den, rho, ca, P1, Q2


def hyperbola_char_sum_curve(
    S: SSet,
    m: int,
    alpha: Sequence[int],
    beta: Sequence[int],
    chi: DirichletCharacter,
    chi2: DirichletCharacter,
    grid: Sequence[float],
) -> list[SumResult]:
    """sum_{ab < X, a q^alpha != b q^beta} (ab)^{(1-m)/2} q^{(alpha+beta)(1-m)/2} min(a q^alpha, b q^beta)^{m-1} chi(a) chi'(b).

    With rho = q^{alpha - beta} the summand is a^{-h} b^h rho^{-h} when b < a rho and
    a^h b^{-h} rho^h when b > a rho, h = (m-1)/2, so each a needs two prefix sums over b.
    """
    if m < 3:
        raise ValueError("weight must be at least 3")
    if len(alpha) != S.r or len(beta) != S.r:
        raise ValueError("alpha and beta need one exponent per prime of S")
    _check_character(S, chi)
    _check_character(S, chi2)
    top = math.ceil(max(grid)) - 1
    if top + 1 > X_CAP:
        raise ValueError(f"X exceeds cap {X_CAP}")
    h, num, den, rho, ca, P1, Q2 = _hyperbola_prefix(S, m, alpha, beta, chi, chi2, max(top, 1))
    out = []
    for X in grid:
        xt = math.ceil(X) - 1  # ab <= xt
        if xt < 1:
            out.append(SumResult(X, 0.0, hyperbola_main(S, m, chi, chi2, X)))
            continue
        a = np.arange(1, xt + 1, dtype=np.int64)
        a = a[ca[a] != 0]
        bmax = xt // a
        c = (a * num) // den  # b <= c  <=>  b <= a rho
        exact = (a * num) % den == 0
        c1 = np.minimum(np.where(exact, c - 1, c), bmax)
        c2 = np.minimum(c, bmax)
        af = a.astype(float)
        low = af ** (-h) * rho ** (-h) * P1[c1]
        high = af**h * rho**h * (Q2[c2] - Q2[bmax])
        terms = ca[a] * (low + high)
        out.append(SumResult(float(X), _fsum(terms), hyperbola_main(S, m, chi, chi2, X)))
    return out


def hyperbola_char_sum(S, m, alpha, beta, chi, chi2, X) -> SumResult:
    return hyperbola_char_sum_curve(S, m, alpha, beta, chi, chi2, [X])[0]


def hyperbola_bruteforce(S, m, alpha, beta, chi, chi2, X) -> float:
    """Literal double loop, for small X."""
    qa, qb = float(_s_power(S, alpha)), float(_s_power(S, beta))
    terms = []
    for a in range(1, math.ceil(X)):
        for b in range(1, math.ceil(X / a) + 1):
            if a * b >= X:
                break
            A, B = a * qa, b * qb
            if _s_power(S, alpha) * a == _s_power(S, beta) * b:
                continue
            w = chi(a) * chi2(b)
            if w:
                terms.append((w * (a * b) ** ((1 - m) / 2) * (qa * qb) ** ((1 - m) / 2) * min(A, B) ** (m - 1)).real)
    return math.fsum(terms)


def hyperbola_signed_total(S, m, alpha, beta, chi, chi2, X) -> float:
    """Contribution of the hyperbolic elements g and -g together: (1 + (-1)^m) times the sum.

    For odd m the two cancel term by term and the total is exactly 0.
    """
    terms = []
    base = hyperbola_char_sum(S, m, alpha, beta, chi, chi2, X).observed
    for sign in (1, -1):
        terms.append(sign**m * base)
    return math.fsum(float(np.real(t)) for t in terms)


def hyperbola_error_fit(results: Sequence[SumResult], S, m, alpha, beta, chi, chi2) -> SlopeFit:
    """Envelope fit over every integer X up to the grid maximum would be costly; use a dense grid instead."""
    return fit_slope([r.X for r in results], [r.error for r in results])


def dense_geometric_grid(lo: float, hi: float, per_decade: int = 12) -> list[int]:
    k = int(round(math.log10(hi / lo) * per_decade))
    return sorted({int(round(lo * (hi / lo) ** (j / k))) for j in range(k + 1)})


# ---------------------------------------------------------------------------
# Trace-sum cancellation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceSumCurve:
    X: tuple[int, ...]
    partial: tuple[float, ...]
    fit: SlopeFit
    ratios: tuple[float, ...]


def trace_partial_sums(S: SSet, m: int, Xmax: int, N: int = 1) -> np.ndarray:
    """T[X] = sum_{n < X, gcd(n, S N) = 1} normalized Tr T(n), for 0 <= X <= Xmax."""
    if Xmax > TRACE_X_CAP:
        raise ValueError(f"X = {Xmax} exceeds cap {TRACE_X_CAP}")
    if m <= 2:
        raise ValueError("weight must exceed 2")
    if N == 1 and dimension_level_one(m) == 0:
        return np.zeros(Xmax + 1)
    if N == 1:
        tr = normalized_traces_fast(m, Xmax)
    else:
        tr = np.zeros(Xmax)
        for n in range(1, Xmax):
            if math.gcd(n, N) == 1:
                tr[n] = hecke_trace(TraceQuery(m, n, N)).normalized
    n = np.arange(Xmax)
    mask = np.ones(Xmax, dtype=bool)
    for q in S.primes:
        mask &= n % q != 0
    mask &= np.gcd(n, N) == 1
    tr = np.where(mask, tr, 0.0)
    tr[0] = 0.0
    return np.concatenate(([0.0], np.cumsum(tr)))


def trace_cancellation(S: SSet, m: int, X: int = 100_000, N: int = 1, grid: Sequence[int] | None = None) -> TraceSumCurve:
    grid = tuple(grid) if grid is not None else tuple(g for g in TRACE_GRID if g <= X)
    if len(grid) < 6:
        raise ValueError(f"slope fit needs at least 6 grid points, got {len(grid)}")
    top = max(grid)
    T = trace_partial_sums(S, m, top, N)
    env = np.maximum.accumulate(np.abs(T))
    fit = fit_slope(grid, [env[g] for g in grid])
    partial = tuple(float(T[g]) for g in grid)
    ratios = tuple(float(env[g]) / g for g in grid)
    return TraceSumCurve(grid, partial, fit, ratios)


def pairwise_sum(values: Sequence[float]) -> float:
    """Deterministic pairwise tree reduction."""
    vals = list(values)
    if not vals:
        return 0.0
    while len(vals) > 1:
        vals = [vals[i] + vals[i + 1] if i + 1 < len(vals) else vals[i] for i in range(0, len(vals), 2)]
    return vals[0]


def trivial_character(S: SSet) -> DirichletCharacter:
    return principal_prime_to(S)
