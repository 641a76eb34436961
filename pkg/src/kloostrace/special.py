"""Analytic kernels: Bessel K of complex order, F and its Mellin transform, V,
Hurwitz/Dirichlet L-values, Euler's constant and numerical Mellin transforms.

Quadratures here are deliberately simple (trapezoid on analytic integrands,
composite Gauss-Legendre on compact supports) so that the error estimate
attached to each value is easy to reason about.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from kloostrace.approx import ComplexApprox
from kloostrace.arith import SSet
from kloostrace.characters import DirichletCharacter


class PoleError(ValueError):
    """Raised when a function is evaluated at one of its poles."""


class NonConvergenceError(RuntimeError):
    """Raised when a quadrature error estimate exceeds its budget."""


# ---------------------------------------------------------------------------
# Bessel K_s(x) = int_0^oo exp(-x cosh t) cosh(s t) dt
# ---------------------------------------------------------------------------

BESSEL_TOL = 1e-10


def _bessel_t_max(x: float, re_max: float) -> float:
    # exp(-x cosh t + |Re s| t) < 1e-20 beyond this point
    t = 1.0
    while x * math.cosh(t) - re_max * t < 46.1:
        t += 0.05
    return t


def _bessel_trap(s: np.ndarray, x: float, h: float, t_max: float) -> np.ndarray:
    t = np.arange(0.0, t_max + h, h)
    w = np.full(t.shape, h)
    w[0] = h / 2
    base = np.exp(-x * np.cosh(t)) * w
    # chunk over s to bound memory
    out = np.empty(s.shape, dtype=complex)
    step = max(1, 2_000_000 // t.size)
    for i in range(0, s.size, step):
        out[i : i + step] = np.cosh(np.outer(s[i : i + step], t)) @ base
    return out


def bessel_K_many(s: Sequence[complex] | np.ndarray, x: float = 2.0, h: float = 0.01) -> tuple[np.ndarray, np.ndarray]:
    """K_s(x) for an array of orders; returns (values, error estimates)."""
    if x < 0.5:
        raise ValueError("bessel_K is only supported for x >= 0.5")
    s = np.asarray(s, dtype=complex).ravel()
    if s.size == 0:
        return s, np.zeros(0)
    t_max = _bessel_t_max(x, float(np.max(np.abs(s.real))))
    # the rule must also resolve cos(Im(s) t)
    h = min(h, 0.6 / (1.0 + float(np.max(np.abs(s.imag)))))
    fine = _bessel_trap(s, x, h, t_max)
    coarse = _bessel_trap(s, x, 2 * h, t_max)
    err = np.abs(fine - coarse) + 1e-20 * np.exp(float(np.max(np.abs(s.real))) * t_max) + 1e-16 * np.abs(fine)
    return fine, err


def bessel_K(s: complex, x: float = 2.0) -> ComplexApprox:
    vals, errs = bessel_K_many([s], x)
    if errs[0] > BESSEL_TOL:
        raise NonConvergenceError(f"K_{s}({x}) error estimate {errs[0]:.2e}")
    return ComplexApprox.of(vals[0], float(errs[0]))


@lru_cache(maxsize=None)
def K0_at_2() -> float:
    return bessel_K(0.0, 2.0).re


# ---------------------------------------------------------------------------
# F and its Mellin transform
# ---------------------------------------------------------------------------


def F_value(x: float) -> float:
    """F(x) = (1 / 2 K_0(2)) int_x^oo exp(-t - 1/t) dt / t."""
    if x <= 0:
        raise ValueError("F is evaluated for x > 0")
    g = lambda t: math.exp(-t - 1.0 / t) / t
    if x < 1:
        a, _ = integrate.quad(g, x, 1, epsabs=1e-15, epsrel=1e-13, limit=200)
        b, _ = integrate.quad(g, 1, np.inf, epsabs=1e-15, epsrel=1e-13, limit=200)
        val = a + b
    else:
        val, _ = integrate.quad(g, x, np.inf, epsabs=1e-16, epsrel=1e-13, limit=200)
    return val / (2 * K0_at_2())


def mellin_F_many(s: Sequence[complex] | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(s, dtype=complex).ravel()
    if np.any(s == 0):
        raise PoleError("Mellin transform of F has a pole at s = 0")
    k, err = bessel_K_many(s, 2.0)
    k0 = K0_at_2()
    return k / (s * k0), err / (np.abs(s) * k0)


def mellin_F(s: complex) -> ComplexApprox:
    """Ftilde(s) = K_s(2) / (s K_0(2))."""
    v, e = mellin_F_many([s])
    return ComplexApprox.of(v[0], float(e[0]))


@lru_cache(maxsize=1)
def _F_on_log_grid(lo: float = -4.0, hi: float = 6.0, panels: int = 80, order: int = 16):
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    us, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        us.append((b - a) / 2 * xg + (a + b) / 2)
        ws.append((b - a) / 2 * wg)
    u = np.concatenate(us)
    w = np.concatenate(ws)
    Fv = np.array([F_value(math.exp(t)) for t in u])
    return u, w, Fv


def mellin_F_numeric(s: complex) -> ComplexApprox:
    """int_0^oo F(x) x^{s-1} dx from quadrature values of F (Re s > 0).

    With x = e^u the integral runs over u in R; below u = -4 F equals 1 to
    within e^-50 so that piece is e^{-4 s} / s exactly, above u = 6 F is
    below e^-400.
    """
    if s.real <= 0:
        raise ValueError("numeric Mellin transform of F needs Re s > 0")
    u, w, Fv = _F_on_log_grid()
    body = complex(np.sum(w * Fv * np.exp(s * u)))
    tail = complex(np.exp(-4.0 * s) / s)
    return ComplexApprox.of(body + tail, 1e-10)


def residue_by_contour(fn: Callable[[np.ndarray], np.ndarray], center: complex, radius: float, nodes: int = 256) -> ComplexApprox:
    """(1 / 2 pi i) times the contour integral of fn around a circle, trapezoid rule."""
    theta = 2 * np.pi * np.arange(nodes) / nodes
    z = center + radius * np.exp(1j * theta)
    vals = fn(z)
    res = complex(np.mean(vals * (z - center)))
    half = complex(np.mean((vals * (z - center))[::2]))
    return ComplexApprox.of(res, abs(res - half) * 1e-3 + 1e-14)


# ---------------------------------------------------------------------------
# Gamma ratio and V
# ---------------------------------------------------------------------------


def gamma_ratio(iota: int, s: np.ndarray | complex) -> np.ndarray:
    """Gamma((iota + s) / 2) / Gamma((iota + 1 - s) / 2)."""
    s = np.asarray(s, dtype=complex)
    # rgamma is entire, so the zeros of 1/Gamma at s = iota + 1, iota + 3, ... come out exactly
    return np.exp(special.loggamma((iota + s) / 2)) * special.rgamma((iota + 1 - s) / 2)


@dataclass(frozen=True)
class VerticalLineSpec:
    sigma: float = 1.0
    T: float = 40.0
    h: float = 0.02

    def __post_init__(self) -> None:
        if self.T <= 0 or self.h <= 0:
            raise ValueError("T and h must be positive")
        if self.T / self.h > 1e6:
            raise ValueError("too many quadrature nodes")


def _euler_ratio(S: SSet, eps: Sequence[int], s: np.ndarray) -> np.ndarray:
    out = np.ones_like(s)
    for q, e in zip(S.primes, eps):
        if e:
            out = out * (1 - e * q ** (s - 1)) / (1 - e * q ** (-s))
    return out


def V_integrand(iota: int, eps: Sequence[int], S: SSet, x: float, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    Ft, Fe = mellin_F_many(s)
    rest = _euler_ratio(S, eps, s) * gamma_ratio(iota, s) * (math.pi * x) ** (-s)
    return Ft * rest, Fe * np.abs(rest)


def V_value(
    iota: int,
    eps: Sequence[int],
    x: float,
    S: SSet,
    contour: VerticalLineSpec = VerticalLineSpec(),
    budget: float = 1e-8,
) -> ComplexApprox:
    """V_{iota, eps}(x) = pi^{1/2} / (2 pi i) int_(sigma) Ftilde(s) E(s) G(s) (pi x)^{-s} ds."""
    if iota not in (0, 1):
        raise ValueError("iota must be 0 or 1")
    if len(eps) != S.r or any(e not in (-1, 0, 1) for e in eps):
        raise ValueError("eps must have one entry in {-1, 0, 1} per prime of S")
    if contour.sigma <= 0:
        raise ValueError("the contour must lie in Re s > 0")
    if x <= 0:
        raise ValueError("x must be positive")

    def rule(h: float) -> tuple[complex, float]:
        n = int(round(contour.T / h))
        t = np.arange(-n, n + 1) * h
        s = contour.sigma + 1j * t
        g, ge = V_integrand(iota, eps, S, x, s)
        w = np.full(t.shape, h)
        w[0] = w[-1] = h / 2
        val = complex(np.sum(w * g)) * math.sqrt(math.pi) / (2 * math.pi)
        qerr = float(np.sum(w * ge)) * math.sqrt(math.pi) / (2 * math.pi)
        tail = float(abs(g[0]) + abs(g[-1])) * math.sqrt(math.pi) / (2 * math.pi)
        return val, qerr + tail

    v1, e1 = rule(contour.h)
    v2, e2 = rule(contour.h / 2)
    err = abs(v2 - v1) + e2
    if err > budget:
        raise NonConvergenceError(f"V error estimate {err:.2e} exceeds budget {budget:.2e}")
    return ComplexApprox.of(v2, err)


# ---------------------------------------------------------------------------
# Zeta and Dirichlet L-functions by Euler-Maclaurin
# ---------------------------------------------------------------------------

EM_N = 50
EM_TERMS = 10


@lru_cache(maxsize=1)
def _bernoulli_even() -> tuple[Fraction, ...]:
    """B_2, B_4, ..., B_{2 EM_TERMS} from the Akiyama-Tanigawa recurrence."""
    m_max = 2 * EM_TERMS
    A = [Fraction(0)] * (m_max + 1)
    B = []
    for m in range(m_max + 1):
        A[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            A[j - 1] = j * (A[j - 1] - A[j])
        B.append(A[0])
    return tuple(B[2 * k] for k in range(1, EM_TERMS + 1))


def _em_coeffs() -> list[float]:
    return [float(b / math.factorial(2 * k)) for k, b in enumerate(_bernoulli_even(), start=1)]


def hurwitz_zeta(s: complex, a: float, derivative: bool = False) -> complex:
    """zeta(s, a) (or d/ds zeta(s, a)) for 0 < a <= 1, s != 1, by Euler-Maclaurin."""
    if s == 1:
        raise PoleError("Hurwitz zeta has a pole at s = 1")
    s = complex(s)
    n = np.arange(EM_N) + a
    logn = np.log(n)
    X = EM_N + a
    L = math.log(X)
    coeffs = _em_coeffs()
    if not derivative:
        total = complex(np.sum(np.exp(-s * logn)))
        total += X ** (1 - s) / (s - 1) + X ** (-s) / 2
        poch = s
        for k, c in enumerate(coeffs, start=1):
            total += c * poch * X ** (-s - 2 * k + 1)
            poch *= (s + 2 * k - 1) * (s + 2 * k)
        return total
    total = complex(np.sum(-logn * np.exp(-s * logn)))
    total += -L * X ** (1 - s) / (s - 1) - X ** (1 - s) / (s - 1) ** 2 - L * X ** (-s) / 2
    # d/ds [poch(s) X^{-s-2k+1}] with poch = s (s+1) ... (s+2k-2)
    for k, c in enumerate(coeffs, start=1):
        facs = [s + j for j in range(2 * k - 1)]
        poch = np.prod(facs)
        dpoch = sum(np.prod(facs[:i] + facs[i + 1 :]) for i in range(len(facs)))
        total += c * (dpoch - L * poch) * X ** (-s - 2 * k + 1)
    return total


def riemann_zeta(s: complex) -> ComplexApprox:
    return ComplexApprox.of(hurwitz_zeta(s, 1.0), _em_error(s))


def riemann_zeta_deriv(s: complex) -> ComplexApprox:
    return ComplexApprox.of(hurwitz_zeta(s, 1.0, derivative=True), 10 * _em_error(s))


def _em_error(s: complex) -> float:
    # first omitted Euler-Maclaurin term as the error scale, plus rounding
    k = EM_TERMS + 1
    poch = 1.0
    for j in range(2 * k - 1):
        poch *= abs(s + j)
    bern = 2 * math.factorial(2 * k) / (2 * math.pi) ** (2 * k)
    return bern / math.factorial(2 * k) * poch * EM_N ** (-(complex(s).real) - 2 * k + 1) + 1e-15 * EM_N


def dirichlet_L(s: complex, chi: DirichletCharacter) -> ComplexApprox:
    """L(s, chi) = M^{-s} sum_a chi(a) zeta(s, a / M)."""
    M = chi.modulus
    s = complex(s)
    if s == 1:
        if chi.is_principal:
            raise PoleError("L(s, chi) has a pole at s = 1 for principal chi")
        # sum_a chi(a) = 0, so the pole parts cancel: take a symmetric limit
        h = 1e-5
        vp = dirichlet_L(1 + h, chi).value
        vm = dirichlet_L(1 - h, chi).value
        return ComplexApprox.of((vp + vm) / 2, 1e-9)
    total = 0j
    for a in range(1, M + 1):
        c = chi(a)
        if c:
            total += c * hurwitz_zeta(s, a / M)
    return ComplexApprox.of(M ** (-s) * total, M * _em_error(s))


def partial_L(s: complex, chi: DirichletCharacter | None = None, S: SSet | None = None) -> ComplexApprox:
    """L^S(s, chi) = L(s, chi) prod_{q in S} (1 - chi(q) q^{-s}); chi = None is the trivial character."""
    base = riemann_zeta(s) if chi is None else dirichlet_L(s, chi)
    if S is None:
        return base
    fac = 1 + 0j
    for q in S.primes:
        cq = 1 if chi is None else chi(q)
        fac *= 1 - cq * q ** (-complex(s))
    return base * fac


def zeta_S(s: complex, S: SSet) -> ComplexApprox:
    return partial_L(s, None, S)


@lru_cache(maxsize=1)
def euler_gamma() -> float:
    """Euler's constant from H_N - log N - 1/2N + sum B_2k / (2k N^2k) with N = 20.

    A small N keeps H_N - log N free of cancellation; eight correction terms
    bring the truncation error below 1e-30.
    """
    N = 20
    H = math.fsum(1.0 / n for n in range(1, N + 1))
    tail = math.fsum(float(b) / (2 * k * N ** (2 * k)) for k, b in enumerate(_bernoulli_even()[:8], start=1))
    return H - math.log(N) - 1.0 / (2 * N) + tail


def digamma(x: float) -> float:
    return float(special.digamma(x))


# ---------------------------------------------------------------------------
# Mellin transforms of compactly supported functions
# ---------------------------------------------------------------------------


def gauss_legendre_nodes(lo: float, hi: float, panels: int, order: int = 20) -> tuple[np.ndarray, np.ndarray]:
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    x = ((b - a) / 2 * xg + (a + b) / 2).ravel()
    w = ((b - a) / 2 * wg).ravel()
    return x, w


def mellin_numeric(
    G: Callable[[np.ndarray], np.ndarray],
    support: tuple[float, float],
    u: complex | Sequence[complex],
    panels: int = 400,
    derivative: int = 0,
    breakpoints: Sequence[float] = (),
) -> np.ndarray:
    """int G(x) x^{u-1} (log x)^derivative dx over a compact support in (0, oo)."""
    lo, hi = support
    if not 0 < lo < hi:
        raise ValueError(f"support {support} must lie in (0, oo)")
    cuts = sorted({lo, hi, *[b for b in breakpoints if lo < b < hi]})
    xs, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        n = max(4, int(round(panels * (b - a) / (hi - lo))))
        x, w = gauss_legendre_nodes(a, b, n)
        xs.append(x)
        ws.append(w)
    x = np.concatenate(xs)
    w = np.concatenate(ws)
    g = w * np.asarray(G(x), dtype=float)
    if derivative:
        g = g * np.log(x) ** derivative
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    return np.exp(np.outer(u - 1, np.log(x))) @ g


# ---------------------------------------------------------------------------
# The (k square, f) double series summing to zeta^S(2s)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesTruncation:
    value: float
    tail_bound: float
    terms: int


def square_phi_series(S: SSet, s: float, cutoff: int = 10_000) -> SeriesTruncation:
    """sum over prime-to-S k = j^2 <= cutoff and f <= cutoff of phi(k) / (k^{1+s} f^{1+2s}).

    The sum factors as A(s) B(s) with A = sum phi(j^2) j^{-2-2s} and
    B = sum f^{-1-2s}.  Since phi(j^2) <= j^2 the two tails are at most
    J^{1-2s} / (2s-1) and F^{-2s} / (2s) for J = floor(sqrt(cutoff)), F = cutoff,
    and the full sum differs from the truncation by at most
    tA B + A_J tB with B <= zeta(1+2s) and A_J the truncated value.
    """
    if s <= 0.5:
        raise ValueError("the series converges only for s > 1/2")
    from kloostrace.arith import euler_phi

    J = math.isqrt(cutoff)
    js = [j for j in range(1, J + 1) if S.coprime(j)]
    fs = np.arange(1, cutoff + 1)
    fs = fs[np.all([fs % q != 0 for q in S.primes], axis=0)]
    A = math.fsum(euler_phi(j * j) / float(j) ** (2 + 2 * s) for j in js)
    B = math.fsum((fs.astype(float) ** (-1 - 2 * s)).tolist())
    tA = J ** (1 - 2 * s) / (2 * s - 1)
    tB = cutoff ** (-2 * s) / (2 * s)
    zeta_bound = 1 + 1 / (2 * s)
    bound = tA * zeta_bound + (A + tA) * tB
    return SeriesTruncation(A * B, bound, len(js) * len(fs))
