"""Zagier L-functions at square discriminants and the square-term residue.

For a square discriminant sigma^2 with sigma in Z^S and prime-to-S part
sigma_q = sigma^(q),

    L^S(s, sigma^2) = prod_i (1 - q_i^{-s}) P(s) zeta(s),
    P(s) = sum_{f | sigma_q} f^{1-2s} sum_{k | sigma_q / f} mu(k) k^{-s}.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from kloostrace.approx import ComplexApprox
from kloostrace.arith import FactoredSInteger, SSet, divisors, mobius, von_mangoldt
from kloostrace.special import PoleError, euler_gamma, mellin_F_many, residue_by_contour, riemann_zeta


@dataclass(frozen=True)
class SquareDiscriminant:
    sigma: FactoredSInteger

    def __post_init__(self) -> None:
        if self.sigma.is_zero:
            raise ValueError("sigma must be nonzero")

    @classmethod
    def of(cls, S: SSet, sigma: int | Fraction) -> SquareDiscriminant:
        return cls(FactoredSInteger.from_value(S, sigma))

    @property
    def S(self) -> SSet:
        return self.sigma.S

    @property
    def sigma_q(self) -> int:
        return self.sigma.core

    @property
    def D(self) -> Fraction:
        return self.sigma.value() ** 2


def _dirichlet_poly(sigma_q: int) -> list[tuple[int, int]]:
    """Terms (coefficient, base) such that P(s) = sum coeff * f^{1-2s} k^{-s} ... flattened as (f, k, mu)."""
    out = []
    for f in divisors(sigma_q):
        for k in divisors(sigma_q // f):
            mu = mobius(k)
            if mu:
                out.append((f, k, mu))
    return out


def dirichlet_poly(sigma_q: int, s: complex) -> complex:
    return sum(mu * f ** (1 - 2 * complex(s)) * k ** (-complex(s)) for f, k, mu in _dirichlet_poly(sigma_q))


def dirichlet_poly_at_1(sigma_q: int) -> Fraction:
    return sum((Fraction(mu, f * k) for f, k, mu in _dirichlet_poly(sigma_q)), Fraction(0))


def _euler_factor(S: SSet, s: complex) -> complex:
    out = 1 + 0j
    for q in S.primes:
        out *= 1 - q ** (-complex(s))
    return out


def zagier_LS(S: SSet, s: complex, d: SquareDiscriminant | int) -> ComplexApprox:
    sigma_q = d.sigma_q if isinstance(d, SquareDiscriminant) else int(d)
    if complex(s) == 1:
        raise PoleError("L^S(s, sigma^2) has a pole at s = 1")
    z = riemann_zeta(s)
    return z * (_euler_factor(S, s) * dirichlet_poly(sigma_q, s))


def gamma_S(S: SSet) -> float:
    """gamma + sum_i q_i^{-1} log q_i / (1 - q_i^{-1})."""
    return euler_gamma() + math.fsum(math.log(q) / (q - 1) for q in S.primes)


def lambda_sum(sigma_q: int) -> float:
    """sum_{d | sigma_q} Lambda(d) / d."""
    return math.fsum(von_mangoldt(d) / d for d in divisors(sigma_q) if d > 1)


@dataclass(frozen=True)
class ResidueFinitePart:
    residue: Fraction
    finite_part: float


def zagier_residue_fp_s1(S: SSet, d: SquareDiscriminant | int) -> ResidueFinitePart:
    sigma_q = d.sigma_q if isinstance(d, SquareDiscriminant) else int(d)
    res = S.density() * dirichlet_poly_at_1(sigma_q)
    dens = float(S.density())
    fp = dens * gamma_S(S) - dens * lambda_sum(sigma_q)
    return ResidueFinitePart(res, fp)


def finite_part_richardson(S: SSet, d: SquareDiscriminant | int, h1: float = 1e-2, h2: float = 1e-3) -> float:
    """fp_{s=1} L^S from symmetric values G(h) = (L(1+h) + L(1-h)) / 2 = fp + O(h^2), extrapolated in h^2."""

    def G(h: float) -> float:
        return 0.5 * (zagier_LS(S, 1 + h, d).re + zagier_LS(S, 1 - h, d).re)

    g1, g2 = G(h1), G(h2)
    return (h1**2 * g2 - h2**2 * g1) / (h1**2 - h2**2)


def square_residue(S: SSet, d: SquareDiscriminant | int, theta: float) -> float:
    """res_{s=0} Ftilde(s) L^S(1+s, sigma^2) |sigma_q|^{2 theta s} in closed form."""
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    sigma_q = d.sigma_q if isinstance(d, SquareDiscriminant) else int(d)
    dens = float(S.density())
    return dens * (2 * theta * math.log(sigma_q) + gamma_S(S) - lambda_sum(sigma_q))


def square_residue_numeric(
    S: SSet, d: SquareDiscriminant | int, theta: float, radius: float = 0.1, nodes: int = 256
) -> ComplexApprox:
    if not 0 < radius < 0.5:
        raise ValueError("contour radius must lie in (0, 0.5)")
    sigma_q = d.sigma_q if isinstance(d, SquareDiscriminant) else int(d)

    def integrand(z: np.ndarray) -> np.ndarray:
        Ft, _ = mellin_F_many(z)
        L = np.array([zagier_LS(S, 1 + zz, sigma_q).value for zz in z])
        return Ft * L * np.exp(2 * theta * z * math.log(sigma_q))

    return residue_by_contour(integrand, 0.0, radius, nodes)


# ---------------------------------------------------------------------------
# The 2:1 parametrization of square discriminants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SquarePair:
    a: Fraction
    b: Fraction

    @property
    def T(self) -> Fraction:
        return self.a + self.b


def exponent_window(nu: Sequence[int], width: int) -> list[range]:
    """Per prime the box [min(0, nu) - w, max(0, nu) + w], closed under alpha -> nu - alpha."""
    return [range(min(0, v) - width, max(0, v) + width + 1) for v in nu]


def square_term_pairs(S: SSet, n: int, sign: int, nu: Sequence[int], width: int = 2) -> list[SquarePair]:
    """All (a, b) in a window of Z^S x Z^S with a b = sign n q^nu and a != b."""
    if n < 1 or not S.coprime(n):
        raise ValueError("n must be a positive integer prime to S")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if len(nu) != S.r:
        raise ValueError("nu needs one exponent per prime of S")
    target = Fraction(sign * n)
    for q, v in zip(S.primes, nu):
        target *= Fraction(q) ** v
    out = []
    for dd in divisors(n):
        for alpha in itertools.product(*exponent_window(nu, width)):
            unit = Fraction(1)
            for q, al in zip(S.primes, alpha):
                unit *= Fraction(q) ** al
            for eps in (1, -1):
                a = eps * dd * unit
                b = target / a
                if a != b:
                    out.append(SquarePair(a, b))
    return out


def fiber_sizes(pairs: Sequence[SquarePair]) -> dict[Fraction, int]:
    sizes: dict[Fraction, int] = {}
    for p in pairs:
        sizes[p.T] = sizes.get(p.T, 0) + 1
    return sizes


def random_square_instances(S: SSet, count: int, seed: int = 0, n_max: int = 200, nu_max: int = 3):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(1, n_max)
        if not S.coprime(n):
            continue
        sign = rng.choice((1, -1))
        nu = tuple(rng.randint(-nu_max, nu_max) for _ in S.primes)
        out.append((n, sign, nu))
    return out
