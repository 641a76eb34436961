"""Exact integer and rational number theory over a finite set of primes S.

Rationals are ``fractions.Fraction`` throughout; ``RationalValue`` is an alias
so signatures read naturally.  Integer factorization and primality come from
sympy, everything specific to S-integers is implemented here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from sympy import factorint, isprime

from kloostrace.approx import ComplexApprox, e_ratio

RationalValue = Fraction
RationalLike = Union[int, Fraction]

# Budget per unit-modulus factor in semilocal_char.
CHAR_EPS = 1e-12


def as_rational(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


# ---------------------------------------------------------------------------
# S and S-integers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SSet:
    """The finite primes q_1 < ... < q_r of S (the infinite place is implicit)."""

    primes: tuple[int, ...]

    def __post_init__(self) -> None:
        ps = tuple(int(p) for p in self.primes)
        object.__setattr__(self, "primes", ps)
        if not ps:
            raise ValueError("S must contain at least one finite prime")
        if any(not isprime(p) for p in ps):
            raise ValueError(f"S contains a non-prime: {ps}")
        if any(a >= b for a, b in zip(ps, ps[1:])):
            raise ValueError(f"S primes must be strictly increasing: {ps}")
        if 2 not in ps:
            raise ValueError("S must contain 2")

    @classmethod
    def of(cls, primes: Iterable[int]) -> SSet:
        return cls(tuple(sorted(set(int(p) for p in primes))))

    @classmethod
    def parse(cls, text: str) -> SSet:
        return cls.of(int(t) for t in text.replace(" ", "").split(",") if t)

    @property
    def r(self) -> int:
        return len(self.primes)

    def __contains__(self, p: object) -> bool:
        return p in self.primes

    def __iter__(self):
        return iter(self.primes)

    def split(self, n: int) -> tuple[int, int]:
        """Return (S-part, prime-to-S part) of a nonzero integer n (signs go to the second)."""
        if n == 0:
            raise ValueError("cannot split 0")
        s_part = 1
        for q in self.primes:
            while n % q == 0:
                n //= q
                s_part *= q
        return s_part, n

    def coprime(self, n: int) -> bool:
        return all(n % q for q in self.primes)

    def density(self) -> Fraction:
        """prod (1 - 1/q_i)."""
        out = Fraction(1)
        for q in self.primes:
            out *= Fraction(q - 1, q)
        return out

    def __str__(self) -> str:
        return "{" + ",".join(str(p) for p in self.primes) + "}"


@dataclass(frozen=True)
class FactoredSInteger:
    """An element sign * core * prod q_i^nu_i of Z^S, with core prime to S."""

    S: SSet
    sign: int
    nu: tuple[int, ...]
    core: int

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or 1")
        if len(self.nu) != self.S.r:
            raise ValueError("exponent vector length must equal |S|")
        if self.core < 1:
            raise ValueError("core must be a positive integer")
        if self.sign == 0 and (self.core != 1 or any(self.nu)):
            raise ValueError("zero must be stored as sign=0, core=1, nu=0")
        if not self.S.coprime(self.core):
            raise ValueError(f"core {self.core} shares a prime with S")

    @classmethod
    def zero(cls, S: SSet) -> FactoredSInteger:
        return cls(S, 0, (0,) * S.r, 1)

    @classmethod
    def from_value(cls, S: SSet, x: RationalLike) -> FactoredSInteger:
        x = as_rational(x)
        if x == 0:
            return cls.zero(S)
        sign = 1 if x > 0 else -1
        num, den = abs(x.numerator), x.denominator
        nu = []
        for q in S.primes:
            k = 0
            while num % q == 0:
                num //= q
                k += 1
            while den % q == 0:
                den //= q
                k -= 1
            nu.append(k)
        if den != 1:
            raise ValueError(f"{x} is not an S-integer for S={S}")
        return cls(S, sign, tuple(nu), num)

    def value(self) -> Fraction:
        out = Fraction(self.sign * self.core)
        for q, k in zip(self.S.primes, self.nu):
            out *= Fraction(q) ** k
        return out

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def s_unit_part(self) -> Fraction:
        """prod q_i^nu_i, the part written a_(q) in the text."""
        out = Fraction(1)
        for q, k in zip(self.S.primes, self.nu):
            out *= Fraction(q) ** k
        return out

    def q_norm(self, q: int) -> Fraction:
        """|x|_q for q in S."""
        if self.is_zero:
            return Fraction(0)
        i = self.S.primes.index(q)
        return Fraction(q) ** (-self.nu[i])

    def residue(self, modulus: int) -> int:
        """Image in Z/modulus for a modulus prime to S (S-denominators are inverted)."""
        return reduce_mod(self.value(), modulus)


def reduce_mod(x: RationalLike, modulus: int) -> int:
    """Image of a rational in Z/modulus; the denominator must be a unit mod modulus."""
    x = as_rational(x)
    if modulus == 1:
        return 0
    return x.numerator * pow(x.denominator, -1, modulus) % modulus


# ---------------------------------------------------------------------------
# Symbols and multiplicative functions
# ---------------------------------------------------------------------------


def jacobi_symbol(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n > 0."""
    if n <= 0 or n % 2 == 0:
        raise ValueError(f"Jacobi symbol needs odd positive n, got {n}")
    a %= n
    t = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a/n), full classical extension to n <= 0 and even n."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    t = 1
    if n < 0:
        n = -n
        if a < 0:
            t = -t
    k = (n & -n).bit_length() - 1
    n >>= k
    if k:
        if a % 2 == 0:
            return 0
        if k % 2 and a % 8 in (3, 5):
            t = -t
    if n == 1:
        return t
    return t * jacobi_symbol(a, n)


def factorize(n: int) -> dict[int, int]:
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    return {int(p): int(k) for p, k in factorint(n).items()}


def divisors(n: int) -> list[int]:
    ds = [1]
    for p, k in factorize(n).items():
        ds = [d * p**j for d in ds for j in range(k + 1)]
    return sorted(ds)


@dataclass(frozen=True)
class MultiplicativeSuite:
    n: int
    mobius: int
    euler_phi: int
    divisor_count: int
    divisor_sum: int
    radical: int
    von_mangoldt_base: int | None

    @property
    def von_mangoldt(self) -> float:
        return math.log(self.von_mangoldt_base) if self.von_mangoldt_base else 0.0


def multiplicative_suite(n: int) -> MultiplicativeSuite:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    fac = factorize(n)
    mu = 0 if any(k > 1 for k in fac.values()) else (-1) ** len(fac)
    phi = d = sigma = rad = 1
    for p, k in fac.items():
        phi *= p ** (k - 1) * (p - 1)
        d *= k + 1
        sigma *= (p ** (k + 1) - 1) // (p - 1)
        rad *= p
    base = next(iter(fac)) if len(fac) == 1 else None
    return MultiplicativeSuite(n, mu, phi, d, sigma, rad, base)


def mobius(n: int) -> int:
    return multiplicative_suite(n).mobius


def euler_phi(n: int) -> int:
    return multiplicative_suite(n).euler_phi


def von_mangoldt(n: int) -> float:
    return multiplicative_suite(n).von_mangoldt


# ---------------------------------------------------------------------------
# Local invariants
# ---------------------------------------------------------------------------


def valuation(ell: int, x: RationalLike) -> int:
    x = as_rational(x)
    if x == 0:
        raise ValueError("valuation of 0 is +infinity")
    v = 0
    num, den = x.numerator, x.denominator
    while num % ell == 0:
        num //= ell
        v += 1
    while den % ell == 0:
        den //= ell
        v -= 1
    return v


def int_valuation(ell: int, n: int, cap: int = 10**9) -> int:
    """Valuation of an integer, returning ``cap`` for n = 0."""
    if n == 0:
        return cap
    v = 0
    while n % ell == 0:
        n //= ell
        v += 1
    return v


def unit_part(ell: int, x: RationalLike) -> Fraction:
    x = as_rational(x)
    return x / Fraction(ell) ** valuation(ell, x)


def l_adic_norm(ell: int, x: RationalLike) -> Fraction:
    x = as_rational(x)
    if x == 0:
        return Fraction(0)
    return Fraction(ell) ** (-valuation(ell, x))


def modified_norm(ell: int, y: RationalLike) -> Fraction:
    """The modified norm |y|'_ell: the ell-adic norm rounded into the square class."""
    y = as_rational(y)
    if y == 0:
        raise ValueError("modified norm of 0 is undefined")
    v = valuation(ell, y)
    if ell != 2:
        return Fraction(ell) ** (-2 * (v // 2))
    if v % 2:
        return Fraction(2) ** (3 - v)
    y0 = reduce_mod(unit_part(2, y), 4)
    return Fraction(2) ** (-v) if y0 == 1 else Fraction(2) ** (2 - v)


def omega_sign(place: int | str, x: RationalLike) -> int:
    """omega_inf(x) in {0, 1} for place 'inf'; omega_ell(y) = (y |y|'_ell / ell) otherwise."""
    x = as_rational(x)
    if x == 0:
        raise ValueError("omega is undefined at 0")
    if place in ("inf", "oo", math.inf):
        return 0 if x > 0 else 1
    ell = int(place)
    z = x * modified_norm(ell, x)
    if valuation(ell, z) != 0:
        return 0
    # symbol of an ell-adic unit only depends on its class mod ell (mod 8 for 2)
    m = 8 if ell == 2 else ell
    return kronecker_symbol(reduce_mod(z, m), ell)


def local_fractional_part(ell: int, x: RationalLike) -> Fraction:
    """<x>_ell in [0, 1): the ell-power denominator part of x."""
    x = as_rational(x)
    den = x.denominator
    k = int_valuation(ell, den)
    if k == 0:
        return Fraction(0)
    pk = ell**k
    rest = den // pk
    return Fraction(x.numerator * pow(rest, -1, pk) % pk, pk)


def semilocal_char(S: SSet, x: RationalLike) -> ComplexApprox:
    """e(x) * prod_{q in S} e_q(x), with e_q(x) = e(-<x>_q)."""
    x = as_rational(x)
    z = e_ratio(x.numerator, x.denominator)
    for q in S.primes:
        f = local_fractional_part(q, x)
        z *= e_ratio(-f.numerator, f.denominator)
    return ComplexApprox.of(z, CHAR_EPS * (S.r + 1))


def prime_to_s_fraction(S: SSet, x: RationalLike) -> Fraction:
    """The part of x mod 1 whose denominator is prime to S."""
    x = as_rational(x)
    s_part, rest = S.split(x.denominator)
    if rest == 1:
        return Fraction(0)
    return Fraction(x.numerator * pow(s_part, -1, rest) % rest, rest)


def height(a: float | RationalLike, xi: FactoredSInteger) -> float | Fraction:
    """[[a * xi]] = (1 + |a xi|) prod_i (1 + |xi|_{q_i}); exact when a is rational."""
    exact = isinstance(a, (int, Fraction))
    aa = as_rational(a) if exact else float(a)
    out = 1 + abs(aa * (xi.value() if exact else float(xi.value())))
    for q in xi.S.primes:
        out *= 1 + (xi.q_norm(q) if exact else float(xi.q_norm(q)))
    return out


def count_prime_to_s(S: SSet, X: int) -> int:
    """#{1 <= n < X : gcd(n, S) = 1} by inclusion-exclusion over subsets of S."""
    total = 0
    ps = S.primes
    for mask in range(1 << len(ps)):
        d = 1
        bits = 0
        for i, p in enumerate(ps):
            if mask >> i & 1:
                d *= p
                bits += 1
        total += (-1) ** bits * ((X - 1) // d)
    return total


def crt_unit_inverse(modulus: int, ell: int) -> tuple[int, int, int]:
    """Split modulus = ell^k * rest and return (ell^k, rest, rest^{-1} mod ell^k)."""
    k = int_valuation(ell, modulus)
    pk = ell**k
    rest = modulus // pk
    return pk, rest, pow(rest, -1, pk) if pk > 1 else 0
