"""Dirichlet characters stored as value tables."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

from kloostrace.arith import SSet, divisors, kronecker_symbol


@dataclass(frozen=True)
class DirichletCharacter:
    """A Dirichlet character mod ``modulus`` given by its values on 0..modulus-1.

    Values are stored as complex numbers; real characters hold exact +-1/0.
    """

    modulus: int
    values: tuple[complex, ...]
    label: str = ""
    conductor: int = field(init=False)

    def __post_init__(self) -> None:
        if self.modulus < 1 or len(self.values) != self.modulus:
            raise ValueError("value table length must equal the modulus")
        object.__setattr__(self, "conductor", _conductor(self.modulus, self.values))

    def __call__(self, n: int) -> complex:
        return self.values[n % self.modulus]

    @property
    def is_real(self) -> bool:
        return all(v.imag == 0 for v in self.values)

    @property
    def is_principal(self) -> bool:
        return self.conductor == 1

    def delta(self) -> int:
        """1 for a principal character, 0 otherwise."""
        return 1 if self.is_principal else 0

    def parity(self) -> int:
        """chi(-1), which is +1 or -1."""
        return int(round(self(-1).real))

    def real_table(self) -> list[int]:
        if not self.is_real:
            raise ValueError("character is not real")
        return [int(v.real) for v in self.values]

    def __mul__(self, other: DirichletCharacter) -> DirichletCharacter:
        m = self.modulus * other.modulus // math.gcd(self.modulus, other.modulus)
        return DirichletCharacter(m, tuple(self(n) * other(n) for n in range(m)), f"{self.label}*{other.label}")


def _conductor(m: int, values: tuple[complex, ...]) -> int:
    units = [a for a in range(1, m + 1) if math.gcd(a, m) == 1]
    for d in divisors(m):
        if all(abs(values[a % m] - 1) < 1e-12 for a in units if a % d == 1 % d):
            return d
    return m


def from_function(modulus: int, fn: Callable[[int], complex], label: str = "") -> DirichletCharacter:
    return DirichletCharacter(modulus, tuple(complex(fn(n)) for n in range(modulus)), label)


def trivial(modulus: int = 1) -> DirichletCharacter:
    return from_function(modulus, lambda n: 1 if math.gcd(n, modulus) == 1 else 0, f"1_{modulus}")


def principal_prime_to(S: SSet) -> DirichletCharacter:
    """The principal character modulo prod q_i: it vanishes exactly on integers meeting S."""
    m = math.prod(S.primes)
    return from_function(m, lambda n: 1 if math.gcd(n, m) == 1 else 0, f"1_S{m}")


def kronecker_character(D: int) -> DirichletCharacter:
    """n -> (D/n) for a discriminant D = 0, 1 (mod 4); modulus |D|."""
    if D % 4 not in (0, 1) or D == 0:
        raise ValueError(f"{D} is not a nonzero discriminant")
    m = abs(D)
    return from_function(m, lambda n: kronecker_symbol(D, n), f"({D}/.)")


def primitive_mod(modulus: int, index: int) -> DirichletCharacter:
    """The character of a cyclic unit group (Z/p^k)^*, p odd, sending a generator to e(index/phi)."""
    from sympy import primitive_root, totient

    g = int(primitive_root(modulus))
    phi = int(totient(modulus))
    log = {}
    x = 1
    for j in range(phi):
        log[x] = j
        x = x * g % modulus
    vals = [0j] * modulus
    for a, j in log.items():
        vals[a] = cmath.exp(2j * math.pi * index * j / phi)
    return DirichletCharacter(modulus, tuple(vals), f"chi_{modulus}[{index}]")


def lift(chi: DirichletCharacter, S: SSet) -> DirichletCharacter:
    """chi times the principal character of S, so it vanishes on integers meeting S."""
    return chi * principal_prime_to(S)
