"""Dirichlet characters: tables, conductors, lifts."""

from __future__ import annotations

import math

import pytest

from kloostrace.arith import SSet, kronecker_symbol
from kloostrace.characters import (
    DirichletCharacter,
    kronecker_character,
    lift,
    primitive_mod,
    principal_prime_to,
    trivial,
)


def test_trivial_and_principal():
    assert trivial(1)(17) == 1 and trivial(1).is_principal
    chi = principal_prime_to(SSet.of([2, 3]))
    assert [chi(n) for n in range(1, 8)] == [1, 0, 0, 0, 1, 0, 1]


@pytest.mark.parametrize("D", [-3, -4, -7, -8, 5, 8, 12, -20])
def test_kronecker_character(D):
    chi = kronecker_character(D)
    assert chi.is_real
    for n in range(1, 200):
        assert chi(n) == kronecker_symbol(D, n)
    assert chi.parity() == (-1 if D < 0 else 1)


def test_conductors():
    assert kronecker_character(-4).conductor == 4
    assert kronecker_character(12).conductor == 12
    # on a cyclic group of order phi, index j has order phi / gcd(j, phi); primitive exactly
    # when it is nontrivial on the kernel of reduction, which for these moduli means gcd(j, p) = 1
    assert primitive_mod(5, 0).conductor == 1
    for m, p in ((5, 5), (7, 7), (9, 3), (25, 5)):
        phi = m - m // p
        for j in range(1, phi):
            chi = primitive_mod(m, j)
            if m == p or j % p:
                assert chi.conductor == m
            else:
                assert chi.conductor == m // p


def test_character_is_multiplicative():
    for chi in (primitive_mod(7, 0), kronecker_character(-7), primitive_mod(9, 1)):
        m = chi.modulus
        for a in range(m):
            for b in range(m):
                assert abs(chi(a * b) - chi(a) * chi(b)) < 1e-12
        assert all(chi(a) == 0 for a in range(m) if math.gcd(a, m) > 1)


def test_lift_kills_S_primes():
    chi = lift(kronecker_character(-3), SSet.of([2]))
    assert chi(2) == 0 and chi(4) == 0 and chi(7) == kronecker_symbol(-3, 7)


def test_bad_table_rejected():
    with pytest.raises(ValueError):
        DirichletCharacter(3, (0j, 1 + 0j))
