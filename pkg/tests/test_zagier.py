"""Zagier L-functions at square discriminants, residues and the 2:1 parametrization."""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath as mp
import pytest

from kloostrace.arith import SSet
from kloostrace.special import PoleError, zeta_S
from kloostrace.zagier import (
    SquareDiscriminant,
    SquarePair,
    exponent_window,
    fiber_sizes,
    finite_part_richardson,
    gamma_S,
    random_square_instances,
    square_residue,
    square_residue_numeric,
    square_term_pairs,
    zagier_LS,
    zagier_residue_fp_s1,
)

S2 = SSet.of([2])
S23 = SSet.of([2, 3])
EULER = float(mp.euler)


def test_sigma_core():
    d = SquareDiscriminant.of(S2, Fraction(12, 1))
    assert d.sigma_q == 3 and d.D == 144
    with pytest.raises(ValueError):
        SquareDiscriminant.of(S2, 0)


@pytest.mark.parametrize("s", [2, 3, 0.5, -0.5, 1.5 + 2j, 0.3 - 4j, 2 + 1j, -1.5, 1.01, 5])
def test_trivial_sigma_is_zeta_S(s):
    assert zagier_LS(S2, s, 1).close_to(zeta_S(s, S2).value, 1e-9)


def test_sigma_three_example():
    expected = (1 - 1 / 4) * ((1 - 1 / 9) + 3**-3) * math.pi**2 / 6
    assert zagier_LS(S2, 2, SquareDiscriminant.of(S2, 3)).close_to(expected, 1e-11)


def test_dirichlet_series_oracle():
    # at s = 3 compare with the Dirichlet series of zeta^S(s) * sum_{f k | sigma} mu(k) f^{1-2s} k^{-s}
    # built by direct convolution with mpmath's zeta for the tail
    s, sq = 3, 15
    coeff = {}
    for f in (1, 3, 5, 15):
        for k in (1, 3, 5, 15):
            if (sq // f) % k == 0:
                mu = {1: 1, 3: -1, 5: -1, 15: 1}[k]
                n = f * f * k
                coeff[n] = coeff.get(n, 0) + mu * f
    poly = sum(c * n ** (-s) for n, c in coeff.items())
    ref = poly * float(mp.zeta(s)) * (1 - 2**-s)
    assert zagier_LS(S2, s, sq).close_to(ref, 1e-12)


def test_pole():
    with pytest.raises(PoleError):
        zagier_LS(S2, 1, 3)


def test_residue_independent_of_sigma():
    for S in (S2, S23):
        dens = S.density()
        for sq in range(1, 51):
            if S.coprime(sq):
                assert zagier_residue_fp_s1(S, sq).residue == dens
    assert zagier_residue_fp_s1(S2, 7).residue == Fraction(1, 2)


def test_finite_part_examples():
    r = zagier_residue_fp_s1(S2, 3)
    assert abs(r.finite_part - (0.5 * (EULER + math.log(2)) - 0.5 * math.log(3) / 3)) < 1e-12
    assert abs(zagier_residue_fp_s1(S2, 1).finite_part - 0.5 * gamma_S(S2)) < 1e-15


@pytest.mark.parametrize("S", [S2, S23], ids=["S2", "S23"])
def test_finite_part_richardson(S):
    for sq in range(1, 21):
        if S.coprime(sq):
            assert abs(zagier_residue_fp_s1(S, sq).finite_part - finite_part_richardson(S, sq)) < 1e-6


def test_finite_part_from_mpmath_limit():
    # independent limit: mpmath evaluates L(1+h) - res/h at tiny h in high precision
    sq = 3
    with mp.workdps(80):
        h = mp.mpf("1e-20")
        L = mp.zeta(1 + h) * (1 - mp.power(2, -(1 + h))) * ((1 - mp.power(3, -(1 + h))) + mp.power(3, -1 - 2 * h))
        fp = float(L - mp.mpf(1) / 2 / h)
    assert abs(zagier_residue_fp_s1(S2, sq).finite_part - fp) < 1e-12


def test_gamma_S():
    assert abs(gamma_S(S2) - (EULER + math.log(2))) < 1e-12
    assert abs(gamma_S(S2) - 1.27036) < 1e-5
    assert abs(gamma_S(S23) - (EULER + math.log(2) + math.log(3) / 2)) < 1e-12
    assert gamma_S(S23) > gamma_S(S2) > EULER


def test_square_residue_examples():
    assert abs(square_residue(S2, 1, 0.5) - 0.5 * gamma_S(S2)) < 1e-15
    ex = 0.5 * (math.log(3) + EULER + math.log(2) - math.log(3) / 3)
    assert abs(square_residue(S2, 3, 0.5) - ex) < 1e-12
    assert abs(square_residue_numeric(S2, 3, 0.5).value - ex) < 1e-6
    with pytest.raises(ValueError):
        square_residue(S2, 3, 1.0)
    with pytest.raises(ValueError):
        square_residue_numeric(S2, 3, 0.5, radius=0.6)


def test_square_residue_affine_in_theta():
    for sq in (1, 3, 5, 9, 15):
        a, b = square_residue(S2, sq, 0.2), square_residue(S2, sq, 0.7)
        assert abs((b - a) - 0.5 * 2 * 0.5 * math.log(sq)) < 1e-12


@pytest.mark.parametrize("S", [S2, S23], ids=["S2", "S23"])
def test_square_residue_contour(S):
    for sq in (1, 5, 7, 11, 13, 19):
        for th in (0.4, 0.6):
            assert abs(square_residue(S, sq, th) - square_residue_numeric(S, sq, th).value) < 1e-6


def test_two_to_one_example():
    pairs = square_term_pairs(S2, 1, 1, [0], width=1)
    found = {(p.a, p.b) for p in pairs}
    assert (Fraction(2), Fraction(1, 2)) in found and (Fraction(1, 2), Fraction(2)) in found
    assert (Fraction(1), Fraction(1)) not in found
    assert fiber_sizes(pairs)[Fraction(5, 2)] == 2


def test_window_closed_under_swap():
    for nu in ([-2], [3], [0]):
        (win,) = exponent_window(nu, 2)
        assert all(nu[0] - a in win for a in win)


@pytest.mark.parametrize("S", [S2, S23], ids=["S2", "S23"])
def test_two_to_one_random(S):
    for n, sign, nu in random_square_instances(S, 100, seed=1):
        pairs = square_term_pairs(S, n, sign, nu)
        target = Fraction(sign * n)
        for q, v in zip(S.primes, nu):
            target *= Fraction(q) ** v
        for p in pairs:
            assert p.a * p.b == target and p.a != p.b
            assert p.T**2 - 4 * target == (p.a - p.b) ** 2 != 0
        assert set(fiber_sizes(pairs).values()) == {2}


def test_pairs_validation():
    with pytest.raises(ValueError):
        square_term_pairs(S2, 4, 1, [0])
    with pytest.raises(ValueError):
        square_term_pairs(S2, 3, 0, [0])
    with pytest.raises(ValueError):
        square_term_pairs(S2, 3, 1, [0, 0])
