"""Local and global Kloosterman sums: definitions, closed forms, CRT assembly, bounds."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from kloostrace.approx import e
from kloostrace.arith import SSet, euler_phi
from kloostrace.kloosterman import (
    KappaUnit,
    KloostermanCapError,
    LocalKlParams,
    c_bound_check,
    c_kf,
    closed_row,
    e_local,
    global_kl_bruteforce,
    global_klhat_bruteforce,
    global_klhat_closed,
    klhat_fft,
    local_c,
    local_kl_bruteforce,
    local_klhat_bruteforce,
    local_klhat_closed,
    sweep_closed_vs_fft,
)

S2 = SSet.of([2])
S23 = SSet.of([2, 3])


def test_params_validation():
    with pytest.raises(ValueError):
        LocalKlParams(2, 1, 0)
    with pytest.raises(ValueError):
        LocalKlParams(9, 1, 0)
    with pytest.raises(KloostermanCapError):
        LocalKlParams(3, 5, 2)
    assert LocalKlParams(5, 1, 2).M == 5**5


def test_kappa_tag():
    assert KappaUnit.of(5) is KappaUnit.ONE and KappaUnit.of(7) is KappaUnit.I


def test_e_local_orientation():
    # e_ell(x) = e(-<x>_ell): the minus sign makes e * prod e_ell trivial on Z[1/ell]
    for ell in (3, 5, 7):
        for num in range(-20, 21):
            x = Fraction(num, ell**2)
            assert abs(e_local(ell, x) * e(float(x)) - 1) < 1e-12


def test_local_kl_examples():
    for ell in (3, 5, 7):
        assert local_kl_bruteforce(LocalKlParams(ell, 0, 0), 4, 9).close_to(1, 1e-12)
    assert local_kl_bruteforce(LocalKlParams(3, 1, 0), 0, 0).close_to(2, 1e-12)
    assert local_kl_bruteforce(LocalKlParams(3, 0, 1), 0, 1).close_to(2, 1e-12)


def test_local_klhat_examples():
    assert local_klhat_bruteforce(LocalKlParams(5, 0, 0), 3, 2).close_to(1, 1e-12)
    assert local_klhat_bruteforce(LocalKlParams(3, 2, 0), 0, 0).close_to(54, 1e-9)
    assert local_klhat_bruteforce(LocalKlParams(3, 0, 1), 0, 1).close_to(3, 1e-9)
    assert local_klhat_closed(LocalKlParams(3, 2, 0), 9 * 4, 0).close_to(54, 1e-12)
    for xi in range(9):
        assert local_klhat_closed(LocalKlParams(3, 1, 0), xi, 0).close_to(0, 1e-12)
    assert local_klhat_closed(LocalKlParams(3, 0, 1), 0, 1).close_to(3, 1e-12)


@pytest.mark.parametrize("ell, N", [(3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1), (7, 2)])
def test_closed_equals_literal_bruteforce(ell, N):
    for v in range(N // 2 + 1):
        p = LocalKlParams(ell, N - 2 * v, v)
        for alpha in range(p.M):
            for xi in range(p.M):
                assert local_klhat_closed(p, xi, alpha).close_to(local_klhat_bruteforce(p, xi, alpha), 1e-9), (p, xi, alpha)


def test_closed_row_matches_scalar():
    p = LocalKlParams(5, 1, 1)
    for alpha in (0, 1, 5, 10, 25, 124):
        row = closed_row(p, alpha)
        for xi in range(0, p.M, 7):
            assert abs(row[xi] - local_klhat_closed(p, xi, alpha).value) < 1e-9


def test_fft_oracle_matches_literal():
    rng = random.Random(3)
    for _ in range(60):
        ell = rng.choice((3, 5))
        N = rng.randint(1, 3)
        v = rng.randint(0, N // 2)
        p = LocalKlParams(ell, N - 2 * v, v)
        xi, alpha = rng.randrange(p.M), rng.randrange(p.M)
        assert klhat_fft(p, xi, alpha).close_to(local_klhat_bruteforce(p, xi, alpha), 1e-9)


def test_congruence_invariance():
    rng = random.Random(5)
    for _ in range(200):
        ell = rng.choice((3, 5, 7))
        N = rng.randint(1, 3)
        v = rng.randint(0, N // 2)
        p = LocalKlParams(ell, N - 2 * v, v)
        xi, alpha = rng.randrange(-p.M, p.M), rng.randrange(-p.M, p.M)
        a = local_klhat_closed(p, xi, alpha)
        b = local_klhat_closed(p, xi + p.M, alpha + p.M)
        assert a.value == b.value
        if N <= 2:
            assert local_klhat_bruteforce(p, xi, alpha).close_to(local_klhat_bruteforce(p, xi + p.M, alpha + p.M), 1e-9)


def test_global_equals_local_for_prime_powers():
    # with k f^2 = ell^N and S = {2}, the global transformed sum is the local one at the same arguments
    for ell, u, v in ((3, 1, 0), (3, 0, 1), (5, 1, 1), (3, 2, 1)):
        p = LocalKlParams(ell, u, v)
        for xi in range(0, p.M, 2):
            for alpha in (1, 2, ell, p.M - 1):
                g = global_klhat_bruteforce(S2, ell**u, ell**v, xi, alpha)
                assert g.close_to(local_klhat_closed(p, xi, alpha), 1e-8)


def test_case_three_bracket_repair():
    # v(alpha) = u - 1 with u odd: the printed bracket misses a factor and disagrees with the sum
    p = LocalKlParams(3, 3, 0)
    printed = local_klhat_closed(p, 0, 9, printed_bracket=True)
    fixed = local_klhat_closed(p, 0, 9)
    brute = local_klhat_bruteforce(p, 0, 9)
    assert fixed.close_to(brute, 1e-9)
    assert not printed.close_to(brute, 1e-3)


def test_global_kl_examples():
    assert global_kl_bruteforce(S2, 1, 1, Fraction(1, 2), 3).close_to(1, 1e-12)
    assert global_kl_bruteforce(S2, 3, 1, 0, 1).close_to(-1, 1e-12)
    with pytest.raises(ValueError):
        global_kl_bruteforce(S2, 1, 2, 0, 1)
    with pytest.raises(KloostermanCapError):
        global_kl_bruteforce(S2, 4001, 1, 0, 1)


def test_global_klhat_alpha_zero():
    assert global_klhat_closed(S2, 9, 1, 9 * 5, 0).close_to(9 * euler_phi(9), 1e-12)
    assert global_klhat_closed(S2, 9, 1, 9 * 5, 0).close_to(global_klhat_bruteforce(S2, 9, 1, 45, 0), 1e-8)
    for xi in range(6):
        assert global_klhat_closed(S2, 3, 1, xi, 0).close_to(0, 1e-12)


def test_global_klhat_bruteforce_consistent_with_kl():
    # the transformed sum is the m-sum of the partial sums against e * e_q
    from kloostrace.arith import semilocal_char

    k, f = 3, 3
    M = k * f * f
    for xi, alpha in ((Fraction(1, 2), 5), (4, Fraction(7, 4)), (0, 1)):
        tot = sum(global_kl_bruteforce(S2, k, f, xi, m).value * semilocal_char(S2, Fraction(m) * alpha / M).value for m in range(M))
        assert abs(tot - global_klhat_bruteforce(S2, k, f, xi, alpha).value) < 1e-8


def _random_cases(S, count, seed, bound):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        k, f = rng.randint(1, bound), rng.randint(1, 9)
        if k * f * f > bound or not S.coprime(k * f):
            continue
        M = k * f * f
        xi = Fraction(rng.randint(-3 * M, 3 * M), rng.choice(S.primes) ** rng.randint(0, 2))
        alpha = Fraction(rng.randint(-3 * M, 3 * M) or 1, rng.choice(S.primes) ** rng.randint(0, 2))
        out.append((k, f, xi, alpha))
    return out


@pytest.mark.parametrize("S", [S2, S23], ids=["S2", "S23"])
def test_crt_assembly_matches_bruteforce(S):
    for k, f, xi, alpha in _random_cases(S, 60, 11, 700):
        a = global_klhat_closed(S, k, f, xi, alpha)
        b = global_klhat_bruteforce(S, k, f, xi, alpha)
        assert a.close_to(b, 1e-8), (k, f, xi, alpha)


def test_printed_single_phase_fails_somewhere():
    # the single phase e(-xi^2 / alpha k f^2) is only right after reducing modulo each ell^N
    fails = 0
    for k, f, xi, alpha in _random_cases(S2, 40, 2, 300):
        a = global_klhat_closed(S2, k, f, xi, alpha, printed_phase=True)
        fails += not a.close_to(global_klhat_bruteforce(S2, k, f, xi, alpha), 1e-8)
    assert fails > 0


def test_bound_examples():
    r = c_bound_check(S2, 1, 1, 1)
    assert r.holds and abs(r.c_abs - 1) < 1e-12 and r.bound == 1
    assert abs(c_kf(S2, 9, 1, 1).value) < 1e-12
    assert c_bound_check(S2, 9, 1, 1).holds
    r = c_bound_check(S2, 25, 1, 5)
    assert r.holds and r.bound == pytest.approx(25**1.5 * math.sqrt(5))
    with pytest.raises(ValueError):
        c_kf(S2, 9, 1, 0)


def test_bound_and_support_exhaustive_small():
    for k in range(1, 60, 2):
        for f in (1, 3, 5):
            if k * f * f > 500 or k % 2 == 0:
                continue
            for alpha in range(1, 2 * k * f * f, max(1, k * f * f // 15)):
                r = c_bound_check(S2, k, f, alpha)
                assert r.holds
                if not r.support_ok:
                    assert r.vanishes


def test_local_c_alpha_zero_branch():
    g = local_c(LocalKlParams(5, 2, 1), 0)
    assert abs(g.numeric() - 5**4 * euler_phi(25)) < 1e-9


def test_sweep_small_primes():
    for ell in (3, 5):
        res = sweep_closed_vs_fft(ell, 4)
        assert sum(r.failures for r in res) == 0
        assert max(r.max_abs_diff for r in res) < 1e-9
