"""Class numbers, the Eichler-Selberg trace engine and its q-series oracles."""

from __future__ import annotations

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from kloostrace import hecke
from kloostrace.characters import kronecker_character
from kloostrace.hecke import TraceQuery, hecke_trace


def _brute_H(n: int) -> Fraction:
    # all forms (a, b, c) with b^2 - 4ac = -n, a > 0, counted up to SL2(Z) by explicit reduction
    if n == 0:
        return Fraction(-1, 12)
    if n % 4 not in (0, 3):
        return Fraction(0)
    tot = Fraction(0)
    for a in range(1, n + 1):
        for b in range(-a + 1, a + 1):
            if (b * b + n) % (4 * a):
                continue
            c = (b * b + n) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            w = Fraction(1, 3) if a == b == c else Fraction(1, 2) if a == c and b == 0 else Fraction(1)
            tot += w
    return tot


def test_hurwitz_examples():
    assert hecke.hurwitz_H(3) == Fraction(1, 3)
    assert hecke.hurwitz_H(4) == Fraction(1, 2)
    assert hecke.hurwitz_H(1) == 0
    assert hecke.hurwitz_H(0) == Fraction(-1, 12)


def test_hurwitz_against_direct_enumeration():
    for n in range(1, 200):
        assert hecke.hurwitz_H(n) == _brute_H(n), n


def test_hurwitz_table():
    tab = hecke.twelve_H_table(500)
    for n in range(0, 501):
        assert tab[n] == 12 * hecke.hurwitz_H(n)


def test_hurwitz_sum_identity():
    # sum_{t^2 <= 4n} H(4n - t^2) = 2 sigma(n) - sum_{d | n} min(d, n/d), with H(0) = -1/12
    for n in range(1, 80):
        lhs = sum(hecke.hurwitz_H(4 * n - t * t) for t in range(-math.isqrt(4 * n), math.isqrt(4 * n) + 1))
        divs = [d for d in range(1, n + 1) if n % d == 0]
        rhs = 2 * sum(divs) - sum(min(d, n // d) for d in divs)
        assert lhs == rhs, n


def test_weight_poly_examples():
    assert hecke.es_weight_poly(4, 0, 1) == -1
    assert hecke.es_weight_poly(2, 5, 7) == 1
    assert [hecke.es_weight_poly(m, 0, 1) for m in range(2, 10)] == [1, 0, -1, 0, 1, 0, -1, 0]


def test_weight_poly_complex_roots():
    for m in (3, 12, 17):
        for t, n in ((1, 1), (0, 5), (3, 7), (-2, 2)):
            rho = (t + cmath.sqrt(t * t - 4 * n)) / 2
            ref = (rho ** (m - 1) - rho.conjugate() ** (m - 1)) / (rho - rho.conjugate())
            assert abs(hecke.es_weight_poly(m, t, n) - ref.real) < 1e-6 * max(1, abs(ref))
            assert abs(hecke.es_weight_poly_complex(m, t, n) - ref) < 1e-6 * max(1, abs(ref))


def test_trace_examples():
    assert hecke_trace(TraceQuery(12, 1)).exact == 1
    assert all(hecke_trace(TraceQuery(10, n)).exact == 0 for n in range(1, 40))
    r = hecke_trace(TraceQuery(12, 2))
    assert r.exact == -24
    assert abs(r.normalized - (-24 / 2**5.5)) < 1e-15
    assert abs(r.normalized + 0.530330) < 1e-6


def test_query_validation():
    with pytest.raises(ValueError):
        TraceQuery(2, 1)
    with pytest.raises(ValueError):
        TraceQuery(4, 2, 2)
    with pytest.raises(ValueError):
        TraceQuery(4, 1, 5, kronecker_character(-3))


def test_parity_violation_is_zero():
    r = hecke_trace(TraceQuery(13, 5))
    assert r.exact == 0 and r.note
    r = hecke_trace(TraceQuery(4, 2, 7, kronecker_character(-7)))
    assert r.exact == 0 and r.note


def test_experimental_flag():
    assert not TraceQuery(12, 5).experimental
    assert not TraceQuery(4, 1, 6).experimental
    assert TraceQuery(4, 1, 8).experimental
    assert TraceQuery(3, 1, 7, kronecker_character(-7)).experimental


def test_dimension():
    expect = {12: 1, 14: 0, 16: 1, 24: 2, 26: 1, 36: 3, 11: 0}
    for m, d in expect.items():
        assert hecke.dimension_level_one(m) == d
        assert hecke_trace(TraceQuery(m, 1)).exact == d


def test_tau():
    tau = hecke.tau_oracle(400)
    assert tau[1:4] == [1, -24, 252]
    assert tau[6] == tau[2] * tau[3]
    for m in range(1, 20):
        for n in range(1, 20):
            if math.gcd(m, n) == 1 and m * n <= 400:
                assert tau[m * n] == tau[m] * tau[n]
    # Hecke relation at p = 2
    for k in range(2, 8):
        assert tau[2**k] == tau[2] * tau[2 ** (k - 1)] - 2**11 * tau[2 ** (k - 2)]
    for n in range(1, 401):
        assert hecke_trace(TraceQuery(12, n)).exact == tau[n]
    with pytest.raises(ValueError):
        hecke.tau_oracle(10**6)


def test_eisenstein_series_coefficients():
    e4 = hecke.eisenstein_series(4, 10)
    assert e4[:4] == [1, 240, 2160, 6720]


def test_two_dimensional_trace():
    # S_24 is two-dimensional with basis Delta E4^3, Delta^2; the trace of T(2) in that basis is basis free
    d = hecke.tau_oracle(10)
    e4 = hecke.eisenstein_series(4, 10)
    f1 = hecke.series_mul(d, hecke.series_mul(e4, hecke.series_mul(e4, e4, 10), 10), 10)
    f2 = hecke.series_mul(d, d, 10)
    # T(2) f has q^1 coefficient a(2) and q^2 coefficient a(4) + 2^23 a(1); a form in S_24 is fixed by its q, q^2 terms
    a = np.array([[f1[1], f2[1]], [f1[2], f2[2]]], dtype=float)
    img1 = [f1[2], f1[4] + 2**23 * f1[1]]
    img2 = [f2[2], f2[4] + 2**23 * f2[1]]
    M = np.linalg.solve(a, np.array([img1, img2]).T)
    assert abs(np.trace(M) - hecke_trace(TraceQuery(24, 2)).exact) < 1e-3


@pytest.mark.parametrize("mN", list(hecke.ETA_NEWFORMS))
def test_level_N_eta_newforms(mN):
    m, N = mN
    f = hecke.eta_product(hecke.ETA_NEWFORMS[mN], 60)
    chi = kronecker_character(-7) if N == 7 else None
    for n in range(1, 61):
        if math.gcd(n, N) == 1:
            assert hecke_trace(TraceQuery(m, n, N, chi)).exact == f[n]


def test_fast_path_matches_exact():
    fa = hecke.normalized_traces_fast(12, 300)
    for n in range(1, 300):
        assert abs(fa[n] - hecke_trace(TraceQuery(12, n)).normalized) < 1e-12


def test_theta_forms():
    for m in (3, 4, 12, 25):
        for x in np.linspace(-1, 1, 81):
            assert abs(hecke.theta_inf_plus(m, x) - hecke.theta_inf_plus_radical(m, x)) < 1e-12
    assert hecke.theta_inf_plus(7, 1.0) == 0 and hecke.theta_inf_plus(7, -1.0) == 0
    with pytest.raises(ValueError):
        hecke.theta_inf_plus(7, 1.5)


def test_eisenstein_integral():
    assert abs(hecke.eisenstein_integral(4) + 8 / (3 * math.pi)) < 1e-15
    assert abs(hecke.eisenstein_integral(4) + 0.848826) < 1e-6
    assert hecke.eisenstein_integral(5) == 0
    for m in range(3, 15):
        # independent route: substitute x = cos u, which removes the endpoint singularity
        val, _ = integrate.quad(lambda u: hecke.theta_inf_plus(m, math.cos(u)), 0, math.pi, epsabs=1e-13, limit=200)
        assert abs(2 * val - hecke.eisenstein_integral(m)) < 1e-10
        num, _ = hecke.eisenstein_integral_numeric(m)
        assert abs(num - hecke.eisenstein_integral(m)) < 1e-8
