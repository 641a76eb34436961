"""Asymptotic harness: divisor sums, mollifier, hyperbola sums, trace cancellation, slope fitting."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from kloostrace import harness
from kloostrace.arith import SSet
from kloostrace.characters import kronecker_character, lift

S2 = SSet.of([2])
S23 = SSet.of([2, 3])
TRIV2 = harness.trivial_character(S2)
CHI8 = kronecker_character(8)


def _sigma(n: int) -> int:
    return sum(d for d in range(1, n + 1) if n % d == 0)


def test_slope_fit_invariants():
    X = [10, 100, 1000, 1e4, 1e5]
    with pytest.raises(ValueError):
        harness.fit_slope(X, [1, 2, 3, 4, 5])
    with pytest.raises(ValueError):
        harness.fit_slope([1, 2, 3, 4, 5, 6], [1] * 6)
    X = [10**k for k in range(1, 7)]
    fit = harness.fit_slope(X, [x**0.5 for x in X])
    assert abs(fit.slope - 0.5) < 1e-12 and fit.residual_rms < 1e-12
    # the envelope, not the pointwise values, carries the slope
    osc = [x * (1 if i % 2 else 0.01) for i, x in enumerate(X)]
    assert harness.fit_slope(X, osc).observed == tuple(np.maximum.accumulate(np.abs(osc)))
    assert harness.fit_slope(X, [0] * 6).identically_zero


def test_sigma_table():
    tab = harness.sigma_table(300)
    assert all(tab[n] == _sigma(n) for n in range(1, 301))


def test_divisor_sum_small_cases():
    assert harness.divisor_sum_sharp(S2, TRIV2, 1).observed == 0
    assert harness.divisor_sum_sharp(S2, TRIV2, 0.5).observed == 0
    direct = math.fsum(_sigma(n) / math.sqrt(n) for n in range(1, 500) if n % 2)
    assert abs(harness.divisor_sum_sharp(S2, TRIV2, 500).observed - direct) < 1e-9
    direct8 = math.fsum(_sigma(n) * CHI8(n).real / math.sqrt(n) for n in range(1, 500))
    assert abs(harness.divisor_sum_sharp(S2, CHI8, 500).observed - direct8) < 1e-9


def test_divisor_main_coefficient():
    assert abs(harness.divisor_main_coefficient(S2, TRIV2) - math.pi**2 / 24) < 1e-12
    assert harness.divisor_main_coefficient(S2, CHI8) == 0


def test_character_must_vanish_on_S():
    with pytest.raises(ValueError):
        harness.divisor_sum_sharp(S2, kronecker_character(5), 100)
    with pytest.raises(ValueError):
        harness.divisor_sum_sharp(S2, TRIV2, 2e7)


def test_divisor_error_slope():
    grid = [10_000, 30_000, 100_000, 300_000, 1_000_000, 20_000, 200_000]
    grid.sort()
    for chi in (TRIV2, CHI8):
        _, fit = harness.divisor_error_curve(S2, chi, grid)
        assert fit.slope <= 0.6


def test_nontrivial_char_constant_stable():
    consts = []
    for X in (1e4, 1e5, 1e6):
        r = harness.divisor_sum_sharp(S2, CHI8, X)
        consts.append(abs(r.observed) / (math.sqrt(X) * math.log(X)))
    assert max(consts) < 5 and max(consts) / max(min(consts), 1e-3) < 50


def test_permutation_invariance():
    rng = np.random.default_rng(0)
    n = np.arange(1, 200_001)
    terms = harness.sigma_table(200_000)[1:] * harness.char_table(CHI8, 200_000)[1:] / np.sqrt(n)
    base = harness._fsum(terms)
    for _ in range(3):
        other = harness._fsum(rng.permutation(terms))
        assert abs(other - base) <= 1e-9 * max(1.0, abs(base))
    assert abs(harness.pairwise_sum(list(terms)) - base) <= 1e-9 * max(1.0, abs(base))


def test_mollifier_shape():
    G = harness.mollifier_build(0.8, 0.5, 1e5)
    x = np.linspace(0, 1.5, 30001)
    g = G(x)
    assert g.max() <= 1 + 1e-12 and g.min() >= 0
    lo, hi = G.plateau
    assert np.all(g[(x >= lo) & (x <= hi)] == 1)
    slo, shi = G.support
    assert np.all(g[(x <= slo) | (x >= shi)] == 0)
    assert G(0.75)[0] == 1
    with pytest.raises(ValueError):
        harness.mollifier_build(0.4, 0.5, 1e5)
    with pytest.raises(ValueError):
        harness.mollifier_build(0.8, 0.2, 1e5)
    with pytest.raises(ValueError):
        harness.mollifier_build(0.8, 0.5, 1)


def test_mollifier_mellin_values():
    for Y in (1e4, 1e6):
        G = harness.mollifier_build(0.8, 0.5, Y)
        assert abs(G.mellin(1.0)[0] - 0.5) < 1e-8
        d = G.mellin(1.0, derivative=1)[0]
        assert abs(d - harness.mollifier_first_moment_target(0.5)) <= 10 * Y ** (0.8 - 1)


def test_mollifier_derivative_norms():
    # G' = phi_eps(x - beta) - phi_eps(x - 1) with disjoint supports, so ||G'||_1 = 2, and
    # phi is unimodal so ||phi'||_1 = 2 phi(0), giving ||G''||_1 = 4 phi(0) / eps
    for Y in (1e4, 1e6):
        G = harness.mollifier_build(0.8, 0.5, Y)
        assert abs(G.l1_norm(1) - 2) < 1e-8
        assert abs(G.l1_norm(2) * G.eps - 4 * float(harness.phi(0.0))) < 1e-6


def test_bump_normalization():
    x = np.linspace(-1, 1, 200001)
    assert abs(integrate.trapezoid(harness.phi(x), x) - 1) < 1e-8
    assert harness.phi(1.0) == 0 and harness.phi(-2.0) == 0
    assert abs(harness.phi_cdf(0.0) - 0.5) < 1e-12


def test_smoothed_zero_and_support():
    r = harness.divisor_sum_smoothed(S2, TRIV2, None, 1e4)
    assert r.observed == 0
    with pytest.raises(ValueError):
        harness.divisor_sum_smoothed(S2, TRIV2, lambda x: np.where((x > 0.1) & (x < 1), 1.0, 0.0), 1e4)


def test_smoothed_single_power():
    G = harness.mollifier_build(0.8, 0.5, 1e5)
    r = harness.divisor_sum_smoothed(S2, TRIV2, G, 1e5)
    assert r.rel_err_single <= 0.02
    assert r.rel_err_squared > 0.5
    r6 = harness.divisor_sum_smoothed(S2, TRIV2, harness.mollifier_build(0.8, 0.5, 1e6), 1e6)
    assert r6.rel_err_single < r.rel_err_single


def test_hyperbola_main_example():
    assert abs(harness.hyperbola_main(S2, 4, TRIV2, TRIV2, 1e4) - 1e4 * 2 / 3 / 4) < 1e-9
    assert harness.hyperbola_main(S2, 5, TRIV2, TRIV2, 1e4) == 0
    assert harness.hyperbola_main(S2, 4, CHI8, TRIV2, 1e4) == 0


@pytest.mark.parametrize("m, alpha, beta", [(4, [0], [0]), (4, [1], [0]), (6, [0], [2]), (5, [1], [1])])
def test_hyperbola_vs_bruteforce(m, alpha, beta):
    for chi, chi2 in ((TRIV2, TRIV2), (CHI8, TRIV2)):
        for X in (50, 333, 800):
            fast = harness.hyperbola_char_sum(S2, m, alpha, beta, chi, chi2, X).observed
            slow = harness.hyperbola_bruteforce(S2, m, alpha, beta, chi, chi2, X)
            assert abs(fast - slow) < 1e-9 * max(1, abs(slow))


def test_hyperbola_two_primes():
    t3 = harness.trivial_character(S23)
    for X in (100, 700):
        fast = harness.hyperbola_char_sum(S23, 4, [1, 0], [0, 1], t3, t3, X).observed
        slow = harness.hyperbola_bruteforce(S23, 4, [1, 0], [0, 1], t3, t3, X)
        assert abs(fast - slow) < 1e-9 * max(1, abs(slow))


def test_hyperbola_odd_weight_cancels():
    assert harness.hyperbola_signed_total(S2, 5, [0], [0], TRIV2, TRIV2, 1e4) == 0
    assert harness.hyperbola_signed_total(S2, 4, [0], [0], TRIV2, TRIV2, 1e4) != 0


def test_hyperbola_error_slope():
    grid = [10_000, 30_000, 100_000, 300_000, 1_000_000, 20_000]
    grid.sort()
    for chi in (TRIV2, CHI8):
        res = harness.hyperbola_char_sum_curve(S2, 4, [0], [0], chi, TRIV2, grid)
        assert harness.hyperbola_error_fit(res, S2, 4, [0], [0], chi, TRIV2).slope <= 0.6


def test_trace_zero_weight():
    T = harness.trace_partial_sums(S2, 10, 10_000)
    assert np.all(T == 0)


def test_trace_partial_sums_direct():
    from kloostrace.hecke import TraceQuery, hecke_trace

    T = harness.trace_partial_sums(S2, 12, 300)
    direct = math.fsum(hecke_trace(TraceQuery(12, n)).normalized for n in range(1, 300) if n % 2)
    assert abs(T[300] - direct) < 1e-10


def test_trace_cancellation_slopes():
    for m, S in ((12, S2), (12, S23), (16, S2)):
        c = harness.trace_cancellation(S, m, 100_000)
        assert c.fit.slope <= 0.97
        assert c.ratios[-1] < c.ratios[0]


def test_trace_grid_too_small():
    with pytest.raises(ValueError):
        harness.trace_cancellation(S2, 12, 100_000, grid=[1000, 2000, 5000, 100_000])


def test_caps():
    with pytest.raises(ValueError):
        harness.trace_partial_sums(S2, 12, 2_000_000)


def test_dense_grid():
    g = harness.dense_geometric_grid(100, 1e5, 6)
    assert g[0] == 100 and g[-1] == 100_000 and len(g) == 19
