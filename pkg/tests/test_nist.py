import itertools
import math
import warnings
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from prmeasures.nist import (
    NIST_LC_PROBS,
    TEST_NAMES,
    InsufficientDataError,
    LinComplexityConfig,
    LongestRunConfig,
    SuiteConfig,
    berlekamp_massey,
    block_frequency,
    dft_test,
    erfc,
    igamc,
    linear_complexity_test,
    longest_run_length,
    longest_run_probs,
    longest_run_statistic,
    longest_run_test,
    monobit,
    run_suite,
)
from prmeasures.nist import _dft_moduli
from prmeasures.sequence import BinarySequence, gen_legendre, gen_periodic, gen_thue_morse


# -- special functions ----------------------------------------------------------------

def test_special_function_examples():
    assert erfc(0) == 1
    for a in (0.5, 3, 250):
        assert igamc(a, 0) == 1
    for x in (0.25, 1, 4):
        assert igamc(0.5, x) == pytest.approx(erfc(math.sqrt(x)), rel=1e-10)
    for a, x in ((0, 1), (-1, 1), (1, -0.5), (math.nan, 1)):
        with pytest.raises(ValueError):
            igamc(a, x)


def test_igamc_against_mpmath(rng):
    mpmath.mp.dps = 40
    a = np.concatenate([[0.5, 1, 3, 64, 500], rng.uniform(0.5, 500, 200)])
    x = np.concatenate([[0, 0.1, 3, 64, 1e4], rng.uniform(0, 1e4, 100), rng.uniform(0, 600, 100)])
    for ai, xi in zip(a, x):
        ref = float(mpmath.gammainc(ai, xi, mpmath.inf, regularized=True))
        got = igamc(ai, xi)
        if ref < 1e-300:
            assert got < 1e-290
        else:
            assert got == pytest.approx(ref, rel=1e-10)
    for xi in np.linspace(0, 25, 51):
        assert erfc(xi) == pytest.approx(float(mpmath.erfc(xi)), rel=1e-10)


# -- frequency tests -------------------------------------------------------------------

def test_monobit_examples():
    r = monobit(BinarySequence([1, -1] * 50))
    assert (r.statistic, r.p_value, r.passed) == (0, 1, True)
    r = monobit(BinarySequence([1] * 100))
    assert r.statistic == 10
    assert r.p_value == pytest.approx(1.5e-23, rel=0.05) and not r.passed
    with pytest.warns(UserWarning):
        r = monobit(BinarySequence([1, -1, 1, 1]))
    assert r.statistic == 1 and r.p_value == pytest.approx(0.3173, abs=1e-4)
    assert r.warnings


def test_block_frequency_examples():
    r = block_frequency(BinarySequence([1, -1] * 200), 20)
    assert (r.statistic, r.p_value) == (0, 1)
    r = block_frequency(BinarySequence([1] * 400), 20)
    assert r.statistic == 400 and r.details["t"] == 20
    r = block_frequency(BinarySequence([1] * 15 + [-1] * 5), 20)
    assert r.statistic == 5
    assert r.p_value == pytest.approx(igamc(0.5, 2.5))
    r = block_frequency(BinarySequence([1] * 45), 20)
    assert r.details["discarded"] == 5
    with pytest.raises(InsufficientDataError):
        block_frequency(BinarySequence([1] * 5), 20)


def test_block_frequency_recommendation_flag():
    E = BinarySequence(np.ones(2000, dtype=np.int8))
    assert block_frequency(E, 25).details["recommended"]
    assert not block_frequency(E, 10).details["recommended"]   # M < 20
    assert not block_frequency(E, 20).details["recommended"]   # 100M = N
    assert not block_frequency(BinarySequence(np.ones(10**4, dtype=np.int8)), 99).details["recommended"]   # t = 101


def test_block_size_one_is_monobit_chi2(rng):
    e = rng.choice([-1, 1], 500)
    r = block_frequency(BinarySequence(e), 1)
    assert r.statistic == 500  # every block is all-one or all-minus


# -- longest run -------------------------------------------------------------------------

def test_longest_run_length_examples():
    assert longest_run_length([-1, -1]) == 0
    assert longest_run_length([1, 1, -1, 1]) == 2


def test_longest_run_length_exhaustive():
    rows = oracles.all_sequences(12)
    assert [longest_run_length(r) for r in rows] == [oracles.longest_run(r) for r in rows]


def _partitions(M):
    # every partition of 0..M into consecutive intervals, via cut positions
    for mask in range(2**M):
        cuts = [i for i in range(M) if mask >> i & 1]
        lo, parts = 0, []
        for c in cuts:
            parts.append((lo, c))
            lo = c + 1
        parts.append((lo, M))
        yield parts


def test_longest_run_probs_examples():
    assert longest_run_probs(2, [(0, 1), (2, 2)]) == [Fraction(3, 4), Fraction(1, 4)]
    got = [float(p) for p in longest_run_probs(8, [(0, 1), (2, 2), (3, 3), (4, 8)])]
    assert got == pytest.approx([0.2148, 0.3672, 0.2305, 0.1875], abs=5e-5)
    for M in (1, 17, 128, 10**4):
        assert longest_run_probs(M, [(0, M)]) == [1]
    with pytest.raises(ValueError):
        longest_run_probs(4, [(0, 1), (1, 4)])
    with pytest.raises(ValueError):
        longest_run_probs(4, [(0, 1), (3, 4)])


@pytest.mark.parametrize("M", range(1, 17))
def test_longest_run_probs_exhaustive(M):
    counts = np.bincount([oracles.longest_run(r) for r in oracles.all_sequences(M)],
                         minlength=M + 1)
    parts_iter = _partitions(M) if M <= 10 else itertools.islice(_partitions(M), 0, 2**M, 97)
    for parts in parts_iter:
        expected = [Fraction(int(counts[lo:hi + 1].sum()), 2**M) for lo, hi in parts]
        assert longest_run_probs(M, parts) == expected


def test_nist_class_tables():
    c8 = LongestRunConfig.nist(8)
    assert c8.K == 3 and c8.classes == ((0, 1), (2, 2), (3, 3), (4, 8))
    c128 = LongestRunConfig.nist(128)
    assert c128.K == 5 and c128.classes[0] == (0, 4) and c128.classes[-1] == (9, 128)
    assert c128.probs == pytest.approx([0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124], abs=1e-4)
    c4 = LongestRunConfig.nist(10**4)
    assert c4.K == 6 and c4.classes[0] == (0, 10) and c4.classes[-1] == (16, 10**4)
    with pytest.raises(ValueError):
        LongestRunConfig.nist(64)
    assert LongestRunConfig.for_length(128).M == 8
    assert LongestRunConfig.for_length(6272).M == 128
    assert LongestRunConfig.for_length(750000).M == 10**4
    with pytest.raises(InsufficientDataError):
        LongestRunConfig.for_length(127)


def test_longest_run_all_minus():
    cfg = LongestRunConfig.nist(8)
    E = BinarySequence(-np.ones(800, dtype=np.int8))
    chi2, nu = longest_run_statistic(E, cfg)
    t = 100
    assert nu == [t, 0, 0, 0]
    assert chi2 == pytest.approx(t * (1 / cfg.probs[0] - 1))


def test_longest_run_counts_sum_to_t(rng):
    for M in (8, 128):
        cfg = LongestRunConfig.nist(M)
        N = int(rng.integers(M, 20 * M))
        _, nu = longest_run_statistic(BinarySequence(rng.choice([-1, 1], N)), cfg)
        assert sum(nu) == N // M


def test_longest_run_chi2_mean(rng):
    cfg = LongestRunConfig.nist(8)
    stats = [longest_run_statistic(BinarySequence(rng.choice([-1, 1], 800)), cfg)[0]
             for _ in range(500)]
    assert np.mean(stats) == pytest.approx(cfg.K, abs=0.4)


def test_longest_run_test_short():
    with pytest.raises(InsufficientDataError):
        longest_run_test(BinarySequence([1] * 100))


# -- linear complexity ---------------------------------------------------------------------

def test_bm_conventions():
    for N in (1, 5, 40):
        assert berlekamp_massey([0] * N) == (0, [])
        assert berlekamp_massey([0] * (N - 1) + [1])[0] == N
    assert berlekamp_massey([0, 1] * 4) == (2, [1, 0])
    with pytest.raises(ValueError):
        berlekamp_massey([0, 2])


def _regenerates(bits, L, c):
    b = np.asarray(bits)
    if L == 0:
        return not b.any()
    win = np.lib.stride_tricks.sliding_window_view(b[:-1], L) if L < b.size else np.empty((0, L))
    return np.array_equal(win @ np.asarray(c) % 2, b[L:])


@pytest.mark.parametrize("N", range(1, 13))
def test_bm_matches_exhaustive_lfsr(N):
    rows = (oracles.all_sequences(N) + 1) // 2
    for r in rows:
        bits = r.tolist()
        L, c = berlekamp_massey(bits)
        assert L == oracles.lfsr_length(bits)


def test_bm_regenerates_random_inputs(rng):
    for _ in range(10**4):
        N = int(rng.integers(1, 513))
        bits = rng.integers(0, 2, N).tolist()
        L, c = berlekamp_massey(bits)
        assert 0 <= L <= N and len(c) == L
        assert _regenerates(bits, L, c)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=200))
def test_bm_prefix_monotone(bits):
    Ls = [berlekamp_massey(bits[:n])[0] for n in range(1, len(bits) + 1)]
    assert Ls == sorted(Ls) and Ls[-1] <= len(bits)


def test_lc_mean(rng):
    cfg = LinComplexityConfig()
    assert cfg.mean() == Fraction(250) + Fraction(4, 18)
    L = [berlekamp_massey(rng.integers(0, 2, 500).tolist())[0] for _ in range(1000)]
    assert abs(np.mean(L) - 250.22) <= 0.5


def test_lc_constants_against_enumeration():
    cfg = LinComplexityConfig(M=12)
    v = [0] * 7
    for r in (oracles.all_sequences(12) + 1) // 2:
        L = berlekamp_massey(r.tolist())[0]
        v[cfg.classify(cfg.t_statistic(L))] += 1
    freq = np.array(v) / 2**12
    assert freq == pytest.approx(NIST_LC_PROBS, abs=0.01)


def test_lc_classes():
    cfg = LinComplexityConfig()
    assert cfg.classify(Fraction(-5, 2)) == 0
    assert cfg.classify(Fraction(-249, 100)) == 1
    assert cfg.classify(Fraction(5, 2)) == 5
    assert cfg.classify(Fraction(251, 100)) == 6
    odd = LinComplexityConfig(M=501)
    assert odd.mean() == Fraction(501, 2) + Fraction(5, 18)
    with pytest.raises(ValueError):
        LinComplexityConfig(edges=(0, 1, 2))
    with pytest.raises(ValueError):
        LinComplexityConfig(probs=(0.5,) * 7)


def test_lc_test_counts_and_threads(rng):
    from concurrent.futures import ThreadPoolExecutor
    E = BinarySequence(rng.choice([-1, 1], 5300))
    r = linear_complexity_test(E)
    assert sum(r.details["v"]) == r.details["t"] == 10
    assert r.details["discarded"] == 300
    with ThreadPoolExecutor(3) as ex:
        assert linear_complexity_test(E, executor=ex) == r
    with pytest.raises(InsufficientDataError):
        linear_complexity_test(BinarySequence([1] * 499))


# -- DFT -------------------------------------------------------------------------------------

@pytest.mark.parametrize("N", [1000, 1023, 2048])
def test_dft_matches_direct(N, rng):
    e = rng.choice([-1, 1], N)
    ref = np.abs(oracles.dft_direct(e))[1:N // 2]
    got = _dft_moduli(e)
    assert got.shape == ref.shape
    assert np.max(np.abs(got - ref)) < 1e-6 * np.max(ref)


def test_dft_examples():
    with pytest.raises(InsufficientDataError):
        dft_test(BinarySequence([1] * 999))
    r = dft_test(gen_periodic([1, -1, -1, 1], 25000))
    assert r.p_value < 0.01
    assert r.details["bins"] == 49999
    assert dft_test(gen_thue_morse(10**5)).p_value < 0.01


# -- suite -------------------------------------------------------------------------------------

def test_short_suite():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rs = run_suite(BinarySequence([1, -1] * 25))
    assert [r.name for r in rs] == list(TEST_NAMES)
    assert rs[0].status == "ok" and rs[0].warnings
    # M=128 block frequency needs N >= 128; the rest have their own minimums
    assert [r.status for r in rs[1:]] == ["skipped"] * 4
    assert all(math.isnan(r.p_value) for r in rs[1:])


def test_suite_legendre_passes():
    E = gen_legendre(100003, [1] + [0] * 30 + [1])
    rs = run_suite(E)
    assert all(r.status == "ok" and r.passed for r in rs), [(r.name, r.p_value) for r in rs]
    assert all(0 <= r.p_value <= 1 for r in rs)


def test_suite_thue_morse_fails_dft():
    rs = {r.name: r for r in run_suite(gen_thue_morse(10**5))}
    assert not rs["dft"].passed


def test_suite_config_round_trip():
    cfg = SuiteConfig.parse("""
        # comment
        alpha = 0.05
        block_frequency.M = 20
        longest_run.M = 8   # fixed
        linear_complexity.M = 1000
        tests = monobit, dft
    """)
    assert cfg == SuiteConfig(0.05, 20, 8, 1000, ("monobit", "dft"))
    assert SuiteConfig.parse(cfg.dump()) == cfg
    assert SuiteConfig.parse(SuiteConfig().dump()) == SuiteConfig()
    assert SuiteConfig.parse("longest_run.M = auto").longest_run_m is None
    for bad in ("alpha", "beta = 1", "alpha = 2", "tests = poker"):
        with pytest.raises(ValueError):
            SuiteConfig.parse(bad)
    rs = run_suite(gen_thue_morse(2000), cfg)
    assert [r.name for r in rs] == ["monobit", "dft"]
