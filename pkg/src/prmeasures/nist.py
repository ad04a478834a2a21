"""The five SP 800-22 style tests: monobit, block frequency, longest run,
linear complexity and the spectral (DFT) test.

P-values follow the reference procedures: ``erfc`` for the monobit and DFT
tests, ``igamc(dof/2, chi2/2)`` for the chi-square style tests.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .sequence import BinarySequence

__all__ = [
    "TestResult",
    "InsufficientDataError",
    "LongestRunConfig",
    "LinComplexityConfig",
    "SuiteConfig",
    "TEST_NAMES",
    "erfc",
    "igamc",
    "monobit",
    "block_frequency",
    "longest_run_length",
    "longest_run_probs",
    "longest_run_statistic",
    "longest_run_test",
    "berlekamp_massey",
    "linear_complexity_test",
    "dft_test",
    "run_suite",
]

ALPHA = 0.01
TEST_NAMES = ("monobit", "block_frequency", "longest_run", "linear_complexity", "dft")


class InsufficientDataError(ValueError):
    """The sequence is too short for the requested test."""


@dataclass(frozen=True)
class TestResult:
    name: str
    statistic: float
    p_value: float
    passed: bool
    details: dict = field(default_factory=dict)
    status: str = "ok"
    warnings: tuple[str, ...] = ()

    __test__ = False  # not a pytest class

    @classmethod
    def skipped(cls, name: str, reason: str) -> "TestResult":
        return cls(name, math.nan, math.nan, False, {"reason": reason}, "skipped")

    def as_record(self) -> dict:
        return {
            "test": self.name,
            "status": self.status,
            "statistic": None if math.isnan(self.statistic) else self.statistic,
            "p_value": None if math.isnan(self.p_value) else self.p_value,
            "pass": self.passed,
            "details": self.details,
            "warnings": list(self.warnings),
        }


def _result(name, statistic, p_value, alpha, details, warns=()) -> TestResult:
    p_value = min(max(float(p_value), 0.0), 1.0)
    return TestResult(name, float(statistic), p_value, p_value >= alpha, details, "ok", tuple(warns))


# -- special functions -----------------------------------------------------------

def erfc(x: float) -> float:
    return math.erfc(x)


def igamc(a: float, x: float) -> float:
    """Regularised upper incomplete gamma ``Q(a, x)``."""
    if not a > 0 or not x >= 0 or math.isinf(a):
        raise ValueError(f"igamc domain error: a={a}, x={x}")
    return float(special.gammaincc(a, x))


def _values(E) -> np.ndarray:
    if isinstance(E, BinarySequence):
        return E.values
    return BinarySequence(E).values


# -- frequency tests ---------------------------------------------------------------

def monobit(E, alpha: float = ALPHA) -> TestResult:
    e = _values(E)
    N = e.size
    warns = []
    if N < 100:
        msg = f"monobit on N={N} < 100 symbols"
        warnings.warn(msg, stacklevel=2)
        warns.append(msg)
    s = abs(int(e.sum(dtype=np.int64))) / math.sqrt(N)
    return _result("monobit", s, erfc(s / math.sqrt(2)), alpha, {"N": N}, warns)


def block_frequency(E, M: int, alpha: float = ALPHA) -> TestResult:
    """Chi-square on the proportion of +1 in each of ``t = N // M`` blocks."""
    e = _values(E)
    N = e.size
    if M < 1:
        raise ValueError("block length must be positive")
    t = N // M
    if t < 1:
        raise InsufficientDataError(f"block frequency needs N >= M={M}, got {N}")
    ones = (e[: t * M].reshape(t, M) > 0).sum(axis=1)
    # 4M * sum (pi - 1/2)^2 with pi = ones/M, kept exact in integers
    chi2 = float(sum((2 * int(c) - M) ** 2 for c in ones)) / M
    details = {
        "M": M,
        "t": t,
        "discarded": N - t * M,
        "recommended": M >= 20 and M * 100 > N and t < 100,
    }
    return _result("block_frequency", chi2, igamc(t / 2, chi2 / 2), alpha, details)


# -- longest run of ones -------------------------------------------------------------

def longest_run_length(block) -> int:
    """Length of the longest run of +1 in a block."""
    v = np.asarray(block) > 0
    if not v.any():
        return 0
    # run boundaries via padded diffs
    d = np.diff(np.concatenate(([0], v.astype(np.int8), [0])))
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    return int((ends - starts).max())


def _longest_runs(blocks: np.ndarray) -> np.ndarray:
    """Row-wise longest +1 run for a (t, M) matrix."""
    t, M = blocks.shape
    cur = np.zeros(t, dtype=np.int64)
    best = np.zeros(t, dtype=np.int64)
    for j in range(M):
        cur = np.where(blocks[:, j] > 0, cur + 1, 0)
        np.maximum(best, cur, out=best)
    return best


@lru_cache(maxsize=None)
def _at_most(M: int, r: int) -> int:
    """Number of length-M strings whose longest +1 run is <= r."""
    if r < 0:
        return 0
    if M <= r:
        return 2**M
    A = [2**m for m in range(r + 1)]
    window = sum(A)  # A[m-1] + ... + A[m-1-r] for m = r+1
    for m in range(r + 1, M + 1):
        A.append(window)
        window += A[m] - A[m - 1 - r]
    return A[M]


def _validate_partition(M: int, partition) -> tuple[tuple[int, int], ...]:
    parts = tuple((int(lo), int(hi)) for lo, hi in partition)
    covered = []
    for lo, hi in parts:
        if lo > hi:
            raise ValueError(f"empty class [{lo}, {hi}]")
        covered.extend(range(lo, hi + 1))
    if sorted(covered) != list(range(M + 1)):
        raise ValueError(f"classes must partition {{0..{M}}} disjointly")
    return parts


def longest_run_probs(M: int, partition) -> list[Fraction]:
    """Exact class probabilities of the longest +1 run in a random M-block.

    ``partition`` is a sequence of inclusive ``(lo, hi)`` intervals.
    """
    parts = _validate_partition(M, partition)
    total = 2**M
    return [Fraction(_at_most(M, hi) - _at_most(M, lo - 1), total) for lo, hi in parts]


@dataclass(frozen=True)
class LongestRunConfig:
    M: int
    classes: tuple[tuple[int, int], ...]
    probs: tuple[float, ...] = ()

    def __post_init__(self):
        _validate_partition(self.M, self.classes)
        if not self.probs:
            probs = tuple(float(p) for p in longest_run_probs(self.M, self.classes))
            object.__setattr__(self, "probs", probs)
        if len(self.probs) != len(self.classes) or abs(sum(self.probs) - 1) > 1e-6:
            raise ValueError("class probabilities must match classes and sum to 1")

    @property
    def K(self) -> int:
        return len(self.classes) - 1

    @classmethod
    def nist(cls, M: int) -> "LongestRunConfig":
        table = {8: (1, 4), 128: (4, 9), 10**4: (10, 16)}
        if M not in table:
            raise ValueError(f"no reference class table for M={M}")
        lo, hi = table[M]
        classes = ((0, lo),) + tuple((i, i) for i in range(lo + 1, hi)) + ((hi, M),)
        return cls(M, classes)

    @classmethod
    def for_length(cls, N: int) -> "LongestRunConfig":
        if N < 128:
            raise InsufficientDataError(f"longest run test needs N >= 128, got {N}")
        if N < 6272:
            return cls.nist(8)
        if N < 750000:
            return cls.nist(128)
        return cls.nist(10**4)


def longest_run_statistic(E, config: LongestRunConfig) -> tuple[float, list[int]]:
    """``X_2`` and the class counts over the ``N // M`` complete blocks."""
    e = _values(E)
    N = e.size
    M = config.M
    t = N // M
    if t < 1:
        raise InsufficientDataError(f"longest run test needs N >= M={M}, got {N}")
    runs = _longest_runs(e[: t * M].reshape(t, M))
    nu = [int(((runs >= lo) & (runs <= hi)).sum()) for lo, hi in config.classes]
    chi2 = sum((n - t * p) ** 2 / (t * p) for n, p in zip(nu, config.probs))
    return chi2, nu


def longest_run_test(E, config: Optional[LongestRunConfig] = None, alpha: float = ALPHA) -> TestResult:
    e = _values(E)
    N = e.size
    if config is None:
        config = LongestRunConfig.for_length(N)
    M = config.M
    chi2, nu = longest_run_statistic(e, config)
    t = N // M
    details = {"M": M, "K": config.K, "t": t, "nu": nu, "discarded": N - t * M}
    return _result("longest_run", chi2, igamc(config.K / 2, chi2 / 2), alpha, details)


# -- linear complexity ----------------------------------------------------------------

def berlekamp_massey(bits: Sequence[int]) -> tuple[int, list[int]]:
    """Shortest LFSR of a GF(2) sequence.

    Returns ``(L, c)`` with ``bits[n+L] = sum(c[i] * bits[n+i]) mod 2`` for all
    valid n. Polynomials are Python ints (bit j = coefficient of x^j); the
    discrepancy is the parity of the connection polynomial AND-ed with the
    reversed history.
    """
    conn, prev = 1, 1
    L, shift = 0, 1
    hist = 0
    for n, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError("bits must be 0 or 1")
        hist = (hist << 1) | int(b)
        if (conn & hist).bit_count() & 1:
            if 2 * L <= n:
                conn, prev = conn ^ (prev << shift), conn
                L = n + 1 - L
                shift = 1
            else:
                conn ^= prev << shift
                shift += 1
        else:
            shift += 1
    # conn = 1 + c'_1 x + ... + c'_L x^L  <=>  c[i] = c'_{L-i}
    coeffs = [(conn >> (L - i)) & 1 for i in range(L)]
    return L, coeffs


def _linear_complexity(bits: np.ndarray) -> int:
    conn, prev = 1, 1
    L, shift = 0, 1
    hist = 0
    for n, b in enumerate(bits.tolist()):
        hist = (hist << 1) | b
        if (conn & hist).bit_count() & 1:
            if 2 * L <= n:
                conn, prev = conn ^ (prev << shift), conn
                L = n + 1 - L
                shift = 1
            else:
                conn ^= prev << shift
                shift += 1
        else:
            shift += 1
    return L


NIST_LC_PROBS = (0.010417, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833)


@dataclass(frozen=True)
class LinComplexityConfig:
    """Block length and the seven classes I_0..I_6 of the T statistic.

    ``edges`` are the right-closed class boundaries: I_0 = (-inf, e_0],
    I_j = (e_{j-1}, e_j], I_6 = (e_5, inf).
    """

    M: int = 500
    edges: tuple[float, ...] = (-2.5, -1.5, -0.5, 0.5, 1.5, 2.5)
    probs: tuple[float, ...] = NIST_LC_PROBS

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("block length must be positive")
        if len(self.edges) != 6 or list(self.edges) != sorted(self.edges):
            raise ValueError("need six increasing class edges")
        if len(self.probs) != 7 or abs(sum(self.probs) - 1) > 1e-6:
            raise ValueError("need seven class probabilities summing to 1")

    def mean(self) -> Fraction:
        return Fraction(self.M, 2) + Fraction(4 + self.M % 2, 18)

    def t_statistic(self, L: int) -> Fraction:
        sign = -1 if self.M % 2 else 1
        return sign * (L - self.mean()) + Fraction(2, 9)

    def classify(self, T: Fraction) -> int:
        for j, edge in enumerate(self.edges):
            if T <= Fraction(edge).limit_denominator(10**6):
                return j
        return 6


def linear_complexity_test(E, config: LinComplexityConfig = LinComplexityConfig(),
                           alpha: float = ALPHA, executor=None) -> TestResult:
    e = _values(E)
    N = e.size
    M = config.M
    t = N // M
    if t < 1:
        raise InsufficientDataError(f"linear complexity test needs N >= M={M}, got {N}")
    blocks = (e[: t * M].reshape(t, M) > 0).astype(np.int64)
    if executor is None:
        L = [_linear_complexity(row) for row in blocks]
    else:
        L = list(executor.map(_linear_complexity, blocks))
    v = [0] * 7
    for Li in L:
        v[config.classify(config.t_statistic(Li))] += 1
    chi2 = sum((vj - t * pj) ** 2 / (t * pj) for vj, pj in zip(v, config.probs))
    details = {"M": M, "t": t, "v": v, "discarded": N - t * M,
               "mean_L": sum(L) / t}
    return _result("linear_complexity", chi2, igamc(3, chi2 / 2), alpha, details)


# -- spectral test --------------------------------------------------------------------

def _dft_moduli(e: np.ndarray) -> np.ndarray:
    """|S_k| for k = 1..floor(N/2)-1 (the DC term is excluded)."""
    N = e.size
    S = np.fft.fft(e.astype(np.float64))
    return np.abs(S[1:N // 2])


def dft_test(E, alpha: float = ALPHA) -> TestResult:
    """Count DFT moduli under the 95% peak threshold ``sqrt(N ln 20)``."""
    e = _values(E)
    N = e.size
    if N < 1000:
        raise InsufficientDataError(f"DFT test needs N >= 1000, got {N}")
    mod = _dft_moduli(e)
    threshold = math.sqrt(N * math.log(1 / 0.05))
    n0 = 0.95 * N / 2
    n1 = int((mod < threshold).sum())
    d = (n1 - n0) / math.sqrt(N * 0.95 * 0.05 / 4)
    details = {"N0": n0, "N1": n1, "bins": int(mod.size), "threshold": threshold}
    return _result("dft", d, erfc(abs(d) / math.sqrt(2)), alpha, details)


# -- suite ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SuiteConfig:
    alpha: float = ALPHA
    block_frequency_m: int = 128
    longest_run_m: Optional[int] = None  # None selects by N
    linear_complexity_m: int = 500
    tests: tuple[str, ...] = TEST_NAMES

    def __post_init__(self):
        unknown = set(self.tests) - set(TEST_NAMES)
        if unknown:
            raise ValueError(f"unknown tests: {sorted(unknown)}")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    _KEYS = {
        "alpha": "alpha",
        "block_frequency.M": "block_frequency_m",
        "longest_run.M": "longest_run_m",
        "linear_complexity.M": "linear_complexity_m",
        "tests": "tests",
    }

    @classmethod
    def parse(cls, text: str) -> "SuiteConfig":
        """Read ``key = value`` lines; ``#`` starts a comment."""
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in cls._KEYS:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
            attr = cls._KEYS[key]
            if attr == "alpha":
                values[attr] = float(val)
            elif attr == "tests":
                values[attr] = tuple(s.strip() for s in val.split(",") if s.strip())
            elif attr == "longest_run_m" and val == "auto":
                values[attr] = None
            else:
                values[attr] = int(val)
        return cls(**values)

    def dump(self) -> str:
        lr = "auto" if self.longest_run_m is None else str(self.longest_run_m)
        return (f"alpha = {self.alpha!r}\n"
                f"block_frequency.M = {self.block_frequency_m}\n"
                f"longest_run.M = {lr}\n"
                f"linear_complexity.M = {self.linear_complexity_m}\n"
                f"tests = {','.join(self.tests)}\n")

    def with_alpha(self, alpha: float) -> "SuiteConfig":
        return replace(self, alpha=alpha)


def _one(name: str, e: BinarySequence, cfg: SuiteConfig) -> TestResult:
    if name == "monobit":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return monobit(e, cfg.alpha)
    if name == "block_frequency":
        return block_frequency(e, cfg.block_frequency_m, cfg.alpha)
    if name == "longest_run":
        lr = None if cfg.longest_run_m is None else LongestRunConfig.nist(cfg.longest_run_m)
        return longest_run_test(e, lr, cfg.alpha)
    if name == "linear_complexity":
        return linear_complexity_test(e, LinComplexityConfig(cfg.linear_complexity_m), cfg.alpha)
    return dft_test(e, cfg.alpha)


def run_suite(E, config: SuiteConfig = SuiteConfig()) -> list[TestResult]:
    """Run the configured tests in fixed order; short inputs yield skipped results."""
    e = E if isinstance(E, BinarySequence) else BinarySequence(E)
    out = []
    for name in TEST_NAMES:
        if name not in config.tests:
            continue
        try:
            out.append(_one(name, e, config))
        except InsufficientDataError as exc:
            out.append(TestResult.skipped(name, str(exc)))
    return out
