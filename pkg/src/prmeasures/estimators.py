"""scikit-learn style wrappers.

The functional API in :mod:`prmeasures.nist` and :mod:`prmeasures.measures`
is the core; these classes adapt it to ``fit``/``transform`` so a family of
sequences can be scored inside ordinary sklearn tooling. Rows are sequences.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import measures as _measures
from . import nist
from .report import aggregate
from .sequence import BinarySequence, from_bits

__all__ = ["check_sequence", "check_sequences", "RandomnessTestSuite", "PseudorandomMeasures"]


def check_sequence(E, encoding: str = "pm1") -> BinarySequence:
    """Validate one sequence; ``encoding`` is ``"pm1"`` (+1/-1) or ``"bits"`` (0/1)."""
    if isinstance(E, BinarySequence):
        return E
    if encoding == "bits":
        return from_bits(np.asarray(E).ravel())
    if encoding != "pm1":
        raise ValueError(f"unknown encoding {encoding!r}")
    arr = np.asarray(E)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d sequence, got shape {arr.shape}")
    return BinarySequence(arr)


def check_sequences(X, encoding: str = "pm1") -> list[BinarySequence]:
    """Validate a family: a 2-d array (one row per sequence) or a list of sequences."""
    if isinstance(X, BinarySequence):
        return [X]
    if isinstance(X, np.ndarray):
        if X.ndim != 2:
            raise ValueError(f"expected a 2-d array of sequences, got shape {X.shape}")
        rows = list(X)
    else:
        rows = list(X)
    if not rows:
        raise ValueError("no sequences given")
    return [check_sequence(r, encoding) for r in rows]


class RandomnessTestSuite(TransformerMixin, BaseEstimator):
    """Runs the five tests on every sequence.

    ``fit`` stores per-sequence results and the aggregated report;
    ``transform`` returns the P-value matrix (NaN where a test was skipped).
    """

    def __init__(self, alpha: float = nist.ALPHA, block_frequency_m: int = 128,
                 longest_run_m: Optional[int] = None, linear_complexity_m: int = 500,
                 tests=None, encoding: str = "pm1"):
        self.alpha = alpha
        self.block_frequency_m = block_frequency_m
        self.longest_run_m = longest_run_m
        self.linear_complexity_m = linear_complexity_m
        self.tests = tests
        self.encoding = encoding

    def _config(self) -> nist.SuiteConfig:
        tests = nist.TEST_NAMES if self.tests is None else tuple(self.tests)
        return nist.SuiteConfig(self.alpha, self.block_frequency_m, self.longest_run_m,
                                self.linear_complexity_m, tests)

    def _run(self, X):
        cfg = self._config()
        return [nist.run_suite(E, cfg) for E in check_sequences(X, self.encoding)]

    def fit(self, X, y=None):
        self.results_ = self._run(X)
        self.test_names_ = tuple(r.name for r in self.results_[0])
        self.report_ = aggregate(self.results_, self.alpha)
        self.n_sequences_ = len(self.results_)
        return self

    @staticmethod
    def _pvalues(results) -> np.ndarray:
        return np.array([[r.p_value for r in rs] for rs in results], dtype=float)

    def transform(self, X):
        check_is_fitted(self, "results_")
        return self._pvalues(self._run(X))

    def fit_transform(self, X, y=None, **fit_params):
        # avoid running the suite twice
        return self._pvalues(self.fit(X).results_)

    def predict(self, X):
        """True for sequences passing every test that ran."""
        P = self.transform(X)
        return np.all(np.isnan(P) | (P >= self.alpha), axis=1)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "test_names_")
        return np.array(self.test_names_, dtype=object)


class PseudorandomMeasures(TransformerMixin, BaseEstimator):
    """Maps each sequence to the requested measure values.

    ``measures`` entries are ``"W"``, ``"C<k>"``, ``"Q<k>"`` or ``"N<k>"``.
    Without bounds every search is exact (subject to the work budget).
    """

    def __init__(self, measures=("W", "C2"), b_max: Optional[int] = None,
                 d_max: Optional[int] = None, sample_count: int = 0, seed: int = 0,
                 encoding: str = "pm1"):
        self.measures = measures
        self.b_max = b_max
        self.d_max = d_max
        self.sample_count = sample_count
        self.seed = seed
        self.encoding = encoding

    def _parsed(self) -> list[tuple[str, int]]:
        out = []
        for m in self.measures:
            name, order = m[0], m[1:]
            if name not in "WCQN" or (order and not order.isdigit()) or (name == "W" and order):
                raise ValueError(f"bad measure {m!r}")
            out.append((name, int(order or 1)))
        return out

    def fit(self, X, y=None):
        check_sequences(X, self.encoding)
        self.measures_ = self._parsed()
        self.bounds_ = _measures.SearchBounds(self.b_max, self.d_max, self.sample_count, self.seed)
        return self

    def _one(self, E: BinarySequence) -> list[float]:
        row = []
        for name, k in self.measures_:
            if name == "W":
                r = _measures.well_distribution(E, self.bounds_)
            elif name == "C":
                r = _measures.correlation(E, k, self.bounds_)
            elif name == "Q":
                r = _measures.combined_measure(E, k, self.bounds_)
            else:
                r = _measures.normality(E, k)
            row.append(float(r.value))
        return row

    def transform(self, X):
        check_is_fitted(self, "measures_")
        return np.array([self._one(E) for E in check_sequences(X, self.encoding)], dtype=float)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "measures_")
        return np.array(list(self.measures), dtype=object)
