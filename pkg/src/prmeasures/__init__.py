"""Pseudorandom measures of binary sequences and the statistical tests they bound."""

__version__ = "0.1.0"

from .sequence import BinarySequence, decode, encode, read_sequence, write_sequence
from .measures import (
    SearchBounds,
    MeasureResult,
    well_distribution,
    correlation,
    combined_measure,
    normality,
)
from .nist import TestResult, SuiteConfig, run_suite
from .verify import BoundCheck, run_checks
from .report import aggregate, render_text
from .estimators import (
    RandomnessTestSuite,
    PseudorandomMeasures,
    check_sequence,
    check_sequences,
)

__all__ = [
    "BinarySequence",
    "decode",
    "encode",
    "read_sequence",
    "write_sequence",
    "SearchBounds",
    "MeasureResult",
    "well_distribution",
    "correlation",
    "combined_measure",
    "normality",
    "TestResult",
    "SuiteConfig",
    "run_suite",
    "BoundCheck",
    "run_checks",
    "aggregate",
    "render_text",
    "RandomnessTestSuite",
    "PseudorandomMeasures",
    "check_sequence",
    "check_sequences",
]
