"""Second-level summary of a family of test runs.

For every test: decile histogram of P-values, a chi-square uniformity
P-value over the ten bins and the proportion of passing sequences, laid out
like the reference suite's ``finalAnalysisReport``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .nist import ALPHA, TestResult, igamc

__all__ = [
    "UNIFORMITY_ALPHA",
    "TestRow",
    "SuiteReport",
    "aggregate",
    "render_text",
    "render_records",
    "render_checks",
]

# p-values below this mark the histogram as non-uniform
UNIFORMITY_ALPHA = 0.0001


@dataclass(frozen=True)
class TestRow:
    test: str
    counts: tuple[int, ...]
    uniformity_p: float
    passed: int
    total: int
    skipped: int
    alpha: float

    __test__ = False

    @property
    def proportion(self) -> float:
        return self.passed / self.total if self.total else math.nan

    @property
    def uniformity_flag(self) -> bool:
        return self.total > 0 and self.uniformity_p < UNIFORMITY_ALPHA

    @property
    def proportion_flag(self) -> bool:
        if not self.total:
            return False
        p = 1 - self.alpha
        low = p - 3 * math.sqrt(p * (1 - p) / self.total)
        return self.proportion < low

    def as_record(self) -> dict:
        return {
            "test": self.test,
            "counts": list(self.counts),
            "uniformity_p": None if math.isnan(self.uniformity_p) else self.uniformity_p,
            "uniformity_flag": self.uniformity_flag,
            "passed": self.passed,
            "total": self.total,
            "skipped": self.skipped,
            "proportion_flag": self.proportion_flag,
            "alpha": self.alpha,
        }


@dataclass(frozen=True)
class SuiteReport:
    rows: tuple[TestRow, ...]
    sequences: int


def _decile(p: float) -> int:
    return min(int(p * 10), 9)


def aggregate(results: Sequence[Sequence[TestResult]], alpha: float = ALPHA) -> SuiteReport:
    """Combine per-sequence result lists (one list per sequence, same tests)."""
    if not results:
        raise ValueError("need at least one sequence")
    names = [r.name for r in results[0]]
    for rs in results:
        if [r.name for r in rs] != names:
            raise ValueError("every sequence must run the same tests in the same order")
    rows = []
    for j, name in enumerate(names):
        column = [rs[j] for rs in results]
        ok = [r for r in column if r.status == "ok"]
        counts = [0] * 10
        for r in ok:
            counts[_decile(r.p_value)] += 1
        s = len(ok)
        if s:
            expected = s / 10
            chi2 = sum((c - expected) ** 2 / expected for c in counts)
            uniformity = igamc(4.5, chi2 / 2)
        else:
            uniformity = math.nan
        passed = sum(1 for r in ok if r.p_value >= alpha)
        rows.append(TestRow(name, tuple(counts), uniformity, passed, s,
                            len(column) - s, alpha))
    return SuiteReport(tuple(rows), len(results))


_RULE = "-" * 78


def render_text(report: SuiteReport) -> str:
    """Fixed-width table: C1..C10, P-VALUE, PROPORTION, STATISTICAL TEST."""
    lines = [
        _RULE,
        "RESULTS FOR THE UNIFORMITY OF P-VALUES AND THE PROPORTION OF PASSING SEQUENCES",
        _RULE,
        " C1  C2  C3  C4  C5  C6  C7  C8  C9 C10  P-VALUE  PROPORTION  STATISTICAL TEST",
        _RULE,
    ]
    for row in report.rows:
        counts = "".join(f"{c:3d} " for c in row.counts)
        if row.total:
            pv = f"{row.uniformity_p:.6f}{'*' if row.uniformity_flag else ' '}"
            prop = f"{row.passed:>4d}/{row.total:<4d}{'*' if row.proportion_flag else ' '}"
        else:
            pv = "   ----  "
            prop = "    ----   "
        lines.append(f"{counts} {pv} {prop}  {row.test}")
    lines.append(_RULE)
    lines.append(f"sequences: {report.sequences}")
    lines.append("* P-VALUE: non-uniform P-values (uniformity P < 0.0001)")
    lines.append("* PROPORTION: pass rate below 1-alpha - 3 sigma")
    skipped = [(r.test, r.skipped) for r in report.rows if r.skipped]
    for name, n in skipped:
        lines.append(f"{name}: skipped for {n} sequence(s)")
    return "\n".join(lines) + "\n"


def render_records(report: SuiteReport) -> str:
    """One JSON object per test row, keys sorted."""
    return "".join(json.dumps(r.as_record(), sort_keys=True) + "\n" for r in report.rows)


def render_checks(checks: Iterable) -> str:
    """Per-check-name summary of BoundCheck results."""
    table: dict[str, list[int]] = {}
    for c in checks:
        row = table.setdefault(c.name, [0, 0, 0, 0, 0])
        row[0] += 1
        if c.status != "ok":
            row[4] += 1
        elif c.holds:
            row[1 if c.conclusive else 2] += 1
        else:
            row[3] += 1
    lines = [f"{'CHECK':<18}{'TOTAL':>7}{'HOLDS':>7}{'UNSURE':>8}{'FAILED':>8}{'N/A':>6}"]
    for name in sorted(table):
        total, held, unsure, failed, na = table[name]
        lines.append(f"{name:<18}{total:>7}{held:>7}{unsure:>8}{failed:>8}{na:>6}")
    return "\n".join(lines) + "\n"
