"""Machine checks of the inequalities linking the measures to the tests.

Each check evaluates both sides on a concrete sequence. Restricted searches
give lower bounds for maxima, so a check records which side is exact:

* a pass is conclusive only when the left side is exact;
* a violation is conclusive only when the right side is exact.

A conclusive violation contradicts a published inequality and therefore
signals a bug; :func:`assert_no_violations` raises on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Iterable, Optional

import numpy as np

from . import nist
from .ecurve import CurveFunction
from .measures import (
    EXACT,
    SearchBounds,
    SearchBudgetError,
    combined_measure,
    correlation,
    default_bounds,
    max_correlation,
    normality,
    theoretical_bound,
    well_distribution,
    well_distribution_values,
)
from .numtheory import is_prime, is_primitive_root, is_squarefree, poly_degree
from .sequence import (
    BinarySequence,
    EllipticCurveSpec,
    InverseSpec,
    LegendreSpec,
    legendre_family_poly,
    spec_to_dict,
)

__all__ = [
    "BoundCheck",
    "TheoremViolation",
    "CHECK_NAMES",
    "check_block_frequency_bound",
    "check_longest_run_bound",
    "check_bw_inequality",
    "check_nk_chain",
    "check_legendre_qc",
    "check_construction_bounds",
    "run_checks",
    "assert_no_violations",
]

BW_MAX_N = 24
LONGEST_RUN_MAX_M = 8
LONGEST_RUN_MAX_N = 64
NK_MAX_N = 40
NK_MAX_K = 4
QC_MAX_P = 2003


class TheoremViolation(AssertionError):
    """A conclusive counterexample to a proven inequality (i.e. a bug)."""


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    context: dict = field(default_factory=dict)
    lhs_exact: bool = True
    rhs_exact: bool = True
    status: str = "ok"  # or "not-applicable", "no-numeric-bound"

    @property
    def holds(self) -> bool:
        return self.status == "ok" and self.lhs <= self.rhs

    @property
    def conclusive(self) -> bool:
        if self.status != "ok":
            return False
        return self.lhs_exact if self.holds else self.rhs_exact

    @property
    def violation(self) -> bool:
        return self.status == "ok" and not self.holds and self.rhs_exact

    @classmethod
    def not_applicable(cls, name: str, reason: str, context: Optional[dict] = None,
                       status: str = "not-applicable") -> "BoundCheck":
        ctx = dict(context or {})
        ctx["reason"] = reason
        return cls(name, math.nan, math.nan, ctx, False, False, status)

    def as_record(self) -> dict:
        def num(x):
            return None if isinstance(x, float) and math.isnan(x) else x
        return {
            "check": self.name,
            "status": self.status,
            "lhs": num(self.lhs),
            "rhs": num(self.rhs),
            "holds": self.holds,
            "conclusive": self.conclusive,
            "lhs_exact": self.lhs_exact,
            "rhs_exact": self.rhs_exact,
            "context": self.context,
        }


def _seq(E) -> BinarySequence:
    return E if isinstance(E, BinarySequence) else BinarySequence(E)


# -- block frequency --------------------------------------------------------------

def check_block_frequency_bound(E, M: int, W: Optional[int] = None,
                                bounds: SearchBounds = EXACT,
                                context: Optional[dict] = None) -> list[BoundCheck]:
    """``X_1 <= 2e4 W^2 / N`` and the sharper ``X_1 <= (2t/M) W^2``.

    Applies only when ``M >= 20``, ``M > N/100`` and ``t < 100``. ``W`` may be
    passed in when already known exactly.
    """
    e = _seq(E)
    N = len(e)
    t = N // M
    ctx = dict(context or {}, N=N, M=M, t=t)
    if not (M >= 20 and 100 * M > N and t < 100):
        reason = "requires M >= 20, M > N/100 and t < 100"
        return [BoundCheck.not_applicable("block-freq", reason, ctx),
                BoundCheck.not_applicable("block-freq-sharp", reason, ctx)]
    w_exact = True
    if W is None:
        res = well_distribution(e, bounds)
        W, w_exact = int(res.value), res.exact
    x1 = nist.block_frequency(e, M).statistic
    ctx["W"] = int(W)
    # a restricted W under-estimates the right side
    return [
        BoundCheck("block-freq", x1, 2e4 * W * W / N, ctx, True, w_exact),
        BoundCheck("block-freq-sharp", x1, 2 * t * W * W / M, ctx, True, w_exact),
    ]


# -- longest run -----------------------------------------------------------------

def _singletons(M: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, i) for i in range(M + 1))


def check_longest_run_bound(E, M: int, config: Optional[nist.LongestRunConfig] = None,
                            Q: Optional[list[int]] = None,
                            context: Optional[dict] = None) -> BoundCheck:
    """``X_2 <= (M/N) (sum_r C(M,r) Q_r)^2`` with exact ``Q_1..Q_M``.

    ``config`` defaults to one class per run length. Runs only when ``M | N``.
    """
    e = _seq(E)
    N = len(e)
    ctx = dict(context or {}, N=N, M=M)
    if M > LONGEST_RUN_MAX_M or N > LONGEST_RUN_MAX_N:
        return BoundCheck.not_applicable(
            "longest-run", f"needs M <= {LONGEST_RUN_MAX_M} and N <= {LONGEST_RUN_MAX_N}", ctx)
    if M > N or N % M:
        return BoundCheck.not_applicable("longest-run", "needs M | N", ctx)
    if config is None:
        config = nist.LongestRunConfig(M, _singletons(M))
    elif config.M != M:
        raise ValueError("config block length differs from M")
    x2, nu = nist.longest_run_statistic(e, config)
    if Q is None:
        Q = [int(combined_measure(e, r).value) for r in range(1, M + 1)]
    s = sum(comb(M, r) * q for r, q in zip(range(1, M + 1), Q))
    ctx.update(classes=[list(c) for c in config.classes], nu=nu, Q=list(Q))
    return BoundCheck("longest-run", x2, M / N * s * s, ctx)


# -- linear complexity ------------------------------------------------------------

def check_bw_inequality(E, context: Optional[dict] = None) -> BoundCheck:
    """``N - max_{k <= L+1} C_k <= L`` with L from Berlekamp-Massey."""
    e = _seq(E)
    N = len(e)
    ctx = dict(context or {}, N=N)
    if N > BW_MAX_N:
        return BoundCheck.not_applicable("bw", f"needs N <= {BW_MAX_N}", ctx)
    L, _ = nist.berlekamp_massey(e.bits().tolist())
    cmax = max_correlation(e, L + 1)
    ctx.update(L=L, witness={"D": list(cmax.witness["D"]), "M": cmax.witness["M"]})
    return BoundCheck("bw", N - int(cmax.value), L, ctx)


# -- normality chain -----------------------------------------------------------------

def check_nk_chain(E, k: int, context: Optional[dict] = None) -> list[BoundCheck]:
    """``N_k <= 2^-k sum_t C(k,t) C_t <= max_t C_t`` (two checks)."""
    e = _seq(E)
    N = len(e)
    ctx = dict(context or {}, N=N, k=k)
    if N > NK_MAX_N or k > NK_MAX_K or k > N:
        reason = f"needs N <= {NK_MAX_N} and k <= {NK_MAX_K}"
        return [BoundCheck.not_applicable("nk-chain-left", reason, ctx),
                BoundCheck.not_applicable("nk-chain-right", reason, ctx)]
    C = [int(correlation(e, t).value) for t in range(1, k + 1)]
    mid = sum(comb(k, t) * c for t, c in zip(range(1, k + 1), C)) / 2**k
    nk = normality(e, k).value
    ctx["C"] = C
    return [BoundCheck("nk-chain-left", nk, mid, ctx),
            BoundCheck("nk-chain-right", mid, max(C), ctx)]


# -- constructions ---------------------------------------------------------------------

def _correlation_condition(p: int, k: int, l: int) -> Optional[str]:
    """Which of the three hypotheses for the correlation bound holds."""
    if l == 2:
        return "l=2"
    if l < p and is_primitive_root(2, p):
        return "2 primitive root"
    if (4 * k) ** l < p:
        return "(4k)^l < p"
    return None


def check_legendre_qc(spec: LegendreSpec, k: int,
                      lhs_bounds: SearchBounds = EXACT,
                      rhs_bounds: SearchBounds = EXACT) -> BoundCheck:
    """``Q_k <= C_k + 2k`` for a Legendre-symbol sequence."""
    ctx = {"spec": spec_to_dict(spec) if hasattr(spec, "kind") else None, "k": k}
    if not isinstance(spec, LegendreSpec):
        return BoundCheck.not_applicable("legendre-qc", "not a Legendre construction", ctx)
    if not is_squarefree(spec.f, spec.p):
        return BoundCheck.not_applicable("legendre-qc", "f has a multiple zero", ctx)
    if spec.p > QC_MAX_P and lhs_bounds == EXACT:
        return BoundCheck.not_applicable("legendre-qc", f"exact Q_k needs p <= {QC_MAX_P}", ctx)
    e = spec.generate()
    try:
        q = combined_measure(e, k, lhs_bounds)
        c = correlation(e, k, rhs_bounds)
    except SearchBudgetError as exc:
        return BoundCheck.not_applicable("legendre-qc", str(exc), ctx)
    ctx.update(Q=int(q.value), C=int(c.value))
    return BoundCheck("legendre-qc", q.value, c.value + 2 * k, ctx, q.exact, c.exact)


def check_construction_bounds(E, spec, l: int = 2,
                              w_bounds: Optional[SearchBounds] = None,
                              c_bounds: Optional[SearchBounds] = None) -> list[BoundCheck]:
    """Measured W and C_l against the explicit bounds for the construction.

    The inverse-based constructions only have bounds with implicit constants
    and are reported as ``no-numeric-bound``. For the curve construction the
    caller vouches that f is not a perfect square in the function field.
    """
    e = _seq(E)
    N = len(e)
    ctx = {"spec": spec_to_dict(spec) if hasattr(spec, "kind") else None, "l": l}
    if isinstance(spec, InverseSpec):
        reason = "bounds hold up to unspecified constants"
        return [BoundCheck.not_applicable("construction-W", reason, ctx, "no-numeric-bound"),
                BoundCheck.not_applicable("construction-C", reason, ctx, "no-numeric-bound")]
    if isinstance(spec, LegendreSpec):
        p = spec.p
        deg = poly_degree(spec.f, p)
        if not is_squarefree(spec.f, p):
            reason = "f has a multiple zero"
            return [BoundCheck.not_applicable("construction-W", reason, ctx),
                    BoundCheck.not_applicable("construction-C", reason, ctx)]
        w_rhs = theoretical_bound("legendre-W", p=p, k=deg)
        c_rhs = theoretical_bound("legendre-C", p=p, k=deg, l=l)
        modulus = p
    elif isinstance(spec, EllipticCurveSpec):
        p, T = spec.p, spec.T
        deg = CurveFunction.parse(spec.f).degree(spec.curve)
        if not is_prime(T):
            reason = "generator order must be prime"
            return [BoundCheck.not_applicable("construction-W", reason, ctx),
                    BoundCheck.not_applicable("construction-C", reason, ctx)]
        w_rhs = theoretical_bound("ec-W", p=p, T=T, k=deg)
        c_rhs = theoretical_bound("ec-C", p=p, T=T, k=deg, l=l)
        modulus = T
    else:
        reason = "no bound family for this generator"
        return [BoundCheck.not_applicable("construction-W", reason, ctx),
                BoundCheck.not_applicable("construction-C", reason, ctx)]
    ctx["degree"] = deg
    w = well_distribution(e, w_bounds or default_bounds(N, 1, "W"))
    out = [BoundCheck("construction-W", w.value, w_rhs, dict(ctx, witness=w.witness), w.exact)]
    cond = _correlation_condition(modulus, deg, l)
    if cond is None:
        out.append(BoundCheck.not_applicable("construction-C", "no hypothesis for C_l holds", ctx))
        return out
    c = correlation(e, l, c_bounds or default_bounds(N, l, "C"))
    witness = {"D": list(c.witness["D"]), "M": c.witness["M"]}
    out.append(BoundCheck("construction-C", c.value, c_rhs,
                          dict(ctx, condition=cond, witness=witness), c.exact))
    return out


# -- suites -----------------------------------------------------------------------------

def _map(fn: Callable, items: Iterable, executor=None) -> list:
    if executor is None:
        return [fn(x) for x in items]
    return list(executor.map(fn, items))


def _random_rows(rng: np.random.Generator, n: int, N: int) -> np.ndarray:
    return (2 * rng.integers(0, 2, size=(n, N), dtype=np.int8) - 1).astype(np.int8)


def _all_rows(N: int) -> np.ndarray:
    idx = np.arange(2**N, dtype=np.int64)[:, None]
    return (1 - 2 * ((idx >> np.arange(N)) & 1)).astype(np.int8)


def _block_frequency_item(item):
    row, M, W, ctx = item
    return check_block_frequency_bound(BinarySequence(row), M, W=W, context=ctx)


def suite_block_frequency(seed: int = 0, n_random: int = 500, N: int = 2000, M: int = 25,
                          n_constructed: int = 20, executor=None) -> list[BoundCheck]:
    """Random sequences plus Legendre ``x^3 + i`` (p = 2003) cut to length N."""
    rng = np.random.default_rng(seed)
    rows = [r for r in _random_rows(rng, n_random, N)]
    ctxs = [{"source": "random", "seed": seed, "index": i} for i in range(n_random)]
    for i in range(1, n_constructed + 1):
        rows.append(LegendreSpec(2003, tuple(legendre_family_poly(i, 3))).generate().values[:N])
        ctxs.append({"source": "legendre", "p": 2003, "f": f"x^3+{i}"})
    W = well_distribution_values(np.stack(rows))
    items = [(r, M, int(w), c) for r, w, c in zip(rows, W, ctxs)]
    return [c for group in _map(_block_frequency_item, items, executor) for c in group]


def _longest_run_item(item):
    row, M, classes, index = item
    cfg = nist.LongestRunConfig(M, classes)
    return check_longest_run_bound(BinarySequence(row), M, cfg,
                                   context={"source": "exhaustive", "index": index})


def suite_longest_run(N: int = 10, M: int = 5, split: int = 2, executor=None) -> list[BoundCheck]:
    """Every sequence of length N against the bound, classes {<=split}, {>split}."""
    classes = ((0, split), (split + 1, M))
    items = [(row, M, classes, i) for i, row in enumerate(_all_rows(N))]
    return _map(_longest_run_item, items, executor)


def _bw_item(item):
    row, ctx = item
    return check_bw_inequality(BinarySequence(row), ctx)


def suite_bw(seed: int = 0, n_random: int = 1000, N: int = 20, N_exhaustive: int = 12,
             executor=None) -> list[BoundCheck]:
    rng = np.random.default_rng(seed)
    items = [(r, {"source": "random", "seed": seed, "index": i})
             for i, r in enumerate(_random_rows(rng, n_random, N))]
    items += [(r, {"source": "exhaustive", "index": i})
              for i, r in enumerate(_all_rows(N_exhaustive))]
    return _map(_bw_item, items, executor)


def _nk_item(item):
    row, k, index = item
    return check_nk_chain(BinarySequence(row), k, {"source": "exhaustive", "index": index})


def suite_nk_chain(N: int = 10, k_max: int = 3, executor=None) -> list[BoundCheck]:
    items = [(row, k, i) for k in range(1, k_max + 1) for i, row in enumerate(_all_rows(N))]
    return [c for pair in _map(_nk_item, items, executor) for c in pair]


def suite_legendre_qc(seed: int = 0, executor=None) -> list[BoundCheck]:
    cases = [
        (LegendreSpec(103, (1, 1)), 2, EXACT),
        (LegendreSpec(103, (2, 0, 0, 1)), 2, EXACT),
        (LegendreSpec(103, (2, 0, 0, 1)), 3, EXACT),
        (LegendreSpec(503, (1, 1)), 2, SearchBounds(b_max=64, d_max=64, seed=seed)),
    ]
    return _map(lambda c: check_legendre_qc(c[0], c[1], c[2]), cases, executor)


def suite_construction(seed: int = 0, full: bool = False, executor=None) -> list[BoundCheck]:
    """Legendre p = 2003 exactly; with ``full`` also the experiment-scale families."""
    specs = [LegendreSpec(2003, (1, 0, 0, 1))]
    if full:
        specs.append(LegendreSpec(100003, tuple(legendre_family_poly(1))))
        specs.append(EllipticCurveSpec(100003, -3, 74439, (85611, 76395), 100523,
                                       "x^31+x+y+1"))

    def one(spec):
        e = spec.generate()
        N = len(e)
        w_b = EXACT if N <= 4096 else SearchBounds(b_max=64, seed=seed)
        c_b = None if N <= 4096 else SearchBounds(d_max=32, sample_count=10**4, seed=seed)
        return check_construction_bounds(e, spec, 2, w_b, c_b)

    return [c for group in _map(one, specs, executor) for c in group]


CHECK_NAMES = ("block-freq", "longest-run", "bw", "nk-chain", "legendre-qc", "construction")

_SUITES = {
    "block-freq": lambda seed, full, ex: suite_block_frequency(seed, executor=ex),
    "longest-run": lambda seed, full, ex: suite_longest_run(executor=ex),
    "bw": lambda seed, full, ex: suite_bw(seed, executor=ex),
    "nk-chain": lambda seed, full, ex: suite_nk_chain(executor=ex),
    "legendre-qc": lambda seed, full, ex: suite_legendre_qc(seed, executor=ex),
    "construction": lambda seed, full, ex: suite_construction(seed, full, executor=ex),
}


def run_checks(target: str = "all", seed: int = 0, full: bool = False,
               executor=None) -> list[BoundCheck]:
    """Run one named suite (or ``"all"``), ordered by check name."""
    if target != "all" and target not in _SUITES:
        raise ValueError(f"unknown check {target!r}; choose from {', '.join(CHECK_NAMES)} or all")
    names = CHECK_NAMES if target == "all" else (target,)
    checks = [c for name in names for c in _SUITES[name](seed, full, executor)]
    return sorted(checks, key=lambda c: c.name)


def assert_no_violations(checks: Iterable[BoundCheck]) -> None:
    bad = [c for c in checks if c.violation]
    if bad:
        first = bad[0]
        raise TheoremViolation(
            f"{len(bad)} conclusive violation(s); first: {first.name} lhs={first.lhs} "
            f"rhs={first.rhs} context={first.context}")
