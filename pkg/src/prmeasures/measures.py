"""Well-distribution, correlation, combined and normality measures.

All four maxima are computed over the same index conventions as their
definitions (``e_1..e_N``). Searches can be restricted with
:class:`SearchBounds`; a restricted search returns a certified lower bound
(its witness is always valid) and ``exact=False``.

Lag tuples ``D = (d_1, ..., d_k)`` are enumerated as a *shape*
``(0, d_2 - d_1, ..., d_k - d_1)`` plus an offset ``d_1``: for a fixed shape,
the best offset and ``M`` come from one pass over the prefix sums of the
shape's product sequence. Shapes are visited in order of increasing top lag,
so the search stops as soon as no longer product sequence can win.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np

from .sequence import BinarySequence

__all__ = [
    "SearchBounds",
    "MeasureResult",
    "SearchBudgetError",
    "WORK_BUDGET",
    "default_bounds",
    "well_distribution",
    "well_distribution_values",
    "correlation",
    "combined_measure",
    "normality",
    "max_correlation",
    "witness_sum",
    "theoretical_bound",
]

WORK_BUDGET = 10**9
_CHUNK = 1 << 22  # elements per vectorised block


class SearchBudgetError(ValueError):
    """An unbounded search was requested whose work estimate exceeds the budget."""


@dataclass(frozen=True)
class SearchBounds:
    """Caps on the maxima searched by the measures.

    ``None`` means unbounded. ``sample_count`` random lag tuples with largest
    lag beyond ``d_max`` are tried in addition to the exhaustive window.
    """

    b_max: Optional[int] = None
    d_max: Optional[int] = None
    sample_count: int = 0
    seed: int = 0
    budget: int = WORK_BUDGET

    def __post_init__(self):
        if self.b_max is not None and self.b_max < 1:
            raise ValueError("b_max must be positive")
        if self.d_max is not None and self.d_max < 0:
            raise ValueError("d_max must be non-negative")
        if self.sample_count < 0:
            raise ValueError("sample_count must be non-negative")


EXACT = SearchBounds()


@dataclass(frozen=True)
class MeasureResult:
    measure: str
    k: int
    value: float
    witness: dict
    exact: bool
    bounds: SearchBounds = field(default=EXACT)

    def as_record(self) -> dict:
        return {
            "measure": self.measure,
            "k": self.k,
            "value": self.value,
            "witness": {key: list(v) if isinstance(v, tuple) else v
                        for key, v in self.witness.items()},
            "exact": self.exact,
            "b_max": self.bounds.b_max,
            "d_max": self.bounds.d_max,
            "sample_count": self.bounds.sample_count,
            "seed": self.bounds.seed,
        }


def _as_array(E) -> np.ndarray:
    if isinstance(E, BinarySequence):
        return E.values.astype(np.int64)
    arr = np.asarray(E, dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("expected a non-empty one-dimensional sequence")
    return arr


# -- work estimates ------------------------------------------------------------

def _eff(cap: Optional[int], limit: int) -> int:
    return limit if cap is None else min(cap, limit)


def _shape_count(k: int, dtop: int) -> int:
    """Shapes {0 < l_2 < ... < l_k <= dtop}."""
    return comb(dtop, k - 1) if k >= 1 else 0


def _work(measure: str, N: int, k: int, b_max: Optional[int], d_max: Optional[int]) -> int:
    b = _eff(b_max, max(N - 1, 1))
    d = _eff(d_max, N - 1)
    if measure == "W":
        return N * b
    if measure == "C":
        return _shape_count(k, d) * N
    if measure == "Q":
        return _shape_count(k, d) * N * b
    return N * k


def _check_budget(measure, N, k, bounds: SearchBounds) -> None:
    unbounded_b = bounds.b_max is None and measure in ("W", "Q")
    unbounded_d = bounds.d_max is None and measure in ("C", "Q")
    if not (unbounded_b or unbounded_d):
        return
    work = _work(measure, N, k, bounds.b_max, bounds.d_max)
    if work > bounds.budget:
        raise SearchBudgetError(
            f"unbounded {measure}_{k} search at N={N} needs ~{work:.3g} operations "
            f"(budget {bounds.budget:.3g}); set b_max/d_max")


def default_bounds(N: int, k: int = 1, measure: str = "C", *, seed: int = 0,
                   budget: int = WORK_BUDGET) -> SearchBounds:
    """Exact bounds when affordable, else the desk-scale restricted defaults."""
    if _work(measure, N, k, None, None) <= budget:
        return SearchBounds(seed=seed, budget=budget)
    if measure == "W":
        return SearchBounds(b_max=64, seed=seed, budget=budget)
    return SearchBounds(b_max=64, d_max=32, sample_count=10**4, seed=seed, budget=budget)


# -- progression kernel --------------------------------------------------------

def _progression_values(G: np.ndarray, b_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise max over steps b <= b_max of the progression range.

    ``G`` is (rows, L) with entries in {-1, 0, 1}; zeros may only pad the tail.
    For each step ``b`` and residue class, the best ``|sum|`` over contiguous
    runs of the class equals (max prefix) - (min prefix), counting the empty
    prefix. Returns (values, first step attaining them).
    """
    R, L = G.shape
    best = np.zeros(R, dtype=np.int64)
    best_b = np.ones(R, dtype=np.int64)
    for b in range(1, min(b_max, L) + 1):
        rows = -(-L // b)
        if rows <= best.min():
            # no class has more than `rows` terms
            break
        if rows * b != L:
            Gp = np.zeros((R, rows * b), dtype=G.dtype)
            Gp[:, :L] = G
        else:
            Gp = G
        H = np.cumsum(Gp.reshape(R, rows, b), axis=1, dtype=np.int32)
        rng = np.maximum(H.max(axis=1), 0) - np.minimum(H.min(axis=1), 0)
        vb = rng.max(axis=1)
        upd = vb > best
        best[upd] = vb[upd]
        best_b[upd] = b
    return best, best_b


def _progression_witness(g: np.ndarray, b: int, value: int) -> tuple[int, int]:
    """Smallest (a, t) (1-based start, term count) with step b attaining value."""
    found = None
    for r in range(min(b, g.size)):
        P = np.concatenate(([0], np.cumsum(g[r::b], dtype=np.int64)))
        hi, lo = P.max(), P.min()
        if hi - lo != value:
            continue
        i0 = int(np.flatnonzero((P == hi) | (P == lo))[0])
        other = lo if P[i0] == hi else hi
        j = i0 + 1 + int(np.flatnonzero(P[i0 + 1:] == other)[0])
        cand = (r + 1 + i0 * b, j - i0)
        if found is None or cand < found:
            found = cand
    if found is None:
        raise AssertionError("no witness for the reported value")
    return found


def well_distribution_values(X: np.ndarray, b_max: Optional[int] = None) -> np.ndarray:
    """W for every row of a (rows, N) +/-1 matrix (no witnesses)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.int8))
    values, _ = _progression_values(X, _eff(b_max, X.shape[1]))
    return values


def well_distribution(E, bounds: SearchBounds = EXACT) -> MeasureResult:
    """Max of ``|e_a + e_{a+b} + ... + e_{a+(t-1)b}|`` over admissible (a, b, t).

    Ties are broken by the smallest ``(b, a, t)``.
    """
    e = _as_array(E)
    N = e.size
    _check_budget("W", N, 1, bounds)
    b_cap = _eff(bounds.b_max, N)
    values, steps = _progression_values(e[None, :].astype(np.int8), b_cap)
    value, b = int(values[0]), int(steps[0])
    a, t = _progression_witness(e, b, value)
    exact = bounds.b_max is None or bounds.b_max >= N - 1
    return MeasureResult("W", 1, value, {"a": a, "b": b, "t": t}, exact, bounds)


# -- lag shapes ------------------------------------------------------------------

def _shapes_with_top(k: int, top: int) -> np.ndarray:
    """All shapes (0, l_2, ..., l_{k-1}, top) in lexicographic order."""
    if k == 1:
        return np.zeros((1, 1), dtype=np.int64)
    inner = list(itertools.combinations(range(1, top), k - 2))
    out = np.empty((len(inner), k), dtype=np.int64)
    out[:, 0] = 0
    out[:, -1] = top
    if k > 2:
        out[:, 1:-1] = np.array(inner, dtype=np.int64).reshape(len(inner), k - 2)
    return out


def _products(e: np.ndarray, shapes: np.ndarray, L: int) -> np.ndarray:
    """(rows, L) matrix of prod_i e[n + shape_i] for n = 0..L-1."""
    base = np.arange(L)
    G = e[shapes[:, 0, None] + base].astype(np.int8)
    for i in range(1, shapes.shape[1]):
        G *= e[shapes[:, i, None] + base].astype(np.int8)
    return G


def _chunks(shapes: np.ndarray, L: int):
    step = max(1, _CHUNK // max(L * shapes.shape[1], 1))
    for start in range(0, shapes.shape[0], step):
        yield shapes[start:start + step]


def _window_max(G: np.ndarray, s_max: int) -> np.ndarray:
    """Row-wise max over starts s <= s_max and ends j > s of |P_j - P_s|."""
    R, L = G.shape
    P = np.zeros((R, L + 1), dtype=np.int32)
    np.cumsum(G, axis=1, out=P[:, 1:])
    if s_max >= L - 1:
        return (P.max(axis=1) - P.min(axis=1)).astype(np.int64)
    suf_max = np.maximum.accumulate(P[:, ::-1], axis=1)[:, ::-1]
    suf_min = np.minimum.accumulate(P[:, ::-1], axis=1)[:, ::-1]
    starts = P[:, : s_max + 1]
    up = suf_max[:, 1: s_max + 2] - starts
    down = starts - suf_min[:, 1: s_max + 2]
    return np.maximum(up.max(axis=1), down.max(axis=1)).astype(np.int64)


def _window_witness(g: np.ndarray, s_max: int, value: int) -> tuple[int, int]:
    """Smallest (s, M) with s <= s_max and |sum g[s:s+M]| == value."""
    P = np.concatenate(([0], np.cumsum(g, dtype=np.int64)))
    for s in range(min(s_max, g.size - 1) + 1):
        hits = np.flatnonzero(np.abs(P[s + 1:] - P[s]) == value)
        if hits.size:
            return s, int(hits[0]) + 1
    raise AssertionError("no window witness for the reported value")


def _tops(k: int, dtop: int) -> range:
    if k == 1:
        return range(1)
    if dtop < k - 1:
        raise ValueError(f"d_max={dtop} leaves no room for {k} distinct lags")
    return range(k - 1, dtop + 1)


def _check_k(k: int, N: int) -> None:
    if not 1 <= k <= N:
        raise ValueError(f"order k={k} must satisfy 1 <= k <= N={N}")


def correlation(E, k: int, bounds: SearchBounds = EXACT) -> MeasureResult:
    """Max of ``|sum_{n=1}^M e_{n+d_1}...e_{n+d_k}|`` over D with ``d_k <= d_max``.

    Witness: ``D`` (the actual lags, ``d_1`` included) and ``M``. Exact iff
    ``d_max >= N - 1``.
    """
    e = _as_array(E)
    N = e.size
    _check_k(k, N)
    _check_budget("C", N, k, bounds)
    dtop = _eff(bounds.d_max, N - 1)
    best, wit = 0, None
    for top in _tops(k, dtop):
        L = N - top
        if L <= best:
            break
        s_max = dtop - top
        for shapes in _chunks(_shapes_with_top(k, top), L):
            vals = _window_max(_products(e, shapes, L), s_max)
            i = int(np.argmax(vals))
            if vals[i] > best:
                best = int(vals[i])
                wit = (shapes[i], s_max, L)
    shape, s_max, L = wit
    s, M = _window_witness(_products(e, shape[None, :], L)[0], s_max, best)
    witness = {"D": tuple(int(x) + s for x in shape), "M": M}

    if bounds.sample_count and dtop < N - 1:
        val, w = _sample_correlation(e, k, dtop, bounds)
        if val > best:
            best, witness = val, w
    exact = dtop >= N - 1
    return MeasureResult("C", k, best, witness, exact, bounds)


def _sample_correlation(e: np.ndarray, k: int, dtop: int, bounds: SearchBounds):
    """Random lag tuples with d_k in (dtop, N-1]; each scored by its best prefix M."""
    N = e.size
    rng = np.random.default_rng(bounds.seed)
    tops = rng.integers(dtop + 1, N, size=bounds.sample_count)
    tuples = np.empty((bounds.sample_count, k), dtype=np.int64)
    for i, top in enumerate(tops):
        rest = np.sort(rng.choice(int(top), size=k - 1, replace=False)) if k > 1 else []
        tuples[i, :-1] = rest
        tuples[i, -1] = top
    best, witness = 0, None
    Lmax = N - dtop - 1
    step = max(1, _CHUNK // max(Lmax * k, 1))
    base = np.arange(Lmax)
    for start in range(0, len(tuples), step):
        D = tuples[start:start + step]
        lengths = N - D[:, -1]
        valid = base[None, :] < lengths[:, None]
        G = np.ones((len(D), Lmax), dtype=np.int8)
        for i in range(k):
            idx = np.minimum(D[:, i, None] + base, N - 1)
            G *= e[idx].astype(np.int8)
        G[~valid] = 0
        P = np.abs(np.cumsum(G, axis=1, dtype=np.int32))
        vals = P.max(axis=1)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best = int(vals[i])
            witness = {"D": tuple(int(x) for x in D[i]), "M": int(np.argmax(P[i])) + 1}
    return best, witness


def combined_measure(E, k: int, bounds: SearchBounds = EXACT) -> MeasureResult:
    """Max of ``|sum_{j=0}^t e_{a+jb+d_1}...e_{a+jb+d_k}|`` over (a, b, t, D).

    Returned witnesses have ``d_1 = 0`` (any offset folds into ``a``) and
    count ``t + 1`` terms; ``t = 0`` is admitted so that ``Q_1 = W``.
    """
    e = _as_array(E)
    N = e.size
    _check_k(k, N)
    _check_budget("Q", N, k, bounds)
    dtop = _eff(bounds.d_max, N - 1)
    b_cap = _eff(bounds.b_max, N)
    best, wit = 0, None
    for top in _tops(k, dtop):
        L = N - top
        if L <= best:
            break
        for shapes in _chunks(_shapes_with_top(k, top), L):
            G = _products(e, shapes, L)
            vals, steps = _progression_values(G, min(b_cap, L))
            i = int(np.argmax(vals))
            if vals[i] > best:
                best = int(vals[i])
                wit = (shapes[i], int(steps[i]), G[i].copy())
    shape, b, g = wit
    a, terms = _progression_witness(g.astype(np.int64), b, best)
    witness = {"a": a, "b": b, "t": terms - 1, "D": tuple(int(x) for x in shape)}
    exact = dtop >= N - 1 and (bounds.b_max is None or bounds.b_max >= N - 1)
    return MeasureResult("Q", k, best, witness, exact, bounds)


# -- normality -------------------------------------------------------------------

MAX_NORMALITY_ORDER = 24


def normality(E, k: int) -> MeasureResult:
    """Max over patterns X and prefixes M of ``|#{n < M: window n+1 == X} - M/2^k|``.

    Windows are counted for ``n = 0..M-1`` (M of them), ``0 < M <= N+1-k``.
    The deviation peaks just before or just after an occurrence, or at the
    largest M, so only those points are scored.
    """
    e = _as_array(E)
    N = e.size
    if not 1 <= k <= min(MAX_NORMALITY_ORDER, N):
        raise ValueError(f"normality order k={k} out of range for N={N}")
    W = N - k + 1
    bits = (e > 0).astype(np.int64)
    codes = np.zeros(W, dtype=np.int64)
    for i in range(k):
        codes = (codes << 1) | bits[i:i + W]
    scale = 2.0**-k
    order = np.argsort(codes, kind="stable")
    sc = codes[order]
    pos = order  # window start n (0-based); an occurrence at n counts for M > n
    group_start = np.r_[0, np.flatnonzero(np.diff(sc)) + 1]
    rank = np.arange(W) - np.repeat(group_start, np.diff(np.r_[group_start, W]))
    # at M = n + 1 the count is rank + 1; at M = n (if n >= 1) it is rank
    after = np.abs(rank + 1 - (pos + 1) * scale)
    before = np.where(pos >= 1, np.abs(rank - pos * scale), -1.0)
    cand = np.maximum(after, before)
    i = int(np.argmax(cand))
    value = float(cand[i])
    code = int(sc[i])
    M = int(pos[i]) + 1 if after[i] >= before[i] else int(pos[i])

    # at M = W every pattern (seen or not) has its final count
    totals = np.diff(np.r_[group_start, W])
    end_dev = np.abs(totals - W * scale)
    j = int(np.argmax(end_dev))
    if end_dev[j] > value:
        value, code, M = float(end_dev[j]), int(sc[group_start[j]]), W
    if len(group_start) < 2**k and W * scale > value:
        seen = set(sc[group_start].tolist())
        code = next(c for c in range(2**k) if c not in seen)
        value, M = W * scale, W
    X = tuple(1 if (code >> (k - 1 - i)) & 1 else -1 for i in range(k))
    return MeasureResult("N", k, value, {"X": X, "M": M}, True, EXACT)


# -- exact max over orders (bit kernel) --------------------------------------------

def max_correlation(E, k_max: int) -> MeasureResult:
    """Exact ``max_{1<=k<=k_max} C_k`` for short sequences (N <= 62).

    Shapes are bit masks over lags; the product at shift n is the parity of
    ``mask & (neg >> n)`` where ``neg`` marks the -1 positions.
    """
    e = _as_array(E)
    N = e.size
    if N > 62:
        raise ValueError("bit kernel supports N <= 62")
    k_max = min(k_max, N)
    neg = 0
    for i, v in enumerate(e.tolist()):
        if v < 0:
            neg |= 1 << i
    best, wit = 0, None
    for top in range(N):
        L = N - top
        if L <= best:
            break
        if top == 0:
            masks = np.array([1], dtype=np.uint64)
        else:
            if k_max < 2:
                break
            inner = np.arange(1 << max(top - 1, 0), dtype=np.uint64)
            inner = inner[np.bitwise_count(inner) <= k_max - 2]
            masks = (inner << np.uint64(1)) | np.uint64(1 | (1 << top))
        shifted = np.array([neg >> n for n in range(L)], dtype=np.uint64)
        step = max(1, _CHUNK // L)
        for start in range(0, masks.size, step):
            m = masks[start:start + step]
            par = np.bitwise_count(m[:, None] & shifted[None, :]) & 1
            G = (1 - 2 * par.astype(np.int8)).astype(np.int8)
            vals = _window_max(G, L - 1)
            i = int(np.argmax(vals))
            if vals[i] > best:
                best = int(vals[i])
                wit = (int(m[i]), G[i].copy())
    mask, g = wit
    s, M = _window_witness(g.astype(np.int64), g.size - 1, best)
    shape = [d for d in range(N) if mask >> d & 1]
    witness = {"D": tuple(d + s for d in shape), "M": M, "k": len(shape)}
    return MeasureResult("Cmax", k_max, best, witness, True, EXACT)


# -- witness recomputation ---------------------------------------------------------

def _take(e: np.ndarray, idx: np.ndarray) -> np.ndarray:
    # numpy would wrap negative indices silently
    if idx.size and (idx.min() < 0 or idx.max() >= e.size):
        raise ValueError("witness reaches outside the sequence")
    return e[idx]


def witness_sum(E, result: MeasureResult) -> float:
    """Recompute the defining sum at ``result.witness`` (absolute value)."""
    e = _as_array(E).astype(np.int64)
    w = result.witness
    if result.measure == "W":
        idx = w["a"] - 1 + w["b"] * np.arange(w["t"])
        return abs(int(_take(e, idx).sum()))
    if result.measure in ("C", "Cmax"):
        n = np.arange(1, w["M"] + 1)
        prod = np.ones(w["M"], dtype=np.int64)
        for d in w["D"]:
            prod *= _take(e, n + d - 1)
        return abs(int(prod.sum()))
    if result.measure == "Q":
        j = np.arange(w["t"] + 1)
        prod = np.ones(j.size, dtype=np.int64)
        for d in w["D"]:
            prod *= _take(e, w["a"] + j * w["b"] + d - 1)
        return abs(int(prod.sum()))
    if result.measure == "N":
        k = result.k
        X = np.array(w["X"])
        if w["M"] + k - 1 > e.size:
            raise ValueError("witness reaches outside the sequence")
        count = sum(1 for n in range(w["M"]) if np.array_equal(e[n:n + k], X))
        return abs(count - w["M"] / 2**k)
    raise ValueError(f"unknown measure {result.measure!r}")


# -- closed-form bounds ------------------------------------------------------------

def theoretical_bound(kind: str, **params) -> float:
    """Right-hand sides of the construction theorems (natural log).

    kinds: ``legendre-W`` (p, k), ``legendre-C`` (p, k, l), ``ec-W`` (p, T, k),
    ``ec-C`` (p, T, k, l).
    """
    if any(v <= 0 for v in params.values()):
        raise ValueError("bound parameters must be positive")
    try:
        if kind == "legendre-W":
            return 10 * params["k"] * math.sqrt(params["p"]) * math.log(params["p"])
        if kind == "legendre-C":
            p = params["p"]
            return 10 * params["k"] * params["l"] * math.sqrt(p) * math.log(p)
        if kind == "ec-W":
            return 6 * params["k"] * math.sqrt(params["p"]) * math.log(params["T"])
        if kind == "ec-C":
            return 2 * params["l"] * params["k"] * math.sqrt(params["p"]) * math.log(params["T"])
    except KeyError as exc:
        raise ValueError(f"missing parameter {exc} for {kind}") from None
    raise ValueError(f"unknown bound kind {kind!r}")
