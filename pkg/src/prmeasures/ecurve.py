"""Short Weierstrass curves ``y^2 = x^3 + Ax + B`` over F_p.

Points are affine ``(x, y)`` tuples; the point at infinity is ``INFINITY``
(``None``). Arithmetic is affine with one modular inversion per addition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .numtheory import is_prime, legendre_array, parse_poly

__all__ = [
    "INFINITY",
    "Point",
    "CurveParams",
    "CurveFunction",
    "InvalidPointError",
    "PointAtInfinityError",
    "on_curve",
    "ec_neg",
    "ec_add",
    "ec_scalar_mul",
    "count_points",
    "curve_function_eval",
    "multiples",
    "MAX_SWEEP_PRIME",
]

Point = Optional[tuple[int, int]]
INFINITY: Point = None

MAX_SWEEP_PRIME = 2**26


class InvalidPointError(ValueError):
    pass


class PointAtInfinityError(ValueError):
    """A curve function has no affine value at the point at infinity."""


@dataclass(frozen=True)
class CurveParams:
    p: int
    A: int
    B: int

    def __post_init__(self):
        if self.p <= 3 or not is_prime(self.p):
            raise ValueError(f"p={self.p} must be a prime > 3")
        object.__setattr__(self, "A", self.A % self.p)
        object.__setattr__(self, "B", self.B % self.p)
        if (4 * self.A**3 + 27 * self.B**2) % self.p == 0:
            raise ValueError("singular curve (zero discriminant)")

    def rhs(self, x: int) -> int:
        return (x * x * x + self.A * x + self.B) % self.p


def on_curve(P: Point, c: CurveParams) -> bool:
    if P is INFINITY:
        return True
    x, y = P
    if not (0 <= x < c.p and 0 <= y < c.p):
        return False
    return (y * y - c.rhs(x)) % c.p == 0


def _require(P: Point, c: CurveParams) -> None:
    if not on_curve(P, c):
        raise InvalidPointError(f"{P} is not on {c}")


def ec_neg(P: Point, c: CurveParams) -> Point:
    if P is INFINITY:
        return P
    return (P[0], (-P[1]) % c.p)


def _add(P: Point, Q: Point, c: CurveParams) -> Point:
    if P is INFINITY:
        return Q
    if Q is INFINITY:
        return P
    p = c.p
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return INFINITY
        lam = (3 * x1 * x1 + c.A) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def ec_add(P: Point, Q: Point, c: CurveParams, validate: bool = True) -> Point:
    """Chord-and-tangent group law."""
    if validate:
        _require(P, c)
        _require(Q, c)
    return _add(P, Q, c)


def ec_scalar_mul(n: int, P: Point, c: CurveParams, validate: bool = True) -> Point:
    """``n*P`` by left-to-right double-and-add."""
    if n < 0:
        raise ValueError("scalar must be non-negative")
    if validate:
        _require(P, c)
    R = INFINITY
    for bit in bin(n)[2:]:
        R = _add(R, R, c)
        if bit == "1":
            R = _add(R, P, c)
    return R


def count_points(c: CurveParams, limit: int = MAX_SWEEP_PRIME) -> int:
    """``#E(F_p)`` by summing Legendre symbols of the cubic over all x."""
    if c.p > limit:
        raise ValueError(f"p={c.p} above the O(p) sweep limit {limit}")
    xs = np.arange(c.p, dtype=np.int64)
    rhs = (xs * xs % c.p * xs + c.A * xs + c.B) % c.p
    return c.p + 1 + int(legendre_array(rhs, c.p).sum(dtype=np.int64))


@dataclass(frozen=True)
class CurveFunction:
    """A polynomial in the coordinate functions x and y of a curve.

    ``terms`` maps ``(i, j)`` to the coefficient of ``x^i y^j``. Use
    :meth:`reduced` to bring the y-degree below 2 with the curve equation.
    """

    terms: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "CurveFunction":
        return cls(parse_poly(text, "xy"))

    def shifted(self, constant: int) -> "CurveFunction":
        terms = dict(self.terms)
        terms[(0, 0)] = terms.get((0, 0), 0) + constant
        return CurveFunction(terms)

    def reduced(self, c: CurveParams) -> "CurveFunction":
        p = c.p
        out: dict[tuple[int, int], int] = {}
        cubic = {3: 1, 1: c.A, 0: c.B}  # y^2 in terms of x
        for (i, j), coef in self.terms.items():
            # y^j = y^(j mod 2) * (x^3 + Ax + B)^(j // 2)
            poly = {i: coef % p}
            for _ in range(j // 2):
                nxt: dict[int, int] = {}
                for a, ca in poly.items():
                    for b, cb in cubic.items():
                        nxt[a + b] = (nxt.get(a + b, 0) + ca * cb) % p
                poly = nxt
            for e, ce in poly.items():
                key = (e, j % 2)
                out[key] = (out.get(key, 0) + ce) % p
        return CurveFunction({k: v for k, v in out.items() if v})

    def degree(self, c: CurveParams) -> int:
        """Pole order at infinity: ``deg x = 2``, ``deg y = 3``."""
        red = self.reduced(c)
        if not red.terms:
            return 0
        return max(2 * i + 3 * j for i, j in red.terms)

    def evaluate_array(self, xs: np.ndarray, ys: np.ndarray, p: int) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64) % p
        ys = np.asarray(ys, dtype=np.int64) % p
        acc = np.zeros_like(xs)
        for (i, j), coef in sorted(self.terms.items()):
            term = np.full_like(xs, coef % p)
            for _ in range(i):
                term = term * xs % p
            for _ in range(j):
                term = term * ys % p
            acc = (acc + term) % p
        return acc


def curve_function_eval(f: CurveFunction, P: Point, p: int) -> int:
    if P is INFINITY:
        raise PointAtInfinityError("curve function evaluated at infinity")
    x, y = P
    return sum(coef * pow(x, i, p) * pow(y, j, p) for (i, j), coef in f.terms.items()) % p


def multiples(G: Point, T: int, c: CurveParams) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates of ``nG`` for ``n = 1..T-1``, checking that ``TG = O``.

    Raises InvalidPointError if ``G`` is off the curve or its order is not
    exactly ``T``.
    """
    _require(G, c)
    if G is INFINITY or T < 1:
        raise InvalidPointError("generator must be affine with positive order")
    xs = np.empty(T - 1, dtype=np.int64)
    ys = np.empty(T - 1, dtype=np.int64)
    R = G
    for n in range(1, T):
        if R is INFINITY:
            raise InvalidPointError(f"order of {G} is {n}, not {T}")
        xs[n - 1], ys[n - 1] = R
        R = _add(R, G, c)
    if R is not INFINITY:
        raise InvalidPointError(f"{T}*G is not the point at infinity")
    return xs, ys
