"""Modular arithmetic over odd prime moduli.

Polynomials over F_p are plain sequences of coefficients stored lowest
degree first: ``[c0, c1, ..., ck]`` is ``c0 + c1*x + ... + ck*x**k``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = [
    "NotInvertibleError",
    "mod_pow",
    "legendre_symbol",
    "jacobi_symbol",
    "mod_inverse",
    "is_prime",
    "factorize",
    "is_primitive_root",
    "poly_eval",
    "poly_eval_array",
    "legendre_array",
    "inverse_array",
    "poly_degree",
    "normalize_poly",
    "poly_derivative",
    "poly_gcd",
    "is_squarefree",
    "parse_poly",
    "poly_from_string",
]

# Residues fit in 64 bits; vectorised paths need p*p < 2**63.
MAX_MODULUS = 2**63
_VECTOR_LIMIT = 2**31

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class NotInvertibleError(ZeroDivisionError):
    """Raised when inverting a residue divisible by the modulus."""


def _check_modulus(m: int) -> None:
    if m <= 0:
        raise ValueError(f"invalid modulus {m}")
    if m >= MAX_MODULUS:
        raise ValueError(f"modulus {m} exceeds 64-bit range")


def _check_odd_prime(p: int) -> None:
    _check_modulus(p)
    if p < 3 or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime")


def mod_pow(base: int, exponent: int, m: int) -> int:
    """Return ``base**exponent mod m`` by square-and-multiply."""
    _check_modulus(m)
    if exponent < 0:
        raise ValueError("exponent must be non-negative")
    result = 1 % m
    base %= m
    while exponent:
        if exponent & 1:
            result = result * base % m
        base = base * base % m
        exponent >>= 1
    return result


def legendre_symbol(n: int, p: int) -> int:
    """Legendre symbol (n/p) via Euler's criterion."""
    _check_odd_prime(p)
    r = mod_pow(n, (p - 1) // 2, p)
    if r == 0:
        return 0
    return 1 if r == 1 else -1


def jacobi_symbol(n: int, m: int) -> int:
    # Reciprocity-based; used as a fast path and cross-check only.
    if m <= 0 or m % 2 == 0:
        raise ValueError("modulus must be odd and positive")
    n %= m
    result = 1
    while n:
        while n % 2 == 0:
            n //= 2
            if m % 8 in (3, 5):
                result = -result
        n, m = m, n
        if n % 4 == 3 and m % 4 == 3:
            result = -result
        n %= m
    return result if m == 1 else 0


def mod_inverse(a: int, p: int) -> int:
    """Least non-negative ``r`` with ``a*r = 1 (mod p)``."""
    _check_modulus(p)
    a %= p
    if a == 0:
        raise NotInvertibleError(f"0 has no inverse modulo {p}")
    # extended Euclid
    r0, r1 = p, a
    s0, s1 = 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if r0 != 1:
        raise NotInvertibleError(f"{a} is not invertible modulo {p}")
    return s0 % p


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every 64-bit input."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation by trial division (fine for desk-scale ``n``)."""
    if n < 1:
        raise ValueError("n must be positive")
    factors: dict[int, int] = {}
    q = 2
    while q * q <= n:
        while n % q == 0:
            factors[q] = factors.get(q, 0) + 1
            n //= q
        q += 1 if q == 2 else 2
    if n > 1:
        factors[n] = factors.get(n, 0) + 1
    return factors


def is_primitive_root(g: int, p: int) -> bool:
    """True iff ``g`` has multiplicative order ``p - 1`` modulo ``p``."""
    _check_odd_prime(p)
    if g % p == 0:
        raise ValueError("0 is not a unit")
    return all(mod_pow(g, (p - 1) // q, p) != 1 for q in factorize(p - 1))


def normalize_poly(coeffs: Sequence[int], p: int) -> list[int]:
    """Reduce coefficients mod p and strip zero leading terms."""
    out = [c % p for c in coeffs]
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out or [0]


def poly_degree(coeffs: Sequence[int], p: int) -> int:
    c = normalize_poly(coeffs, p)
    return 0 if c == [0] else len(c) - 1


def poly_derivative(coeffs: Sequence[int], p: int) -> list[int]:
    return normalize_poly([i * c for i, c in enumerate(coeffs)][1:] or [0], p)


def _poly_mod(a: list[int], b: list[int], p: int) -> list[int]:
    a = list(a)
    inv = mod_inverse(b[-1], p)
    while len(a) >= len(b) and a != [0]:
        q = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] = (a[shift + i] - q * c) % p
        a = normalize_poly(a, p)
        if len(a) == 1 and len(b) == 1:
            return [0]
    return a


def poly_gcd(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    """Monic gcd over F_p (``[0]`` when both are zero)."""
    a, b = normalize_poly(a, p), normalize_poly(b, p)
    while b != [0]:
        a, b = b, _poly_mod(a, b, p)
    if a == [0]:
        return a
    inv = mod_inverse(a[-1], p)
    return [c * inv % p for c in a]


def is_squarefree(coeffs: Sequence[int], p: int) -> bool:
    """True iff f has no multiple zero in the algebraic closure of F_p."""
    f = normalize_poly(coeffs, p)
    if poly_degree(f, p) < 1:
        return False
    df = poly_derivative(f, p)
    if df == [0]:
        return False  # f is a p-th power
    return len(poly_gcd(f, df, p)) == 1


def poly_eval(coeffs: Sequence[int], x: int, p: int) -> int:
    """Horner evaluation of a lowest-degree-first polynomial, result in [0, p)."""
    _check_modulus(p)
    acc = 0
    x %= p
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def poly_eval_array(coeffs: Sequence[int], xs: np.ndarray, p: int) -> np.ndarray:
    """Vectorised Horner evaluation over an integer array."""
    _check_modulus(p)
    if p >= _VECTOR_LIMIT:
        return np.array([poly_eval(coeffs, int(x), p) for x in xs], dtype=object)
    xs = np.asarray(xs, dtype=np.int64) % p
    acc = np.zeros_like(xs)
    for c in reversed(coeffs):
        acc = (acc * xs + (c % p)) % p
    return acc


def _pow_array(values: np.ndarray, exponent: int, p: int) -> np.ndarray:
    result = np.ones_like(values)
    base = values % p
    while exponent:
        if exponent & 1:
            result = result * base % p
        base = base * base % p
        exponent >>= 1
    return result


def legendre_array(values: np.ndarray, p: int) -> np.ndarray:
    """Elementwise Legendre symbol of residues, as int8 in {-1, 0, 1}."""
    _check_odd_prime(p)
    values = np.asarray(values)
    if p >= _VECTOR_LIMIT:
        return np.array([legendre_symbol(int(v), p) for v in values], dtype=np.int8)
    r = _pow_array(values.astype(np.int64) % p, (p - 1) // 2, p)
    out = np.where(r == 1, 1, -1).astype(np.int8)
    out[r == 0] = 0
    return out


def inverse_array(values: np.ndarray, p: int) -> np.ndarray:
    """Elementwise least non-negative inverse; 0 maps to 0 (caller checks)."""
    _check_odd_prime(p)
    values = np.asarray(values)
    if p >= _VECTOR_LIMIT:
        return np.array([mod_inverse(int(v), p) if v % p else 0 for v in values],
                        dtype=object)
    return _pow_array(values.astype(np.int64) % p, p - 2, p)


def parse_poly(text: str, variables: str = "xy") -> dict[tuple[int, ...], int]:
    """Parse an integer polynomial such as ``"x^31 + x + y - 3"``.

    Returns a mapping from exponent tuples (one entry per variable, in the
    order of ``variables``) to integer coefficients. Terms are written as an
    optional integer coefficient followed by powers of the variables, with
    optional ``*`` between factors; ``**`` is accepted for ``^``.
    """
    src = text.replace("**", "^").replace(" ", "")
    if not src:
        raise ValueError("empty polynomial")
    terms: dict[tuple[int, ...], int] = {}
    pos = 0
    n = len(src)
    while pos < n:
        sign = 1
        if src[pos] in "+-":
            sign = -1 if src[pos] == "-" else 1
            pos += 1
        elif pos:
            raise ValueError(f"expected '+' or '-' at offset {pos} in {text!r}")
        start = pos
        while pos < n and src[pos].isdigit():
            pos += 1
        coeff = int(src[start:pos]) if pos > start else 1
        exps = [0] * len(variables)
        seen_factor = pos > start
        while pos < n and src[pos] not in "+-":
            if src[pos] == "*":
                pos += 1
                continue
            var = variables.find(src[pos])
            if var < 0:
                raise ValueError(f"unexpected {src[pos]!r} at offset {pos} in {text!r}")
            pos += 1
            power = 1
            if pos < n and src[pos] == "^":
                pos += 1
                start = pos
                while pos < n and src[pos].isdigit():
                    pos += 1
                if pos == start:
                    raise ValueError(f"missing exponent at offset {pos} in {text!r}")
                power = int(src[start:pos])
            exps[var] += power
            seen_factor = True
        if not seen_factor:
            raise ValueError(f"empty term at offset {pos} in {text!r}")
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + sign * coeff
    return {k: v for k, v in terms.items() if v} or {tuple([0] * len(variables)): 0}


def poly_from_string(text: str, p: int) -> list[int]:
    """Univariate polynomial in ``x`` as a lowest-degree-first coefficient list."""
    terms = parse_poly(text, "x")
    coeffs = [0] * (max(k[0] for k in terms) + 1)
    for (e,), c in terms.items():
        coeffs[e] += c
    return normalize_poly(coeffs, p)
