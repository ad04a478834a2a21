"""Binary +/-1 sequences, their generators and on-disk formats.

Index conventions differ per generator and are stated on each one; a
:class:`BinarySequence` itself is plain position-agnostic storage whose
first element plays the role of ``e_1`` in every measure.
"""

from __future__ import annotations

import functools
import os
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from . import numtheory as nt
from .ecurve import CurveFunction, CurveParams, multiples

__all__ = [
    "BinarySequence",
    "MAX_LENGTH",
    "SequenceFormatError",
    "MalformedHeaderError",
    "BadSymbolError",
    "TruncatedPayloadError",
    "gen_legendre",
    "gen_inverse",
    "gen_ec",
    "gen_rudin_shapiro",
    "gen_thue_morse",
    "gen_periodic",
    "to_bits",
    "from_bits",
    "read_sequence",
    "write_sequence",
    "encode",
    "decode",
    "LegendreSpec",
    "InverseSpec",
    "EllipticCurveSpec",
    "RudinShapiroSpec",
    "ThueMorseSpec",
    "PeriodicSpec",
    "spec_from_dict",
    "legendre_family_poly",
    "inverse_family_poly",
    "ec_family_function",
]

MAX_LENGTH = 2**28
HEADER_BYTES = 8


class BinarySequence:
    """Immutable finite sequence over {-1, +1}.

    Backed by a read-only ``int8`` array; ``values`` exposes it directly.
    """

    __slots__ = ("_values", "_packed")

    def __init__(self, values: Union[Iterable[int], np.ndarray]):
        arr = np.array(values, dtype=np.int64 if not isinstance(values, np.ndarray) else None)
        if arr.ndim != 1:
            raise ValueError("sequence must be one-dimensional")
        if arr.size == 0:
            raise ValueError("sequence must be non-empty")
        if arr.size > MAX_LENGTH:
            raise ValueError(f"sequence length {arr.size} exceeds cap {MAX_LENGTH}")
        if not np.all((arr == 1) | (arr == -1)):
            raise ValueError("elements must be -1 or +1")
        arr = arr.astype(np.int8)
        arr.flags.writeable = False
        self._values = arr
        self._packed = None

    @classmethod
    def _trusted(cls, arr: np.ndarray) -> "BinarySequence":
        obj = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.int8)
        arr.flags.writeable = False
        obj._values = arr
        obj._packed = None
        return obj

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self) -> int:
        return self._values.size

    def __iter__(self):
        return iter(self._values.tolist())

    def __getitem__(self, item):
        if isinstance(item, slice):
            return BinarySequence._trusted(self._values[item])
        return int(self._values[item])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinarySequence):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def __hash__(self) -> int:
        return hash((len(self), self.packed()))

    def __neg__(self) -> "BinarySequence":
        return BinarySequence._trusted(-self._values)

    def __repr__(self) -> str:
        head = "".join("+" if v > 0 else "-" for v in self._values[:32].tolist())
        more = "..." if len(self) > 32 else ""
        return f"BinarySequence(N={len(self)}, {head}{more})"

    def bits(self) -> np.ndarray:
        """Bit form: +1 -> 1, -1 -> 0."""
        return (self._values > 0).astype(np.uint8)

    def packed(self) -> bytes:
        if self._packed is None:
            self._packed = np.packbits(self.bits(), bitorder="little").tobytes()
        return self._packed

    def tolist(self) -> list[int]:
        return self._values.tolist()


def to_bits(E: BinarySequence) -> list[int]:
    return E.bits().tolist()


def from_bits(bits: Iterable[int]) -> BinarySequence:
    arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError("bits must be 0 or 1")
    if arr.size == 0:
        raise ValueError("sequence must be non-empty")
    return BinarySequence._trusted(2 * arr.astype(np.int8) - 1)


# -- generators --------------------------------------------------------------

def _signs(mask_plus: np.ndarray) -> BinarySequence:
    return BinarySequence._trusted(np.where(mask_plus, 1, -1))


def gen_legendre(p: int, f: Sequence[int]) -> BinarySequence:
    """``e_n = (f(n)/p)``, with ``+1`` where ``p | f(n)``; ``n = 1..p``."""
    f = nt.normalize_poly(f, p)
    if nt.poly_degree(f, p) < 1:
        raise ValueError("f must have degree >= 1")
    ns = np.arange(1, p + 1, dtype=np.int64)
    chi = nt.legendre_array(nt.poly_eval_array(f, ns, p), p)
    return _signs(chi >= 0)


def gen_inverse(p: int, f: Sequence[int], half: bool = False) -> BinarySequence:
    """Sign of the inverse of ``f(n)`` relative to ``p/2``, for ``n = 0..p-1``.

    ``e_n = +1`` iff ``f(n)`` is invertible and ``r_p(f(n)^-1) < p/2``. With
    ``half=True`` only ``n = 0..(p-1)/2`` is kept, giving ``(p+1)/2`` terms.
    """
    f = nt.normalize_poly(f, p)
    last = (p - 1) // 2 if half else p - 1
    ns = np.arange(0, last + 1, dtype=np.int64)
    vals = nt.poly_eval_array(f, ns, p)
    inv = nt.inverse_array(vals, p)
    plus = (vals % p != 0) & (2 * inv < p)
    return _signs(np.asarray(plus, dtype=bool))


@functools.lru_cache(maxsize=4)
def _walk(curve: CurveParams, G: tuple[int, int], T: int):
    xs, ys = multiples(G, T, curve)
    xs.flags.writeable = False
    ys.flags.writeable = False
    return xs, ys


def gen_ec(curve: CurveParams, G: tuple[int, int], T: int, f: CurveFunction) -> BinarySequence:
    """``e_n = (f(nG)/p)`` for ``n = 1..T``; ``+1`` when ``p | f(nG)`` or ``nG = O``."""
    xs, ys = _walk(curve, tuple(G), T)
    vals = f.evaluate_array(xs, ys, curve.p)
    chi = nt.legendre_array(vals, curve.p)
    # n = T gives the point at infinity
    return _signs(np.append(chi >= 0, True))


def gen_thue_morse(N: int) -> BinarySequence:
    """``(-1)^(binary digit sum of n)`` for ``n = 0..N-1``."""
    if N < 1:
        raise ValueError("N must be positive")
    n = np.arange(N, dtype=np.uint64)
    return _signs(np.bitwise_count(n) % 2 == 0)


def gen_rudin_shapiro(N: int) -> BinarySequence:
    """``(-1)^(number of adjacent 11 digit pairs of n)`` for ``n = 0..N-1``."""
    if N < 1:
        raise ValueError("N must be positive")
    n = np.arange(N, dtype=np.uint64)
    return _signs(np.bitwise_count(n & (n >> np.uint64(1))) % 2 == 0)


def gen_periodic(pattern: Union[BinarySequence, Sequence[int]], reps: int) -> BinarySequence:
    if reps < 1:
        raise ValueError("reps must be positive")
    if not isinstance(pattern, BinarySequence):
        pattern = BinarySequence(pattern)
    return BinarySequence._trusted(np.tile(pattern.values, reps))


# -- experiment families ----------------------------------------------------------

def legendre_family_poly(i: int, degree: int = 31) -> list[int]:
    """``x^degree + i``, lowest degree first."""
    coeffs = [0] * (degree + 1)
    coeffs[0] = i
    coeffs[degree] = 1
    return coeffs


def inverse_family_poly(i: int, p: int, block: int = 15) -> list[int]:
    """``x * prod_{j=block(i-1)+1}^{block*i} (x^2 + j^2)`` reduced mod p."""
    poly = [0, 1]
    for j in range(block * (i - 1) + 1, block * i + 1):
        nxt = [0] * (len(poly) + 2)
        for k, c in enumerate(poly):
            nxt[k] = (nxt[k] + c * j * j) % p
            nxt[k + 2] = (nxt[k + 2] + c) % p
        poly = nxt
    return poly


def ec_family_function(i: int, degree: int = 31) -> CurveFunction:
    """``x^degree + x + y + i``."""
    terms = {(degree, 0): 1, (1, 0): 1, (0, 1): 1}
    if i:
        terms[(0, 0)] = i
    return CurveFunction(terms)


# -- generator specs -------------------------------------------------------------

@dataclass(frozen=True)
class LegendreSpec:
    p: int
    f: tuple[int, ...]
    kind: str = "legendre"

    def generate(self) -> BinarySequence:
        return gen_legendre(self.p, self.f)


@dataclass(frozen=True)
class InverseSpec:
    p: int
    f: tuple[int, ...]
    half: bool = False
    kind: str = "inverse"

    def generate(self) -> BinarySequence:
        return gen_inverse(self.p, self.f, self.half)


@dataclass(frozen=True)
class EllipticCurveSpec:
    p: int
    A: int
    B: int
    G: tuple[int, int]
    T: int
    f: str
    kind: str = "ec"

    @property
    def curve(self) -> CurveParams:
        return CurveParams(self.p, self.A, self.B)

    def generate(self) -> BinarySequence:
        return gen_ec(self.curve, self.G, self.T, CurveFunction.parse(self.f))


@dataclass(frozen=True)
class RudinShapiroSpec:
    N: int
    kind: str = "rudin-shapiro"

    def generate(self) -> BinarySequence:
        return gen_rudin_shapiro(self.N)


@dataclass(frozen=True)
class ThueMorseSpec:
    N: int
    kind: str = "thue-morse"

    def generate(self) -> BinarySequence:
        return gen_thue_morse(self.N)


@dataclass(frozen=True)
class PeriodicSpec:
    pattern: tuple[int, ...]
    reps: int
    kind: str = "periodic"

    def generate(self) -> BinarySequence:
        return gen_periodic(self.pattern, self.reps)


_SPECS = {cls.kind: cls for cls in (LegendreSpec, InverseSpec, EllipticCurveSpec,
                                    RudinShapiroSpec, ThueMorseSpec, PeriodicSpec)}


def spec_to_dict(spec) -> dict:
    return asdict(spec)


def spec_from_dict(data: dict):
    data = dict(data)
    kind = data.get("kind")
    if kind not in _SPECS:
        raise ValueError(f"unknown generator kind {kind!r}")
    for key in ("f", "pattern", "G"):
        if key in data and isinstance(data[key], list):
            data[key] = tuple(data[key])
    return _SPECS[kind](**data)


# -- file formats --------------------------------------------------------------

class SequenceFormatError(ValueError):
    pass


class MalformedHeaderError(SequenceFormatError):
    pass


class BadSymbolError(SequenceFormatError):
    def __init__(self, offset: int, symbol: str):
        super().__init__(f"bad symbol {symbol!r} at offset {offset}")
        self.offset = offset
        self.symbol = symbol


class TruncatedPayloadError(SequenceFormatError):
    pass


def encode(E: BinarySequence, fmt: str = "ascii") -> bytes:
    if fmt == "ascii":
        return (E.bits() + ord("0")).astype(np.uint8).tobytes() + b"\n"
    if fmt == "packed":
        return len(E).to_bytes(HEADER_BYTES, "little") + E.packed()
    raise ValueError(f"unknown format {fmt!r}")


def decode(data: bytes, fmt: str = "ascii") -> BinarySequence:
    if fmt == "ascii":
        raw = np.frombuffer(data, dtype=np.uint8)
        space = np.isin(raw, np.frombuffer(b" \t\r\n\v\f", dtype=np.uint8))
        bad = ~space & (raw != ord("0")) & (raw != ord("1"))
        if bad.any():
            off = int(np.argmax(bad))
            raise BadSymbolError(off, chr(raw[off]))
        bits = raw[~space] - ord("0")
        if bits.size == 0:
            raise SequenceFormatError("no symbols in input")
        return from_bits(bits)
    if fmt == "packed":
        if len(data) < HEADER_BYTES:
            raise MalformedHeaderError(f"need {HEADER_BYTES} header bytes, got {len(data)}")
        n = int.from_bytes(data[:HEADER_BYTES], "little")
        if n < 1 or n > MAX_LENGTH:
            raise MalformedHeaderError(f"declared length {n} out of range")
        need = (n + 7) // 8
        payload = data[HEADER_BYTES:]
        if len(payload) < need:
            raise TruncatedPayloadError(f"expected {need} payload bytes, got {len(payload)}")
        if len(payload) > need:
            raise MalformedHeaderError(f"{len(payload) - need} trailing bytes after payload")
        bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), bitorder="little")
        if bits[n:].any():
            raise SequenceFormatError("non-zero padding bits in final byte")
        return from_bits(bits[:n])
    raise ValueError(f"unknown format {fmt!r}")


def read_sequence(path: Union[str, os.PathLike], fmt: str = "ascii") -> BinarySequence:
    with open(path, "rb") as fh:
        return decode(fh.read(), fmt)


def write_sequence(path: Union[str, os.PathLike], fmt: str, E: BinarySequence) -> None:
    with open(path, "wb") as fh:
        fh.write(encode(E, fmt))
