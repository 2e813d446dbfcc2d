"""Symbol streams over {1,2,3,4} encoding normalised power series.

Stream position ``p`` (1-based) feeds channel ``t_p`` of the interleaving
0, 0, 1, 0, 1, 2, 0, 1, 2, 3, ...  Channel ``n >= 1`` carries the quadrant
digits of the coefficient ``a_n`` of ``f'(z) = 1 + sum a_n z**n`` inside the
root square ``[-m_n, m_n]**2``.  Channel 0 is read by nobody.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from .dyadic import QUADRANT_BITS, Box, ComplexDyadic, Dyadic, check_symbol, parse_dyadic
from .errors import CoefficientOutOfBounds, FormatError, InvalidSymbol

DEFAULT_PAD = 1


def _tri(b: int) -> int:
    return b * (b + 1) // 2


def channel_of(p: int) -> tuple[int, int]:
    """``(channel, digit index)`` of stream position ``p``; digit indices start at 1."""
    if p < 1:
        raise IndexError("stream positions start at 1")
    b = (math.isqrt(8 * (p - 1) + 1) - 1) // 2
    v = p - 1 - _tri(b)
    return v, b - v + 1


def position(n: int, k: int) -> int:
    """Stream position of the ``k``-th digit (1-based) of channel ``n``."""
    if n < 0 or k < 1:
        raise ValueError("channel >= 0 and digit index >= 1 required")
    return _tri(n + k - 1) + 1 + n


def channel_positions(n: int, count: int) -> list[int]:
    return [position(n, k) for k in range(1, count + 1)]


def interleaving(length: int) -> list[int]:
    """The first ``length`` terms ``t_1, t_2, ...`` of the schedule."""
    return [channel_of(p)[0] for p in range(1, length + 1)]


class QueryLog:
    """Largest stream index consulted; 0 while untouched."""

    __slots__ = ("max_index",)

    def __init__(self, max_index: int = 0):
        self.max_index = max_index

    def record(self, p: int) -> None:
        if p > self.max_index:
            self.max_index = p

    def merge(self, other: "QueryLog") -> None:
        self.record(other.max_index)

    def __repr__(self):
        return f"QueryLog(max_index={self.max_index})"


class WordSource:
    """A finite word followed by a constant padding symbol."""

    def __init__(self, word: str | Sequence[int] = "", pad: int = DEFAULT_PAD):
        self.word = tuple(check_symbol(int(c)) for c in word)
        self.pad = check_symbol(int(pad))

    def symbol(self, p: int) -> int:
        return self.word[p - 1] if p <= len(self.word) else self.pad

    def describe(self) -> str:
        return "".join(map(str, self.word)) + f"({self.pad})^inf"


class SteeredSource:
    """Procedural source whose channel digits home in on target coefficients.

    Channel ``n`` digit ``k`` picks the lowest-numbered quadrant whose closed
    box contains the target; digits past ``depth`` (if set) are ``pad``.
    """

    def __init__(self, targets: dict[int, Fraction], imag: dict[int, Fraction], bound: Callable[[int], Dyadic],
                 depth: int | None = None, pad: int = DEFAULT_PAD):
        self._re = targets
        self._im = imag
        self._bound = bound
        self.depth = depth
        self.pad = check_symbol(pad)
        self._digits: dict[int, list[int]] = {}
        self._state: dict[int, tuple[int, int]] = {}
        self._lock = threading.Lock()

    def _unit(self, n: int) -> tuple[Fraction, Fraction]:
        m = self._bound(n).to_fraction()
        re = self._re.get(n, Fraction(0))
        im = self._im.get(n, Fraction(0))
        return (re + m) / (2 * m), (im + m) / (2 * m)

    def digit(self, n: int, k: int) -> int:
        if self.depth is not None and k > self.depth:
            return self.pad
        with self._lock:
            digits = self._digits.setdefault(n, [])
            if len(digits) < k:
                ux, uy = self._unit(n)
                i, j = self._state.get(n, (0, 0))
                while len(digits) < k:
                    scale = 1 << (len(digits) + 1)
                    sx, sy = ux * scale, uy * scale
                    for alpha in (1, 2, 3, 4):
                        bx, by = QUADRANT_BITS[alpha]
                        ci, cj = 2 * i + bx, 2 * j + by
                        if ci <= sx <= ci + 1 and cj <= sy <= cj + 1:
                            break
                    else:  # pragma: no cover - target checked at construction
                        raise CoefficientOutOfBounds(f"coefficient {n} escaped its box")
                    digits.append(alpha)
                    i, j = ci, cj
                self._state[n] = (i, j)
            return digits[k - 1]

    def symbol(self, p: int) -> int:
        n, k = channel_of(p)
        if n == 0:
            return self.pad
        return self.digit(n, k)

    def describe(self) -> str:
        return f"steered(depth={self.depth})"


class PiStream:
    """A view on a symbol source with its own query log.

    Views are not shared between threads; use :meth:`clone` for a fresh view
    over the same (immutable) source.
    """

    def __init__(self, source, log: QueryLog | None = None):
        self.source = source
        self.log = log if log is not None else QueryLog()
        self._digits: dict[int, list[int]] = {}

    @classmethod
    def from_word(cls, word: str | Sequence[int] = "", pad: int = DEFAULT_PAD) -> "PiStream":
        return cls(WordSource(word, pad))

    def clone(self) -> "PiStream":
        return PiStream(self.source)

    def __getitem__(self, p: int) -> int:
        if p < 1:
            raise IndexError("stream positions start at 1")
        self.log.record(p)
        return self.source.symbol(p)

    @property
    def query_depth(self) -> int:
        return self.log.max_index

    def channel_digits(self, n: int, k: int) -> list[int]:
        """First ``k`` digits of channel ``n`` (logged on first read)."""
        digits = self._digits.setdefault(n, [])
        while len(digits) < k:
            digits.append(self[position(n, len(digits) + 1)])
        return digits[:k]

    def prefix(self, length: int) -> str:
        """Unlogged export of the first ``length`` symbols."""
        return "".join(str(self.source.symbol(p)) for p in range(1, length + 1))

    def __repr__(self):
        return f"PiStream({self.source.describe()}, depth={self.query_depth})"


def query_depth(stream: PiStream) -> int:
    return stream.query_depth


def _digit_indices(digits: Sequence[int]) -> tuple[int, int]:
    i = j = 0
    for alpha in digits:
        bx, by = QUADRANT_BITS[alpha]
        i = 2 * i + bx
        j = 2 * j + by
    return i, j


def coefficient_box(stream: PiStream, schedule, n: int, k: int) -> Box:
    """Box of coefficient ``a_n`` after ``k`` digits of its channel."""
    if n < 1:
        raise ValueError("coefficients are indexed from 1")
    m = schedule.bound_m(n)
    i, j = _digit_indices(stream.channel_digits(n, k))
    step = m.shift(1 - k)
    re_lo = -m + step * i
    im_lo = -m + step * j
    return Box(re_lo, re_lo + step, im_lo, im_lo + step)


def coefficient_enclosure(stream: PiStream, schedule, n: int, k: int) -> tuple[ComplexDyadic, Dyadic]:
    """Midpoint of the ``k``-digit box of ``a_n`` and its half side length."""
    m = schedule.bound_m(n)
    i, j = _digit_indices(stream.channel_digits(n, k))
    step = m.shift(-k)
    return ComplexDyadic(-m + step * (2 * i + 1), -m + step * (2 * j + 1)), step


def encode_coefficients(coeffs: Sequence, schedule, depth: int | None = None, pad: int = DEFAULT_PAD) -> PiStream:
    """Stream whose channel ``n`` boxes contain ``coeffs[n-1]`` (0 past the list).

    With ``depth=None`` the steering never stops and the stream represents the
    polynomial exactly; otherwise channel digits past ``depth`` are ``pad``.
    """
    re: dict[int, Fraction] = {}
    im: dict[int, Fraction] = {}
    for n, c in enumerate(coeffs, start=1):
        c = ComplexDyadic.coerce(c)
        m = schedule.bound_m(n)
        if not (abs(c.re) < m and abs(c.im) < m):
            raise CoefficientOutOfBounds(f"a_{n} = {c} outside (-m_{n}, m_{n})**2 with m_{n} = {float(m):.6g}")
        if not c.re.is_zero():
            re[n] = c.re.to_fraction()
        if not c.im.is_zero():
            im[n] = c.im.to_fraction()
    return PiStream(SteeredSource(re, im, schedule.bound_m, depth, pad))


# -- file formats -------------------------------------------------------------

def read_stream_file(path: str | Path) -> PiStream:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("pad="):
        raise FormatError(f"{path}: first line must be 'pad=<symbol>'")
    try:
        pad = int(lines[0][4:].strip())
        word = lines[1].strip() if len(lines) > 1 else ""
        return PiStream.from_word(word, pad)
    except (ValueError, InvalidSymbol) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_stream_file(path: str | Path, word: str, pad: int = DEFAULT_PAD) -> None:
    Path(path).write_text(f"pad={pad}\n{word}\n")


def read_coefficient_file(path: str | Path) -> list[ComplexDyadic]:
    """Lines ``n re im``; unspecified coefficients are zero."""
    found: dict[int, ComplexDyadic] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"{path}:{lineno}: expected 'n re im'")
        n = int(parts[0])
        if n < 1:
            raise FormatError(f"{path}:{lineno}: coefficient index must be >= 1")
        found[n] = ComplexDyadic(parse_dyadic(parts[1]), parse_dyadic(parts[2]))
    size = max(found, default=0)
    return [found.get(n, ComplexDyadic(0, 0)) for n in range(1, size + 1)]


def write_coefficient_file(path: str | Path, coeffs: Sequence[ComplexDyadic]) -> None:
    rows = [f"{n} {c.re} {c.im}" for n, c in enumerate(coeffs, start=1)]
    Path(path).write_text("\n".join(rows) + ("\n" if rows else ""))
