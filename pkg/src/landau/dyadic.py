"""Exact dyadic rationals, complex dyadics and dyadic boxes.

A dyadic number is ``mantissa * 2**exponent``.  Ring operations are exact;
division and square roots are only available as approximations with an
explicit rounding direction, see :func:`approx_div` and :func:`approx_sqrt`.
"""

from __future__ import annotations

import enum
import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

from .errors import DivisionByZero, FormatError, InvalidSymbol, NegativeRadicand

__all__ = [
    "Rounding",
    "Dyadic",
    "ComplexDyadic",
    "Box",
    "ZERO",
    "ONE",
    "HALF",
    "approx_div",
    "approx_recip",
    "approx_sqrt",
    "dy_approx",
    "from_fraction",
    "e_enclosure",
    "sqrt2_enclosure",
    "parse_dyadic",
    "parse_complex",
    "pow2",
]


class Rounding(enum.Enum):
    DOWN = "down"
    UP = "up"
    NEAREST = "nearest"


def _trailing_zeros(m: int) -> int:
    return (m & -m).bit_length() - 1


class Dyadic:
    """Immutable ``mantissa * 2**exponent`` in canonical form.

    The mantissa is odd, or the value is zero with exponent 0, so two equal
    values always have equal fields.
    """

    __slots__ = ("mantissa", "exponent")

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        mantissa = int(mantissa)
        exponent = int(exponent)
        if mantissa == 0:
            exponent = 0
        elif not mantissa & 1:
            tz = _trailing_zeros(mantissa)
            mantissa >>= tz
            exponent += tz
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    def __reduce__(self):
        return (Dyadic, (self.mantissa, self.exponent))

    # -- conversions --------------------------------------------------------

    @classmethod
    def coerce(cls, x: "DyadicLike") -> "Dyadic":
        if isinstance(x, Dyadic):
            return x
        if isinstance(x, int):
            return cls(x, 0)
        if isinstance(x, float):
            if not math.isfinite(x):
                raise ValueError("non-finite float")
            num, den = x.as_integer_ratio()
            return cls(num, -(den.bit_length() - 1))
        if isinstance(x, Fraction):
            den = x.denominator
            if den & (den - 1):
                raise ValueError(f"{x} is not dyadic")
            return cls(x.numerator, -(den.bit_length() - 1))
        if isinstance(x, str):
            return parse_dyadic(x)
        raise TypeError(f"cannot convert {type(x).__name__} to Dyadic")

    def to_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.mantissa << self.exponent)
        return Fraction(self.mantissa, 1 << -self.exponent)

    def __float__(self) -> float:
        return math.ldexp(self.mantissa, self.exponent) if self.mantissa.bit_length() < 1000 else float(self.to_fraction())

    def __str__(self) -> str:
        return f"{self.mantissa}p{self.exponent}"

    def __repr__(self) -> str:
        return f"Dyadic({self.mantissa}, {self.exponent})"

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return self.mantissa == 0

    def sign(self) -> int:
        return (self.mantissa > 0) - (self.mantissa < 0)

    def is_power_of_two(self) -> bool:
        return self.mantissa == 1

    def floor_log2(self) -> int:
        """Largest ``e`` with ``2**e <= |self|``."""
        if self.mantissa == 0:
            raise ValueError("log of zero")
        return abs(self.mantissa).bit_length() - 1 + self.exponent

    # -- ring operations ----------------------------------------------------

    def _align(self, other: "Dyadic"):
        e = min(self.exponent, other.exponent)
        return self.mantissa << (self.exponent - e), other.mantissa << (other.exponent - e), e

    def __add__(self, other):
        if not isinstance(other, Dyadic):
            try:
                other = Dyadic.coerce(other)
            except TypeError:
                return NotImplemented
        if other.mantissa == 0:
            return self
        if self.mantissa == 0:
            return other
        a, b, e = self._align(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __neg__(self):
        return Dyadic(-self.mantissa, self.exponent)

    def __pos__(self):
        return self

    def __abs__(self):
        return self if self.mantissa >= 0 else -self

    def __sub__(self, other):
        if not isinstance(other, Dyadic):
            try:
                other = Dyadic.coerce(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Dyadic.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Dyadic):
            try:
                other = Dyadic.coerce(other)
            except TypeError:
                return NotImplemented
        return Dyadic(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def shift(self, k: int) -> "Dyadic":
        """Exact multiplication by ``2**k``."""
        if self.mantissa == 0:
            return self
        return Dyadic(self.mantissa, self.exponent + k)

    def half(self) -> "Dyadic":
        return self.shift(-1)

    def __pow__(self, k: int) -> "Dyadic":
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        return Dyadic(self.mantissa ** k, self.exponent * k)

    # -- comparisons --------------------------------------------------------

    def _cmp(self, other) -> int:
        if not isinstance(other, Dyadic):
            if isinstance(other, Fraction) and other.denominator & (other.denominator - 1):
                f = self.to_fraction()
                return (f > other) - (f < other)
            other = Dyadic.coerce(other)
        a, b, _ = self._align(other)
        return (a > b) - (a < b)

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self.mantissa == other.mantissa and self.exponent == other.exponent
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() == other
        return NotImplemented

    def __hash__(self):
        return hash(self.to_fraction())

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    # -- rounding -----------------------------------------------------------

    def round_to(self, n: int, rounding: Rounding = Rounding.NEAREST) -> "Dyadic":
        """Round to a multiple of ``2**-n``."""
        if self.exponent >= -n:
            return self
        return _round_scaled(self.mantissa, -n - self.exponent, n, rounding)

    def round_bits(self, bits: int, rounding: Rounding) -> "Dyadic":
        """Round to at most ``bits`` significant bits."""
        if self.mantissa == 0:
            return self
        n = bits - 1 - self.floor_log2()
        return self.round_to(n, rounding)


DyadicLike = Union[Dyadic, int, float, Fraction, str]

ZERO = Dyadic(0)
ONE = Dyadic(1)
HALF = Dyadic(1, -1)


def pow2(k: int) -> Dyadic:
    return Dyadic(1, k)


def _round_scaled(m: int, drop: int, n: int, rounding: Rounding) -> Dyadic:
    # value m * 2**-(n + drop), rounded to a multiple of 2**-n
    if rounding is Rounding.DOWN:
        q = m >> drop
    elif rounding is Rounding.UP:
        q = -((-m) >> drop)
    else:
        q = (m + (1 << (drop - 1))) >> drop
    return Dyadic(q, -n)


def _round_fraction(num: int, den: int, rounding: Rounding) -> int:
    """Round ``num/den`` (den > 0) to an integer."""
    if rounding is Rounding.DOWN:
        return num // den
    if rounding is Rounding.UP:
        return -((-num) // den)
    return (2 * num + den) // (2 * den)


def from_fraction(q: Fraction, n: int, rounding: Rounding = Rounding.NEAREST) -> Dyadic:
    """Dyadic multiple of ``2**-n`` approximating ``q`` with the given rounding."""
    q = Fraction(q)
    num, den = q.numerator, q.denominator
    if n >= 0:
        num <<= n
    else:
        den <<= -n
    return Dyadic(_round_fraction(num, den, rounding), -n)


def approx_div(x: DyadicLike, y: DyadicLike, n: int, rounding: Rounding = Rounding.NEAREST) -> Dyadic:
    """``x / y`` to within ``2**-n``; DOWN/UP give a lower/upper bound."""
    x = Dyadic.coerce(x)
    y = Dyadic.coerce(y)
    if y.mantissa == 0:
        raise DivisionByZero("division by zero")
    # x/y * 2**n = (xm / ym) * 2**(xe - ye + n)
    num, den = x.mantissa, y.mantissa
    if den < 0:
        num, den = -num, -den
    s = x.exponent - y.exponent + n
    if s >= 0:
        num <<= s
    else:
        den <<= -s
    return Dyadic(_round_fraction(num, den, rounding), -n)


def approx_recip(x: DyadicLike, n: int, rounding: Rounding = Rounding.NEAREST) -> Dyadic:
    return approx_div(ONE, x, n, rounding)


def approx_sqrt(x: DyadicLike, n: int, rounding: Rounding = Rounding.NEAREST) -> Dyadic:
    """``sqrt(x)`` to within ``2**-n``; exact squares come back exactly."""
    x = Dyadic.coerce(x)
    if x.mantissa < 0:
        raise NegativeRadicand(f"sqrt of negative value {x}")
    if x.mantissa == 0:
        return ZERO
    # sqrt(x) * 2**n = sqrt(xm * 2**(xe + 2n))
    s = x.exponent + 2 * n
    if s >= 0:
        big = x.mantissa << s
        exact_int = True
    else:
        big = x.mantissa >> -s
        exact_int = (x.mantissa & ((1 << -s) - 1)) == 0
    root = math.isqrt(big)
    is_exact = exact_int and root * root == big
    if rounding is Rounding.DOWN or is_exact:
        q = root
    elif rounding is Rounding.UP:
        q = root + 1
    else:
        # nearest: compare 4X with (2 root + 1)**2
        t = (2 * root + 1) ** 2
        if s + 2 >= 0:
            q = root + 1 if x.mantissa << (s + 2) > t else root
        else:
            q = root + 1 if x.mantissa > t << -(s + 2) else root
    return Dyadic(q, -n)


def dy_approx(op: str, x: DyadicLike, y: DyadicLike | None = None, n: int = 53,
              rounding: Rounding = Rounding.NEAREST) -> Dyadic:
    """Dispatch on ``op`` in {"div", "recip", "sqrt"}."""
    if op == "div":
        return approx_div(x, y, n, rounding)
    if op == "recip":
        return approx_recip(x, n, rounding)
    if op == "sqrt":
        return approx_sqrt(x, n, rounding)
    raise ValueError(f"unknown approximate operation {op!r}")


@lru_cache(maxsize=64)
def e_enclosure(n: int) -> tuple[Dyadic, Dyadic]:
    """Dyadic ``(lo, hi)`` with ``lo <= e <= hi`` and ``hi - lo < 2**-(n-2)``.

    Partial sums of ``sum 1/k!`` with the tail bounded by ``2/(K+1)!``.
    """
    k = 1
    fact = 1
    while fact < (1 << (n + 3)):
        k += 1
        fact *= k
    # S = sum_{j<=k} 1/j! = total / k!
    total = 0
    term = 1
    for j in range(k, -1, -1):
        total += term
        term *= j if j else 1
    den = fact
    lo = _round_fraction(total << n, den, Rounding.DOWN)
    # tail < 2/(k+1)! = 2/(den*(k+1))
    hi = _round_fraction(((total * (k + 1) + 2) << n), den * (k + 1), Rounding.UP)
    return Dyadic(lo, -n), Dyadic(hi, -n)


@lru_cache(maxsize=64)
def sqrt2_enclosure(n: int) -> tuple[Dyadic, Dyadic]:
    return approx_sqrt(2, n, Rounding.DOWN), approx_sqrt(2, n, Rounding.UP)


_DYADIC_RE = re.compile(r"^\s*([+-]?\d+)(?:[pP]([+-]?\d+))?\s*$")


def parse_dyadic(text: str) -> Dyadic:
    """Parse ``"5p-4"`` (5 * 2**-4) or a plain integer."""
    m = _DYADIC_RE.match(text)
    if not m:
        raise FormatError(f"not a dyadic literal: {text!r}")
    return Dyadic(int(m.group(1)), int(m.group(2) or 0))


def parse_complex(text: str) -> "ComplexDyadic":
    """Parse ``"re,im"`` with both parts in dyadic syntax."""
    parts = text.split(",")
    if len(parts) != 2:
        raise FormatError(f"expected 're,im', got {text!r}")
    return ComplexDyadic(parse_dyadic(parts[0]), parse_dyadic(parts[1]))


class ComplexDyadic:
    """``re + im*i`` with dyadic parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: DyadicLike = 0, im: DyadicLike = 0):
        object.__setattr__(self, "re", Dyadic.coerce(re))
        object.__setattr__(self, "im", Dyadic.coerce(im))

    def __setattr__(self, name, value):
        raise AttributeError("ComplexDyadic is immutable")

    def __reduce__(self):
        return (ComplexDyadic, (self.re, self.im))

    @classmethod
    def coerce(cls, z) -> "ComplexDyadic":
        if isinstance(z, ComplexDyadic):
            return z
        if isinstance(z, complex):
            return cls(z.real, z.imag)
        if isinstance(z, tuple):
            return cls(*z)
        if isinstance(z, str):
            return parse_complex(z)
        return cls(z, 0)

    def __add__(self, other):
        other = ComplexDyadic.coerce(other)
        return ComplexDyadic(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = ComplexDyadic.coerce(other)
        return ComplexDyadic(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return ComplexDyadic.coerce(other) - self

    def __neg__(self):
        return ComplexDyadic(-self.re, -self.im)

    def __mul__(self, other):
        other = ComplexDyadic.coerce(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        return ComplexDyadic(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def shift(self, k: int) -> "ComplexDyadic":
        return ComplexDyadic(self.re.shift(k), self.im.shift(k))

    def conj(self) -> "ComplexDyadic":
        return ComplexDyadic(self.re, -self.im)

    def norm2(self) -> Dyadic:
        """Exact ``|z|**2``."""
        return self.re * self.re + self.im * self.im

    def abs_upper(self, n: int) -> Dyadic:
        return approx_sqrt(self.norm2(), n, Rounding.UP)

    def abs_lower(self, n: int) -> Dyadic:
        return approx_sqrt(self.norm2(), n, Rounding.DOWN)

    def round_to(self, n: int, rounding: Rounding = Rounding.NEAREST) -> "ComplexDyadic":
        return ComplexDyadic(self.re.round_to(n, rounding), self.im.round_to(n, rounding))

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __eq__(self, other):
        if isinstance(other, ComplexDyadic):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __str__(self):
        return f"{self.re},{self.im}"

    def __repr__(self):
        return f"ComplexDyadic({self.re!s}, {self.im!s})"


SYMBOLS = (1, 2, 3, 4)

# (x bit, y bit) of each quadrant: 1 lower-left, 2 lower-right, 3 upper-right, 4 upper-left
QUADRANT_BITS = {1: (0, 0), 2: (1, 0), 3: (1, 1), 4: (0, 1)}


def check_symbol(alpha) -> int:
    if alpha not in QUADRANT_BITS:
        raise InvalidSymbol(f"symbol {alpha!r} not in {{1,2,3,4}}")
    return alpha


class Box:
    """Axis-aligned rectangle ``[re_lo, re_hi] x [im_lo, im_hi]`` with dyadic corners."""

    __slots__ = ("re_lo", "re_hi", "im_lo", "im_hi")

    def __init__(self, re_lo: DyadicLike, re_hi: DyadicLike, im_lo: DyadicLike, im_hi: DyadicLike):
        re_lo, re_hi = Dyadic.coerce(re_lo), Dyadic.coerce(re_hi)
        im_lo, im_hi = Dyadic.coerce(im_lo), Dyadic.coerce(im_hi)
        if re_lo > re_hi or im_lo > im_hi:
            raise ValueError("box with inverted bounds")
        object.__setattr__(self, "re_lo", re_lo)
        object.__setattr__(self, "re_hi", re_hi)
        object.__setattr__(self, "im_lo", im_lo)
        object.__setattr__(self, "im_hi", im_hi)

    def __setattr__(self, name, value):
        raise AttributeError("Box is immutable")

    @classmethod
    def square(cls, m: DyadicLike) -> "Box":
        """The centred square ``[-m, m]**2``."""
        m = Dyadic.coerce(m)
        return cls(-m, m, -m, m)

    def child(self, alpha: int) -> "Box":
        bx, by = QUADRANT_BITS[check_symbol(alpha)]
        cm = (self.re_lo + self.re_hi).half()
        dm = (self.im_lo + self.im_hi).half()
        re = (cm, self.re_hi) if bx else (self.re_lo, cm)
        im = (dm, self.im_hi) if by else (self.im_lo, dm)
        return Box(re[0], re[1], im[0], im[1])

    def refine(self, word: Iterable[int]) -> "Box":
        box = self
        for alpha in word:
            box = box.child(int(alpha))
        return box

    @property
    def width(self) -> Dyadic:
        return self.re_hi - self.re_lo

    @property
    def height(self) -> Dyadic:
        return self.im_hi - self.im_lo

    def midpoint(self) -> ComplexDyadic:
        return ComplexDyadic((self.re_lo + self.re_hi).half(), (self.im_lo + self.im_hi).half())

    def contains(self, z: ComplexDyadic) -> bool:
        """Closed-box membership."""
        return self.re_lo <= z.re <= self.re_hi and self.im_lo <= z.im <= self.im_hi

    def contains_box(self, other: "Box") -> bool:
        return (self.re_lo <= other.re_lo and other.re_hi <= self.re_hi
                and self.im_lo <= other.im_lo and other.im_hi <= self.im_hi)

    def __eq__(self, other):
        if not isinstance(other, Box):
            return NotImplemented
        return (self.re_lo, self.re_hi, self.im_lo, self.im_hi) == (other.re_lo, other.re_hi, other.im_lo, other.im_hi)

    def __hash__(self):
        return hash((self.re_lo, self.re_hi, self.im_lo, self.im_hi))

    def __repr__(self):
        return f"Box([{self.re_lo}, {self.re_hi}] x [{self.im_lo}, {self.im_hi}])"


def box_child(box: Box, alpha: int) -> Box:
    return box.child(alpha)


def box_refine(box: Box, word: Iterable[int]) -> Box:
    return box.refine(word)
