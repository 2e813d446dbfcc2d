"""Coefficient bounds and sup bounds for the function class.

:class:`BoundSchedule` is the class of normalised functions with
``|f'(z)| <= c / (1 - |z|**2)``: coefficient boxes ``[-m_n, m_n]**2`` with
``m_n ~ c*e*(n+2)/2``.  :class:`GeometricSchedule` is a small test-scale class
(``m_n = a*q**n``) for which the full pipeline fits on a desk.

Bounds providers hand the pipeline its ``sup |f'|`` and ``sup |f''|`` bounds;
:class:`GenericBounds` takes them from the schedule, :class:`InjectedBounds`
from elsewhere (they must be sample-audited before use, see
:func:`landau.series.audit_bounds`).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence

from .dyadic import ComplexDyadic, Dyadic, Rounding, e_enclosure, from_fraction, pow2, sqrt2_enclosure
from .errors import RadiusOutOfRange, ToleranceTooTight

ANTIDERIVATIVE = -1
VALUE = 0

MAX_DEGREE = 20000


def round_up(q: Fraction, bits: int = 64) -> Dyadic:
    """Dyadic upper bound of ``q`` with about ``bits`` significant bits."""
    q = Fraction(q)
    if q == 0:
        return Dyadic(0)
    mag = abs(q.numerator).bit_length() - q.denominator.bit_length()
    return from_fraction(q, bits - mag, Rounding.UP)


def round_down(q: Fraction, bits: int = 64) -> Dyadic:
    q = Fraction(q)
    if q == 0:
        return Dyadic(0)
    mag = abs(q.numerator).bit_length() - q.denominator.bit_length()
    return from_fraction(q, bits - mag, Rounding.DOWN)


def _check_radius(r) -> Fraction:
    r = Dyadic.coerce(r)
    if not (0 <= r < 1):
        raise RadiusOutOfRange(f"radius {r} not in [0, 1)")
    return r.to_fraction()


def order_weight(order: int, n: int, r: Fraction) -> Fraction:
    """Factor multiplying ``|a_n|`` in the series of the requested order at ``|z| = r``."""
    if order == ANTIDERIVATIVE:
        return r ** (n + 1) / (n + 1)
    if n < order:
        return Fraction(0)
    falling = 1
    for j in range(n - order + 1, n + 1):
        falling *= j
    return falling * r ** (n - order)


def _weight_ratio(order: int, n: int, r: Fraction) -> Fraction:
    """``w_{n+1} / w_n``; non-increasing in ``n`` once ``n >= order``."""
    if order == ANTIDERIVATIVE:
        return r * Fraction(n + 1, n + 2)
    if order == VALUE:
        return r
    return r * Fraction(n + 1, n + 1 - order)


class _Schedule:
    """Shared machinery; subclasses define ``bound_m``, the majorant pieces and sup bounds."""

    kind = "abstract"

    def __init__(self, precision: int):
        self.precision = precision
        lo, hi = sqrt2_enclosure(precision)
        self.sqrt2_lo, self.sqrt2_hi = lo, hi
        self._m: dict[int, Dyadic] = {}
        self._plans: dict = {}

    # pieces: list of (t(n) -> Fraction, ratio(n) -> Fraction) with |a_n| <= sum t(n)
    def _pieces(self):
        raise NotImplementedError

    def bound_m(self, n: int) -> Dyadic:
        raise NotImplementedError

    def coefficient_majorant(self, n: int) -> Fraction:
        """Upper bound on ``|a_n|`` for every function of the class."""
        return self.sqrt2_hi.to_fraction() * self.bound_m(n).to_fraction()

    def tail_bound(self, order: int, N: int, r) -> Fraction:
        """Upper bound on ``sum_{n>N} |a_n| w_n(r)`` for the given order (may be inf)."""
        r = _check_radius(r)
        if r == 0:
            return Fraction(0)
        start = max(N + 1, order, 1)
        total = Fraction(0)
        for term, ratio in self._pieces():
            q = ratio(start) * _weight_ratio(order, start, r)
            if q >= 1:
                return Fraction(10) ** 100
            total += term(start) * order_weight(order, start, r) / (1 - q)
        return total

    def plan(self, order: int, r, tol) -> tuple[int, int]:
        """Truncation degree ``N`` and digit depth ``k`` for an evaluation.

        ``N`` is the least degree with tail below ``tol/2``; ``k`` the least depth
        with every box-width term below ``(tol/4)/N``.
        """
        r = Dyadic.coerce(r)
        tol = Dyadic.coerce(tol)
        key = (order, r, tol)
        cached = self._plans.get(key)
        if cached is not None:
            return cached
        rf, tf = _check_radius(r), tol.to_fraction()
        if tf <= 0:
            raise ValueError("tolerance must be positive")
        floor_n = max(order, 1)
        hi = floor_n
        while self.tail_bound(order, hi, r) >= tf / 2:
            if hi > MAX_DEGREE:
                raise ToleranceTooTight(f"truncation degree exceeds {MAX_DEGREE} (r={float(rf):.6g}, tol={tol})")
            hi *= 2
        lo = max(floor_n, hi // 2)
        # the tail bound is non-increasing in N: bisect for the least admissible degree
        while lo < hi:
            mid = (lo + hi) // 2
            if self.tail_bound(order, mid, r) < tf / 2:
                hi = mid
            else:
                lo = mid + 1
        N = hi
        worst = max((self.coefficient_majorant(n) * order_weight(order, n, rf) for n in range(1, N + 1)),
                    default=Fraction(0))
        k = 0
        if worst > 0:
            target = tf / (4 * N)
            while worst / (1 << k) > target:
                k += 1
        self._plans[key] = (N, k)
        return N, k

    def bound_b(self, n: int) -> Dyadic:
        """Upper bound on ``|f|`` over the disc of radius ``1 - 2**-n``."""
        r = 1 - pow2(-n)
        return round_up(r.to_fraction() * self.sup_bound_fprime(r).to_fraction())

    def sup_bound_fprime(self, r) -> Dyadic:
        raise NotImplementedError

    def sup_bound_fsecond(self, r) -> Dyadic:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class BoundSchedule(_Schedule):
    """Coefficient bounds ``m_n`` for ``c = 1 + 2**-c_exponent``.

    Every ``m_n`` satisfies ``c*e*(n+2)/2 <= m_n <= c*e*(n+2)/2 + 2**-n``.
    """

    kind = "landau"

    def __init__(self, c_exponent: int = 100):
        if c_exponent < 1:
            raise ValueError("c_exponent must be >= 1")
        self.c_exponent = c_exponent
        super().__init__(c_exponent + 64)
        self.c = 1 + pow2(-c_exponent)
        e_lo, e_hi = e_enclosure(self.precision)
        self.e_lo, self.e_hi = e_lo, e_hi
        self.ce_lo = self.c * e_lo
        self.ce_hi = self.c * e_hi

    def bound_m(self, n: int) -> Dyadic:
        if n < 1:
            raise ValueError("m_n is defined for n >= 1")
        m = self._m.get(n)
        if m is None:
            p = max(self.precision, n + (n + 2).bit_length() + 4)
            e_hi = e_enclosure(p)[1]
            m = (self.c * e_hi * (n + 2)).half().round_to(n + 1, Rounding.UP)
            self._m[n] = m
        return m

    def _pieces(self):
        s2 = self.sqrt2_hi.to_fraction()
        half_ce = self.ce_hi.to_fraction() / 2
        return [
            (lambda n: s2 * half_ce * (n + 2), lambda n: Fraction(n + 3, n + 2)),
            (lambda n: s2 / (1 << n), lambda n: Fraction(1, 2)),
        ]

    def tail_majorant(self, N: int, r) -> Dyadic:
        """Upper bound on ``sum_{n>N} sqrt(2) m_n r**n`` in closed form."""
        rf = _check_radius(r)
        if rf == 0:
            return Dyadic(0)
        one_r = 1 - rf
        rn1 = rf ** (N + 1)
        s_lin = ((N + 2) * rn1 * one_r + rn1 * rf) / one_r ** 2 + rn1 / one_r
        half = rf / 2
        s_corr = half ** (N + 1) / (1 - half)
        total = self.sqrt2_hi.to_fraction() * (self.ce_hi.to_fraction() / 2 * s_lin + s_corr)
        return round_up(total)

    def tail_bound(self, order: int, N: int, r) -> Fraction:
        if order == VALUE:
            return self.tail_majorant(N, r).to_fraction()
        return super().tail_bound(order, N, r)

    def sup_bound_fprime(self, r) -> Dyadic:
        rf = _check_radius(r)
        inv = 1 / (1 - rf)
        # c*e/2*(inv + inv**2) + 2 - c*e = c*e*K + 2 with K >= 0, so c*e rounds up
        K = (inv + inv * inv) / 2 - 1
        return round_up(self.sqrt2_hi.to_fraction() * (self.ce_hi.to_fraction() * K + 2))

    def sup_bound_fsecond(self, r) -> Dyadic:
        rf = _check_radius(r)
        inv = 1 / (1 - rf)
        ce = self.ce_hi.to_fraction()
        return round_up(self.sqrt2_hi.to_fraction() * (ce * inv ** 3 + ce * inv ** 2 / 2 + 2))

    def describe(self) -> dict:
        return {"kind": self.kind, "c_exponent": self.c_exponent}


class GeometricSchedule(_Schedule):
    """Test-scale class ``m_n = a * q**n`` (not a Landau-bounding class)."""

    kind = "geometric"

    def __init__(self, a=Dyadic(1, -3), q=Dyadic(1, -1), precision: int = 96):
        super().__init__(precision)
        self.a = Dyadic.coerce(a)
        self.q = Dyadic.coerce(q)
        if not (self.a > 0 and 0 < self.q < 1):
            raise ValueError("need a > 0 and 0 < q < 1")

    def bound_m(self, n: int) -> Dyadic:
        if n < 1:
            raise ValueError("m_n is defined for n >= 1")
        m = self._m.get(n)
        if m is None:
            m = self.a * self.q ** n
            self._m[n] = m
        return m

    def _pieces(self):
        s2 = self.sqrt2_hi.to_fraction()
        a, q = self.a.to_fraction(), self.q.to_fraction()
        return [(lambda n: s2 * a * q ** n, lambda n: q)]

    def tail_majorant(self, N: int, r) -> Dyadic:
        return round_up(self.tail_bound(VALUE, N, r))

    def sup_bound_fprime(self, r) -> Dyadic:
        rf = _check_radius(r)
        a, q = self.a.to_fraction(), self.q.to_fraction()
        qr = q * rf
        return round_up(1 + self.sqrt2_hi.to_fraction() * a * qr / (1 - qr))

    def sup_bound_fsecond(self, r) -> Dyadic:
        rf = _check_radius(r)
        a, q = self.a.to_fraction(), self.q.to_fraction()
        return round_up(self.sqrt2_hi.to_fraction() * a * q / (1 - q * rf) ** 2)

    def describe(self) -> dict:
        return {"kind": self.kind, "a": str(self.a), "q": str(self.q)}


def make_schedule(kind: str = "landau", c_exponent: int = 100) -> _Schedule:
    if kind == "landau":
        return BoundSchedule(c_exponent)
    if kind in ("geometric", "test"):
        return GeometricSchedule()
    raise ValueError(f"unknown schedule {kind!r}")


# -- bounds providers ---------------------------------------------------------

class GenericBounds:
    """Sup bounds valid for every function of the schedule's class."""

    audited = True

    def __init__(self, schedule: _Schedule):
        self.schedule = schedule
        self.name = "generic"

    def mu1(self, r) -> Dyadic:
        return self.schedule.sup_bound_fprime(r)

    def mu2(self, r) -> Dyadic:
        return self.schedule.sup_bound_fsecond(r)


class InjectedBounds:
    """Caller-supplied sup bounds for one particular function."""

    audited = False

    def __init__(self, name: str, mu1: Callable[[Dyadic], Dyadic], mu2: Callable[[Dyadic], Dyadic]):
        self.name = name
        self._mu1 = mu1
        self._mu2 = mu2

    def mu1(self, r) -> Dyadic:
        return Dyadic.coerce(self._mu1(Dyadic.coerce(r)))

    def mu2(self, r) -> Dyadic:
        return Dyadic.coerce(self._mu2(Dyadic.coerce(r)))


MU2_FLOOR = pow2(-20)


def polynomial_bounds(coeffs: Sequence, name: str = "polynomial") -> InjectedBounds:
    """Exact-arithmetic sup bounds for ``f' = 1 + sum a_n z**n`` (finite list).

    ``|a_n|`` is bounded by ``|Re a_n| + |Im a_n|``; ``mu2`` never drops below
    ``2**-20`` so Lipschitz slacks stay meaningful.
    """
    mags = [abs(c.re) + abs(c.im) for c in map(ComplexDyadic.coerce, coeffs)]

    def mu1(r: Dyadic) -> Dyadic:
        total = Dyadic(1)
        for n, a in enumerate(mags, start=1):
            total = total + a * r ** n
        return total

    def mu2(r: Dyadic) -> Dyadic:
        total = Dyadic(0)
        for n, a in enumerate(mags, start=1):
            total = total + a * n * r ** (n - 1)
        return max(total, MU2_FLOOR)

    return InjectedBounds(name, mu1, mu2)
