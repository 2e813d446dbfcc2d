"""Guaranteed-error evaluation of ``f``, ``f'`` and higher derivatives.

``f'(z) = 1 + sum_{n>=1} a_n z**n`` where ``a_n`` is only known through the
nested boxes of its stream channel.  An evaluation truncates the series at a
degree ``N`` whose tail majorant is below ``tol/2``, reads every coefficient
to a digit depth ``k`` that keeps the box widths below ``tol/4``, and spends
at most ``tol/8`` on the final rounding.

Orders: ``ANTIDERIVATIVE`` (-1) is ``f`` with ``f(0) = 0``, ``VALUE`` (0) is
``f'``, and ``k >= 1`` is the ``k``-th derivative of ``f'``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dyadic import ComplexDyadic, Dyadic, Rounding, approx_div, approx_sqrt, pow2
from .errors import BoundsAuditFailed, PointOutsideDisc, RadiusOutOfRange, ToleranceTooTight
from .schedule import ANTIDERIVATIVE, VALUE, round_up
from .stream import PiStream, coefficient_enclosure

__all__ = [
    "ANTIDERIVATIVE",
    "VALUE",
    "EvalRequest",
    "eval_series",
    "eval_batch",
    "series_coefficients",
    "shell_radius",
    "audit_bounds",
]

_U = Fraction(1, 1 << 53)


@dataclass(frozen=True)
class EvalRequest:
    order: int
    z: ComplexDyadic
    tol: Dyadic

    def __post_init__(self):
        object.__setattr__(self, "z", ComplexDyadic.coerce(self.z))
        object.__setattr__(self, "tol", Dyadic.coerce(self.tol))
        if self.order < ANTIDERIVATIVE:
            raise ValueError(f"invalid order {self.order}")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if not self.z.norm2() < 1:
            raise PointOutsideDisc(f"|z| >= 1 for z = {self.z}")


def _precision_for(tol: Dyadic) -> int:
    """Least ``p`` with ``2**-p <= tol``."""
    p = -tol.floor_log2()
    return p if pow2(-p) <= tol else p + 1


def shell_radius(z: ComplexDyadic) -> Dyadic:
    """A dyadic radius ``r < 1`` with ``|z| <= r``, as small as a few bits allow."""
    z2 = z.norm2()
    if z2 >= 1:
        raise PointOutsideDisc(f"|z| >= 1 for z = {z}")
    g = 6
    while True:
        r = approx_sqrt(z2, g, Rounding.UP)
        if r.is_zero():
            r = pow2(-g)
        if r < 1:
            return r
        g += 4


def series_coefficients(stream: PiStream, schedule, order: int, N: int, k: int) -> list[ComplexDyadic]:
    """Midpoint coefficients of ``f'`` up to degree ``N`` read at depth ``k``; index 0 is 1."""
    coeffs = [ComplexDyadic(1, 0)]
    for n in range(1, N + 1):
        mid, _ = coefficient_enclosure(stream, schedule, n, k)
        coeffs.append(mid)
    return coeffs


def _lcm_upto(n: int) -> int:
    out = 1
    for j in range(2, n + 1):
        out = out * j // math.gcd(out, j)
    return out


def _horner(coeffs: list[ComplexDyadic], z: ComplexDyadic) -> ComplexDyadic:
    acc = ComplexDyadic(0, 0)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def eval_series(stream: PiStream, schedule, req: EvalRequest, r: Dyadic | None = None) -> ComplexDyadic:
    """Complex dyadic within ``req.tol`` of the requested quantity at ``req.z``."""
    z = req.z
    if r is None:
        r = shell_radius(z)
    r = Dyadic.coerce(r)
    if not (0 < r < 1):
        raise RadiusOutOfRange(f"shell radius {r} not in (0, 1)")
    if z.norm2() > r * r:
        raise PointOutsideDisc(f"|z| exceeds the shell radius {r}")
    N, k = schedule.plan(req.order, r, req.tol)
    base = series_coefficients(stream, schedule, req.order, N, k)
    p = _precision_for(req.tol) + 3
    if req.order == ANTIDERIVATIVE:
        # L * f(z) = sum_n a_n (L/(n+1)) z**(n+1) with L = lcm(1..N+1): stay in dyadics
        L = _lcm_upto(N + 1)
        scaled = [ComplexDyadic(0, 0)] + [c * (L // (n + 1)) for n, c in enumerate(base)]
        total = _horner(scaled, z)
        return ComplexDyadic(approx_div(total.re, L, p), approx_div(total.im, L, p))
    order = req.order
    if order == VALUE:
        poly = base
    else:
        poly = []
        for n in range(order, N + 1):
            falling = math.perm(n, order)
            poly.append(base[n] * falling)
        if not poly:
            return ComplexDyadic(0, 0)
    return _horner(poly, z).round_to(p, Rounding.NEAREST)


def _float_poly(stream: PiStream, schedule, order: int, N: int, k: int) -> list[Fraction | tuple]:
    """Exact (re, im) Fractions of the polynomial coefficients in powers of z."""
    base = series_coefficients(stream, schedule, order, N, k)
    out = []
    if order == ANTIDERIVATIVE:
        out.append((Fraction(0), Fraction(0)))
        for n, c in enumerate(base):
            out.append((c.re.to_fraction() / (n + 1), c.im.to_fraction() / (n + 1)))
    else:
        for n in range(order, N + 1):
            falling = math.perm(n, order)
            c = base[n]
            out.append((c.re.to_fraction() * falling, c.im.to_fraction() * falling))
    return out


class BatchEvaluator:
    """Vectorised evaluation at many exact float points sharing one radius.

    The coefficient enclosure is read once; the polynomial is evaluated in
    complex128 Horner form and the floating-point error is bounded a priori,
    so each returned value is within ``tol`` of the exact quantity.
    """

    def __init__(self, stream: PiStream, schedule, order: int, r, tol):
        self.order = order
        self.r = Dyadic.coerce(r)
        self.tol = Dyadic.coerce(tol)
        if not (0 < self.r < 1):
            raise RadiusOutOfRange(f"radius {self.r} not in (0, 1)")
        N, k = schedule.plan(order, self.r, self.tol)
        exact = _float_poly(stream, schedule, order, N, k)
        self.N, self.k = N, k
        self.coeffs = np.array([complex(float(a), float(b)) for a, b in exact], dtype=np.complex128)
        rf = self.r.to_fraction()
        J = len(exact) - 1
        conv = sum((abs(a - Fraction(float(a))) + abs(b - Fraction(float(b)))) * rf ** j
                   for j, (a, b) in enumerate(exact))
        mag = sum((abs(Fraction(float(a))) + abs(Fraction(float(b)))) * rf ** j for j, (a, b) in enumerate(exact))
        m = 8 * (J + 2)
        gamma = m * _U / (1 - m * _U)
        # underflow slack: each operation may lose at most 2**-1074 absolutely
        self.float_error = conv + gamma * mag + Fraction(4 * (J + 2), 1 << 1000)
        if self.float_error > self.tol.to_fraction() / 8:
            raise ToleranceTooTight("floating-point error bound exceeds tol/8")
        # tail < tol/2, widths <= tol/4, float <= tol/8
        self.error_bound = self.tol.to_fraction() * 3 / 4 + self.float_error

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        acc = np.full(z.shape, self.coeffs[-1], dtype=np.complex128)
        for c in self.coeffs[-2::-1]:
            acc *= z
            acc += c
        return acc


def eval_batch(stream: PiStream, schedule, order: int, z: np.ndarray, r, tol) -> tuple[np.ndarray, Fraction]:
    """Values at the (exactly representable) points ``z`` with ``|z| <= r``, and the error bound."""
    ev = BatchEvaluator(stream, schedule, order, r, tol)
    z = np.asarray(z, dtype=np.complex128)
    if z.size and float(np.max(np.abs(z))) > float(ev.r) * (1 + 1e-12):
        raise PointOutsideDisc("batch point outside the evaluation radius")
    return ev(z), ev.error_bound


def sample_disc(r: Dyadic, count: int, seed: int = 0, bits: int = 24) -> np.ndarray:
    """Deterministic dyadic sample points strictly inside the disc of radius ``r``."""
    rng = np.random.default_rng(seed)
    scale = float(1 << bits)
    rf = float(r)
    out = []
    while len(out) < count:
        pts = rng.uniform(-rf, rf, size=(2 * count, 2))
        pts = np.rint(pts * scale) / scale
        # exact in float: |p|**2 has at most 2*bits+2 significant bits
        keep = pts[:, 0] ** 2 + pts[:, 1] ** 2 < rf * rf
        out.extend(pts[keep][: count - len(out)].tolist())
    arr = np.array(out[:count])
    return arr[:, 0] + 1j * arr[:, 1]


def audit_bounds(stream: PiStream, schedule, provider, r, samples: int = 2000, seed: int = 0,
                 tol=Dyadic(1, -24)) -> dict:
    """Check a provider's ``mu1``/``mu2`` against sampled ``|f'|``, ``|f''|`` on the disc of radius ``r``.

    Raises :class:`BoundsAuditFailed` on a certain violation; returns the
    observed maxima otherwise.
    """
    r = Dyadic.coerce(r)
    pts = sample_disc(r, samples, seed)
    report = {"provider": provider.name, "radius": str(r), "samples": samples}
    for label, order, bound in (("mu1", VALUE, provider.mu1(r)), ("mu2", 1, provider.mu2(r))):
        vals, err = eval_batch(stream, schedule, order, pts, r, tol)
        observed = float(np.max(np.abs(vals))) if vals.size else 0.0
        # |exact| >= |computed| - err; only a sure excess is a violation
        if observed * (1 - 1e-12) - float(err) > float(bound):
            raise BoundsAuditFailed(f"{provider.name}: sampled {label} {observed:.6g} exceeds bound {float(bound):.6g}")
        report[label] = {"bound": str(bound), "observed_max": observed}
    return report
