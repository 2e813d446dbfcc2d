"""Certified lower bounds on the largest-disc radius of one function.

Pipeline: certify a circle ``|z| = r_hat`` on which ``|f'| >= rho``, turn
``(rho, r_hat)`` into a window ``Delta`` and a grid resolution ``eps``, build
an ``eps``-covering grid of ``f(D_r)`` and read off the disc estimate.

The outer radius is ``r = 1 - 2**-n + 2**-(n+g)`` with ``g`` guard bits.  With
``lambda > 1/2`` every radius lost to rounding the estimate down (less than
``2**-(n+g+1)``) is paid for by the guard margin ``2**-(n+g) * lambda``, so the
reported value satisfies ``(1 - 2**-n) * lambda <= l <= lambda_f``.
"""

from __future__ import annotations

import datetime
import json
import math
import platform
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .dyadic import ComplexDyadic, Dyadic, Rounding, approx_sqrt, pow2, sqrt2_enclosure
from .errors import BudgetExhausted, DegenerateWindow, FormatError, LandauError
from .grid import DEFAULT_MAX_POINTS, grid_from_image, grid_l_value
from .schedule import VALUE, GenericBounds, round_down
from .series import EvalRequest, _precision_for, audit_bounds, eval_series
from .stream import PiStream

LAMBDA_LOWER = Fraction(1, 2)
LAMBDA_UPPER = Fraction(54325, 100000)
SIDES = ("top", "left", "bottom", "right")


@dataclass
class Budget:
    max_stages: int = 24
    max_evals: int = 400_000
    max_points: int = DEFAULT_MAX_POINTS


@dataclass(frozen=True)
class ArcCertificate:
    side: str
    a: Dyadic
    b: Dyadic
    lower: Dyadic


@dataclass
class CircleWitness:
    r_hat: Dyadic
    rho: Dyadic
    mu2: Dyadic
    half_side: Dyadic
    arcs: list[ArcCertificate]
    tau: Dyadic
    stage: int
    evaluations: int = 0

    def covers_circle(self) -> bool:
        """Do the arcs tile ``[-s, s]`` on every side, with ``2 s**2 >= r_hat**2``?"""
        s = self.half_side
        if not (2 * s * s >= self.r_hat * self.r_hat and s < self.r_hat):
            return False
        for side in SIDES:
            spans = sorted((a.a, a.b) for a in self.arcs if a.side == side)
            reach = -s
            for a, b in spans:
                if a > reach:
                    return False
                reach = max(reach, b)
            if reach < s:
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "r_hat": str(self.r_hat), "rho": str(self.rho), "mu2": str(self.mu2),
            "half_side": str(self.half_side), "tau": str(self.tau), "stage": self.stage,
            "evaluations": self.evaluations,
            "arcs": [[a.side, str(a.a), str(a.b), str(a.lower)] for a in self.arcs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CircleWitness":
        D = Dyadic.coerce
        arcs = [ArcCertificate(s, D(a), D(b), D(lo)) for s, a, b, lo in d["arcs"]]
        return cls(D(d["r_hat"]), D(d["rho"]), D(d["mu2"]), D(d["half_side"]), arcs, D(d["tau"]),
                   int(d["stage"]), int(d.get("evaluations", 0)))


@dataclass
class Lemma7Params:
    delta_big: Dyadic
    eps: Dyadic
    r_bar: Dyadic
    mu2: Dyadic

    def to_dict(self) -> dict:
        return {"Delta": str(self.delta_big), "eps": str(self.eps), "r_bar": str(self.r_bar), "mu2": str(self.mu2)}


# -- circle search --------------------------------------------------------------

def candidate_radii(lo: Dyadic, max_level: int = 60) -> Iterator[Dyadic]:
    """Dyadics in ``(lo, 1)`` by increasing granularity, nearest the middle first."""
    lo_f = lo.to_fraction()
    mid = (lo_f + 1) / 2
    for g in range(1, max_level + 1):
        scale = 1 << g
        j_lo = math.floor(lo_f * scale) + 1
        level = [Dyadic(j, -g) for j in range(j_lo, scale) if j % 2 == 1]
        level.sort(key=lambda c: (abs(c.to_fraction() - mid), c.to_fraction()))
        yield from level


def _side_point(side: str, x: Dyadic, y: Dyadic) -> ComplexDyadic:
    if side == "top":
        return ComplexDyadic(x, y)
    if side == "bottom":
        return ComplexDyadic(x, -y)
    if side == "right":
        return ComplexDyadic(y, x)
    return ComplexDyadic(-y, x)


class _CircleProbe:
    def __init__(self, stream, schedule, r_hat: Dyadic, mu2: Dyadic, budget: Budget, counter: list[int]):
        self.stream = stream
        self.schedule = schedule
        self.r_hat = r_hat
        self.r2 = r_hat * r_hat
        self.mu2 = mu2
        self.budget = budget
        self.counter = counter
        self.half_side = (r_hat * sqrt2_enclosure(r_hat.mantissa.bit_length() + 8)[1]).half()

    def arc(self, side: str, a: Dyadic, b: Dyadic, tau: Dyadic, depth: int) -> tuple[Dyadic, Dyadic] | None:
        """``(lower bound, |v| lower)`` on one arc, or None when the evaluation is inconclusive."""
        self.counter[0] += 1
        if self.counter[0] > self.budget.max_evals:
            raise BudgetExhausted(f"circle search used more than {self.budget.max_evals} evaluations")
        p = _precision_for(tau) + depth + 8
        xm = (a + b).half()
        ym = approx_sqrt(self.r2 - xm * xm, p, Rounding.DOWN)
        min_x2 = Dyadic(0) if a <= 0 <= b else min(a * a, b * b)
        max_x2 = max(a * a, b * b)
        y_hi = approx_sqrt(self.r2 - min_x2, p, Rounding.UP)
        y_lo = approx_sqrt(self.r2 - max_x2, p, Rounding.DOWN)
        dist = (b - a).half() + max(y_hi - ym, ym - y_lo)
        v = eval_series(self.stream, self.schedule, EvalRequest(VALUE, _side_point(side, xm, ym), tau), r=self.r_hat)
        v_lo = v.abs_lower(p)
        slack = tau + self.mu2 * dist
        if v_lo.is_zero() or slack.shift(1) > v_lo:
            return None
        return v_lo - slack, v_lo

    def certify(self, tau: Dyadic, depth_cap: int) -> list[ArcCertificate] | None:
        s = self.half_side
        arcs = []
        for side in SIDES:
            stack = [(-s, s, 0)]
            while stack:
                a, b, d = stack.pop()
                res = self.arc(side, a, b, tau, d)
                if res is not None:
                    arcs.append(ArcCertificate(side, a, b, res[0]))
                    continue
                if d >= depth_cap:
                    return None
                m = (a + b).half()
                stack.append((m, b, d + 1))
                stack.append((a, m, d + 1))
        arcs.sort(key=lambda c: (SIDES.index(c.side), c.a))
        return arcs


def find_circle(stream: PiStream, schedule, r, budget: Budget | None = None, bounds=None,
                candidates: Sequence | None = None) -> CircleWitness:
    """Certify a circle ``|z| = r_hat`` with ``r < r_hat < 1`` on which ``|f'| >= rho > 0``.

    Dovetails over stages ``s``: stage ``s`` tries the first ``s + 1``
    candidate radii with evaluation tolerance ``2**-(s+3)`` and arcs bisected
    at most ``s + 3`` times.  An arc is accepted once its midpoint value
    dominates twice the total slack.
    """
    r = Dyadic.coerce(r)
    if not (0 < r < 1):
        raise ValueError("need 0 < r < 1")
    budget = budget or Budget()
    bounds = bounds if bounds is not None else GenericBounds(schedule)
    if candidates is None:
        source = candidate_radii(r)
    else:
        source = iter([Dyadic.coerce(c) for c in candidates])
    pool: list[Dyadic] = []
    counter = [0]
    probes: dict[Dyadic, _CircleProbe] = {}
    for stage in range(budget.max_stages):
        while len(pool) < stage + 1:
            nxt = next(source, None)
            if nxt is None:
                break
            if not (r < nxt < 1):
                raise ValueError(f"candidate radius {nxt} outside ({r}, 1)")
            pool.append(nxt)
        tau = pow2(-(stage + 3))
        for c in pool[: stage + 1]:
            probe = probes.get(c)
            if probe is None:
                probe = probes[c] = _CircleProbe(stream, schedule, c, bounds.mu2(c), budget, counter)
            arcs = probe.certify(tau, stage + 3)
            if arcs is not None:
                rho = round_down(min(a.lower for a in arcs).to_fraction(), 4)
                return CircleWitness(c, rho, probe.mu2, probe.half_side, arcs, tau, stage, counter[0])
    raise BudgetExhausted(f"no circle certified within {budget.max_stages} stages")


def lemma7_params(w: CircleWitness, r, max_halvings: int = 200) -> Lemma7Params:
    """Largest power of two ``Delta`` with ``4 mu2 Delta <= rho`` and ``2 Delta < r_hat - r``."""
    r = Dyadic.coerce(r)
    gap = w.r_hat - r
    if not gap > 0:
        raise DegenerateWindow(f"r_hat = {w.r_hat} does not exceed r = {r}")
    if not (w.rho > 0 and w.mu2 > 0):
        raise DegenerateWindow("rho and mu2 must be positive")
    ratio = w.rho.to_fraction() / (4 * w.mu2.to_fraction())
    k = ratio.numerator.bit_length() - ratio.denominator.bit_length() + 1
    while Fraction(2) ** k > ratio:
        k -= 1
    limit = k - max_halvings
    while not pow2(k + 1) < gap:
        k -= 1
        if k < limit:
            raise DegenerateWindow("window r_hat - r too small at working precision")
    delta = pow2(k)
    return Lemma7Params(delta, (w.rho * delta).shift(-4), w.r_hat - delta, w.mu2)


# -- the certificate --------------------------------------------------------------

def outer_radius(n: int, guard_bits: int) -> Dyadic:
    return 1 - pow2(-n) + pow2(-(n + guard_bits))


@dataclass
class LambdaCertificate:
    n: int
    guard_bits: int
    r: Dyadic
    l_reported: Dyadic
    l_upper: Dyadic
    witness: CircleWitness
    params: Lemma7Params
    eps: Dyadic
    delta: Dyadic
    grid_size: int
    s: int
    mode: str
    bounds: dict
    query_depth: int
    schedule: dict
    metadata: dict = field(default_factory=dict, compare=False)

    def primary(self) -> dict:
        return {
            "n": self.n, "guard_bits": self.guard_bits, "r": str(self.r),
            "l_reported": str(self.l_reported), "l_upper": str(self.l_upper),
            "rho": str(self.witness.rho), "r_hat": str(self.witness.r_hat),
            "Delta": str(self.params.delta_big), "eps": str(self.eps), "delta": str(self.delta),
            "grid_size": self.grid_size, "s": self.s, "mode": self.mode, "bounds": self.bounds,
            "query_depth": self.query_depth, "schedule": self.schedule,
            "params": self.params.to_dict(), "witness": self.witness.to_dict(),
        }

    def primary_json(self) -> str:
        return json.dumps(self.primary(), sort_keys=True, indent=1)

    def to_json(self) -> str:
        return json.dumps({"certificate": self.primary(), "metadata": self.metadata}, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "LambdaCertificate":
        try:
            doc = json.loads(text)
            c = doc["certificate"]
            D = Dyadic.coerce
            p = c["params"]
            return cls(
                int(c["n"]), int(c["guard_bits"]), D(c["r"]), D(c["l_reported"]), D(c["l_upper"]),
                CircleWitness.from_dict(c["witness"]),
                Lemma7Params(D(p["Delta"]), D(p["eps"]), D(p["r_bar"]), D(p["mu2"])),
                D(c["eps"]), D(c["delta"]), int(c["grid_size"]), int(c["s"]), c["mode"], c["bounds"],
                int(c["query_depth"]), c["schedule"], doc.get("metadata", {}),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise FormatError(f"not a certificate: {exc}") from exc

    def audit(self) -> list[tuple[str, bool]]:
        """Re-verify every recorded inequality in exact arithmetic."""
        w, P = self.witness, self.params
        n, g = self.n, self.guard_bits
        checks = [
            ("r = 1 - 2^-n + 2^-(n+g)", self.r == outer_radius(n, g)),
            ("0 < r < r_bar < r_hat < 1", 0 < self.r < P.r_bar < w.r_hat < 1),
            ("r_bar = r_hat - Delta", P.r_bar == w.r_hat - P.delta_big),
            ("Delta > 0 is a power of two", P.delta_big > 0 and P.delta_big.is_power_of_two()),
            ("4 mu2 Delta <= rho", 4 * P.mu2 * P.delta_big <= w.rho),
            ("2 Delta < r_hat - r", P.delta_big.shift(1) < w.r_hat - self.r),
            ("mu2 matches witness", P.mu2 == w.mu2),
            ("arcs cover the circle", w.covers_circle()),
            ("rho > 0 and rho <= every arc bound", w.rho > 0 and all(w.rho <= a.lower for a in w.arcs)),
            ("delta = eps/4", self.delta == self.eps.shift(-2)),
            ("delta <= eps/4", self.delta <= self.eps.shift(-2)),
            ("l enclosure contains delta(1 + sqrt s)", _encloses(self.l_reported, self.l_upper, self.delta, self.s)),
            ("enclosure width < 2^-(n+g+1)", self.l_upper - self.l_reported < pow2(-(n + g + 1))),
        ]
        if self.mode == "sound":
            checks.append(("eps = rho Delta / 16", self.eps == (w.rho * P.delta_big).shift(-4)))
            checks.append(("l >= (1 - 2^-n)/2", self.l_reported.to_fraction() >= (1 - Fraction(1, 2 ** n)) * LAMBDA_LOWER))
        return checks

    def audit_ok(self) -> bool:
        return all(ok for _, ok in self.audit())


def _encloses(lo: Dyadic, hi: Dyadic, delta: Dyadic, s: int) -> bool:
    # lo <= delta (1 + sqrt s) <= hi, squared out exactly
    a = lo.to_fraction() / delta.to_fraction() - 1
    b = hi.to_fraction() / delta.to_fraction() - 1
    return (a < 0 or a * a <= s) and b >= 0 and s <= b * b


def lambda_lower_bound(stream: PiStream, schedule, n: int, bounds=None, budget: Budget | None = None,
                       guard_bits: int = 8, eps_override=None, workers: int = 1,
                       audit_samples: int = 1000) -> LambdaCertificate:
    """Certified ``l`` with ``(1 - 2**-n) lambda <= l <= lambda_f``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if guard_bits < 1:
        raise ValueError("guard_bits must be at least 1")
    budget = budget or Budget()
    bounds = bounds if bounds is not None else GenericBounds(schedule)
    r = outer_radius(n, guard_bits)
    witness = find_circle(stream, schedule, r, budget, bounds)
    provenance = {"name": bounds.name, "audited": bool(bounds.audited)}
    if not bounds.audited:
        provenance["sample_audit"] = [
            audit_bounds(stream, schedule, bounds, radius, samples=audit_samples)
            for radius in (r, witness.r_hat)
        ]
    params = lemma7_params(witness, r)
    if eps_override is None:
        eps, mode = params.eps, "sound"
    else:
        eps, mode = Dyadic.coerce(eps_override), "overridden"
    grid, _ = grid_from_image(stream, schedule, r, eps, bounds, max_points=budget.max_points, workers=workers)
    est = grid_l_value(grid, n + guard_bits + 2)
    return LambdaCertificate(
        n=n, guard_bits=guard_bits, r=r, l_reported=est.lower, l_upper=est.upper,
        witness=witness, params=params, eps=grid.eps, delta=grid.delta, grid_size=len(grid), s=est.s,
        mode=mode, bounds=provenance, query_depth=stream.query_depth, schedule=schedule.describe(),
        metadata={"timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
                  "host": platform.node(), "workers": workers},
    )


def audit_report(cert: LambdaCertificate) -> str:
    return "\n".join(f"{'ok  ' if ok else 'FAIL'} {name}" for name, ok in cert.audit())


__all__ = [
    "Budget", "ArcCertificate", "CircleWitness", "Lemma7Params", "LambdaCertificate",
    "candidate_radii", "find_circle", "lemma7_params", "lambda_lower_bound", "outer_radius",
    "audit_report", "LAMBDA_LOWER", "LAMBDA_UPPER", "LandauError",
]
