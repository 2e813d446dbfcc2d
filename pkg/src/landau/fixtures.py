"""Named polynomial fixtures ``f' = 1 + sum a_n z**n`` with exact sup bounds."""

from __future__ import annotations

from .dyadic import ComplexDyadic, Dyadic
from .schedule import polynomial_bounds
from .stream import PiStream, encode_coefficients

D = Dyadic

FIXTURES: dict[str, list[ComplexDyadic]] = {
    "identity": [],
    "affine": [ComplexDyadic(-2, 0)],
    "quadratic": [ComplexDyadic(D(1, -1), D(1, -2)), ComplexDyadic(D(-3, -2), 0)],
    "cubic": [ComplexDyadic(0, 0), ComplexDyadic(0, 0), ComplexDyadic(D(1, -3), D(-1, -1))],
    "mixed": [ComplexDyadic(D(3, -2), 1), ComplexDyadic(D(-1, -1), D(5, -3)), ComplexDyadic(D(1, -3), 0),
              ComplexDyadic(0, D(-7, -4))],
}


def fixture_name(spec: str) -> str | None:
    """``fixtures/identity`` or ``identity`` -> ``identity``; None if not a fixture."""
    name = spec.split("/", 1)[1] if spec.startswith("fixtures/") else spec
    return name if name in FIXTURES else None


def fixture_coefficients(name: str) -> list[ComplexDyadic]:
    return list(FIXTURES[name])


def fixture_stream(name: str, schedule, depth: int | None = None) -> PiStream:
    return encode_coefficients(FIXTURES[name], schedule, depth)


def fixture_bounds(name: str):
    return polynomial_bounds(FIXTURES[name], name)
