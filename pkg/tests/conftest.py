"""Shared independent oracles: exact rational polynomials and brute-force lattice scans."""

from fractions import Fraction

import numpy as np
import pytest

from landau.dyadic import ComplexDyadic, Dyadic
from landau.schedule import make_schedule

POLY_FIXTURES = {
    "identity": [],
    "affine": [(-2, 0)],
    "quadratic": [(Fraction(1, 2), Fraction(1, 4)), (Fraction(-3, 4), 0)],
    "cubic": [(0, 0), (0, 0), (Fraction(1, 8), Fraction(-1, 2))],
    "mixed": [(Fraction(3, 4), 1), (Fraction(-1, 2), Fraction(5, 8)), (Fraction(1, 8), 0), (0, Fraction(-7, 16))],
}


def as_complex_dyadics(pairs):
    return [ComplexDyadic(Dyadic.coerce(Fraction(a)), Dyadic.coerce(Fraction(b))) for a, b in pairs]


def exact_poly(pairs, order, zr: Fraction, zi: Fraction) -> tuple[Fraction, Fraction]:
    """Exact value of f (order -1), f' (0) or the k-th derivative of f' at zr + i zi."""
    coeffs = [(Fraction(1), Fraction(0))] + [(Fraction(a), Fraction(b)) for a, b in pairs]
    if order == -1:
        coeffs = [(Fraction(0), Fraction(0))] + [(a / (n + 1), b / (n + 1)) for n, (a, b) in enumerate(coeffs)]
    else:
        for _ in range(order):
            coeffs = [(a * n, b * n) for n, (a, b) in enumerate(coeffs)][1:] or [(Fraction(0), Fraction(0))]
    re, im = Fraction(0), Fraction(0)
    for a, b in reversed(coeffs):
        re, im = re * zr - im * zi + a, re * zi + im * zr + b
    return re, im


def brute_complement_s(points: set[tuple[int, int]]) -> int:
    """max over G of min over the complement lattice of squared distance, by direct scan.

    A window of radius R + 1 around each point, where R bounds the distance to
    any complement point, contains every candidate.
    """
    best = 0
    for (i, j) in points:
        d = 1
        while True:
            found = None
            for a in range(i - d, i + d + 1):
                for b in range(j - d, j + d + 1):
                    if (a, b) not in points:
                        q = (a - i) ** 2 + (b - j) ** 2
                        if found is None or q < found:
                            found = q
            # any point outside the (2d+1)-window is farther than d
            if found is not None and found <= d * d:
                break
            d += 1
        best = max(best, found)
    return best


@pytest.fixture(scope="session")
def landau_schedule():
    return make_schedule("landau")


@pytest.fixture(scope="session")
def test_schedule():
    return make_schedule("test")


def random_mask(rng: np.random.Generator, size: int, density: float) -> np.ndarray:
    mask = rng.random((size, size)) < density
    if not mask.any():
        mask[size // 2, size // 2] = True
    return mask
