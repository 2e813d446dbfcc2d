import cmath
from fractions import Fraction

import numpy as np
import pytest
from scipy.spatial import cKDTree

from conftest import brute_complement_s, random_mask
from landau.dyadic import ComplexDyadic, Dyadic, pow2
from landau.errors import EmptyMask, ResourceCap
from landau.grid import (
    CoveringGrid,
    brute_largest_disc,
    covered_contains,
    grid_from_image,
    grid_l_value,
    max_min_d2,
    read_grid_csv,
    write_grid_csv,
    write_trace_csv,
)
from landau.schedule import polynomial_bounds
from landau.stream import encode_coefficients

DELTA = Dyadic(1, -5)
EPS = DELTA.shift(2)


def _grid(points):
    return CoveringGrid.from_points(EPS, DELTA, points)


def test_l_value_examples():
    single = grid_l_value(_grid([(0, 0)]), 40)
    assert single.s == 1 and single.lower == single.upper == DELTA * 2
    block = grid_l_value(_grid([(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)]), 40)
    assert block.s == 4 and block.lower == DELTA * 3
    pair = grid_l_value(_grid([(0, 0), (1, 0)]), 40)
    assert pair.s == 1 and pair.upper == DELTA * 2


def test_l_value_enclosure_width():
    g = _grid([(i, j) for i in range(6) for j in range(3)])
    est = grid_l_value(g, 30)
    assert est.upper - est.lower <= pow2(-30)
    lo = est.lower.to_fraction() / DELTA.to_fraction() - 1
    hi = est.upper.to_fraction() / DELTA.to_fraction() - 1
    assert lo * lo <= est.s <= hi * hi


@pytest.mark.parametrize("seed", range(100))
def test_l_value_matches_brute_scan(seed):
    rng = np.random.default_rng(seed)
    size = int(rng.integers(1, 32))
    mask = random_mask(rng, size, float(rng.uniform(0.2, 0.98)))
    pts = {(int(a) - 7, int(b) + 3) for a, b in np.argwhere(mask)}
    assert len(pts) <= 1000
    g = _grid(pts)
    assert grid_l_value(g, 20).s == brute_complement_s(pts)


def test_grid_validation():
    with pytest.raises(ValueError):
        CoveringGrid.from_points(EPS, DELTA, [])
    with pytest.raises(ValueError):
        CoveringGrid.from_points(DELTA, DELTA, [(0, 0)])
    with pytest.raises(EmptyMask):
        max_min_d2(np.zeros((3, 3), dtype=bool))
    g = _grid([(0, 0)])
    assert g.with_eps(EPS.shift(1)).eps == EPS.shift(1)
    with pytest.raises(ValueError):
        g.with_eps(DELTA)


def test_covered_contains_examples():
    g = _grid([(0, 0)])
    three_q = EPS * Dyadic(3, -2)
    assert covered_contains(g, ComplexDyadic(0, 0))
    assert not covered_contains(g, ComplexDyadic(three_q, 0))
    assert not covered_contains(g, ComplexDyadic(0, -three_q))
    assert covered_contains(g, ComplexDyadic(three_q - DELTA, 0))
    far = _grid([(10, 10)])
    assert covered_contains(far, ComplexDyadic(DELTA * 10 + three_q - pow2(-40), DELTA * 10))


def test_brute_largest_disc_examples():
    cell = Dyadic(1, -3)
    k = 9
    lo, hi = brute_largest_disc(np.ones((k, k), dtype=bool), cell)
    half_side = Fraction(k, 2) * cell.to_fraction()
    c = cell.to_fraction()
    assert lo.to_fraction() <= half_side <= hi.to_fraction()
    assert hi.to_fraction() - lo.to_fraction() <= c
    lo, hi = brute_largest_disc(np.ones((1, 1), dtype=bool), cell)
    assert lo.to_fraction() <= c / 2 <= hi.to_fraction()
    R = 12
    yy, xx = np.mgrid[-R - 2:R + 3, -R - 2:R + 3]
    disc = xx * xx + yy * yy <= R * R
    lo, hi = brute_largest_disc(disc, cell)
    assert lo.to_fraction() - c <= R * c <= hi.to_fraction() + c
    with pytest.raises(EmptyMask):
        brute_largest_disc(np.zeros((2, 2), dtype=bool), cell)


# -- l(A) <= l(G) <= l(D(G)) on rasterised sets-----------------------------------

K = 4  # fine cells per grid spacing


def _random_region(rng, size):
    yy, xx = np.mgrid[0:size, 0:size]
    mask = np.zeros((size, size), dtype=bool)
    for _ in range(int(rng.integers(1, 4))):
        cx, cy = rng.integers(size // 4, 3 * size // 4, size=2)
        rad = rng.uniform(size / 10, size / 3)
        mask |= (xx - cx) ** 2 + (yy - cy) ** 2 <= rad * rad
    if rng.random() < 0.5:
        mask[rng.integers(0, size, 40), rng.integers(0, size, 40)] = True
    return mask


def _square_dist4(mask, points):
    """4 * squared distance (fine units) from each point to the nearest closed marked cell."""
    cells = np.argwhere(mask)
    out = np.empty(len(points), dtype=np.int64)
    for idx, (a, b) in enumerate(points):
        ex = np.maximum(2 * np.abs(cells[:, 0] - a) - 1, 0)
        ey = np.maximum(2 * np.abs(cells[:, 1] - b) - 1, 0)
        out[idx] = (ex * ex + ey * ey).min()
    return out


@pytest.mark.parametrize("seed", range(50))
def test_grid_value_sandwich(seed):
    rng = np.random.default_rng(1000 + seed)
    pad = 6 * K
    core = _random_region(rng, 48)
    A = np.pad(core, pad)
    n = A.shape[0]
    h = Dyadic(1, -6)
    delta = h * K
    eps = delta.shift(2)
    theta = Fraction(int(rng.integers(0, 5)), 4)
    # candidate coarse points: every K-th fine point
    coarse = [(a, b) for a in range(0, n, K) for b in range(0, n, K)]
    d4 = _square_dist4(A, coarse)
    # eps/4 = delta = K fine cells = 2K half cells
    limit = (2 * K) ** 2 * theta * theta
    G = {(a // K, b // K) for (a, b), q in zip(coarse, d4) if A[a, b] or q <= limit}
    g = CoveringGrid.from_points(eps, delta, G)
    est = grid_l_value(g, 40)

    lo_A, hi_A = brute_largest_disc(A, h)
    assert lo_A <= est.upper

    # rasterise D(eps, delta, G): fine centres within 3 eps / 4 = 3K fine units of a grid point
    rad2 = (3 * K) ** 2
    pts = np.array(sorted(G)) * K
    tree = cKDTree(pts)
    fine = np.argwhere(np.ones_like(A))
    near = tree.query_ball_point(fine, r=3 * K + 1)
    Dmask = np.zeros_like(A)
    for (a, b), cand in zip(fine, near):
        if any((a - pts[c][0]) ** 2 + (b - pts[c][1]) ** 2 < rad2 for c in cand):
            Dmask[a, b] = True
    lo_D, hi_D = brute_largest_disc(Dmask, h)
    assert est.lower <= hi_D + h


# -- the grid of f(D_r) ------------------------------------------------------------

def _identity_grid(landau_schedule, bounds=None, workers=1, keep_trace=False):
    s = encode_coefficients([], landau_schedule)
    return grid_from_image(s, landau_schedule, Dyadic(1, -1), Dyadic(1, -3), bounds,
                           workers=workers, keep_trace=keep_trace)


def test_identity_grid_covering_exact(landau_schedule):
    g, trace = _identity_grid(landau_schedule, keep_trace=True)
    assert g.delta == Dyadic(1, -5) and trace.contains_origin
    d = g.delta.to_fraction()
    quarter = Fraction(1, 4)
    # (a): lattice points strictly inside the disc of radius 1/2 (16 = 1/2 / delta)
    for i in range(-16, 17):
        for j in range(-16, 17):
            if (i * i + j * j) * d * d < quarter:
                assert (i, j) in g
    # (b): |g| <= 1/2 + eps/4
    bound = (Fraction(1, 2) + g.eps.to_fraction() / 4) ** 2
    for i, j in g.points().tolist():
        assert (i * i + j * j) * d * d <= bound
    # d_z within eps/16 of f(z) = z
    step = trace.delta_D.to_fraction()
    unit = Fraction(1, 1 << trace.unit_exponent)
    tol2 = (g.eps.to_fraction() / 16) ** 2
    for i, j, x, y in list(zip(trace.domain_i, trace.domain_j, trace.values_re, trace.values_im))[::997]:
        assert (int(x) * unit - int(i) * step) ** 2 + (int(y) * unit - int(j) * step) ** 2 <= tol2


def test_affine_grid_covering_sampled(landau_schedule):
    coeffs = [ComplexDyadic(-2, 0)]
    s = encode_coefficients(coeffs, landau_schedule)
    r, eps = Dyadic(1, -1), Dyadic(1, -4)
    g, _ = grid_from_image(s, landau_schedule, r, eps, polynomial_bounds(coeffs))
    d = float(g.delta)
    # (a) decided by inverting f(z) = z - z**2; skip points within 1e-9 of the boundary
    P = int(1.0 / d) + 2
    for i in range(-P, P + 1):
        for j in range(-P, P + 1):
            y = complex(i * d, j * d)
            z = (1 - cmath.sqrt(1 - 4 * y)) / 2
            zs = [z, 1 - z]
            if min(abs(w) for w in zs) < 0.5 - 1e-9:
                assert (i, j) in g
    # (b) every grid point within eps/4 + sampling slack of a dense image sample
    rad = np.linspace(0, 0.5, 400)[:-1]
    ang = np.linspace(0, 2 * np.pi, 1600, endpoint=False)
    zz = (rad[:, None] * np.exp(1j * ang[None, :])).ravel()
    img = zz - zz * zz
    tree = cKDTree(np.stack([img.real, img.imag], axis=1))
    slack = 2.0 * (0.5 / 400 + 0.5 * 2 * np.pi / 1600)
    pts = g.points() * d
    dist, _ = tree.query(pts)
    assert dist.max() <= float(eps) / 4 + slack
    # eps-monotone reuse: the same lattice set is a covering grid for any larger eps
    g2 = g.with_eps(eps.shift(1))
    assert dist.max() <= float(g2.eps) / 4 + slack


def test_grid_parallel_determinism(landau_schedule):
    g1, _ = _identity_grid(landau_schedule, polynomial_bounds([]), workers=1)
    g3, _ = _identity_grid(landau_schedule, polynomial_bounds([]), workers=3)
    assert g1.origin == g3.origin and np.array_equal(g1.mask, g3.mask)


def test_resource_cap(landau_schedule):
    s = encode_coefficients([], landau_schedule)
    with pytest.raises(ResourceCap):
        grid_from_image(s, landau_schedule, Dyadic(1, -1), Dyadic(1, -6), max_points=1000)


def test_csv_dumps(landau_schedule, tmp_path):
    g, trace = _identity_grid(landau_schedule, polynomial_bounds([]), keep_trace=True)
    write_grid_csv(g, tmp_path / "g.csv")
    lines = (tmp_path / "g.csv").read_text().splitlines()
    assert lines[0] == "eps,delta" and lines[1] == "1p-3,1p-5" and lines[2] == "i,j"
    back = read_grid_csv(tmp_path / "g.csv")
    assert back.origin == g.origin and np.array_equal(back.mask, g.mask)
    write_trace_csv(trace, tmp_path / "t.csv")
    head = (tmp_path / "t.csv").read_text().splitlines()
    assert head[0] == "i,j,re,im" and len(head) == trace.domain_count + 1
