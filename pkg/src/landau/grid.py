"""Covering grids of bounded sets and the largest-disc estimator on them.

A covering grid ``(eps, delta, G)`` stores ``G`` as a boolean raster over the
lattice ``delta*Z x delta*Z``; ``mask[a, b]`` is lattice point
``(origin[0] + a, origin[1] + b)``.  All set-membership decisions are made on
exact integers (squared distances in lattice units), never in floating point.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy import ndimage

from .dyadic import ComplexDyadic, Dyadic, Rounding, approx_sqrt, pow2, sqrt2_enclosure
from .errors import EmptyMask, LandauError, ResourceCap
from .schedule import ANTIDERIVATIVE, GenericBounds, round_down
from .series import BatchEvaluator
from .stream import PiStream

DEFAULT_MAX_POINTS = 60_000_000


@dataclass
class CoveringGrid:
    eps: Dyadic
    delta: Dyadic
    mask: np.ndarray
    origin: tuple[int, int] = (0, 0)

    def __post_init__(self):
        self.eps = Dyadic.coerce(self.eps)
        self.delta = Dyadic.coerce(self.delta)
        self.mask = np.asarray(self.mask, dtype=bool)
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not self.delta.shift(2) <= self.eps:
            raise ValueError("covering grids need delta <= eps/4")
        if not self.mask.any():
            raise ValueError("a covering grid needs at least one point")

    @classmethod
    def from_points(cls, eps, delta, points: Iterable[tuple[int, int]]) -> "CoveringGrid":
        pts = np.array(sorted(set(map(tuple, points))), dtype=np.int64).reshape(-1, 2)
        if len(pts) == 0:
            raise ValueError("a covering grid needs at least one point")
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        mask = np.zeros(tuple(hi - lo + 1), dtype=bool)
        mask[pts[:, 0] - lo[0], pts[:, 1] - lo[1]] = True
        return cls(eps, delta, mask, (int(lo[0]), int(lo[1])))

    def points(self) -> np.ndarray:
        a, b = np.nonzero(self.mask)
        return np.stack([a + self.origin[0], b + self.origin[1]], axis=1).astype(np.int64)

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __contains__(self, ij) -> bool:
        a, b = ij[0] - self.origin[0], ij[1] - self.origin[1]
        return 0 <= a < self.mask.shape[0] and 0 <= b < self.mask.shape[1] and bool(self.mask[a, b])

    def with_eps(self, eps) -> "CoveringGrid":
        """The same lattice set viewed as a covering grid for a larger ``eps``."""
        eps = Dyadic.coerce(eps)
        if eps < self.eps:
            raise ValueError("a covering grid only transfers to larger eps")
        return CoveringGrid(eps, self.delta, self.mask, self.origin)


@dataclass
class DiscEstimate:
    s: int
    lower: Dyadic
    upper: Dyadic


@dataclass
class GridBuildTrace:
    delta_D: Dyadic
    domain_count: int
    contains_origin: bool
    eval_tol: Dyadic
    unit_exponent: int
    mu1: Dyadic
    # only with keep_trace=True: lattice indices of G_D and d_z in units of 2**-unit_exponent
    domain_i: np.ndarray | None = field(default=None, repr=False)
    domain_j: np.ndarray | None = field(default=None, repr=False)
    values_re: np.ndarray | None = field(default=None, repr=False)
    values_im: np.ndarray | None = field(default=None, repr=False)

    def approx_values(self) -> dict[tuple[int, int], ComplexDyadic]:
        if self.domain_i is None:
            raise ValueError("trace was built without keep_trace=True")
        K = self.unit_exponent
        return {(int(i), int(j)): ComplexDyadic(Dyadic(int(x), -K), Dyadic(int(y), -K))
                for i, j, x, y in zip(self.domain_i, self.domain_j, self.values_re, self.values_im)}


# -- the estimator l(eps, delta, G) --------------------------------------------

def nearest_complement_d2(mask: np.ndarray) -> np.ndarray:
    """Exact squared lattice distance from every cell to the nearest cell outside ``mask``.

    Cells outside the array count as outside the mask.  Uses the exact
    Euclidean feature transform and recomputes the distances in integers.
    """
    padded = np.pad(np.asarray(mask, dtype=bool), 1)
    idx = ndimage.distance_transform_edt(padded, return_distances=False, return_indices=True)
    rows = np.arange(padded.shape[0], dtype=np.int64)[:, None]
    cols = np.arange(padded.shape[1], dtype=np.int64)[None, :]
    d2 = (rows - idx[0].astype(np.int64)) ** 2 + (cols - idx[1].astype(np.int64)) ** 2
    return d2[1:-1, 1:-1]


def max_min_d2(mask: np.ndarray) -> int:
    """``max over G of min over the complement lattice`` of squared lattice distance."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyMask("empty grid")
    return int(nearest_complement_d2(mask)[mask].max())


def _sqrt_enclosure(s: int, q: int) -> tuple[Dyadic, Dyadic]:
    return approx_sqrt(s, q, Rounding.DOWN), approx_sqrt(s, q, Rounding.UP)


def grid_l_value(g: CoveringGrid, prec: int = 53) -> DiscEstimate:
    """Enclosure of ``delta * (1 + sqrt(s))`` no wider than ``2**-prec``."""
    s = max_min_d2(g.mask)
    q = prec + max(0, g.delta.floor_log2() + 1)
    lo, hi = _sqrt_enclosure(s, q)
    return DiscEstimate(s, g.delta * (1 + lo), g.delta * (1 + hi))


def covered_contains(g: CoveringGrid, p) -> bool:
    """Is ``p`` in the union of open discs of radius ``3*eps/4`` around the grid points?"""
    p = ComplexDyadic.coerce(p)
    px, py = p.re.to_fraction(), p.im.to_fraction()
    d = g.delta.to_fraction()
    rad = g.eps.to_fraction() * 3 / 4
    rad2 = rad * rad
    i_lo, i_hi = math.floor((px - rad) / d), math.ceil((px + rad) / d)
    j_lo, j_hi = math.floor((py - rad) / d), math.ceil((py + rad) / d)
    for i in range(i_lo, i_hi + 1):
        for j in range(j_lo, j_hi + 1):
            if (i, j) in g and (px - i * d) ** 2 + (py - j * d) ** 2 < rad2:
                return True
    return False


# -- brute-force oracle on rasterised sets -------------------------------------

def brute_largest_disc(mask: np.ndarray, cell, prec: int = 40) -> tuple[Dyadic, Dyadic]:
    """Enclosure of the largest disc radius inside a union of closed lattice cells.

    ``mask[a, b]`` marks the closed square of side ``cell`` centred at
    ``(a*cell, b*cell)``.  Every disc centre is within half a cell diagonal of
    a lattice point, which gives the width of the enclosure.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyMask("empty mask")
    cell = Dyadic.coerce(cell)
    padded = np.pad(mask, 1)
    inside = np.argwhere(padded)
    outside = np.argwhere(~padded)
    best = 0
    for start in range(0, len(inside), 256):
        block = inside[start:start + 256]
        dx = np.abs(block[:, None, 0] - outside[None, :, 0])
        dy = np.abs(block[:, None, 1] - outside[None, :, 1])
        # 4 * squared distance from a centre to a neighbouring closed square
        ex = np.maximum(2 * dx - 1, 0)
        ey = np.maximum(2 * dy - 1, 0)
        best = max(best, int((ex * ex + ey * ey).min(axis=1).max()))
    lo, hi = _sqrt_enclosure(best, prec)
    s2 = sqrt2_enclosure(prec)[1]
    return (cell * lo).half(), (cell * (hi + s2)).half()


# -- the grid of an image f(D_r) -----------------------------------------------

def _row_ranges(r: Dyadic, step: Dyadic) -> tuple[int, np.ndarray]:
    """For rows ``i = -M..M`` the largest ``j`` with ``(i**2 + j**2) step**2 < r**2`` (-1: empty row)."""
    R2 = (r.to_fraction() / step.to_fraction()) ** 2
    M = math.isqrt(math.ceil(R2) - 1)
    jmax = np.empty(2 * M + 1, dtype=np.int64)
    for idx, i in enumerate(range(-M, M + 1)):
        X = R2 - i * i
        jmax[idx] = math.isqrt(math.ceil(X) - 1) if X > 0 else -1
    return M, jmax


def grid_from_image(stream: PiStream, schedule, r, eps, bounds=None, max_points: int = DEFAULT_MAX_POINTS,
                    workers: int = 1, keep_trace: bool = False, chunk: int = 1 << 18):
    """Covering grid ``(eps, eps/4, G)`` of ``f(D_r)`` and its build trace.

    The domain lattice has spacing ``delta_D <= eps / (16 mu1)``; every
    ``d_z`` is within ``eps/16`` of ``f(z)``; ``G`` collects the
    ``eps/4``-lattice points ``y`` with ``|d_z - y| <= 3 eps / 16``.
    """
    r = Dyadic.coerce(r)
    eps = Dyadic.coerce(eps)
    if not (0 < r < 1):
        raise ValueError("need 0 < r < 1")
    if not eps > 0:
        raise ValueError("need eps > 0")
    bounds = bounds if bounds is not None else GenericBounds(schedule)
    delta = eps.shift(-2)
    mu1 = bounds.mu1(r)
    delta_D = round_down(eps.to_fraction() / (16 * mu1.to_fraction()), 8)

    M, jmax = _row_ranges(r, delta_D)
    domain_count = int((2 * jmax + 1).clip(min=0).sum())
    if domain_count > max_points:
        raise ResourceCap(f"domain lattice has {domain_count} points (cap {max_points})")

    # d_z in integer units of 2**-K; delta must be an integer number of units
    K = max(-delta.exponent, 20 - eps.floor_log2())
    unit = pow2(-K)
    delta_u = delta.mantissa << (delta.exponent + K)
    tol = eps.shift(-4) - unit
    if not tol > 0 or delta_u.bit_length() > 28:
        raise ValueError("eps needs a short dyadic mantissa for exact lattice tests")
    img_radius = mu1.to_fraction() * r.to_fraction() + eps.to_fraction()
    P = math.ceil(img_radius / delta.to_fraction()) + 2
    if (2 * P + 1) ** 2 > max_points:
        raise ResourceCap(f"image raster needs {(2 * P + 1) ** 2} cells (cap {max_points})")
    if float(img_radius) * 2.0 ** K > 2.0 ** 60:
        raise ValueError("image too large for 64-bit lattice arithmetic")

    ev = BatchEvaluator(stream, schedule, ANTIDERIVATIVE, r, tol)
    step = float(delta_D)
    scale = 2.0 ** K
    thresh = 9 * delta_u * delta_u

    # split rows into chunks of about `chunk` points
    rows = np.arange(-M, M + 1)
    counts = (2 * jmax + 1).clip(min=0)
    bounds_idx = [0]
    acc = 0
    for idx, c in enumerate(counts):
        acc += int(c)
        if acc >= chunk:
            bounds_idx.append(idx + 1)
            acc = 0
    if bounds_idx[-1] != len(rows):
        bounds_idx.append(len(rows))

    def work(span):
        a, b = span
        c = counts[a:b]
        ii = np.repeat(rows[a:b], c)
        starts = np.repeat(-jmax[a:b], c)
        offs = np.arange(int(c.sum())) - np.repeat(np.cumsum(c) - c, c)
        jj = starts + offs
        z = ii * step + 1j * (jj * step)
        vals = ev(z)
        dre = np.rint(vals.real * scale).astype(np.int64)
        dim = np.rint(vals.imag * scale).astype(np.int64)
        p0 = np.floor_divide(dre, delta_u)
        q0 = np.floor_divide(dim, delta_u)
        hits_p, hits_q = [], []
        for bp in (0, 1):
            dx = dre - (p0 + bp) * delta_u
            for bq in (0, 1):
                dy = dim - (q0 + bq) * delta_u
                ok = 16 * (dx * dx + dy * dy) <= thresh
                hits_p.append((p0 + bp)[ok])
                hits_q.append((q0 + bq)[ok])
        hp, hq = np.concatenate(hits_p), np.concatenate(hits_q)
        extra = (ii, jj, dre, dim) if keep_trace else None
        return hp, hq, extra

    spans = list(zip(bounds_idx[:-1], bounds_idx[1:]))
    raster = np.zeros((2 * P + 1, 2 * P + 1), dtype=bool)
    extras = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = pool.map(work, spans)
            for hp, hq, extra in results:
                _mark(raster, hp, hq, P)
                extras.append(extra)
    else:
        for span in spans:
            hp, hq, extra = work(span)
            _mark(raster, hp, hq, P)
            extras.append(extra)

    a, b = np.nonzero(raster)
    mask = raster[a.min():a.max() + 1, b.min():b.max() + 1].copy()
    grid = CoveringGrid(eps, delta, mask, (int(a.min()) - P, int(b.min()) - P))
    trace = GridBuildTrace(delta_D, domain_count, M >= 0 and jmax[M] >= 0, tol, K, mu1)
    if keep_trace:
        trace.domain_i = np.concatenate([e[0] for e in extras])
        trace.domain_j = np.concatenate([e[1] for e in extras])
        trace.values_re = np.concatenate([e[2] for e in extras])
        trace.values_im = np.concatenate([e[3] for e in extras])
    return grid, trace


def _mark(raster: np.ndarray, hp: np.ndarray, hq: np.ndarray, P: int) -> None:
    if hp.size and (hp.min() < -P or hp.max() > P or hq.min() < -P or hq.max() > P):
        raise LandauError("image escaped the raster: the mu1 bound is not valid for this stream")
    raster[hp + P, hq + P] = True


# -- dumps ----------------------------------------------------------------------

def grid_csv_text(g: CoveringGrid) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eps", "delta"])
    w.writerow([str(g.eps), str(g.delta)])
    w.writerow(["i", "j"])
    w.writerows(g.points().tolist())
    return buf.getvalue()


def write_grid_csv(g: CoveringGrid, path: str | Path) -> None:
    Path(path).write_text(grid_csv_text(g))


def read_grid_csv(path: str | Path) -> CoveringGrid:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    eps, delta = rows[1]
    return CoveringGrid.from_points(Dyadic.coerce(eps), Dyadic.coerce(delta), [(int(i), int(j)) for i, j in rows[3:]])


def write_trace_csv(trace: GridBuildTrace, path: str | Path) -> None:
    if trace.domain_i is None:
        raise ValueError("trace was built without keep_trace=True")
    K = trace.unit_exponent
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "re", "im"])
        for i, j, x, y in zip(trace.domain_i, trace.domain_j, trace.values_re, trace.values_im):
            w.writerow([int(i), int(j), str(Dyadic(int(x), -K)), str(Dyadic(int(y), -K))])
