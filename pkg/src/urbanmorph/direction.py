"""Dominant street orientations per cell.

Road polylines are cut at cell boundaries and exploded into elementary
two-vertex segments. Per cell, segment lengths are binned by azimuth
(undirected, folded into [0, 180)) into N classes; the primary and
secondary histogram peaks are refined with the standard mode
interpolation M = a + h*(L - L_prev) / (2L - L_prev - L_next).

Neighbor indexing is circular across the 0/180 seam: street orientation
is 180-degree periodic, so the seam must not create artificial
histogram edges. The mode value depends on the class layout, so the
computation runs for several N (6, 7 and 8 by default) and all variants
are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Polyline
from .grid import GridSpec

DEFAULT_SECTOR_COUNTS = (6, 7, 8)


@dataclass
class StreetSegment:
    x1: float
    y1: float
    x2: float
    y2: float
    length: float
    azimuth: float          # degrees in [0, 180)
    cell: tuple[int, int] | None  # (col, row), None when outside the grid


@dataclass
class AzimuthHistogram:
    n_classes: int
    lengths: np.ndarray  # summed segment length per class

    @property
    def class_width(self) -> float:
        return 180.0 / self.n_classes

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())


@dataclass
class DirectionResult:
    dir1: float | None
    dir2: float | None
    ratio: float | None  # frequency of mode 1 over mode 2, >= 1


def segment_azimuth(x1: float, y1: float, x2: float, y2: float) -> float:
    """Undirected compass bearing in [0, 180)."""
    az = math.degrees(math.atan2(x2 - x1, y2 - y1)) % 180.0
    return az


def _grid_cuts(lo: float, hi: float, origin: float, step: float) -> list[float]:
    """Grid-line ordinates strictly between lo and hi."""
    if hi <= lo:
        return []
    k0 = math.floor((lo - origin) / step) + 1
    k1 = math.ceil((hi - origin) / step) - 1
    return [origin + k * step for k in range(k0, k1 + 1)
            if lo < origin + k * step < hi]


def split_segments_by_grid(roads: list[Polyline], grid: GridSpec) -> list[StreetSegment]:
    """Cut polylines at cell boundaries, explode to two-vertex segments,
    tag each with the cell containing its midpoint. Length is conserved."""
    out: list[StreetSegment] = []
    for line in roads:
        for (x1, y1), (x2, y2) in line.segments():
            ts = {0.0, 1.0}
            dx, dy = x2 - x1, y2 - y1
            if dx != 0.0:
                for cx in _grid_cuts(min(x1, x2), max(x1, x2),
                                     grid.origin_x, grid.resolution):
                    ts.add((cx - x1) / dx)
            if dy != 0.0:
                for cy in _grid_cuts(min(y1, y2), max(y1, y2),
                                     grid.origin_y, grid.resolution):
                    ts.add((cy - y1) / dy)
            tlist = sorted(t for t in ts if 0.0 <= t <= 1.0)
            az = segment_azimuth(x1, y1, x2, y2)
            for ta, tb in zip(tlist[:-1], tlist[1:]):
                ax, ay = x1 + ta * dx, y1 + ta * dy
                bx, by = x1 + tb * dx, y1 + tb * dy
                length = math.hypot(bx - ax, by - ay)
                if length == 0.0:
                    continue
                mid = ((ax + bx) / 2.0, (ay + by) / 2.0)
                out.append(StreetSegment(ax, ay, bx, by, length, az,
                                         grid.cell_containing(*mid)))
    return out


def azimuth_histogram(segments: list[StreetSegment], n_classes: int) -> AzimuthHistogram:
    """Summed lengths per azimuth class, classes half-open [a_i, a_{i+1})."""
    h = 180.0 / n_classes
    lengths = np.zeros(n_classes, dtype=float)
    for s in segments:
        k = min(int(s.azimuth // h), n_classes - 1)
        lengths[k] += s.length
    return AzimuthHistogram(n_classes=n_classes, lengths=lengths)


def _interpolate_mode(lengths: np.ndarray, i: int, h: float) -> float:
    n = len(lengths)
    li = lengths[i]
    lp = lengths[(i - 1) % n]
    ln = lengths[(i + 1) % n]
    denom = 2.0 * li - lp - ln
    frac = 0.5 if denom == 0.0 else (li - lp) / denom  # flat top: class midpoint
    return (i * h + h * frac) % 180.0


def find_modes(hist: AzimuthHistogram) -> DirectionResult:
    """Primary direction, secondary direction and their frequency ratio.

    The secondary mode is the largest local maximum (>= both circular
    neighbors, positive length) outside the primary class and its
    immediate neighbors: a shoulder of the main peak is not a second
    street direction. Cells with no segments, or with a single positive
    extremum, leave the respective fields undefined.
    """
    L = hist.lengths
    n = hist.n_classes
    h = hist.class_width
    if not (L > 0.0).any():
        return DirectionResult(None, None, None)
    m = int(np.argmax(L))  # ties: lowest class index
    dir1 = _interpolate_mode(L, m, h)
    excluded = {m, (m - 1) % n, (m + 1) % n}
    best_r = None
    for r in range(n):
        if r in excluded or L[r] <= 0.0:
            continue
        if L[r] >= L[(r - 1) % n] and L[r] >= L[(r + 1) % n]:
            if best_r is None or L[r] > L[best_r]:
                best_r = r
    if best_r is None:
        return DirectionResult(dir1, None, None)
    dir2 = _interpolate_mode(L, best_r, h)
    ratio = float(L[m] / L[best_r])
    return DirectionResult(dir1, dir2, ratio)


def direction_params(segments: list[StreetSegment],
                     sector_counts=DEFAULT_SECTOR_COUNTS) -> dict[str, float | None]:
    """DIR1/DIR2/DIRRATIO fields for every configured class count."""
    out: dict[str, float | None] = {}
    for n in sector_counts:
        res = find_modes(azimuth_histogram(segments, n))
        out[f"DIR1_{n}"] = res.dir1
        out[f"DIR2_{n}"] = res.dir2
        out[f"DIRRATIO_{n}"] = res.ratio
    return out
