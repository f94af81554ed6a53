"""Per-cell surface-class areas and fractions.

Class fractions are computed by subpixel rasterization with a fixed
painter's priority (building > water > road > industrial > green >
other) rather than exact vector overlay: at the default 1 m subpixel
the error stays well under the 1% the class areas are stable to, and
the counting is exact, deterministic and conserves areas across nested
resolutions when done on one master grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import PRIORITY_ORDER, ClassifiedFeature, SurfaceClass
from .errors import ConfigError, EmptyInput, IndexMissing
from .geometry import Polygon, Polyline, SpatialIndex
from .grid import Cell, GridSpec

CLASS_CODE = {cls: code for code, cls in enumerate(PRIORITY_ORDER)}


@dataclass
class ClassAreas:
    areas: dict[SurfaceClass, float]
    ratios: dict[SurfaceClass, float]

    @classmethod
    def from_counts(cls, counts: dict[SurfaceClass, int], subpixel: float) -> "ClassAreas":
        total = sum(counts.values())
        areas = {c: counts.get(c, 0) * subpixel * subpixel for c in SurfaceClass}
        ratios = {}
        running = 0.0
        for c in (SurfaceClass.BUILDING, SurfaceClass.GREEN, SurfaceClass.INDUSTRIAL,
                  SurfaceClass.ROAD, SurfaceClass.WATER):
            ratios[c] = counts.get(c, 0) / total
            running += ratios[c]
        # OTHER absorbs rounding so the sequential ratio sum is exactly 1
        ratios[SurfaceClass.OTHER] = 1.0 - running
        return cls(areas=areas, ratios=ratios)


def fill_ring_crossings(rings, origin_x: float, origin_y: float, res: float,
                        shape: tuple[int, int], mask: np.ndarray) -> None:
    """Even-odd scanline fill of subpixel centers into ``mask`` (row 0 = south)."""
    nrows, ncols = shape
    row_idx = []
    row_x = []
    for ring in rings:
        n = len(ring)
        for i in range(n):
            x1, y1 = ring[i]
            x2, y2 = ring[(i + 1) % n]
            if y1 == y2:
                continue
            ylo, yhi = (y1, y2) if y1 < y2 else (y2, y1)
            i_lo = max(0, math.ceil((ylo - origin_y) / res - 0.5))
            i_hi = min(nrows, math.ceil((yhi - origin_y) / res - 0.5))
            if i_hi <= i_lo:
                continue
            rows = np.arange(i_lo, i_hi)
            yc = origin_y + (rows + 0.5) * res
            xs = x1 + (yc - y1) * (x2 - x1) / (y2 - y1)
            row_idx.append(rows)
            row_x.append(xs)
    if not row_idx:
        return
    rows = np.concatenate(row_idx)
    xs = np.concatenate(row_x)
    order = np.lexsort((xs, rows))
    rows = rows[order]
    xs = xs[order]
    start = 0
    while start < len(rows):
        r = rows[start]
        end = start
        while end < len(rows) and rows[end] == r:
            end += 1
        cr = xs[start:end]
        for k in range(0, len(cr) - 1, 2):
            j_lo = max(0, math.ceil((cr[k] - origin_x) / res - 0.5))
            j_hi = min(ncols, math.ceil((cr[k + 1] - origin_x) / res - 0.5))
            if j_hi > j_lo:
                mask[r, j_lo:j_hi] = True
        start = end


def rasterize_polygon_mask(poly: Polygon, origin_x: float, origin_y: float,
                           res: float, shape: tuple[int, int]) -> np.ndarray:
    """Boolean mask of subpixel centers inside the polygon (holes excluded)."""
    mask = np.zeros(shape, dtype=bool)
    fill_ring_crossings(list(poly.rings()), origin_x, origin_y, res, shape, mask)
    return mask


def buffer_polyline(line: Polyline, half_width: float) -> list[Polygon]:
    """Per-segment rectangles with square caps; overlaps are harmless
    because painting is idempotent within one class."""
    out = []
    for (x1, y1), (x2, y2) in line.segments():
        dx, dy = x2 - x1, y2 - y1
        length = math.hypot(dx, dy)
        if length == 0.0:
            continue
        tx, ty = dx / length * half_width, dy / length * half_width
        nx, ny = -ty, tx
        ring = np.array([
            (x1 - tx + nx, y1 - ty + ny),
            (x1 - tx - nx, y1 - ty - ny),
            (x2 + tx - nx, y2 + ty - ny),
            (x2 + tx + nx, y2 + ty + ny),
        ])
        out.append(Polygon(ring))
    return out


class LandcoverPainter:
    """Paints classified polygons onto a subpixel code grid.

    One painter covers the full master extent; cells of any nesting
    resolution read their counts from slices of the same grid, which
    makes cross-resolution area sums exact by construction. Accepts a
    GridSpec or an explicit extent rectangle.
    """

    def __init__(self, extent, features: list[ClassifiedFeature],
                 subpixel: float = 1.0):
        if subpixel <= 0:
            raise ConfigError("landcover subpixel size must be positive")
        if isinstance(extent, GridSpec):
            per_cell = extent.resolution / subpixel
            if abs(per_cell - round(per_cell)) > 1e-9:
                raise ConfigError(
                    f"landcover resolution {subpixel} must divide the cell size "
                    f"{extent.resolution} evenly")
            extent = extent.extent()
        x0, y0, x1, y1 = extent
        self.subpixel = subpixel
        self.origin_x, self.origin_y = x0, y0
        ncols = (x1 - x0) / subpixel
        nrows = (y1 - y0) / subpixel
        if abs(ncols - round(ncols)) > 1e-9 or abs(nrows - round(nrows)) > 1e-9:
            raise ConfigError("landcover resolution must divide the extent evenly")
        ncols, nrows = int(round(ncols)), int(round(nrows))
        self.codes = np.zeros((nrows, ncols), dtype=np.uint8)  # 0 = OTHER
        for surface in PRIORITY_ORDER[1:]:
            code = CLASS_CODE[surface]
            for feat in features:
                if feat.surface is not surface:
                    continue
                mask = rasterize_polygon_mask(feat.polygon, x0, y0, subpixel,
                                              self.codes.shape)
                self.codes[mask] = code

    def cell_counts(self, cell: Cell) -> dict[SurfaceClass, int]:
        x0, y0, x1, y1 = cell.rect
        res = self.subpixel
        j0 = int(round((x0 - self.origin_x) / res))
        j1 = int(round((x1 - self.origin_x) / res))
        i0 = int(round((y0 - self.origin_y) / res))
        i1 = int(round((y1 - self.origin_y) / res))
        block = self.codes[i0:i1, j0:j1]
        counts = np.bincount(block.ravel(), minlength=len(PRIORITY_ORDER))
        return {cls: int(counts[CLASS_CODE[cls]]) for cls in PRIORITY_ORDER}

    def cell_class_areas(self, cell: Cell) -> ClassAreas:
        return ClassAreas.from_counts(self.cell_counts(cell), self.subpixel)


def classify_cell(cell: Cell, index: SpatialIndex | None,
                  features: list[ClassifiedFeature],
                  landcover_res: float = 1.0) -> ClassAreas:
    """Standalone per-cell classification (cell-local subpixel grid).

    Equivalent by construction to reading the same cell from a master
    painter: identical painting rules over the identical set of
    subpixel centers.
    """
    if index is None:
        raise IndexMissing("classify_cell requires a prebuilt feature index")
    x0, y0, x1, y1 = cell.rect
    n = (x1 - x0) / landcover_res
    if abs(n - round(n)) > 1e-9:
        raise ConfigError("landcover_res must divide the cell side evenly")
    n = int(round(n))
    codes = np.zeros((n, n), dtype=np.uint8)
    candidates = [features[i] for i in index.query(cell.rect)]
    for surface in PRIORITY_ORDER[1:]:
        code = CLASS_CODE[surface]
        for feat in candidates:
            if feat.surface is not surface:
                continue
            mask = rasterize_polygon_mask(feat.polygon, x0, y0, landcover_res, (n, n))
            codes[mask] = code
    counts = np.bincount(codes.ravel(), minlength=len(PRIORITY_ORDER))
    return ClassAreas.from_counts(
        {cls: int(counts[CLASS_CODE[cls]]) for cls in PRIORITY_ORDER}, landcover_res)


def feature_index(features: list[ClassifiedFeature]) -> SpatialIndex:
    return SpatialIndex([f.polygon.bbox() for f in features])


RATIO_FIELDS = {
    SurfaceClass.BUILDING: "BLD_RATIO",
    SurfaceClass.GREEN: "GREEN_RATIO",
    SurfaceClass.INDUSTRIAL: "INDUSTR_RATIO",
    SurfaceClass.ROAD: "ROAD_RATIO",
    SurfaceClass.WATER: "WATER_RATIO",
    SurfaceClass.OTHER: "OTHER_RATIO",
}


def aggregate_city_means(records: list) -> dict[str, float]:
    """Arithmetic means of the class ratio columns over the given records."""
    if not records:
        raise EmptyInput("no records to aggregate")
    out = {}
    for field_name in RATIO_FIELDS.values():
        vals = [getattr(r, field_name) for r in records]
        out[field_name] = float(sum(vals) / len(vals))
    return out
