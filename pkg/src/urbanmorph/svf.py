"""Sky-view factor over the merged terrain-plus-buildings surface.

Buildings are rasterized onto the terrain grid (pixel value = building
height, overlaps keep the max) and added to the elevation model. For
every pixel the circle is divided into equal azimuth sectors; within
each sector every pixel whose center lies inside the search radius is
examined and the maximum shading angle found. A sector-wide maximum is
required: marching a single ray per sector would miss off-axis
obstructions. The sky-view factor is the mean over sectors of the
cosine of the (non-negative) maximum angle.

cos(arctan(t)) is evaluated as 1/sqrt(1+t^2); together with the rest of
the arithmetic this keeps every step exactly IEEE-reproducible, so the
vectorized field scan, the per-pixel scan, and brute-force reference
scans agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import BuildingFeature
from .errors import ConfigError, NoDataUnderObserver
from .landcover import rasterize_polygon_mask
from .raster import HeightRaster


@dataclass
class SvfParams:
    n_sectors: int = 16
    radius: float = 200.0
    resolution: float = 5.0

    def __post_init__(self):
        if self.n_sectors < 4:
            raise ConfigError("need at least 4 azimuth sectors")
        if self.radius < self.resolution:
            raise ConfigError("search radius must be at least one pixel")


@dataclass
class SurfaceModel:
    """Terrain, building mask and their sum on one grid (row 0 = north)."""

    terrain: HeightRaster
    building_heights: np.ndarray
    building_mask: np.ndarray
    merged: np.ndarray

    @property
    def cell_size(self) -> float:
        return self.terrain.cell_size

    @property
    def shape(self) -> tuple[int, int]:
        return self.merged.shape


def rasterize_buildings(buildings: list[BuildingFeature], origin_x: float,
                        origin_y: float, cell_size: float,
                        shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Height raster + mask from footprints; pixel takes the height of the
    covering building, overlapping footprints keep the maximum."""
    heights = np.zeros(shape, dtype=float)
    for b in buildings:
        mask = rasterize_polygon_mask(b.footprint, origin_x, origin_y,
                                      cell_size, shape)[::-1]  # to north-first rows
        np.maximum(heights, np.where(mask, b.height, 0.0), out=heights)
    return heights, heights > 0.0


def build_surface_model(terrain: HeightRaster,
                        buildings: list[BuildingFeature]) -> SurfaceModel:
    """Merge buildings into the terrain as artificial relief."""
    x0, y0, _, _ = terrain.bbox()
    bld, mask = rasterize_buildings(buildings, x0, y0, terrain.cell_size,
                                    terrain.values.shape)
    merged = terrain.values + bld
    return SurfaceModel(terrain=terrain, building_heights=bld,
                        building_mask=mask, merged=merged)


def sector_of_offset(di: int, dj: int, n_sectors: int) -> int:
    """Azimuth sector of a pixel offset (di rows south, dj columns east).

    Sector k covers compass azimuth [k*360/n, (k+1)*360/n) degrees,
    north = 0, clockwise through east.
    """
    az = math.degrees(math.atan2(float(dj), float(-di))) % 360.0
    k = int(az // (360.0 / n_sectors))
    return min(k, n_sectors - 1)


def disc_offsets(radius: float, cell_size: float,
                 n_sectors: int) -> list[tuple[int, int, float, int]]:
    """All pixel offsets with center distance <= radius: (di, dj, dist, sector)."""
    mk = int(radius // cell_size)
    out = []
    for di in range(-mk, mk + 1):
        for dj in range(-mk, mk + 1):
            if di == 0 and dj == 0:
                continue
            dxm = dj * cell_size
            dym = di * cell_size
            d = math.sqrt(dxm * dxm + dym * dym)
            if d <= radius:
                out.append((di, dj, d, sector_of_offset(di, dj, n_sectors)))
    return out


def svf_field(model: SurfaceModel, params: SvfParams) -> np.ndarray:
    """Sky-view factor for every pixel of the surface model."""
    z = model.merged
    if np.any(z == model.terrain.nodata):
        raise NoDataUnderObserver("surface model contains NODATA; fill voids first")
    nsec = params.n_sectors
    H, W = z.shape
    best = np.full((nsec, H, W), -np.inf)
    for di, dj, d, s in disc_offsets(params.radius, model.cell_size, nsec):
        obs = (slice(max(0, -di), H - max(0, di)), slice(max(0, -dj), W - max(0, dj)))
        tgt = (slice(max(0, di), H - max(0, -di)), slice(max(0, dj), W - max(0, -dj)))
        t = (z[tgt] - z[obs]) / d
        view = best[s][obs]
        np.maximum(view, t, out=view)
    tan_max = np.maximum(best, 0.0)  # below-horizon and empty sectors open fully
    cos_v = 1.0 / np.sqrt(1.0 + tan_max * tan_max)
    total = cos_v[0].copy()
    for s in range(1, nsec):  # fixed sequential order: reproducible bit for bit
        total += cos_v[s]
    return total / nsec


def svf_at(model: SurfaceModel, row: int, col: int, params: SvfParams) -> float:
    """Sky-view factor of one pixel (same arithmetic as the field scan)."""
    z = model.merged
    if z[row, col] == model.terrain.nodata:
        raise NoDataUnderObserver(f"observer pixel ({row}, {col}) is NODATA")
    nsec = params.n_sectors
    H, W = z.shape
    z_obs = z[row, col]
    best = [-math.inf] * nsec
    for di, dj, d, s in disc_offsets(params.radius, model.cell_size, nsec):
        ti, tj = row + di, col + dj
        if not (0 <= ti < H and 0 <= tj < W):
            continue
        t = (z[ti, tj] - z_obs) / d
        if t > best[s]:
            best[s] = t
    total = 0.0
    first = True
    for s in range(nsec):
        tan_max = max(best[s], 0.0)
        c = 1.0 / math.sqrt(1.0 + tan_max * tan_max)
        if first:
            total = c
            first = False
        else:
            total += c
    return total / nsec


SVF_UNDEFINED = None


def svf_cell_stats(cell_rect, svf: np.ndarray, building_mask: np.ndarray,
                   origin_x: float, origin_y: float,
                   cell_size: float) -> tuple[float | None, float | None]:
    """(mean over all pixels in the cell, mean over ground pixels only).

    The ground-only mean is the undefined sentinel when the cell is
    entirely roofed; both are undefined when no pixel center falls in
    the cell.
    """
    x0, y0, x1, y1 = cell_rect
    H, W = svf.shape
    xs = origin_x + (np.arange(W) + 0.5) * cell_size
    ys = origin_y + (H - np.arange(H) - 0.5) * cell_size
    ci = np.nonzero((xs >= x0) & (xs < x1))[0]
    ri = np.nonzero((ys >= y0) & (ys < y1))[0]
    if len(ci) == 0 or len(ri) == 0:
        return None, None
    block = svf[np.ix_(ri, ci)]
    mask = building_mask[np.ix_(ri, ci)]
    mean_all = float(block.mean())
    ground = block[~mask]
    mean_ground = float(ground.mean()) if ground.size else None
    return mean_all, mean_ground
