"""Auxiliary per-cell fields: coordinates, mean elevation, shape metrics.

These help downstream consumers interpolate coarser model output onto
the analysis grid: projected and geodetic center coordinates, the mean
terrain elevation from the source-resolution DEM (not the merged
building surface), and the cell perimeter and area.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grid import Cell
from .projection import ProjectionSpec, inverse
from .raster import HeightRaster


@dataclass
class CellMeta:
    X: float
    Y: float
    LAT: float
    LONG: float
    Z_MEAN: float | None
    SHAPE_Length: float
    SHAPE_Area: float


def cell_mean_elevation(cell: Cell, dem: HeightRaster | None) -> float | None:
    """Mean of valid source-resolution DEM cells centered in the cell."""
    if dem is None:
        return None
    return dem.mean_in_rect(cell.rect)


def cell_meta(cell: Cell, dem: HeightRaster | None,
              spec: ProjectionSpec = ProjectionSpec()) -> CellMeta:
    x, y = cell.center
    lat, lon = inverse(x, y, spec)
    res = cell.grid.resolution
    return CellMeta(X=x, Y=y, LAT=lat, LONG=lon,
                    Z_MEAN=cell_mean_elevation(cell, dem),
                    SHAPE_Length=4.0 * res, SHAPE_Area=res * res)
