"""Analysis grids.

All resolutions share one origin snapped down to a 1000 m multiple, so
the 200 m and 500 m grids nest exactly inside 1000 m cells and areas can
be regrouped across resolutions without loss.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

SNAP_BASE = 1000.0


@dataclass(frozen=True)
class GridSpec:
    origin_x: float
    origin_y: float
    resolution: float
    ncols: int
    nrows: int

    def cell_rect(self, col: int, row: int) -> tuple[float, float, float, float]:
        x0 = self.origin_x + col * self.resolution
        y0 = self.origin_y + row * self.resolution
        return (x0, y0, x0 + self.resolution, y0 + self.resolution)

    def cell_center(self, col: int, row: int) -> tuple[float, float]:
        return (self.origin_x + (col + 0.5) * self.resolution,
                self.origin_y + (row + 0.5) * self.resolution)

    def cells(self):
        """Row-major from the south-west corner; defines OBJECTID order."""
        for row in range(self.nrows):
            for col in range(self.ncols):
                yield Cell(grid=self, col=col, row=row)

    def cell_id(self, col: int, row: int) -> int:
        return row * self.ncols + col

    def cell_containing(self, x: float, y: float) -> tuple[int, int] | None:
        col = int((x - self.origin_x) // self.resolution)
        row = int((y - self.origin_y) // self.resolution)
        if 0 <= col < self.ncols and 0 <= row < self.nrows:
            return col, row
        return None

    def extent(self) -> tuple[float, float, float, float]:
        return (self.origin_x, self.origin_y,
                self.origin_x + self.ncols * self.resolution,
                self.origin_y + self.nrows * self.resolution)

    @property
    def n_cells(self) -> int:
        return self.ncols * self.nrows


@dataclass(frozen=True)
class Cell:
    grid: GridSpec
    col: int
    row: int

    @property
    def rect(self) -> tuple[float, float, float, float]:
        return self.grid.cell_rect(self.col, self.row)

    @property
    def center(self) -> tuple[float, float]:
        return self.grid.cell_center(self.col, self.row)

    @property
    def object_id(self) -> int:
        return self.grid.cell_id(self.col, self.row)


def make_grid(aoi: tuple[float, float, float, float], resolution: float) -> GridSpec:
    """Grid covering the AOI, origin snapped down to a 1000 m multiple."""
    xmin, ymin, xmax, ymax = aoi
    if xmax <= xmin or ymax <= ymin:
        raise ConfigError("AOI must have positive extent")
    if resolution <= 0:
        raise ConfigError("grid resolution must be positive")
    ox = SNAP_BASE * (xmin // SNAP_BASE)
    oy = SNAP_BASE * (ymin // SNAP_BASE)
    ncols = int(-((xmax - ox) // -resolution))  # ceil division
    nrows = int(-((ymax - oy) // -resolution))
    return GridSpec(origin_x=ox, origin_y=oy, resolution=resolution,
                    ncols=ncols, nrows=nrows)
