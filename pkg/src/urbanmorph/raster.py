"""Georeferenced regular elevation grids.

Storage follows the ASCII-grid file convention: ``values[0]`` is the
northernmost row, ``origin`` is the lower-left corner of the grid.  All
cell arithmetic uses cell centers.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import HeaderMismatch, ParseError

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")


@dataclass
class HeightRaster:
    origin_x: float
    origin_y: float
    cell_size: float
    values: np.ndarray  # (nrows, ncols), row 0 = north
    nodata: float = -9999.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ParseError("raster values must be a 2-D array")
        if self.cell_size <= 0:
            raise ParseError("cell_size must be positive")

    @property
    def nrows(self) -> int:
        return self.values.shape[0]

    @property
    def ncols(self) -> int:
        return self.values.shape[1]

    def bbox(self) -> tuple[float, float, float, float]:
        return (self.origin_x, self.origin_y,
                self.origin_x + self.ncols * self.cell_size,
                self.origin_y + self.nrows * self.cell_size)

    def valid_mask(self) -> np.ndarray:
        return self.values != self.nodata

    def is_fully_void(self) -> bool:
        return not self.valid_mask().any()

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """(x of each column, y of each array row, northernmost first)."""
        xs = self.origin_x + (np.arange(self.ncols) + 0.5) * self.cell_size
        ys = self.origin_y + (self.nrows - np.arange(self.nrows) - 0.5) * self.cell_size
        return xs, ys

    def mean_in_rect(self, rect) -> float | None:
        """Mean of valid cells whose centers fall inside the rectangle."""
        x0, y0, x1, y1 = rect
        xs, ys = self.cell_centers()
        ci = np.nonzero((xs >= x0) & (xs < x1))[0]
        ri = np.nonzero((ys >= y0) & (ys < y1))[0]
        if len(ci) == 0 or len(ri) == 0:
            return None
        block = self.values[np.ix_(ri, ci)]
        valid = block != self.nodata
        if not valid.any():
            return None
        return float(block[valid].mean())


def load_ascii_grid(path) -> HeightRaster:
    """Parse an ESRI ASCII grid (canonical 6-line header, values top-down)."""
    text = Path(path).read_text()
    tokens = text.split()
    if len(tokens) < 12:
        raise ParseError(f"{path}: truncated grid file")
    header = {}
    pos = 0
    for _ in range(6):
        key = tokens[pos].lower()
        if key not in _HEADER_KEYS:
            raise ParseError(f"{path}: unexpected header key {tokens[pos]!r}")
        try:
            header[key] = float(tokens[pos + 1])
        except ValueError as exc:
            raise ParseError(f"{path}: bad header value for {key}") from exc
        pos += 2
    missing = [k for k in _HEADER_KEYS if k not in header]
    if missing:
        raise ParseError(f"{path}: missing header keys {missing}")
    ncols = int(header["ncols"])
    nrows = int(header["nrows"])
    if ncols <= 0 or nrows <= 0:
        raise ParseError(f"{path}: non-positive grid dimensions")
    body = tokens[pos:]
    if len(body) != ncols * nrows:
        raise HeaderMismatch(
            f"{path}: expected {ncols * nrows} values, found {len(body)}")
    try:
        vals = np.array([float(t) for t in body], dtype=float).reshape(nrows, ncols)
    except ValueError as exc:
        raise ParseError(f"{path}: non-numeric grid value") from exc
    return HeightRaster(origin_x=header["xllcorner"], origin_y=header["yllcorner"],
                        cell_size=header["cellsize"], values=vals,
                        nodata=header["nodata_value"])


def write_ascii_grid(raster: HeightRaster, path) -> None:
    """Write with shortest round-tripping float repr, so reload is bit-identical."""
    lines = [
        f"ncols {raster.ncols}",
        f"nrows {raster.nrows}",
        f"xllcorner {raster.origin_x!r}",
        f"yllcorner {raster.origin_y!r}",
        f"cellsize {raster.cell_size!r}",
        f"NODATA_value {raster.nodata!r}",
    ]
    for row in raster.values:
        lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def sample_bilinear(raster: HeightRaster, x, y):
    """Bilinear interpolation between the four nearest cell centers.

    Linear extension is used within the half-cell margin outside the
    center lattice. Any nonzero-weight NODATA support poisons the
    sample. Accepts scalars or arrays; returns NaN where poisoned.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cs = raster.cell_size
    gx = (x - raster.origin_x) / cs - 0.5
    gy_b = (y - raster.origin_y) / cs - 0.5  # row index counted from the south
    j0 = np.clip(np.floor(gx).astype(int), 0, max(raster.ncols - 2, 0))
    i0b = np.clip(np.floor(gy_b).astype(int), 0, max(raster.nrows - 2, 0))
    fx = gx - j0
    fy = gy_b - i0b
    if raster.ncols == 1:
        fx = np.zeros_like(fx)
    if raster.nrows == 1:
        fy = np.zeros_like(fy)

    r1 = raster.nrows - 1 - i0b          # array row of the southern support
    r0 = np.maximum(r1 - 1, 0)           # northern support
    j1 = np.minimum(j0 + 1, raster.ncols - 1)
    v = raster.values
    z00 = v[r1, j0]   # south-west
    z10 = v[r1, j1]   # south-east
    z01 = v[r0, j0]   # north-west
    z11 = v[r0, j1]   # north-east
    w00 = (1.0 - fx) * (1.0 - fy)
    w10 = fx * (1.0 - fy)
    w01 = (1.0 - fx) * fy
    w11 = fx * fy
    out = w00 * z00 + w10 * z10 + w01 * z01 + w11 * z11
    bad = np.zeros(out.shape, dtype=bool)
    for w, z in ((w00, z00), (w10, z10), (w01, z01), (w11, z11)):
        bad |= (w != 0.0) & (z == raster.nodata)
    out = np.where(bad, np.nan, out)
    return out if out.shape else float(out)


def resample_bilinear(raster: HeightRaster, target_cell: float) -> HeightRaster:
    """Resample onto the same extent at a new cell size."""
    if target_cell <= 0:
        raise ParseError("target cell size must be positive")
    x0, y0, x1, y1 = raster.bbox()
    ncols = max(1, int(round((x1 - x0) / target_cell)))
    nrows = max(1, int(round((y1 - y0) / target_cell)))
    return regrid(raster, x0, y0, target_cell, ncols, nrows)


def regrid(raster: HeightRaster, origin_x: float, origin_y: float,
           cell_size: float, ncols: int, nrows: int) -> HeightRaster:
    """Bilinear resample onto an explicit target geometry."""
    xs = origin_x + (np.arange(ncols) + 0.5) * cell_size
    ys = origin_y + (nrows - np.arange(nrows) - 0.5) * cell_size
    gx, gy = np.meshgrid(xs, ys)
    vals = sample_bilinear(raster, gx, gy)
    nodata = raster.nodata
    vals = np.where(np.isnan(vals), nodata, vals)
    return HeightRaster(origin_x=origin_x, origin_y=origin_y, cell_size=cell_size,
                        values=vals, nodata=nodata)


def fill_nodata_nearest(raster: HeightRaster) -> HeightRaster:
    """Replace NODATA cells with the value of the nearest valid cell.

    Isolated voids must not poison downstream scans; a raster with no
    valid cells at all is returned unchanged.
    """
    from scipy import ndimage

    invalid = ~raster.valid_mask()
    if not invalid.any() or invalid.all():
        return raster
    _, (ri, ci) = ndimage.distance_transform_edt(invalid, return_indices=True)
    filled = raster.values[ri, ci]
    return HeightRaster(origin_x=raster.origin_x, origin_y=raster.origin_y,
                        cell_size=raster.cell_size, values=filled,
                        nodata=raster.nodata)
