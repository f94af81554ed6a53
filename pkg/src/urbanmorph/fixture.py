"""Deterministic synthetic town generator for testing and benchmarks.

Builds a block-grid town (perimeter buildings around courtyards, park
and industrial blocks, an urban plaza, a river) plus a gently sloping
DEM, writes the input files and a ready-to-run config, and documents
exact expected values for selected cells derived from the layout
arithmetic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .raster import HeightRaster, write_ascii_grid


@dataclass
class TownSpec:
    origin_x: float = 400000.0
    origin_y: float = 6170000.0
    blocks_x: int = 5
    blocks_y: int = 5
    block_size: float = 200.0
    street_width: float = 20.0
    building_depth: float = 20.0
    corner_gap: float = 10.0
    mean_height: float = 17.0
    height_sigma: float = 4.0
    park_blocks: int = 2
    industrial_blocks: int = 2
    plaza_blocks: int = 1
    river: bool = True
    road_class: str = "residential"

    @property
    def size_x(self) -> float:
        return self.blocks_x * self.block_size

    @property
    def size_y(self) -> float:
        return self.blocks_y * self.block_size

    @property
    def aoi(self) -> tuple[float, float, float, float]:
        return (self.origin_x, self.origin_y,
                self.origin_x + self.size_x, self.origin_y + self.size_y)


DENSE = TownSpec(blocks_x=7, blocks_y=7, block_size=150.0, street_width=60.0,
                 building_depth=25.0, corner_gap=8.0, mean_height=17.0,
                 height_sigma=2.0, park_blocks=0, industrial_blocks=0,
                 plaza_blocks=0, river=False, road_class="primary")

PRESETS = {"default": TownSpec(), "dense": DENSE}


def _rect_feature(x0, y0, x1, y1, props):
    ring = [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]
    return {"type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [ring]},
            "properties": props}


def _line_feature(coords, props):
    return {"type": "Feature",
            "geometry": {"type": "LineString", "coordinates": coords},
            "properties": props}


def _fc(features):
    return {"type": "FeatureCollection", "features": features}


def _pinwheel_slabs(bx0, by0, bx1, by1, d, g):
    """Four perimeter slabs with corner ventilation gaps, courtyard inside."""
    return [
        (bx0, by0, bx1 - d - g, by0 + d),          # south
        (bx1 - d, by0, bx1, by1 - d - g),          # east
        (bx0 + d + g, by1 - d, bx1, by1),          # north
        (bx0, by0 + d + g, bx0 + d, by1 - g),      # west
    ]


def make_fixture_town(seed: int, out_dir, spec: TownSpec | None = None) -> dict:
    """Write a synthetic town; returns the ground-truth document."""
    spec = spec or TownSpec()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    x0, y0 = spec.origin_x, spec.origin_y
    B = spec.block_size
    half_street = spec.street_width / 2.0
    d, g = spec.building_depth, spec.corner_gap

    # block roles
    all_blocks = [(i, j) for i in range(spec.blocks_x) for j in range(spec.blocks_y)]
    special = rng.permutation(len(all_blocks))
    parks = {all_blocks[k] for k in special[:spec.park_blocks]}
    nxt = spec.park_blocks
    industrial = {all_blocks[k] for k in special[nxt:nxt + spec.industrial_blocks]}
    nxt += spec.industrial_blocks
    plazas = {all_blocks[k] for k in special[nxt:nxt + spec.plaza_blocks]}

    river_x0 = river_x1 = None
    if spec.river:
        river_col = spec.blocks_x // 2
        cx = x0 + (river_col + 0.5) * B
        river_x0, river_x1 = cx - 20.0, cx + 20.0

    buildings = []
    landuse = []
    water = []
    heights_used: dict[tuple[int, int], list[float]] = {}
    for (i, j) in all_blocks:
        bx0 = x0 + i * B + half_street
        by0 = y0 + j * B + half_street
        bx1 = x0 + (i + 1) * B - half_street
        by1 = y0 + (j + 1) * B - half_street
        if (i, j) in parks:
            landuse.append(_rect_feature(bx0, by0, bx1, by1, {"leisure": "park"}))
            continue
        if (i, j) in plazas:
            landuse.append(_rect_feature(bx0, by0, bx1, by1, {"place": "square"}))
            continue
        if (i, j) in industrial:
            landuse.append(_rect_feature(bx0, by0, bx1, by1,
                                         {"landuse": "industrial"}))
            # a couple of sheds inside the lot
            for k in range(2):
                sx = bx0 + 10.0 + k * ((bx1 - bx0) / 2.0)
                sy = by0 + 10.0
                h = float(np.round(rng.uniform(6.0, 10.0), 1))
                buildings.append(_rect_feature(sx, sy, sx + 30.0, sy + 15.0,
                                               {"height": str(h)}))
            continue
        blk_heights = []
        for n_slab, (sx0, sy0, sx1, sy1) in enumerate(
                _pinwheel_slabs(bx0, by0, bx1, by1, d, g)):
            if river_x0 is not None and sx1 > river_x0 and sx0 < river_x1:
                continue  # no buildings in the river
            h = float(np.clip(np.round(rng.normal(spec.mean_height,
                                                  spec.height_sigma), 1), 6.0, 40.0))
            blk_heights.append(h)
            if n_slab % 4 == 3:
                props = {"levels": str(int(round(h / 3.0)))}
            else:
                props = {"height": str(h)}
            buildings.append(_rect_feature(sx0, sy0, sx1, sy1, props))
        heights_used[(i, j)] = blk_heights

    if river_x0 is not None:
        water.append(_rect_feature(river_x0, y0, river_x1, y0 + spec.size_y,
                                   {"natural": "water"}))

    roads = []
    for k in range(spec.blocks_x + 1):
        x = x0 + k * B
        roads.append(_line_feature([[x, y0], [x, y0 + spec.size_y]],
                                   {"highway": spec.road_class}))
    for k in range(spec.blocks_y + 1):
        y = y0 + k * B
        roads.append(_line_feature([[x0, y], [x0 + spec.size_x, y]],
                                   {"highway": spec.road_class}))

    # DEM: gentle west-east ramp with a smooth bump, a couple of voids
    dem_cell = 90.0
    margin = 2
    ncols = int(math.ceil(spec.size_x / dem_cell)) + 2 * margin
    nrows = int(math.ceil(spec.size_y / dem_cell)) + 2 * margin
    dem_x0 = x0 - margin * dem_cell
    dem_y0 = y0 - margin * dem_cell
    xs = dem_x0 + (np.arange(ncols) + 0.5) * dem_cell
    ys = dem_y0 + (nrows - np.arange(nrows) - 0.5) * dem_cell
    gx, gy = np.meshgrid(xs, ys)
    vals = 150.0 + 0.01 * (gx - x0) + 4.0 * np.sin((gy - y0) / 300.0)
    vals = np.round(vals, 2)
    vals[nrows // 2, ncols // 3] = -9999.0
    vals[nrows // 3, 2 * ncols // 3] = -9999.0
    dem = HeightRaster(dem_x0, dem_y0, dem_cell, vals, nodata=-9999.0)

    (out / "buildings.geojson").write_text(json.dumps(_fc(buildings)))
    (out / "roads.geojson").write_text(json.dumps(_fc(roads)))
    (out / "landuse.geojson").write_text(json.dumps(_fc(landuse)))
    (out / "water.geojson").write_text(json.dumps(_fc(water)))
    write_ascii_grid(dem, out / "dem.asc")

    config = {
        "aoi": list(spec.aoi),
        "resolutions": [200, 500, 1000],
        "layers": {
            "buildings": "buildings.geojson",
            "roads": "roads.geojson",
            "landuse": "landuse.geojson",
            "water": "water.geojson",
        },
        "dem": "dem.asc",
        "svf": {"n_sectors": 16, "radius": 100.0, "resolution": 5.0},
        "output": {"directory": "out"},
    }
    (out / "config.json").write_text(json.dumps(config, indent=1))

    # exact expectations from the layout arithmetic (200 m cells == blocks
    # only when block_size == 200 and the AOI is block-aligned)
    river_cols = {spec.blocks_x // 2} if spec.river else set()
    residential = [list(b) for b in sorted(all_blocks)
                   if b not in parks and b not in industrial and b not in plazas
                   and b[0] not in river_cols]
    truth: dict = {
        "seed": seed,
        "aoi": list(spec.aoi),
        "street_azimuths_deg": [0.0, 90.0],
        "block_size": B,
        "park_blocks": sorted(map(list, parks)),
        "industrial_blocks": sorted(map(list, industrial)),
        "plaza_blocks": sorted(map(list, plazas)),
        "residential_blocks": residential,
        "mean_height_target": spec.mean_height,
        # streets run exactly north-south and east-west with equal lengths
        # per interior cell: first mode is the midpoint of class 0
        "interior_cell_directions": {"DIR1_6": 15.0, "DIR2_6": 105.0,
                                     "DIRRATIO_6": 1.0},
    }
    if B == 200.0:
        road_half = 7.0 if spec.road_class == "residential" else 15.0
        road_area = 2 * (road_half * 2 * B) - 4 * (road_half ** 2)
        interior = (B - spec.street_width) ** 2
        truth["park_cell"] = {
            "GREEN_RATIO": interior / (B * B),
            "ROAD_RATIO": road_area / (B * B),
        }
        slab_long = (B - spec.street_width) - d - g
        bld_area = 2 * (slab_long * d) + d * (B - spec.street_width - d - g) \
            + d * (B - spec.street_width - d - 2 * g)
        truth["building_cell"] = {"BLD_AREA": bld_area,
                                  "BLD_RATIO": bld_area / (B * B)}
    (out / "groundtruth.json").write_text(json.dumps(truth, indent=1))
    return truth
