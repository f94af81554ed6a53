"""Batch orchestration: from input layers to the multi-resolution tables.

One immutable scene context (classified land cover, canyon
triangulation, sky-view field, DEM) is built once per run; cells are
then independent work units mapped over a worker pool in deterministic
chunks, so the output is byte-identical for any worker count.
"""

from __future__ import annotations

import json
import math
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .canyon import (
    CanyonSet,
    build_canyon_triangulation,
    building_role_ratios,
    cell_canyon_stats,
    frontal_index,
    weighted_building_height,
)
from .cellmeta import cell_meta
from .classify import (
    CLASS_LEGEND,
    ClassifiedFeature,
    ClassMapping,
    HeightRule,
    SurfaceClass,
    default_mapping,
    extract_buildings,
    reclassify,
)
from .direction import (
    DEFAULT_SECTOR_COUNTS,
    direction_params,
    split_segments_by_grid,
)
from .errors import ConfigError, EmptyInput
from .geometry import Polygon, Polyline, point_in_polygon
from .grid import Cell, GridSpec, make_grid
from .landcover import LandcoverPainter, aggregate_city_means, buffer_polyline
from .projection import ProjectionSpec
from .raster import (
    HeightRaster,
    fill_nodata_nearest,
    load_ascii_grid,
    regrid,
    write_ascii_grid,
)
from .records import CellRecord, csv_header, csv_row
from .svf import SvfParams, build_surface_model, svf_cell_stats, svf_field
from .vectorio import (
    feature_collection,
    load_vector_layer,
    polygon_feature,
    write_geojson,
)

DEFAULT_ROAD_HALF_WIDTHS = {
    "motorway": 15.0, "trunk": 15.0, "primary": 15.0,
    "secondary": 10.0, "tertiary": 10.0,
    "residential": 7.0, "living_street": 7.0, "unclassified": 7.0,
    "default": 5.0,
}


@dataclass
class RunConfig:
    aoi: tuple[float, float, float, float]
    layers: dict[str, str]
    resolutions: list[float] = field(default_factory=lambda: [200.0, 500.0, 1000.0])
    dem: str | None = None
    mask: str | None = None
    strict_parsing: bool = False
    class_mapping: list[dict] | None = None
    landcover_resolution: float = 1.0
    road_half_widths: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_ROAD_HALF_WIDTHS))
    road_class_key: str = "highway"
    building_heights: dict = field(default_factory=dict)
    svf: dict = field(default_factory=dict)
    direction_sector_counts: list[int] = field(
        default_factory=lambda: list(DEFAULT_SECTOR_COUNTS))
    projection: dict = field(default_factory=dict)
    output_directory: str = "out"
    geojson_grid: bool = False
    svf_grid: bool = False
    float_digits: int = 6
    workers: int = 1
    base_dir: Path = field(default_factory=Path)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(doc, base_dir=path.parent)

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path = Path()) -> "RunConfig":
        if "aoi" not in doc or "layers" not in doc:
            raise ConfigError("config must define 'aoi' and 'layers'")
        output = doc.get("output", {})
        return cls(
            aoi=tuple(float(v) for v in doc["aoi"]),
            layers=dict(doc["layers"]),
            resolutions=[float(r) for r in doc.get("resolutions", [200, 500, 1000])],
            dem=doc.get("dem"),
            mask=doc.get("mask"),
            strict_parsing=bool(doc.get("strict_parsing", False)),
            class_mapping=doc.get("class_mapping"),
            landcover_resolution=float(doc.get("landcover_resolution", 1.0)),
            road_half_widths={**DEFAULT_ROAD_HALF_WIDTHS,
                              **doc.get("road_half_widths", {})},
            road_class_key=doc.get("road_class_key", "highway"),
            building_heights=doc.get("building_heights", {}),
            svf=doc.get("svf", {}),
            direction_sector_counts=[int(n) for n in
                                     doc.get("direction_sector_counts", DEFAULT_SECTOR_COUNTS)],
            projection=doc.get("projection", {}),
            output_directory=output.get("directory", "out"),
            geojson_grid=bool(output.get("geojson_grid", False)),
            svf_grid=bool(output.get("svf_grid", False)),
            float_digits=int(output.get("float_digits", 6)),
            workers=int(doc.get("workers", 1)),
            base_dir=Path(base_dir),
        )

    def resolve(self, rel: str) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else self.base_dir / p

    def svf_params(self) -> SvfParams:
        return SvfParams(n_sectors=int(self.svf.get("n_sectors", 16)),
                         radius=float(self.svf.get("radius", 200.0)),
                         resolution=float(self.svf.get("resolution", 5.0)))

    def height_rule(self) -> HeightRule:
        return HeightRule(
            height_key=self.building_heights.get("height_key", "height"),
            levels_key=self.building_heights.get("levels_key", "levels"),
            meters_per_level=float(self.building_heights.get("meters_per_level", 3.0)),
            default_height=float(self.building_heights.get("default_height", 12.0)))

    def projection_spec(self) -> ProjectionSpec:
        if not self.projection:
            return ProjectionSpec()
        return ProjectionSpec(
            semi_major_axis=float(self.projection.get("semi_major_axis", 6378137.0)),
            inverse_flattening=float(self.projection.get("inverse_flattening",
                                                         298.257223563)),
            central_meridian=float(self.projection.get("central_meridian", 39.0)),
            scale_factor=float(self.projection.get("scale_factor", 0.9996)),
            false_easting=float(self.projection.get("false_easting", 500000.0)),
            false_northing=float(self.projection.get("false_northing", 0.0)))

    def validate(self) -> list[str]:
        """Dry-run input checks; returns problem descriptions (empty = ok)."""
        problems = []
        x0, y0, x1, y1 = self.aoi
        if x1 <= x0 or y1 <= y0:
            problems.append("AOI has non-positive extent")
        if not self.resolutions:
            problems.append("resolutions list is empty")
        svf_res = self.svf_params().resolution
        for r in self.resolutions:
            if r <= 0:
                problems.append(f"resolution {r} is not positive")
            elif abs(r / svf_res - round(r / svf_res)) > 1e-9:
                problems.append(f"sky-view resolution {svf_res} must divide "
                                f"grid resolution {r}")
            lc = self.landcover_resolution
            if abs(r / lc - round(r / lc)) > 1e-9:
                problems.append(f"landcover resolution {lc} must divide "
                                f"grid resolution {r}")
        for role, rel in self.layers.items():
            if not self.resolve(rel).exists():
                problems.append(f"layer '{role}': file not found: {rel}")
        for attr in ("dem", "mask"):
            rel = getattr(self, attr)
            if rel and not self.resolve(rel).exists():
                problems.append(f"{attr}: file not found: {rel}")
        return problems


@dataclass
class SceneContext:
    """Everything per-cell work reads; immutable after construction."""

    painter: LandcoverPainter
    canyons: CanyonSet
    psi: np.ndarray
    building_mask: np.ndarray
    svf_origin: tuple[float, float]
    svf_res: float
    dem: HeightRaster | None
    proj: ProjectionSpec
    sector_counts: list[int]
    segments_by_cell: dict[tuple[int, int], list]


_CTX: SceneContext | None = None
_GRID: GridSpec | None = None


def _build_cell_record(cell: Cell, ctx: SceneContext) -> CellRecord:
    ca = ctx.painter.cell_class_areas(cell)
    a, r = ca.areas, ca.ratios
    svf_mean, svf_ground = svf_cell_stats(cell.rect, ctx.psi, ctx.building_mask,
                                          ctx.svf_origin[0], ctx.svf_origin[1],
                                          ctx.svf_res)
    cst = cell_canyon_stats(cell.rect, ctx.canyons)
    bldc, blduc, bluc = building_role_ratios(ctx.canyons, cell.rect)
    dirs = direction_params(ctx.segments_by_cell.get((cell.col, cell.row), []),
                            ctx.sector_counts)
    meta = cell_meta(cell, ctx.dem, ctx.proj)
    return CellRecord(
        OBJECTID=cell.object_id,
        BLD_AREA=a[SurfaceClass.BUILDING], BLD_RATIO=r[SurfaceClass.BUILDING],
        GREEN_AREA=a[SurfaceClass.GREEN], GREEN_RATIO=r[SurfaceClass.GREEN],
        INDUSTR_AREA=a[SurfaceClass.INDUSTRIAL], INDUSTR_RATIO=r[SurfaceClass.INDUSTRIAL],
        ROAD_AREA=a[SurfaceClass.ROAD], ROAD_RATIO=r[SurfaceClass.ROAD],
        WATER_AREA=a[SurfaceClass.WATER], WATER_RATIO=r[SurfaceClass.WATER],
        OTHER_AREA=a[SurfaceClass.OTHER], OTHER_RATIO=r[SurfaceClass.OTHER],
        SVF_MEAN=svf_mean, SVF_NOBLD_MEAN=svf_ground,
        BLD_MEAN_HEIGHT=weighted_building_height(ctx.canyons, cell.rect),
        MDC_WIDTH=cst.MDC_WIDTH, MDC_AREA=cst.MDC_AREA, MDC_RATIO=cst.MDC_RATIO,
        MUC_WIDTH=cst.MUC_WIDTH, MUC_AREA=cst.MUC_AREA, MUC_RATIO=cst.MUC_RATIO,
        BLDC_RATIO=bldc, BLDUC_RATIO=blduc, BLUC_RATIO=bluc,
        FRONT_INDEX=frontal_index(ctx.canyons, cell.rect),
        DIR1_6=dirs.get("DIR1_6"), DIR2_6=dirs.get("DIR2_6"),
        DIRRATIO_6=dirs.get("DIRRATIO_6"),
        DIR1_7=dirs.get("DIR1_7"), DIR2_7=dirs.get("DIR2_7"),
        DIRRATIO_7=dirs.get("DIRRATIO_7"),
        DIR1_8=dirs.get("DIR1_8"), DIR2_8=dirs.get("DIR2_8"),
        DIRRATIO_8=dirs.get("DIRRATIO_8"),
        X=meta.X, Y=meta.Y, LAT=meta.LAT, LONG=meta.LONG,
        Z_MEAN=meta.Z_MEAN,
        SHAPE_Length=meta.SHAPE_Length, SHAPE_Area=meta.SHAPE_Area,
    )


def _worker_chunk(bounds: tuple[int, int]) -> list[CellRecord]:
    lo, hi = bounds
    cells = list(_GRID.cells())
    return [_build_cell_record(cells[i], _CTX) for i in range(lo, hi)]


def compute_records(grid: GridSpec, ctx: SceneContext, workers: int = 1) -> list[CellRecord]:
    """All cell records in OBJECTID order. Chunked fork workers produce
    output identical to the inline path: cells are independent and
    collected in order."""
    global _CTX, _GRID
    cells = list(grid.cells())
    if workers <= 1 or len(cells) < 4:
        return [_build_cell_record(c, ctx) for c in cells]
    _CTX, _GRID = ctx, grid
    try:
        n_chunks = min(len(cells), workers * 4)
        step = math.ceil(len(cells) / n_chunks)
        bounds = [(lo, min(lo + step, len(cells))) for lo in range(0, len(cells), step)]
        mp = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=mp) as pool:
            chunks = list(pool.map(_worker_chunk, bounds))
        return [rec for chunk in chunks for rec in chunk]
    finally:
        _CTX, _GRID = None, None


def write_csv(records: list[CellRecord], path, float_digits: int = 6) -> None:
    """Header plus one row per record; sentinels as empty fields."""
    if not records:
        raise EmptyInput("no records to write")
    lines = [csv_header()]
    for rec in sorted(records, key=lambda r: r.OBJECTID):
        lines.append(csv_row(rec, float_digits))
    Path(path).write_text("\n".join(lines) + "\n")


def write_geojson_grid(records: list[CellRecord], grid: GridSpec, path) -> None:
    feats = []
    for rec in sorted(records, key=lambda r: r.OBJECTID):
        row, col = divmod(rec.OBJECTID, grid.ncols)
        x0, y0, x1, y1 = grid.cell_rect(col, row)
        poly = Polygon(np.array([(x0, y0), (x1, y0), (x1, y1), (x0, y1)]))
        props = {name: getattr(rec, name) for name in rec.__dataclass_fields__}
        feats.append(polygon_feature(poly, props))
    write_geojson(feature_collection(feats), path)


def _classified_features(config: RunConfig, layers: dict) -> list[ClassifiedFeature]:
    mapping = (ClassMapping.from_config(config.class_mapping)
               if config.class_mapping else default_mapping())
    classified = reclassify(layers, mapping)
    road_layer = layers.get("roads")
    if road_layer is not None:
        widths = config.road_half_widths
        for feat in road_layer:
            if not isinstance(feat.geometry, Polyline):
                continue
            key = str(feat.attributes.get(config.road_class_key, "")).lower()
            half = float(widths.get(key, widths.get("default", 5.0)))
            for poly in buffer_polyline(feat.geometry, half):
                classified.append(ClassifiedFeature(polygon=poly,
                                                    surface=SurfaceClass.ROAD,
                                                    attributes=feat.attributes))
    return classified


def _union_extent(grids: dict) -> tuple[float, float, float, float]:
    extents = [g.extent() for g in grids.values()]
    return (min(e[0] for e in extents), min(e[1] for e in extents),
            max(e[2] for e in extents), max(e[3] for e in extents))


def run(config: RunConfig, workers: int | None = None) -> dict:
    """Execute the full computation; returns the run report."""
    problems = config.validate()
    if problems:
        raise ConfigError("; ".join(problems))
    workers = config.workers if workers is None else workers
    out_dir = config.resolve(config.output_directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    report: dict = {"stages": {}, "resolutions": {}}
    t_all = time.perf_counter()

    def stage(name):
        report["stages"][name] = round(time.perf_counter() - t_stage, 3)

    t_stage = time.perf_counter()
    layers = {role: load_vector_layer(config.resolve(rel), strict=config.strict_parsing,
                                      name=role)
              for role, rel in config.layers.items()}
    warnings = [w for layer in layers.values() for w in layer.warnings]
    buildings = extract_buildings(layers.get("buildings", []), config.height_rule()) \
        if "buildings" in layers else []
    road_lines = [f.geometry for f in layers.get("roads", [])
                  if isinstance(f.geometry, Polyline)] if "roads" in layers else []
    classified = _classified_features(config, layers)
    stage("ingest")

    t_stage = time.perf_counter()
    grids = {res: make_grid(config.aoi, res) for res in config.resolutions}
    extent = _union_extent(grids)
    painter = LandcoverPainter(extent, classified, config.landcover_resolution)
    stage("landcover")

    t_stage = time.perf_counter()
    dem_raw = load_ascii_grid(config.resolve(config.dem)) if config.dem else None
    params = config.svf_params()
    ncols = int(round((extent[2] - extent[0]) / params.resolution))
    nrows = int(round((extent[3] - extent[1]) / params.resolution))
    if dem_raw is not None and not dem_raw.is_fully_void():
        terrain = regrid(fill_nodata_nearest(dem_raw), extent[0], extent[1],
                         params.resolution, ncols, nrows)
    else:
        terrain = HeightRaster(extent[0], extent[1], params.resolution,
                               np.zeros((nrows, ncols)))
    model = build_surface_model(terrain, buildings)
    psi = svf_field(model, params)
    if config.svf_grid:
        write_ascii_grid(HeightRaster(extent[0], extent[1], params.resolution, psi),
                         out_dir / "svf.asc")
    stage("svf")

    t_stage = time.perf_counter()
    green = [f.polygon for f in classified if f.surface is SurfaceClass.GREEN]
    canyons = build_canyon_triangulation(buildings, green, road_lines)
    stage("canyon")

    mask_poly = None
    if config.mask:
        mask_layer = load_vector_layer(config.resolve(config.mask))
        polys = [f.geometry for f in mask_layer if isinstance(f.geometry, Polygon)]
        if not polys:
            raise ConfigError("mask file contains no polygon")
        mask_poly = polys[0]

    for res in sorted(config.resolutions, reverse=True):
        t_stage = time.perf_counter()
        grid = grids[res]
        segments = split_segments_by_grid(road_lines, grid)
        by_cell: dict[tuple[int, int], list] = {}
        for s in segments:
            if s.cell is not None:
                by_cell.setdefault(s.cell, []).append(s)
        ctx = SceneContext(painter=painter, canyons=canyons, psi=psi,
                           building_mask=model.building_mask,
                           svf_origin=(extent[0], extent[1]),
                           svf_res=params.resolution, dem=dem_raw,
                           proj=config.projection_spec(),
                           sector_counts=config.direction_sector_counts,
                           segments_by_cell=by_cell)
        records = compute_records(grid, ctx, workers)
        res_name = f"{res:g}m"
        write_csv(records, out_dir / f"params_{res_name}.csv", config.float_digits)
        if config.geojson_grid:
            write_geojson_grid(records, grid, out_dir / f"grid_{res_name}.geojson")
        if mask_poly is not None:
            masked = [r for r, cell in zip(records, grid.cells())
                      if point_in_polygon(cell.center, mask_poly)]
        else:
            masked = records
        entry = {
            "cells": len(records),
            "masked_cells": len(masked),
            "class_means": aggregate_city_means(masked) if masked else {},
        }
        report["resolutions"][res_name] = entry
        stage(f"records_{res_name}")

    legend = {"classes": CLASS_LEGEND,
              "sentinel": "undefined values are empty CSV fields"}
    (out_dir / "legend.json").write_text(json.dumps(legend, indent=1))
    report["warnings"] = warnings
    report["workers"] = workers
    report["total_seconds"] = round(time.perf_counter() - t_all, 3)
    (out_dir / "run_report.json").write_text(json.dumps(report, indent=1))
    return report
