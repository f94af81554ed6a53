"""Multi-resolution land-cover and street-canyon parameter grids.

Computes, from vector city layers and a terrain raster, the per-cell
parameter tables (land-cover fractions, sky-view factor, canyon
geometry, dominant street directions, cell metadata) used to drive
urban meteorological models, at 200/500/1000 m resolutions by default.
"""

from .canyon import (
    BuildingRole,
    CanyonKind,
    CanyonSet,
    CanyonTriangle,
    build_canyon_triangulation,
    building_role_ratios,
    cell_canyon_stats,
    frontal_index,
    triangle_width,
    weighted_building_height,
)
from .cdt import Triangulation, constrained_delaunay
from .cellmeta import CellMeta, cell_mean_elevation, cell_meta
from .classify import (
    BuildingFeature,
    ClassMapping,
    ClassifiedFeature,
    HeightRule,
    SurfaceClass,
    default_mapping,
    extract_buildings,
    reclassify,
)
from .direction import (
    AzimuthHistogram,
    DirectionResult,
    StreetSegment,
    azimuth_histogram,
    direction_params,
    find_modes,
    split_segments_by_grid,
)
from .errors import EngineError
from .fixture import PRESETS, TownSpec, make_fixture_town
from .geometry import (
    Polygon,
    Polyline,
    SpatialIndex,
    clip_polygon_to_rect,
    point_in_polygon,
    polygon_area,
    segment_intersects_triangle,
)
from .grid import Cell, GridSpec, make_grid
from .landcover import (
    ClassAreas,
    LandcoverPainter,
    aggregate_city_means,
    classify_cell,
)
from .pipeline import RunConfig, compute_records, run, write_csv, write_geojson_grid
from .projection import ProjectionSpec, forward, inverse
from .raster import (
    HeightRaster,
    fill_nodata_nearest,
    load_ascii_grid,
    resample_bilinear,
    write_ascii_grid,
)
from .records import FIELD_NAMES, CellRecord
from .svf import (
    SurfaceModel,
    SvfParams,
    build_surface_model,
    rasterize_buildings,
    svf_at,
    svf_cell_stats,
    svf_field,
)
from .vectorio import Feature, VectorLayer, load_vector_layer

__version__ = "0.1.0"
