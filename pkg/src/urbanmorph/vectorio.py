"""GeoJSON feature ingest and export.

Input layers must already be in a projected planar CRS (meters).  Files
declaring a geographic CRS are rejected; no reprojection is attempted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CrsError, DegenerateGeometry, ParseError
from .geometry import Polygon, Polyline

_GEOGRAPHIC_CRS_NAMES = ("CRS84", "4326", "WGS 84", "WGS84")


@dataclass
class Feature:
    geometry: Polygon | Polyline
    attributes: dict[str, str] = field(default_factory=dict)


@dataclass
class VectorLayer:
    features: list[Feature] = field(default_factory=list)
    name: str = ""
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self):
        return iter(self.features)


def _declares_geographic_crs(doc: dict) -> bool:
    crs = doc.get("crs")
    if not isinstance(crs, dict):
        return False
    name = str(crs.get("properties", {}).get("name", ""))
    return any(tag in name for tag in _GEOGRAPHIC_CRS_NAMES)


def _close_ring(coords, strict: bool, where: str, warnings: list[str]):
    if len(coords) < 3:
        raise ParseError(f"{where}: ring has fewer than 3 coordinates")
    if coords[0] != coords[-1]:
        if strict:
            raise ParseError(f"{where}: ring is not closed")
        warnings.append(f"{where}: auto-closed unclosed ring")
        coords = coords + [coords[0]]
    return coords


def _parse_polygon(rings, strict: bool, where: str, warnings: list[str]) -> Polygon:
    if not rings:
        raise ParseError(f"{where}: polygon has no rings")
    closed = [_close_ring([tuple(map(float, c)) for c in r], strict, where, warnings)
              for r in rings]
    return Polygon(np.asarray(closed[0], dtype=float),
                   [np.asarray(r, dtype=float) for r in closed[1:]])


def load_vector_layer(path, strict: bool = False, name: str = "") -> VectorLayer:
    """Parse a GeoJSON FeatureCollection into polygons and polylines.

    MultiPolygon / MultiLineString features are exploded into one
    feature per part, attributes shared. In lenient mode (default)
    invalid features are skipped with a recorded warning; strict mode
    raises ParseError naming the feature index.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    if doc.get("type") != "FeatureCollection":
        raise ParseError(f"{path}: not a FeatureCollection")
    if _declares_geographic_crs(doc):
        raise CrsError(f"{path}: declares geographic degree coordinates; "
                       "planar meter coordinates are required")

    layer = VectorLayer(name=name or path.stem)
    for idx, feat in enumerate(doc.get("features", [])):
        where = f"{path.name} feature {idx}"
        geom = feat.get("geometry") or {}
        gtype = geom.get("type")
        coords = geom.get("coordinates")
        props = {str(k): v for k, v in (feat.get("properties") or {}).items()}
        try:
            if gtype == "Polygon":
                parts = [_parse_polygon(coords, strict, where, layer.warnings)]
            elif gtype == "MultiPolygon":
                parts = [_parse_polygon(p, strict, where, layer.warnings) for p in coords]
            elif gtype == "LineString":
                parts = [Polyline(np.asarray(coords, dtype=float))]
            elif gtype == "MultiLineString":
                parts = [Polyline(np.asarray(p, dtype=float)) for p in coords]
            elif gtype is None:
                raise ParseError(f"{where}: missing geometry")
            else:
                raise ParseError(f"{where}: unsupported geometry type {gtype!r}")
        except (DegenerateGeometry, ParseError, TypeError, ValueError) as exc:
            if strict:
                if isinstance(exc, ParseError):
                    raise
                raise ParseError(f"{where}: {exc}") from exc
            layer.warnings.append(f"{where}: skipped ({exc})")
            continue
        for part in parts:
            layer.features.append(Feature(geometry=part, attributes=props))
    return layer


def _polygon_coords(poly: Polygon) -> list:
    rings = []
    for ring in poly.rings():
        coords = [[float(x), float(y)] for x, y in ring]
        coords.append(coords[0])
        rings.append(coords)
    return rings


def feature_collection(features: list[dict]) -> dict:
    return {"type": "FeatureCollection", "features": features}


def polygon_feature(poly: Polygon, properties: dict) -> dict:
    return {"type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": _polygon_coords(poly)},
            "properties": properties}


def polyline_feature(line: Polyline, properties: dict) -> dict:
    return {"type": "Feature",
            "geometry": {"type": "LineString",
                         "coordinates": [[float(x), float(y)] for x, y in line.vertices]},
            "properties": properties}


def write_geojson(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1))
