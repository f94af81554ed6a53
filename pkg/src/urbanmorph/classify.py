"""Surface class taxonomy and attribute-driven reclassification.

Six classes drive the per-cell fraction fields: buildings, green areas,
industrial territories (urban squares fold into this class, with a 1:1
hard/soft cover convention recorded as metadata only), roads, water,
and everything else. Green areas of any flavor (parks, forest parks,
forests, public gardens, boulevards) are all treated as tree cover,
since the large massifs that matter meteorologically are wooded.
"""

from __future__ import annotations

import fnmatch
from dataclasses import dataclass, field
from enum import Enum

from .geometry import Polygon
from .vectorio import Feature, VectorLayer


class SurfaceClass(Enum):
    BUILDING = "building"
    GREEN = "green"
    INDUSTRIAL = "industrial"
    ROAD = "road"
    WATER = "water"
    OTHER = "other"


#: painter's priority, low to high: later classes overwrite earlier ones
PRIORITY_ORDER = (
    SurfaceClass.OTHER,
    SurfaceClass.GREEN,
    SurfaceClass.INDUSTRIAL,
    SurfaceClass.ROAD,
    SurfaceClass.WATER,
    SurfaceClass.BUILDING,
)

#: sidecar legend describing class conventions, written next to outputs
CLASS_LEGEND = {
    "building": "building footprints (roof area)",
    "green": "green areas of all kinds, treated as tree cover",
    "industrial": "industrial territories and urban squares; "
                  "assumed 1:1 natural-to-paved cover split",
    "road": "road surface from buffered centerlines",
    "water": "water bodies",
    "other": "unclassified territory, treated as natural cover",
}


@dataclass
class ClassRule:
    layer: str          # layer role name, or "*" for any
    key: str            # attribute key, or "*" to match on layer alone
    pattern: str        # fnmatch pattern against the attribute value
    surface: SurfaceClass

    def matches(self, layer_name: str, attributes: dict) -> bool:
        if self.layer != "*" and self.layer != layer_name:
            return False
        if self.key == "*":
            return True
        value = attributes.get(self.key)
        if value is None:
            return False
        return fnmatch.fnmatch(str(value).lower(), self.pattern)


@dataclass
class ClassMapping:
    """Ordered first-match-wins rules; unmatched features become OTHER."""

    rules: list[ClassRule] = field(default_factory=list)

    def classify(self, layer_name: str, attributes: dict) -> SurfaceClass:
        for rule in self.rules:
            if rule.matches(layer_name, attributes):
                return rule.surface
        return SurfaceClass.OTHER

    @classmethod
    def from_config(cls, entries: list[dict]) -> "ClassMapping":
        rules = [ClassRule(layer=e.get("layer", "*"), key=e.get("key", "*"),
                           pattern=e.get("pattern", "*").lower(),
                           surface=SurfaceClass(e["class"]))
                 for e in entries]
        return cls(rules=rules)


def default_mapping() -> ClassMapping:
    """Reconstructed tag table for typical map exports; user-overridable."""
    g = SurfaceClass.GREEN
    rules = [
        ClassRule("buildings", "*", "*", SurfaceClass.BUILDING),
        ClassRule("water", "*", "*", SurfaceClass.WATER),
        ClassRule("*", "natural", "water", SurfaceClass.WATER),
        ClassRule("*", "waterway", "riverbank", SurfaceClass.WATER),
        ClassRule("*", "landuse", "reservoir", SurfaceClass.WATER),
        ClassRule("*", "landuse", "forest", g),
        ClassRule("*", "landuse", "grass", g),
        ClassRule("*", "landuse", "meadow", g),
        ClassRule("*", "landuse", "orchard", g),
        ClassRule("*", "landuse", "recreation_ground", g),
        ClassRule("*", "landuse", "cemetery", g),
        ClassRule("*", "landuse", "village_green", g),
        ClassRule("*", "leisure", "park", g),
        ClassRule("*", "leisure", "garden", g),
        ClassRule("*", "leisure", "nature_reserve", g),
        ClassRule("*", "natural", "wood", g),
        ClassRule("*", "natural", "scrub", g),
        ClassRule("*", "landuse", "industrial", SurfaceClass.INDUSTRIAL),
        ClassRule("*", "landuse", "railway", SurfaceClass.INDUSTRIAL),
        ClassRule("*", "landuse", "garages", SurfaceClass.INDUSTRIAL),
        ClassRule("*", "place", "square", SurfaceClass.INDUSTRIAL),
        ClassRule("*", "highway", "pedestrian", SurfaceClass.INDUSTRIAL),
        ClassRule("roads", "*", "*", SurfaceClass.ROAD),
    ]
    return ClassMapping(rules=rules)


@dataclass
class ClassifiedFeature:
    polygon: Polygon
    surface: SurfaceClass
    attributes: dict


@dataclass
class BuildingFeature:
    footprint: Polygon
    height: float


@dataclass
class HeightRule:
    """Building height from attributes.

    Explicit height key wins; otherwise floors x meters_per_level from a
    levels key; otherwise a configured default. Map data is silent about
    missing heights, so a rule is unavoidable.
    """

    height_key: str = "height"
    levels_key: str = "levels"
    meters_per_level: float = 3.0
    default_height: float = 12.0

    def height_of(self, attributes: dict) -> float:
        raw = attributes.get(self.height_key)
        if raw is not None:
            try:
                h = float(str(raw).removesuffix("m").strip())
                if h > 0:
                    return h
            except ValueError:
                pass
        raw = attributes.get(self.levels_key)
        if raw is not None:
            try:
                lv = float(str(raw).strip())
                if lv > 0:
                    return lv * self.meters_per_level
            except ValueError:
                pass
        return self.default_height


def reclassify(layers: dict[str, VectorLayer], mapping: ClassMapping) -> list[ClassifiedFeature]:
    """Label every polygon feature with exactly one surface class.

    Deterministic and order-independent: the label depends only on the
    feature's own layer and attributes. Polyline features are skipped
    (roads are buffered separately).
    """
    out = []
    for layer_name in sorted(layers):
        for feat in layers[layer_name]:
            if not isinstance(feat.geometry, Polygon):
                continue
            surface = mapping.classify(layer_name, feat.attributes)
            out.append(ClassifiedFeature(polygon=feat.geometry, surface=surface,
                                         attributes=feat.attributes))
    return out


def extract_buildings(layer: VectorLayer, rule: HeightRule) -> list[BuildingFeature]:
    out = []
    for feat in layer:
        if not isinstance(feat.geometry, Polygon):
            continue
        out.append(BuildingFeature(footprint=feat.geometry,
                                   height=rule.height_of(feat.attributes)))
    return out
