"""The 42-field per-cell output record and its CSV encoding.

Field names and order are the fixed output schema, identical across all
grid resolutions. Undefined values (no canyons, no second direction, no
valid DEM cells, fully roofed cells) serialize as empty CSV fields.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

FIELD_NAMES = (
    "OBJECTID",
    "BLD_AREA", "BLD_RATIO",
    "GREEN_AREA", "GREEN_RATIO",
    "INDUSTR_AREA", "INDUSTR_RATIO",
    "ROAD_AREA", "ROAD_RATIO",
    "WATER_AREA", "WATER_RATIO",
    "OTHER_AREA", "OTHER_RATIO",
    "SVF_MEAN", "SVF_NOBLD_MEAN",
    "BLD_MEAN_HEIGHT",
    "MDC_WIDTH", "MDC_AREA", "MDC_RATIO",
    "MUC_WIDTH", "MUC_AREA", "MUC_RATIO",
    "BLDC_RATIO", "BLDUC_RATIO", "BLUC_RATIO",
    "FRONT_INDEX",
    "DIR1_6", "DIR2_6", "DIRRATIO_6",
    "DIR1_7", "DIR2_7", "DIRRATIO_7",
    "DIR1_8", "DIR2_8", "DIRRATIO_8",
    "X", "Y", "LAT", "LONG",
    "Z_MEAN", "SHAPE_Length", "SHAPE_Area",
)


@dataclass
class CellRecord:
    OBJECTID: int
    BLD_AREA: float = 0.0
    BLD_RATIO: float = 0.0
    GREEN_AREA: float = 0.0
    GREEN_RATIO: float = 0.0
    INDUSTR_AREA: float = 0.0
    INDUSTR_RATIO: float = 0.0
    ROAD_AREA: float = 0.0
    ROAD_RATIO: float = 0.0
    WATER_AREA: float = 0.0
    WATER_RATIO: float = 0.0
    OTHER_AREA: float = 0.0
    OTHER_RATIO: float = 0.0
    SVF_MEAN: float | None = None
    SVF_NOBLD_MEAN: float | None = None
    BLD_MEAN_HEIGHT: float | None = None
    MDC_WIDTH: float | None = None
    MDC_AREA: float = 0.0
    MDC_RATIO: float | None = None
    MUC_WIDTH: float | None = None
    MUC_AREA: float = 0.0
    MUC_RATIO: float | None = None
    BLDC_RATIO: float | None = None
    BLDUC_RATIO: float | None = None
    BLUC_RATIO: float | None = None
    FRONT_INDEX: float | None = None
    DIR1_6: float | None = None
    DIR2_6: float | None = None
    DIRRATIO_6: float | None = None
    DIR1_7: float | None = None
    DIR2_7: float | None = None
    DIRRATIO_7: float | None = None
    DIR1_8: float | None = None
    DIR2_8: float | None = None
    DIRRATIO_8: float | None = None
    X: float = 0.0
    Y: float = 0.0
    LAT: float = 0.0
    LONG: float = 0.0
    Z_MEAN: float | None = None
    SHAPE_Length: float = 0.0
    SHAPE_Area: float = 0.0

    def values(self) -> list:
        return [getattr(self, name) for name in FIELD_NAMES]


assert tuple(f.name for f in fields(CellRecord)) == FIELD_NAMES


def format_value(v, float_digits: int = 6) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return f"{v:.{float_digits}g}"


def csv_header() -> str:
    return ",".join(FIELD_NAMES)


def csv_row(record: CellRecord, float_digits: int = 6) -> str:
    return ",".join(format_value(v, float_digits) for v in record.values())


def record_from_csv_row(line: str) -> dict:
    parts = line.split(",")
    out = {}
    for name, raw in zip(FIELD_NAMES, parts):
        if raw == "":
            out[name] = None
        elif name == "OBJECTID":
            out[name] = int(raw)
        else:
            out[name] = float(raw)
    return out
