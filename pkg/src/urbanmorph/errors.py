"""Exception hierarchy shared by all engine modules."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateGeometry(EngineError):
    """Geometry too degenerate to process (collinear ring, <3 vertices, zero area)."""


class CrossingConstraints(EngineError):
    """Constraint segments intersect at non-endpoints and pre-noding is disabled."""


class ParseError(EngineError):
    """Malformed input file (JSON, geometry, or raster grid)."""


class CrsError(EngineError):
    """Input declares geographic (degree) coordinates where planar meters are required."""


class HeaderMismatch(EngineError):
    """Raster value count does not match the declared ncols x nrows."""


class IndexMissing(EngineError):
    """An operation that requires a prebuilt spatial index was called without one."""


class EmptyInput(EngineError):
    """An aggregate was requested over an empty collection."""


class NoDataUnderObserver(EngineError):
    """Sky-view scan started on a NODATA surface pixel."""


class OutOfDomain(EngineError):
    """Projection evaluated too far outside its zone of validity."""


class ConfigError(EngineError):
    """Run configuration is invalid or references missing files."""
