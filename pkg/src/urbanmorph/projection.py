"""Ellipsoidal transverse Mercator projection.

Series in the third flattening n (terms through n^6, sub-millimeter over
a standard 6-degree zone), with the inverse conformal-to-geodetic
latitude refined by Newton iteration to machine precision. The engine
itself only needs the inverse (grid coordinates arrive projected); the
forward mapping is kept as the round-trip reference and for building
synthetic datasets.

Defaults are a zone-37-north setup on the common geodetic ellipsoid:
central meridian 39 E, scale 0.9996, false easting 500 000 m.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import OutOfDomain


@dataclass(frozen=True)
class ProjectionSpec:
    semi_major_axis: float = 6378137.0
    inverse_flattening: float = 298.257223563
    central_meridian: float = 39.0
    scale_factor: float = 0.9996
    false_easting: float = 500000.0
    false_northing: float = 0.0

    @property
    def flattening(self) -> float:
        return 1.0 / self.inverse_flattening

    @property
    def third_flattening(self) -> float:
        f = self.flattening
        return f / (2.0 - f)

    @property
    def eccentricity(self) -> float:
        f = self.flattening
        return math.sqrt(f * (2.0 - f))

    @property
    def rectifying_radius(self) -> float:
        n = self.third_flattening
        n2 = n * n
        return (self.semi_major_axis / (1.0 + n)
                * (1.0 + n2 / 4.0 + n2 * n2 / 64.0 + n2 * n2 * n2 / 256.0))


def _alpha_coefficients(n: float) -> list[float]:
    n2, n3, n4, n5, n6 = n * n, n**3, n**4, n**5, n**6
    return [
        n / 2 - 2 * n2 / 3 + 5 * n3 / 16 + 41 * n4 / 180 - 127 * n5 / 288
        + 7891 * n6 / 37800,
        13 * n2 / 48 - 3 * n3 / 5 + 557 * n4 / 1440 + 281 * n5 / 630
        - 1983433 * n6 / 1935360,
        61 * n3 / 240 - 103 * n4 / 140 + 15061 * n5 / 26880 + 167603 * n6 / 181440,
        49561 * n4 / 161280 - 179 * n5 / 168 + 6601661 * n6 / 7257600,
        34729 * n5 / 80640 - 3418889 * n6 / 1995840,
        212378941 * n6 / 319334400,
    ]


def _beta_coefficients(n: float) -> list[float]:
    n2, n3, n4, n5, n6 = n * n, n**3, n**4, n**5, n**6
    return [
        n / 2 - 2 * n2 / 3 + 37 * n3 / 96 - n4 / 360 - 81 * n5 / 512
        + 96199 * n6 / 604800,
        n2 / 48 + n3 / 15 - 437 * n4 / 1440 + 46 * n5 / 105 - 1118711 * n6 / 3870720,
        17 * n3 / 480 - 37 * n4 / 840 - 209 * n5 / 4480 + 5569 * n6 / 90720,
        4397 * n4 / 161280 - 11 * n5 / 504 - 830251 * n6 / 7257600,
        4583 * n5 / 161280 - 108847 * n6 / 3991680,
        20648693 * n6 / 638668800,
    ]


def _hyp(x: float) -> float:
    return math.sqrt(1.0 + x * x)


def _tau_prime(tau: float, e: float) -> float:
    """Conformal tangent from geodetic tangent."""
    sigma = math.sinh(e * math.atanh(e * tau / _hyp(tau)))
    return tau * _hyp(sigma) - sigma * _hyp(tau)


def _tau_from_tau_prime(taup: float, e: float) -> float:
    """Invert the conformal mapping by Newton iteration."""
    e2m = 1.0 - e * e
    tau = taup / e2m
    stol = 1e-13 * max(1.0, abs(taup))
    for _ in range(8):
        taupa = _tau_prime(tau, e)
        dtau = ((taup - taupa) * (1.0 + e2m * tau * tau)
                / (e2m * _hyp(tau) * _hyp(taupa)))
        tau += dtau
        if abs(dtau) < stol:
            break
    return tau


def forward(lat_deg: float, lon_deg: float, spec: ProjectionSpec = ProjectionSpec()
            ) -> tuple[float, float]:
    """Geodetic degrees to projected (easting, northing) meters."""
    e = spec.eccentricity
    phi = math.radians(lat_deg)
    lam = math.radians(lon_deg - spec.central_meridian)
    lam = math.remainder(lam, 2.0 * math.pi)
    taup = _tau_prime(math.tan(phi), e)
    c = math.cos(lam)
    xi_p = math.atan2(taup, c)
    eta_p = math.asinh(math.sin(lam) / math.hypot(taup, c))
    xi, eta = xi_p, eta_p
    for j, a in enumerate(_alpha_coefficients(spec.third_flattening), start=1):
        xi += a * math.sin(2 * j * xi_p) * math.cosh(2 * j * eta_p)
        eta += a * math.cos(2 * j * xi_p) * math.sinh(2 * j * eta_p)
    k0a = spec.scale_factor * spec.rectifying_radius
    return (spec.false_easting + k0a * eta, spec.false_northing + k0a * xi)


def inverse(x: float, y: float, spec: ProjectionSpec = ProjectionSpec()
            ) -> tuple[float, float]:
    """Projected (easting, northing) meters to geodetic (lat, lon) degrees."""
    k0a = spec.scale_factor * spec.rectifying_radius
    xi = (y - spec.false_northing) / k0a
    eta = (x - spec.false_easting) / k0a
    if abs(eta) > 0.5 or abs(xi) > math.pi:
        raise OutOfDomain(
            f"({x}, {y}) lies far outside the projection zone; the series diverges")
    xi_p, eta_p = xi, eta
    for j, b in enumerate(_beta_coefficients(spec.third_flattening), start=1):
        xi_p -= b * math.sin(2 * j * xi) * math.cosh(2 * j * eta)
        eta_p -= b * math.cos(2 * j * xi) * math.sinh(2 * j * eta)
    sh = math.sinh(eta_p)
    c = math.cos(xi_p)
    taup = math.sin(xi_p) / math.hypot(sh, c)
    tau = _tau_from_tau_prime(taup, spec.eccentricity)
    lat = math.degrees(math.atan(tau))
    lon = spec.central_meridian + math.degrees(math.atan2(sh, c))
    if abs(lon - spec.central_meridian) > 3.5:
        warnings.warn("point is beyond the nominal zone width; accuracy degrades",
                      stacklevel=2)
    return lat, lon
