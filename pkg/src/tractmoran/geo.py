"""Planar geometry primitives: local projection, point-in-polygon, centroids, areas.

All analysis runs in a local equirectangular projection (meters around a fixed
origin). At city scale (<= 15 km) the distance error of this projection is far
below the 1 km neighbourhood radius used downstream, so no geodesic machinery
is needed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from .errors import (
    InvalidCoordinateError,
    InvalidGeometryError,
    InvalidTractSetError,
    SchemaError,
)

EARTH_RADIUS_M = 6_371_000.0

SQ_M_PER_HECTARE = 10_000.0


@dataclass(frozen=True)
class GeoPoint:
    """Geographic coordinate in WGS84 degrees."""

    lon: float
    lat: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lon) and math.isfinite(self.lat)):
            raise InvalidCoordinateError(f"non-finite coordinate ({self.lon}, {self.lat})")
        if not (-180.0 <= self.lon <= 180.0 and -90.0 <= self.lat <= 90.0):
            raise InvalidCoordinateError(
                f"coordinate out of range: lon={self.lon}, lat={self.lat}"
            )


@dataclass(frozen=True)
class PlanarPoint:
    """Point in meters east/north of a projection origin."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidCoordinateError(f"non-finite planar point ({self.x}, {self.y})")
        if abs(self.x) >= 1e7 or abs(self.y) >= 1e7:
            raise InvalidCoordinateError(
                f"planar point outside city-scale bounds: ({self.x}, {self.y})"
            )


def project(p: GeoPoint, origin: GeoPoint) -> PlanarPoint:
    """Project a geographic point to local planar meters around ``origin``.

    Equirectangular: x = R * dlon * cos(lat0), y = R * dlat, with angles in
    radians and R = 6,371,000 m. Requires both points within 2 degrees of each
    other; beyond that the flat-earth assumption breaks down.
    """
    dlon = p.lon - origin.lon
    dlat = p.lat - origin.lat
    if abs(dlon) > 2.0 or abs(dlat) > 2.0:
        raise InvalidCoordinateError(
            f"points more than 2 degrees apart: dlon={dlon}, dlat={dlat}"
        )
    x = EARTH_RADIUS_M * math.radians(dlon) * math.cos(math.radians(origin.lat))
    y = EARTH_RADIUS_M * math.radians(dlat)
    return PlanarPoint(x, y)


def unproject(p: PlanarPoint, origin: GeoPoint) -> GeoPoint:
    """Inverse of :func:`project` for the same origin."""
    lon = origin.lon + math.degrees(p.x / (EARTH_RADIUS_M * math.cos(math.radians(origin.lat))))
    lat = origin.lat + math.degrees(p.y / EARTH_RADIUS_M)
    return GeoPoint(lon, lat)


Ring = tuple[PlanarPoint, ...]


def _close_ring(vertices: Sequence[PlanarPoint]) -> Ring:
    """Return the ring closed (first vertex == last), validating vertex count."""
    verts = tuple(vertices)
    if len(verts) >= 2 and verts[0] == verts[-1]:
        body = verts[:-1]
    else:
        body = verts
    if len(set((v.x, v.y) for v in body)) < 3:
        raise InvalidGeometryError("ring needs at least 3 distinct vertices")
    return body + (body[0],)


@dataclass(frozen=True)
class Polygon:
    """Simple polygon: one exterior ring plus optional holes, rings stored closed.

    The exterior is assumed non-self-intersecting and holes strictly inside it;
    these are data contracts on the input, not runtime checks.
    """

    exterior: Ring
    holes: tuple[Ring, ...] = ()

    def __init__(self, exterior: Sequence[PlanarPoint], holes: Iterable[Sequence[PlanarPoint]] = ()) -> None:
        object.__setattr__(self, "exterior", _close_ring(exterior))
        object.__setattr__(self, "holes", tuple(_close_ring(h) for h in holes))


def _ring_signed_area(ring: Ring) -> float:
    """Shoelace signed area in square meters (positive for CCW rings)."""
    total = 0.0
    for a, b in zip(ring[:-1], ring[1:]):
        total += a.x * b.y - b.x * a.y
    return 0.5 * total


def _ring_centroid(ring: Ring) -> tuple[float, float, float]:
    """Return (cx, cy, |area|) of a ring via the shoelace centroid formula."""
    a_signed = 0.0
    cx = 0.0
    cy = 0.0
    for p, q in zip(ring[:-1], ring[1:]):
        cross = p.x * q.y - q.x * p.y
        a_signed += cross
        cx += (p.x + q.x) * cross
        cy += (p.y + q.y) * cross
    a_signed *= 0.5
    if a_signed == 0.0:
        raise InvalidGeometryError("zero-area ring")
    return cx / (6.0 * a_signed), cy / (6.0 * a_signed), abs(a_signed)


def _point_on_segment(p: PlanarPoint, a: PlanarPoint, b: PlanarPoint) -> bool:
    cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
    if cross != 0.0:
        return False
    return min(a.x, b.x) <= p.x <= max(a.x, b.x) and min(a.y, b.y) <= p.y <= max(a.y, b.y)


def _ring_crossings(p: PlanarPoint, ring: Ring) -> int:
    """Count ray crossings (rightward horizontal ray) for even-odd testing."""
    count = 0
    for a, b in zip(ring[:-1], ring[1:]):
        if (a.y > p.y) != (b.y > p.y):
            x_at = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x
            if p.x < x_at:
                count += 1
    return count


def point_in_polygon(p: PlanarPoint, poly: Polygon) -> bool:
    """Even-odd containment test; points on any edge or vertex count as inside.

    The boundary-inside rule keeps points that fall on shared tract borders
    from vanishing during aggregation; ties between adjacent tracts are broken
    downstream.
    """
    for ring in (poly.exterior, *poly.holes):
        for a, b in zip(ring[:-1], ring[1:]):
            if _point_on_segment(p, a, b):
                return True
    crossings = _ring_crossings(p, poly.exterior)
    for hole in poly.holes:
        crossings += _ring_crossings(p, hole)
    return crossings % 2 == 1


def area_hectares(poly: Polygon) -> float:
    """Absolute shoelace area of the exterior minus hole areas, in hectares."""
    area = abs(_ring_signed_area(poly.exterior))
    if area == 0.0:
        raise InvalidGeometryError("degenerate polygon with zero area")
    for hole in poly.holes:
        area -= abs(_ring_signed_area(hole))
    return area / SQ_M_PER_HECTARE


def centroid(poly: Polygon) -> PlanarPoint:
    """Area-weighted centroid of the exterior minus holes."""
    cx, cy, area = _ring_centroid(poly.exterior)
    wx = cx * area
    wy = cy * area
    for hole in poly.holes:
        hx, hy, harea = _ring_centroid(hole)
        wx -= hx * harea
        wy -= hy * harea
        area -= harea
    if area <= 0.0:
        raise InvalidGeometryError("polygon has no positive area after holes")
    return PlanarPoint(wx / area, wy / area)


@dataclass(frozen=True)
class Tract:
    """Census tract: id, polygon geometry (one or more parts), population, area.

    MultiPolygon tracts are a tuple of parts; containment, area and centroid
    union over the parts.
    """

    tract_id: str
    geometry: tuple[Polygon, ...]
    population: int
    area_ha: float

    def __post_init__(self) -> None:
        if not self.geometry:
            raise InvalidGeometryError(f"tract {self.tract_id} has no geometry")
        if self.population < 0:
            raise InvalidTractSetError(f"tract {self.tract_id} has negative population")
        if not self.area_ha > 0:
            raise InvalidTractSetError(f"tract {self.tract_id} has non-positive area")

    def contains(self, p: PlanarPoint) -> bool:
        return any(point_in_polygon(p, part) for part in self.geometry)

    def centroid(self) -> PlanarPoint:
        wx = 0.0
        wy = 0.0
        total = 0.0
        for part in self.geometry:
            c = centroid(part)
            a = area_hectares(part)
            wx += c.x * a
            wy += c.y * a
            total += a
        return PlanarPoint(wx / total, wy / total)

    def bounds(self) -> tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y) over all parts."""
        xs = [v.x for part in self.geometry for v in part.exterior]
        ys = [v.y for part in self.geometry for v in part.exterior]
        return min(xs), min(ys), max(xs), max(ys)


@dataclass(frozen=True)
class TractSet:
    """Ordered tract collection plus the projection origin used to load it.

    ``geographic`` keeps the original GeoJSON geometry per tract so exports can
    echo input coordinates instead of re-deriving them from planar space.
    """

    tracts: tuple[Tract, ...]
    origin: GeoPoint
    geographic: Mapping[str, Any]

    def __post_init__(self) -> None:
        ids = [t.tract_id for t in self.tracts]
        if len(set(ids)) != len(ids):
            raise InvalidTractSetError("duplicate tract ids")

    @property
    def tract_ids(self) -> tuple[str, ...]:
        return tuple(t.tract_id for t in self.tracts)


def _iter_positions(geometry: Mapping[str, Any]) -> Iterable[Sequence[float]]:
    if geometry["type"] == "Polygon":
        polys = [geometry["coordinates"]]
    elif geometry["type"] == "MultiPolygon":
        polys = geometry["coordinates"]
    else:
        raise SchemaError(f"unsupported geometry type {geometry['type']!r}")
    for poly in polys:
        for ring in poly:
            yield from ring


def _geometry_to_parts(geometry: Mapping[str, Any], origin: GeoPoint) -> tuple[Polygon, ...]:
    if geometry["type"] == "Polygon":
        polys = [geometry["coordinates"]]
    else:
        polys = geometry["coordinates"]
    parts = []
    for rings in polys:
        projected = [
            [project(GeoPoint(lon, lat), origin) for lon, lat in ((pos[0], pos[1]) for pos in ring)]
            for ring in rings
        ]
        parts.append(Polygon(projected[0], projected[1:]))
    return tuple(parts)


def load_tracts(path: str) -> TractSet:
    """Load a tract set from a GeoJSON FeatureCollection file.

    Each feature must be a Polygon or MultiPolygon with properties ``tract_id``
    (string, required) and ``population`` (integer, required); ``area_ha`` is
    taken from the properties when present and computed from the geometry
    otherwise. The projection origin is the midpoint of the file's bounding
    box, which keeps loading deterministic for a given file.
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return tracts_from_geojson(doc)


def tracts_from_geojson(doc: Mapping[str, Any]) -> TractSet:
    if doc.get("type") != "FeatureCollection" or "features" not in doc:
        raise SchemaError("expected a GeoJSON FeatureCollection")
    features = doc["features"]
    if not features:
        raise SchemaError("FeatureCollection has no features")

    lons: list[float] = []
    lats: list[float] = []
    for feature in features:
        for pos in _iter_positions(feature["geometry"]):
            lons.append(pos[0])
            lats.append(pos[1])
    origin = GeoPoint((min(lons) + max(lons)) / 2.0, (min(lats) + max(lats)) / 2.0)

    tracts = []
    geographic: dict[str, Any] = {}
    for feature in features:
        props = feature.get("properties") or {}
        if "tract_id" not in props:
            raise SchemaError("feature missing required property 'tract_id'")
        if "population" not in props:
            raise SchemaError(f"tract {props['tract_id']!r} missing required property 'population'")
        tract_id = str(props["tract_id"])
        population = int(props["population"])
        parts = _geometry_to_parts(feature["geometry"], origin)
        if props.get("area_ha") is not None:
            area_ha = float(props["area_ha"])
        else:
            area_ha = sum(area_hectares(part) for part in parts)
        tracts.append(Tract(tract_id, parts, population, area_ha))
        geographic[tract_id] = feature["geometry"]
    return TractSet(tuple(tracts), origin, geographic)
