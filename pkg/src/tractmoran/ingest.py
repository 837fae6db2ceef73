"""Parsers for the three point datasets plus per-source descriptive statistics.

All inputs are UTF-8 comma-separated files with a header row; the exact
column contracts are documented in docs/input_formats.md. Parsers are
geometry-agnostic: rows with valid coordinates outside the study area are
kept here and filtered during aggregation.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from datetime import date
from enum import Enum
from pathlib import Path
from typing import IO, Callable, Iterable, Sequence

from .errors import EmptyInputError, InvalidCoordinateError, ParseError, SchemaError
from .geo import GeoPoint


class RoomType(str, Enum):
    ENTIRE_HOME = "Entire home/apt"
    PRIVATE_ROOM = "Private room"
    SHARED_ROOM = "Shared room"


class PhotographerCategory(str, Enum):
    TOURIST = "Tourist"
    RESIDENT = "Resident"


@dataclass(frozen=True)
class Listing:
    id: str
    location: GeoPoint
    room_type: RoomType
    price_per_night: float
    beds: int
    availability_365: int
    reviews_per_month: float | None
    host_id: str


@dataclass(frozen=True)
class HotelRecord:
    id: str
    location: GeoPoint
    rooms: int
    beds: int
    places: int


@dataclass(frozen=True)
class PhotoRecord:
    photo_id: str
    owner_id: str
    location: GeoPoint
    taken_at: date


@dataclass(frozen=True)
class PhotographerClass:
    owner_id: str
    category: PhotographerCategory
    span_days: int


@dataclass(frozen=True)
class RowError:
    line: int
    message: str


@dataclass(frozen=True)
class HostConcentration:
    pct_multi_hosts: float
    pct_listings_by_big_hosts: float


@dataclass(frozen=True)
class AvailabilitySummary:
    mean_days: float
    count_below_90: int
    pct_below_90: float


LISTING_COLUMNS = ["id", "lon", "lat", "room_type", "price", "beds", "availability_365", "reviews_per_month", "host_id"]
HOTEL_COLUMNS = ["id", "lon", "lat", "rooms", "beds", "places"]
PHOTO_COLUMNS = ["photo_id", "owner_id", "lon", "lat", "taken_at"]

# A host renting out more than 5 accommodations counts as a big host.
BIG_HOST_MIN_LISTINGS = 6

# Activity span (days) beyond which a photographer counts as a resident.
RESIDENT_SPAN_DAYS = 30


def _open_stream(source: str | Path | IO[str]) -> tuple[IO[str], bool]:
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8"), True
    return source, False


def _nonneg_int(raw: str, field: str) -> int:
    value = int(raw)
    if value < 0:
        raise ValueError(f"{field} must be >= 0, got {value}")
    return value


def _nonneg_float(raw: str, field: str) -> float:
    value = float(raw)
    if value < 0:
        raise ValueError(f"{field} must be >= 0, got {value}")
    return value


def _parse_rows(
    source: str | Path | IO[str],
    required: Sequence[str],
    build: Callable[[dict[str, str]], object],
    strict: bool,
) -> tuple[list, list[RowError]]:
    stream, owned = _open_stream(source)
    try:
        reader = csv.DictReader(stream)
        header = reader.fieldnames
        if header is None:
            raise SchemaError("empty file: no header row")
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"missing required columns: {missing}")
        records = []
        errors: list[RowError] = []
        for row in reader:
            try:
                records.append(build(row))
            except (ValueError, KeyError, TypeError) as exc:
                if strict:
                    raise ParseError(f"line {reader.line_num}: {exc}") from exc
                errors.append(RowError(reader.line_num, str(exc)))
        return records, errors
    except (OSError, io.UnsupportedOperation) as exc:
        raise SchemaError(f"unreadable stream: {exc}") from exc
    finally:
        if owned:
            stream.close()


def parse_listings(source: str | Path | IO[str], strict: bool = False) -> tuple[list[Listing], list[RowError]]:
    """Parse a listings file; malformed rows are skipped and reported unless strict."""

    def build(row: dict[str, str]) -> Listing:
        availability = int(row["availability_365"])
        if not 0 <= availability <= 365:
            raise ValueError(f"availability_365 out of range: {availability}")
        reviews_raw = (row.get("reviews_per_month") or "").strip()
        return Listing(
            id=row["id"],
            location=GeoPoint(float(row["lon"]), float(row["lat"])),
            room_type=RoomType(row["room_type"]),
            price_per_night=_nonneg_float(row["price"], "price"),
            beds=_nonneg_int(row["beds"], "beds"),
            availability_365=availability,
            reviews_per_month=_nonneg_float(reviews_raw, "reviews_per_month") if reviews_raw else None,
            host_id=row["host_id"],
        )

    return _parse_rows(source, LISTING_COLUMNS, build, strict)


def parse_hotels(source: str | Path | IO[str], strict: bool = False) -> tuple[list[HotelRecord], list[RowError]]:
    """Parse a hotel registry file; negative counts are row errors.

    Registries are noisy: places < beds is tolerated with a warning rather
    than rejected.
    """

    def build(row: dict[str, str]) -> HotelRecord:
        record = HotelRecord(
            id=row["id"],
            location=GeoPoint(float(row["lon"]), float(row["lat"])),
            rooms=_nonneg_int(row["rooms"], "rooms"),
            beds=_nonneg_int(row["beds"], "beds"),
            places=_nonneg_int(row["places"], "places"),
        )
        if record.places < record.beds:
            warnings.warn(f"hotel {record.id}: places ({record.places}) < beds ({record.beds})")
        return record

    return _parse_rows(source, HOTEL_COLUMNS, build, strict)


def parse_photos(source: str | Path | IO[str], strict: bool = False) -> tuple[list[PhotoRecord], list[RowError]]:
    """Parse a geolocated photo file; dates must be ISO-8601 (YYYY-MM-DD)."""

    def build(row: dict[str, str]) -> PhotoRecord:
        return PhotoRecord(
            photo_id=row["photo_id"],
            owner_id=row["owner_id"],
            location=GeoPoint(float(row["lon"]), float(row["lat"])),
            taken_at=date.fromisoformat(row["taken_at"]),
        )

    return _parse_rows(source, PHOTO_COLUMNS, build, strict)


def classify_photographers(
    photos: Sequence[PhotoRecord],
    threshold_days: int = RESIDENT_SPAN_DAYS,
) -> list[PhotographerClass]:
    """Split photo owners into tourists and residents by activity span.

    Span is the whole-day difference between an owner's first and last photo;
    a span strictly greater than ``threshold_days`` marks a resident,
    anything up to and including it a tourist (single-photo owners have span
    0). Output is sorted by owner id, one entry per owner.
    """
    if not photos:
        raise EmptyInputError("no photos to classify")
    first: dict[str, date] = {}
    last: dict[str, date] = {}
    for photo in photos:
        owner = photo.owner_id
        if owner not in first or photo.taken_at < first[owner]:
            first[owner] = photo.taken_at
        if owner not in last or photo.taken_at > last[owner]:
            last[owner] = photo.taken_at
    result = []
    for owner in sorted(first):
        span = (last[owner] - first[owner]).days
        category = PhotographerCategory.RESIDENT if span > threshold_days else PhotographerCategory.TOURIST
        result.append(PhotographerClass(owner, category, span))
    return result


def host_concentration(listings: Sequence[Listing]) -> HostConcentration:
    """Share of multi-listing hosts, and of listings held by big hosts."""
    if not listings:
        raise EmptyInputError("no listings")
    per_host: dict[str, int] = {}
    for listing in listings:
        per_host[listing.host_id] = per_host.get(listing.host_id, 0) + 1
    hosts = len(per_host)
    multi = sum(1 for c in per_host.values() if c >= 2)
    big_host_listings = sum(c for c in per_host.values() if c >= BIG_HOST_MIN_LISTINGS)
    return HostConcentration(
        pct_multi_hosts=100.0 * multi / hosts,
        pct_listings_by_big_hosts=100.0 * big_host_listings / len(listings),
    )


def availability_summary(listings: Sequence[Listing]) -> AvailabilitySummary:
    """Mean yearly availability and the share available fewer than 90 days."""
    if not listings:
        raise EmptyInputError("no listings")
    days = [listing.availability_365 for listing in listings]
    below = sum(1 for d in days if d < 90)
    return AvailabilitySummary(
        mean_days=sum(days) / len(days),
        count_below_90=below,
        pct_below_90=100.0 * below / len(days),
    )


def write_listings_csv(listings: Iterable[Listing], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LISTING_COLUMNS)
        for x in listings:
            writer.writerow([
                x.id,
                repr(x.location.lon),
                repr(x.location.lat),
                x.room_type.value,
                repr(x.price_per_night),
                x.beds,
                x.availability_365,
                "" if x.reviews_per_month is None else repr(x.reviews_per_month),
                x.host_id,
            ])


def write_hotels_csv(hotels: Iterable[HotelRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(HOTEL_COLUMNS)
        for x in hotels:
            writer.writerow([x.id, repr(x.location.lon), repr(x.location.lat), x.rooms, x.beds, x.places])


def write_photos_csv(photos: Iterable[PhotoRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(PHOTO_COLUMNS)
        for x in photos:
            writer.writerow([x.photo_id, x.owner_id, repr(x.location.lon), repr(x.location.lat), x.taken_at.isoformat()])


def write_photographers_csv(classes: Iterable[PhotographerClass], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["owner_id", "class", "span_days"])
        for c in classes:
            writer.writerow([c.owner_id, c.category.value, c.span_days])
