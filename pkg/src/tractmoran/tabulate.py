"""Tract-level tabulation: point aggregation, densities, stats, z-scores, pressure.

Point assignment runs against a uniform ~200 m grid over the tract bounding
boxes; the grid only narrows the candidate set, so results are identical to a
full containment scan.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import (
    AlignmentError,
    ConstantFieldError,
    EmptyInputError,
    InvalidTractSetError,
)
from .geo import PlanarPoint, Tract
from .ingest import Listing

ASSIGN_GRID_CELL_M = 200.0


@dataclass(frozen=True, eq=False)
class VariableVector:
    """Per-tract numeric field aligned to an ordered tract-id list."""

    tract_ids: tuple[str, ...]
    values: np.ndarray
    name: str = ""
    units: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "tract_ids", tuple(self.tract_ids))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if len(self.tract_ids) != self.values.size:
            raise AlignmentError(
                f"{len(self.tract_ids)} tract ids vs {self.values.size} values"
            )

    def __len__(self) -> int:
        return self.values.size

    def replace_values(self, values: np.ndarray, name: str | None = None, units: str | None = None) -> "VariableVector":
        return VariableVector(
            self.tract_ids,
            values,
            self.name if name is None else name,
            self.units if units is None else units,
        )


@dataclass(frozen=True)
class DescriptiveStats:
    """Count/min/max/sum/mean/sd summary; cv is None when the mean is zero."""

    count: int
    minimum: float
    maximum: float
    sum: float
    mean: float
    standard_deviation: float
    cv: float | None


@dataclass(frozen=True)
class PressureEntry:
    tract_id: str
    ratio: float | None
    excluded: bool
    reason: str | None


@dataclass(frozen=True)
class OccupancyComparison:
    center_mean: float | None
    rest_mean: float | None
    center_count: int
    rest_count: int


def _require_alignment(ids_a: Sequence[str], ids_b: Sequence[str]) -> None:
    if tuple(ids_a) != tuple(ids_b):
        raise AlignmentError("tract id sequences do not match")


def _tract_grid(tracts: Sequence[Tract], cell: float) -> dict[tuple[int, int], list[int]]:
    grid: dict[tuple[int, int], list[int]] = {}
    for idx, tract in enumerate(tracts):
        min_x, min_y, max_x, max_y = tract.bounds()
        for cx in range(math.floor(min_x / cell), math.floor(max_x / cell) + 1):
            for cy in range(math.floor(min_y / cell), math.floor(max_y / cell) + 1):
                grid.setdefault((cx, cy), []).append(idx)
    return grid


def _containing_tract(
    p: PlanarPoint,
    tracts: Sequence[Tract],
    grid: dict[tuple[int, int], list[int]],
    cell: float,
) -> int | None:
    """Index of the containing tract, smallest tract id winning boundary ties."""
    key = (math.floor(p.x / cell), math.floor(p.y / cell))
    best: int | None = None
    for idx in grid.get(key, ()):
        if tracts[idx].contains(p):
            if best is None or tracts[idx].tract_id < tracts[best].tract_id:
                best = idx
    return best


def assign_points_to_tracts(
    points: Sequence[tuple[PlanarPoint, Any]],
    tracts: Sequence[Tract],
    weight_field: str | None = None,
    name: str = "",
    units: str = "",
) -> tuple[VariableVector, int]:
    """Aggregate tagged points into per-tract totals.

    ``points`` are (planar location, record) pairs projected to the same
    origin as the tract geometry. Each point lands in at most one tract;
    points inside several tracts under the boundary-inside rule go to the
    lexicographically smallest tract id. Returns the per-tract vector (count,
    or sum of ``weight_field`` read off each record) plus the number of
    points contained by no tract.
    """
    ids = [t.tract_id for t in tracts]
    if len(set(ids)) != len(ids):
        raise InvalidTractSetError("duplicate tract ids")
    grid = _tract_grid(tracts, ASSIGN_GRID_CELL_M)
    values = np.zeros(len(tracts), dtype=np.float64)
    unassigned = 0
    for p, record in points:
        idx = _containing_tract(p, tracts, grid, ASSIGN_GRID_CELL_M)
        if idx is None:
            unassigned += 1
        elif weight_field is None:
            values[idx] += 1.0
        else:
            values[idx] += float(getattr(record, weight_field))
    return VariableVector(tuple(ids), values, name, units), unassigned


def density_per_hectare(v: VariableVector, tracts: Sequence[Tract]) -> VariableVector:
    _require_alignment(v.tract_ids, [t.tract_id for t in tracts])
    areas = np.array([t.area_ha for t in tracts], dtype=np.float64)
    return v.replace_values(v.values / areas, name=f"{v.name}_per_ha" if v.name else "", units="per_ha")


def descriptive_stats(v: VariableVector) -> DescriptiveStats:
    """Summary statistics with sample standard deviation (n-1 denominator)."""
    if len(v) == 0:
        raise EmptyInputError("cannot summarize an empty vector")
    vals = v.values
    mean = float(np.mean(vals))
    sd = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
    cv = 100.0 * sd / mean if mean != 0.0 else None
    return DescriptiveStats(
        count=int(vals.size),
        minimum=float(np.min(vals)),
        maximum=float(np.max(vals)),
        sum=float(np.sum(vals)),
        mean=mean,
        standard_deviation=sd,
        cv=cv,
    )


def normalize(v: VariableVector) -> VariableVector:
    """Z-scores with the population standard deviation (n denominator)."""
    if len(v) == 0:
        raise EmptyInputError("cannot normalize an empty vector")
    sd = float(np.std(v.values))
    if sd == 0.0:
        raise ConstantFieldError(f"field {v.name!r} has zero variance")
    z = (v.values - np.mean(v.values)) / sd
    return v.replace_values(z, units="z")


def difference_map(hotels_norm: VariableVector, airbnb_norm: VariableVector) -> VariableVector:
    """Normalized hotel field minus normalized peer-to-peer field, per tract.

    Positive values mean hotel predominance, negative values peer-to-peer
    predominance.
    """
    _require_alignment(hotels_norm.tract_ids, airbnb_norm.tract_ids)
    return hotels_norm.replace_values(
        hotels_norm.values - airbnb_norm.values,
        name="difference",
        units="z",
    )


def occupancy_proxy_comparison(
    listings: Sequence[tuple[PlanarPoint, Listing]],
    tracts: Sequence[Tract],
    center_tract_ids: set[str],
) -> OccupancyComparison:
    """Mean reviews-per-month (occupancy proxy) in center tracts vs the rest.

    Listings without the field are excluded from both means; listings outside
    every tract are excluded entirely. A side with no usable listings gets a
    None mean.
    """
    ids = {t.tract_id for t in tracts}
    missing = center_tract_ids - ids
    if missing:
        raise InvalidTractSetError(f"center ids not in tract set: {sorted(missing)}")
    grid = _tract_grid(tracts, ASSIGN_GRID_CELL_M)
    center: list[float] = []
    rest: list[float] = []
    for p, listing in listings:
        if listing.reviews_per_month is None:
            continue
        idx = _containing_tract(p, tracts, grid, ASSIGN_GRID_CELL_M)
        if idx is None:
            continue
        if tracts[idx].tract_id in center_tract_ids:
            center.append(listing.reviews_per_month)
        else:
            rest.append(listing.reviews_per_month)
    return OccupancyComparison(
        center_mean=float(np.mean(center)) if center else None,
        rest_mean=float(np.mean(rest)) if rest else None,
        center_count=len(center),
        rest_count=len(rest),
    )


def pressure_ratio(
    places: VariableVector,
    tracts: Sequence[Tract],
    min_density: float = 5.0,
) -> list[PressureEntry]:
    """Accommodation places per 1,000 inhabitants, per tract.

    Tracts with population density below ``min_density`` inhabitants/ha are
    excluded (green spaces, industrial zones), as are unpopulated tracts.
    """
    _require_alignment(places.tract_ids, [t.tract_id for t in tracts])
    entries = []
    for value, tract in zip(places.values, tracts):
        if tract.population == 0:
            entries.append(PressureEntry(tract.tract_id, None, True, "no_population"))
        elif tract.population / tract.area_ha < min_density:
            entries.append(PressureEntry(tract.tract_id, None, True, "low_density"))
        else:
            ratio = 1000.0 * float(value) / tract.population
            entries.append(PressureEntry(tract.tract_id, ratio, False, None))
    return entries


def write_vector_csv(v: VariableVector, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tract_id", "value"])
        for tract_id, value in zip(v.tract_ids, v.values.tolist()):
            writer.writerow([tract_id, repr(value)])


def read_vector_csv(path: str, name: str = "", units: str = "") -> VariableVector:
    ids: list[str] = []
    values: list[float] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            ids.append(row["tract_id"])
            values.append(float(row["value"]))
    return VariableVector(tuple(ids), np.array(values), name, units)


def write_pressure_csv(entries: Iterable[PressureEntry], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tract_id", "ratio", "excluded", "reason"])
        for e in entries:
            writer.writerow([
                e.tract_id,
                "" if e.ratio is None else repr(e.ratio),
                "true" if e.excluded else "false",
                e.reason or "",
            ])
