"""Sparse spatial weights: inverse-distance band construction and row standardization.

The neighbour search uses a uniform grid with cell size equal to the band
radius, so each observation only scans its own and the eight surrounding
cells. Construction is defined to be *exactly* equal to a brute-force
all-pairs scan: the grid only prunes pairs that cannot be within the radius,
and distances are evaluated with the same scalar expression either way.
"""
from __future__ import annotations

import csv
import json
import math
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import InsufficientObservationsError, InvalidWeightsError
from .geo import PlanarPoint

# Centroids closer than this are treated as 1 m apart so inverse-distance
# weights stay finite on degenerate geometries.
MIN_DISTANCE_M = 1.0


class SpatialWeights:
    """Sparse neighbour/weight structure over ``n`` observations.

    Attributes
    ----------
    n : int
        Observation count.
    neighbor_ids : tuple of numpy int arrays
        Per-observation neighbour indices, ascending, never containing the
        observation itself.
    neighbor_weights : tuple of numpy float arrays
        Positive weights aligned with ``neighbor_ids``.
    row_standardized : bool
        True when each non-island row sums to 1.
    islands : tuple of int
        Indices with no neighbours.
    s0 : float
        Sum of all weights.
    radius, power : float or None
        Construction metadata carried through for serialization.

    Instances are immutable by convention; transformations return new objects.
    """

    def __init__(
        self,
        neighbor_ids: Sequence[Sequence[int]],
        neighbor_weights: Sequence[Sequence[float]],
        row_standardized: bool = False,
        radius: float | None = None,
        power: float | None = None,
    ) -> None:
        if len(neighbor_ids) != len(neighbor_weights):
            raise InvalidWeightsError("neighbor id and weight lists differ in length")
        self.n = len(neighbor_ids)
        ids = []
        wts = []
        for i, (row_ids, row_w) in enumerate(zip(neighbor_ids, neighbor_weights)):
            a = np.asarray(row_ids, dtype=np.int64)
            w = np.asarray(row_w, dtype=np.float64)
            if a.shape != w.shape:
                raise InvalidWeightsError(f"row {i}: ids and weights differ in length")
            if a.size and (np.any(a < 0) or np.any(a >= self.n)):
                raise InvalidWeightsError(f"row {i}: neighbor index out of range")
            if np.any(a == i):
                raise InvalidWeightsError(f"row {i}: self-neighbor not allowed")
            if np.unique(a).size != a.size:
                raise InvalidWeightsError(f"row {i}: duplicate neighbor index")
            if np.any(w <= 0.0):
                raise InvalidWeightsError(f"row {i}: weights must be strictly positive")
            order = np.argsort(a, kind="stable")
            ids.append(a[order])
            wts.append(w[order])
        self.neighbor_ids = tuple(ids)
        self.neighbor_weights = tuple(wts)
        self.row_standardized = row_standardized
        self.islands = tuple(i for i in range(self.n) if ids[i].size == 0)
        self.radius = radius
        self.power = power
        # Flat COO view used by the statistics engine.
        counts = np.array([a.size for a in ids], dtype=np.int64)
        self.indptr = np.concatenate(([0], np.cumsum(counts)))
        self.flat_rows = np.repeat(np.arange(self.n, dtype=np.int64), counts)
        self.flat_cols = np.concatenate(ids) if self.n else np.empty(0, dtype=np.int64)
        self.flat_weights = np.concatenate(wts) if self.n else np.empty(0, dtype=np.float64)
        if row_standardized:
            for i, row in enumerate(self.neighbor_weights):
                if row.size and abs(float(row.sum()) - 1.0) > 1e-12:
                    raise InvalidWeightsError(f"row {i} flagged standardized but sums to {row.sum()!r}")
            # By contract each non-island row sums to 1, so S0 is exact.
            self.s0 = float(self.n - len(self.islands))
        else:
            self.s0 = math.fsum(self.flat_weights.tolist())

    @property
    def nnz(self) -> int:
        return int(self.flat_weights.size)

    @cached_property
    def row_sums(self) -> np.ndarray:
        return np.bincount(self.flat_rows, weights=self.flat_weights, minlength=self.n)

    @cached_property
    def col_sums(self) -> np.ndarray:
        return np.bincount(self.flat_cols, weights=self.flat_weights, minlength=self.n)

    @cached_property
    def s1(self) -> float:
        """0.5 * sum over stored pairs of (w_ij + w_ji)^2."""
        rows = self.flat_rows.tolist()
        cols = self.flat_cols.tolist()
        wts = self.flat_weights.tolist()
        transpose = {(j, i): w for i, j, w in zip(rows, cols, wts)}
        total = 0.0
        for i, j, w in zip(rows, cols, wts):
            total += (w + transpose.get((i, j), 0.0)) ** 2
        return 0.5 * total

    @cached_property
    def s2(self) -> float:
        """Sum over observations of (row_sum + col_sum)^2."""
        return float(np.sum((self.row_sums + self.col_sums) ** 2))

    def lag(self, values: np.ndarray) -> np.ndarray:
        """Spatial lag sum_j w_ij * values[j]; islands get 0."""
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (self.n,):
            raise InvalidWeightsError(f"expected {self.n} values, got {values.shape}")
        contrib = self.flat_weights * values[self.flat_cols]
        return np.bincount(self.flat_rows, weights=contrib, minlength=self.n)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpatialWeights):
            return NotImplemented
        return (
            self.n == other.n
            and self.row_standardized == other.row_standardized
            and all(np.array_equal(a, b) for a, b in zip(self.neighbor_ids, other.neighbor_ids))
            and all(np.array_equal(a, b) for a, b in zip(self.neighbor_weights, other.neighbor_weights))
        )

    __hash__ = None  # type: ignore[assignment]


def _grid_cells(points: Sequence[PlanarPoint], cell: float) -> dict[tuple[int, int], list[int]]:
    cells: dict[tuple[int, int], list[int]] = {}
    for idx, p in enumerate(points):
        key = (math.floor(p.x / cell), math.floor(p.y / cell))
        cells.setdefault(key, []).append(idx)
    return cells


def inverse_distance_band(
    centroids: Sequence[PlanarPoint],
    radius: float = 1000.0,
    power: float = 1.0,
) -> SpatialWeights:
    """Inverse-distance weights within a closed distance band.

    w_ij = 1 / d_ij**power for 0 < d_ij <= radius (band edge inclusive);
    pairs farther apart get no entry. Distinct observations closer than 1 m
    (including coincident ones) are clamped to d = 1 m. The result is not
    row-standardized.
    """
    n = len(centroids)
    if n < 2:
        raise InsufficientObservationsError("need at least 2 observations for weights")
    if not radius > 0:
        raise InvalidWeightsError("radius must be positive")

    cells = _grid_cells(centroids, radius)
    ids: list[list[int]] = [[] for _ in range(n)]
    wts: list[list[float]] = [[] for _ in range(n)]
    for (cx, cy), members in cells.items():
        # Pair members with candidates in this and neighbouring cells; only
        # j > i is evaluated, the mirror entry is added symmetrically.
        candidates: list[int] = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                candidates.extend(cells.get((cx + dx, cy + dy), ()))
        for i in members:
            pi = centroids[i]
            for j in candidates:
                if j <= i:
                    continue
                pj = centroids[j]
                d = math.sqrt((pi.x - pj.x) ** 2 + (pi.y - pj.y) ** 2)
                if d <= radius:
                    w = 1.0 / max(d, MIN_DISTANCE_M) ** power
                    ids[i].append(j)
                    wts[i].append(w)
                    ids[j].append(i)
                    wts[j].append(w)
    return SpatialWeights(ids, wts, row_standardized=False, radius=radius, power=power)


def row_standardize(w: SpatialWeights) -> SpatialWeights:
    """Divide each non-island row by its row sum; idempotent; islands unchanged."""
    if w.row_standardized:
        return w
    new_wts = []
    for row in w.neighbor_weights:
        if row.size:
            new_wts.append(row / row.sum())
        else:
            new_wts.append(row)
    return SpatialWeights(
        w.neighbor_ids,
        new_wts,
        row_standardized=True,
        radius=w.radius,
        power=w.power,
    )


def save_weights(w: SpatialWeights, csv_path: str, header_path: str) -> None:
    """Write sparse triplets ``i,j,weight`` plus a JSON header.

    Weights are written with ``repr`` so reloading reproduces every float
    bit-exactly.
    """
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "weight"])
        for i in range(w.n):
            for j, wt in zip(w.neighbor_ids[i].tolist(), w.neighbor_weights[i].tolist()):
                writer.writerow([i, j, repr(wt)])
    header = {
        "n": w.n,
        "radius": w.radius,
        "power": w.power,
        "row_standardized": w.row_standardized,
        "islands": list(w.islands),
    }
    with open(header_path, "w", encoding="utf-8") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_weights(csv_path: str, header_path: str) -> SpatialWeights:
    with open(header_path, encoding="utf-8") as fh:
        header = json.load(fh)
    n = int(header["n"])
    ids: list[list[int]] = [[] for _ in range(n)]
    wts: list[list[float]] = [[] for _ in range(n)]
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            i = int(row["i"])
            ids[i].append(int(row["j"]))
            wts[i].append(float(row["weight"]))
    w = SpatialWeights(
        ids,
        wts,
        row_standardized=bool(header["row_standardized"]),
        radius=header.get("radius"),
        power=header.get("power"),
    )
    if list(w.islands) != list(header["islands"]):
        raise InvalidWeightsError("island list in header does not match triplet data")
    return w


def binary_weights_from_pairs(n: int, pairs: Iterable[tuple[int, int]]) -> SpatialWeights:
    """Binary symmetric weights from undirected index pairs (test/grid helper)."""
    ids: list[list[int]] = [[] for _ in range(n)]
    for i, j in pairs:
        ids[i].append(j)
        ids[j].append(i)
    wts = [[1.0] * len(row) for row in ids]
    return SpatialWeights(ids, wts, row_standardized=False)
