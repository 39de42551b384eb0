"""Spatial primitives for simulation: windows, Poisson fields, association.

Points are plain (N, 2) float arrays in metres.  Randomness flows through
:class:`RngStream`: equal (master_seed, stream_id) pairs reproduce draws
bit-for-bit, distinct stream ids give statistically independent sequences,
so realizations can be farmed out to workers without coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "SimWindow",
    "RngStream",
    "BsField",
    "AssociationTable",
    "EmptyFieldError",
    "AttemptBudgetError",
    "WindowTooSmallError",
    "sample_bs_field",
    "nearest_bs",
    "build_association_table",
    "nearest_distance_distribution_check",
    "write_association_records",
    "read_association_records",
    "DEFAULT_MAX_ATTEMPTS",
]


class EmptyFieldError(ValueError):
    """An operation needing at least one base station got an empty field."""


class AttemptBudgetError(RuntimeError):
    """Association-table build ran out of candidate attempts."""


class WindowTooSmallError(ValueError):
    """Window too small for the requested distribution check."""


# Generous guard for pathological geometries; typical fills need O(N log N)
# candidates (~150 for N ~ 40).
DEFAULT_MAX_ATTEMPTS = 1_000_000

_CANDIDATE_BATCH = 64


@dataclass(frozen=True)
class SimWindow:
    """Square simulation window of side ``side`` metres centred at the origin."""

    side: float

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError(f"side must be > 0, got {self.side}")

    @property
    def area(self) -> float:
        return self.side * self.side

    def half(self) -> float:
        return self.side / 2.0

    def contains(self, points: np.ndarray) -> np.ndarray:
        h = self.half()
        return np.all(np.abs(np.atleast_2d(points)) <= h, axis=1)


@dataclass(frozen=True)
class RngStream:
    """Addressable random stream: one (master_seed, stream_id) pair per task."""

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng((self.master_seed, self.stream_id))


def _generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngStream) else rng


@dataclass
class BsField:
    """One realized set of base-station locations inside a window."""

    points: np.ndarray
    window: SimWindow
    density: float

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class AssociationTable:
    """Completed BS-UE pairing: row i of ``ue`` serves row i of ``bs``."""

    bs: np.ndarray
    ue: np.ndarray
    typical_index: int | None = None
    attempts: int = 0

    def __len__(self) -> int:
        return len(self.bs)


def sample_bs_field(window: SimWindow, density: float,
                    rng: RngStream | np.random.Generator) -> BsField:
    """Sample a Poisson field: N ~ Pois(density*area), points uniform in the window.

    N = 0 is a legal outcome; callers decide how to treat it.
    """
    if not density > 0:
        raise ValueError(f"density must be > 0, got {density}")
    gen = _generator(rng)
    n = int(gen.poisson(density * window.area))
    h = window.half()
    points = gen.uniform(-h, h, size=(n, 2))
    return BsField(points=points, window=window, density=density)


def nearest_bs(point, field: BsField) -> tuple[int, float]:
    """Index and distance of the base station nearest ``point``.

    Ties break to the lowest index (a measure-zero event under continuous
    sampling; determinism matters for reproducibility).
    """
    if len(field) == 0:
        raise EmptyFieldError("nearest_bs on an empty field")
    p = np.asarray(point, dtype=float)
    d2 = (field.points[:, 0] - p[0]) ** 2 + (field.points[:, 1] - p[1]) ** 2
    idx = int(np.argmin(d2))
    return idx, math.sqrt(float(d2[idx]))


def build_association_table(field: BsField, window: SimWindow,
                            rng: RngStream | np.random.Generator,
                            max_attempts: int = DEFAULT_MAX_ATTEMPTS,
                            typical_index: int | None = None) -> AssociationTable:
    """Pair every base station with exactly one user, nearest-station rule.

    Candidate users are drawn uniformly over the window; a candidate is
    accepted iff its nearest station still lacks a user, otherwise it is
    discarded and never reused.  Raises :class:`AttemptBudgetError` if the
    table is still incomplete after ``max_attempts`` candidates.
    """
    n = len(field)
    if n == 0:
        raise EmptyFieldError("cannot associate users with an empty field")
    gen = _generator(rng)
    bs = field.points
    ue = np.full((n, 2), np.nan)
    filled = np.zeros(n, dtype=bool)
    remaining = n
    attempts = 0
    h = window.half()
    while remaining > 0:
        if attempts >= max_attempts:
            raise AttemptBudgetError(
                f"association incomplete after {attempts} candidate users "
                f"({remaining} of {n} stations unserved)"
            )
        m = min(_CANDIDATE_BATCH, max_attempts - attempts)
        cand = gen.uniform(-h, h, size=(m, 2))
        d2 = (cand[:, None, 0] - bs[None, :, 0]) ** 2 + (cand[:, None, 1] - bs[None, :, 1]) ** 2
        nearest = np.argmin(d2, axis=1)
        for j in range(m):
            attempts += 1
            b = int(nearest[j])
            if not filled[b]:
                ue[b] = cand[j]
                filled[b] = True
                remaining -= 1
                if remaining == 0:
                    break
    return AssociationTable(bs=bs.copy(), ue=ue, typical_index=typical_index,
                            attempts=attempts)


@dataclass
class DistributionCheck:
    """Result of the nearest-distance law check."""

    statistic: float
    critical_95: float
    distances: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.statistic < self.critical_95


def nearest_distance_distribution_check(
    density: float, samples: int, rng: RngStream | np.random.Generator,
    window: SimWindow | None = None,
) -> DistributionCheck:
    """Kolmogorov-Smirnov check of origin-to-nearest-station distances.

    The nearest distance follows the CDF 1 - exp(-density*pi*r^2); the window
    must satisfy side >= 10/sqrt(density) so edge truncation is negligible
    (built automatically at that minimum when not supplied).
    """
    if samples < 1000:
        raise ValueError(f"samples must be >= 1000, got {samples}")
    min_side = 10.0 / math.sqrt(density)
    if window is None:
        window = SimWindow(side=min_side)
    elif window.side < min_side:
        raise WindowTooSmallError(
            f"side {window.side:.1f} m < 10/sqrt(density) = {min_side:.1f} m"
        )
    gen = _generator(rng)
    dist = np.empty(samples)
    got = 0
    while got < samples:
        f = sample_bs_field(window, density, gen)
        if len(f) == 0:
            continue
        _, dist[got] = nearest_bs((0.0, 0.0), f)
        got += 1
    dist.sort()
    cdf = -np.expm1(-density * math.pi * dist ** 2)
    i = np.arange(1, samples + 1)
    statistic = float(np.max(np.maximum(i / samples - cdf, cdf - (i - 1) / samples)))
    return DistributionCheck(
        statistic=statistic, critical_95=1.63 / math.sqrt(samples), distances=dist
    )


def write_association_records(table: AssociationTable, path: str | Path) -> None:
    """Dump a table as newline-delimited bs_x,bs_y,ue_x,ue_y records (6 decimals)."""
    with open(path, "w") as fh:
        fh.write("bs_x,bs_y,ue_x,ue_y\n")
        for (bx, by), (ux, uy) in zip(table.bs, table.ue):
            fh.write(f"{bx:.6f},{by:.6f},{ux:.6f},{uy:.6f}\n")


def read_association_records(path: str | Path) -> AssociationTable:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return AssociationTable(bs=data[:, :2], ue=data[:, 2:])
