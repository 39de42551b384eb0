"""Bundled reference coverage curves for the figure-reproduction harness.

The dataset ships as a versioned CSV (one row per point, tagged with the
figure, curve series and whether the point is analytic or simulated) so the
reference numbers stay auditable instead of being inlined in test code.
Uplink curves are for epsilon = 0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

__all__ = ["ReferenceCurve", "load_reference_curves", "reference_curve"]


@dataclass(frozen=True)
class ReferenceCurve:
    figure: str          # "dl" | "ul"
    series: str          # "alpha4" | "alpha6"
    kind: str            # "analytic" | "simulated"
    xi_db: tuple
    values: tuple

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.xi_db), np.asarray(self.values)


@lru_cache(maxsize=1)
def load_reference_curves() -> dict[tuple[str, str, str], ReferenceCurve]:
    """All bundled curves keyed by (figure, series, kind)."""
    grouped: dict[tuple[str, str, str], list[tuple[float, float]]] = {}
    src = resources.files("cellcov.data").joinpath("reference_curves.csv")
    with src.open("r") as fh:
        for row in csv.DictReader(fh):
            key = (row["figure"], row["series"], row["kind"])
            grouped.setdefault(key, []).append((float(row["xi_db"]), float(row["value"])))
    curves = {}
    for key, pts in grouped.items():
        pts.sort()
        curves[key] = ReferenceCurve(
            figure=key[0], series=key[1], kind=key[2],
            xi_db=tuple(p[0] for p in pts), values=tuple(p[1] for p in pts),
        )
    return curves


def reference_curve(figure: str, series: str, kind: str = "analytic") -> ReferenceCurve:
    try:
        return load_reference_curves()[(figure, series, kind)]
    except KeyError:
        raise KeyError(f"no reference curve ({figure}, {series}, {kind})") from None
