"""Physical model parameters, SIR thresholds and coverage-point records."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NetworkParams",
    "SirThreshold",
    "CoverageMethod",
    "CoveragePoint",
    "threshold_grid",
]


@dataclass(frozen=True)
class NetworkParams:
    """Network model parameters.

    ``density`` is the base-station intensity in BS/m^2; ``alpha`` is the
    path-loss exponent (must exceed 2 for the interference sums to converge);
    ``kappa`` is always alpha/2 and derived, never stored.  ``epsilon`` is the
    uplink fractional power control factor and may be ``None`` for downlink
    use.
    """

    density: float
    alpha: float
    epsilon: float | None = None
    power: float = 1.0

    def __post_init__(self):
        if not self.density > 0:
            raise ValueError(f"density must be > 0, got {self.density}")
        if not self.alpha > 2:
            raise ValueError(f"alpha must be > 2, got {self.alpha}")
        if self.epsilon is not None and not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if not self.power > 0:
            raise ValueError(f"power must be > 0, got {self.power}")

    @property
    def kappa(self) -> float:
        return self.alpha / 2.0

    @property
    def scaled_density(self) -> float:
        """pi * density, the exponent rate of the nearest-distance law."""
        return math.pi * self.density


@dataclass(frozen=True)
class SirThreshold:
    """SIR threshold carried in both dB and linear form."""

    xi_db: float
    xi_linear: float

    def __post_init__(self):
        if not self.xi_linear > 0:
            raise ValueError(f"xi_linear must be > 0, got {self.xi_linear}")

    @classmethod
    def from_db(cls, xi_db: float) -> "SirThreshold":
        return cls(xi_db=float(xi_db), xi_linear=10.0 ** (xi_db / 10.0))

    @classmethod
    def from_linear(cls, xi_linear: float) -> "SirThreshold":
        if not xi_linear > 0:
            raise ValueError(f"xi_linear must be > 0, got {xi_linear}")
        return cls(xi_db=10.0 * math.log10(xi_linear), xi_linear=float(xi_linear))


def threshold_grid(min_db: float, max_db: float, step_db: float = 1.0) -> list[SirThreshold]:
    """Ascending SIR thresholds from min_db to max_db inclusive."""
    if step_db <= 0:
        raise ValueError(f"step_db must be > 0, got {step_db}")
    if min_db > max_db:
        raise ValueError(f"min_db must be <= max_db, got {min_db} > {max_db}")
    values = np.arange(min_db, max_db + 0.5 * step_db, step_db)
    return [SirThreshold.from_db(float(db)) for db in values]


class CoverageMethod(enum.Enum):
    ANALYTIC_GENERAL = "analytic_general"
    ANALYTIC_CLOSED_FORM = "analytic_closed_form"
    SIMULATED = "simulated"


@dataclass(frozen=True)
class CoveragePoint:
    """One (threshold, probability) point of a coverage curve."""

    threshold: SirThreshold
    probability: float
    method: CoverageMethod
    stderr: float = 0.0

    def __post_init__(self):
        if not -1e-9 <= self.probability <= 1.0 + 1e-9:
            raise ValueError(f"probability out of [0, 1]: {self.probability}")
        if self.stderr < 0:
            raise ValueError(f"stderr must be >= 0, got {self.stderr}")
