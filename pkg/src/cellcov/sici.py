"""Sine and cosine integrals plus the two Beta values the coverage math needs.

si(x) = Si(x) - pi/2 = -int_x^inf sin(t)/t dt
ci(x) = Ci(x)        = -int_x^inf cos(t)/t dt

Both use the Maclaurin series below ``CROSSOVER`` and a Lentz continued
fraction for the complex exponential integral E1(ix) above it; the two
branches agree to better than 1e-12 at the seam.
"""

from __future__ import annotations

import math

__all__ = [
    "sine_integral_si",
    "cosine_integral_ci",
    "beta_half_half",
    "beta_reciprocal_pair",
    "CROSSOVER",
]

EULER_GAMMA = 0.5772156649015328606
CROSSOVER = 4.0

_HALF_PI = math.pi / 2


def _series(x: float) -> tuple[float, float]:
    """(Si(x), Ci(x)) by Maclaurin series; accurate for 0 < x <= CROSSOVER."""
    x2 = x * x
    term = x
    si = x
    k = 1
    while abs(term) > 1e-18 * (1.0 + abs(si)) and k < 60:
        term *= -x2 / ((2 * k) * (2 * k + 1))
        si += term / (2 * k + 1)
        k += 1
    term = 1.0
    cin = 0.0
    k = 1
    while abs(term) > 1e-18 * (1.0 + abs(cin)) and k < 60:
        term *= -x2 / ((2 * k - 1) * (2 * k))
        cin += term / (2 * k)
        k += 1
    return si, EULER_GAMMA + math.log(x) + cin


def _continued_fraction(x: float) -> tuple[float, float]:
    """(Si(x), Ci(x)) from E1(ix) = -Ci(x) + i*si(x), by modified Lentz."""
    z = complex(0.0, x)
    tiny = 1e-300
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for k in range(1, 200):
        a = -float(k * k)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        if c == 0:
            c = complex(tiny, 0.0)
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    e1 = complex(math.cos(x), -math.sin(x)) * h
    return e1.imag + _HALF_PI, -e1.real


def sine_integral_si(x: float) -> float:
    """si(x) for x >= 0; si(0) = -pi/2 exactly, si(x) -> 0 as x -> inf."""
    if x < 0:
        raise ValueError(f"sine_integral_si requires x >= 0, got {x}")
    if x == 0.0:
        return -_HALF_PI
    if x <= CROSSOVER:
        return _series(x)[0] - _HALF_PI
    return _continued_fraction(x)[0] - _HALF_PI


def cosine_integral_ci(x: float) -> float:
    """Ci(x) for x > 0 (logarithmically divergent at 0)."""
    if x <= 0:
        raise ValueError(f"cosine_integral_ci requires x > 0, got {x}")
    if x <= CROSSOVER:
        return _series(x)[1]
    return _continued_fraction(x)[1]


def beta_half_half() -> float:
    """B(1/2, 1/2), exactly pi."""
    return math.pi


def beta_reciprocal_pair(kappa: float) -> float:
    """B(1 - 1/kappa, 1/kappa) for kappa > 1, via the reflection identity
    B(1-s, s) = pi / sin(pi*s)."""
    if kappa <= 1:
        raise ValueError(f"beta_reciprocal_pair requires kappa > 1, got {kappa}")
    return math.pi / math.sin(math.pi / kappa)
