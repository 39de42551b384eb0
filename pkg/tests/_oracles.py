"""Independent oracles used by the tests.

Everything here deliberately avoids the package's own quadrature and special
functions: series are summed term by term, oscillatory tails are integrated
between consecutive zeros with scipy's QUADPACK and accelerated by repeated
averaging of partial sums.
"""

import math

import numpy as np
from scipy.integrate import quad


def si_series(x: float, terms: int = 25) -> float:
    """si(x) from the Maclaurin series of Si, at least `terms` terms."""
    total = sum(
        (-1) ** k * x ** (2 * k + 1) / ((2 * k + 1) * math.factorial(2 * k + 1))
        for k in range(terms)
    )
    return total - math.pi / 2


def ci_series(x: float, terms: int = 20) -> float:
    """Ci(x) from gamma + ln x + sum_k (-1)^k x^(2k) / (2k (2k)!)."""
    gamma = 0.5772156649015328606
    total = sum(
        (-1) ** k * x ** (2 * k) / ((2 * k) * math.factorial(2 * k))
        for k in range(1, terms)
    )
    return gamma + math.log(x) + total


def euler_sum(terms: np.ndarray) -> float:
    """Accelerated sum of an alternating series by averaging partial sums."""
    s = np.cumsum(terms)
    while len(s) > 1:
        s = 0.5 * (s[:-1] + s[1:])
    return float(s[0])


def si_zero_panels(x: float, n_panels: int = 40) -> float:
    """si(x) = -int_x^inf sin t / t dt, panel per half-period of sin."""
    k0 = max(math.ceil(x / math.pi), 1)
    edges = [x] + [k * math.pi for k in range(k0, k0 + n_panels)]
    terms = np.array([
        quad(lambda t: math.sin(t) / t, a, b, limit=200)[0]
        for a, b in zip(edges[:-1], edges[1:])
    ])
    return -euler_sum(terms)


def ci_zero_panels(x: float, n_panels: int = 40) -> float:
    """Ci(x) = -int_x^inf cos t / t dt, panel per half-period of cos."""
    k0 = max(math.ceil((x - math.pi / 2) / math.pi), 0)
    edges = [x] + [(k + 0.5) * math.pi for k in range(k0, k0 + n_panels)]
    terms = np.array([
        quad(lambda t: math.cos(t) / t, a, b, limit=200)[0]
        for a, b in zip(edges[:-1], edges[1:])
    ])
    return -euler_sum(terms)


def si_oracle(x: float) -> float:
    return si_series(x) if x <= 8.0 else si_zero_panels(x)


def ci_oracle(x: float) -> float:
    return ci_series(x) if x <= 8.0 else ci_zero_panels(x)


def ul_alpha4_simpson(xi: float, z_max: float = 40.0, panels: int = 100_000) -> float:
    """Composite-Simpson evaluation of the uplink alpha=4, eps=0 integral
    using scipy's sine/cosine integrals as the special-function oracle."""
    from scipy.special import sici

    rx = math.sqrt(xi)
    z = np.linspace(0.0, z_max, 2 * panels + 1)
    w = rx * z
    si_vals = np.empty_like(w)
    ci_vals = np.empty_like(w)
    si_vals[1:], ci_vals[1:] = sici(w[1:])
    integrand = np.empty_like(z)
    integrand[0] = 1.0
    bracket = (math.pi / 2
               - ci_vals[1:] * np.sin(w[1:])
               + (si_vals[1:] - math.pi / 2) * np.cos(w[1:]))
    integrand[1:] = np.exp(-z[1:] * (1.0 + rx * bracket))
    h = z[1] - z[0]
    return float(h / 3.0 * (integrand[0] + integrand[-1]
                            + 4.0 * integrand[1:-1:2].sum()
                            + 2.0 * integrand[2:-1:2].sum()))


def ul_eps1_exponent_trapezoid(xi: float, kappa: float, box: float = 40.0,
                               nodes: int = 2000) -> float:
    """2-D trapezoid evaluation of int_0^inf int_0^u x^k e^-x/(xi x^k + u^k)
    dx du on [0, box]^2 (the x > u half is zero by the integration region)."""
    x = np.linspace(0.0, box, nodes)
    u = np.linspace(0.0, box, nodes)
    xx, uu = np.meshgrid(x, u, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(
            (xx <= uu) & (uu > 0),
            xx ** kappa * np.exp(-xx) / (xi * xx ** kappa + uu ** kappa),
            0.0,
        )
    f = np.nan_to_num(f)
    return float(np.trapz(np.trapz(f, x, axis=0), u))
