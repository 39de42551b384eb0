"""Analytic SIR coverage probabilities for Poisson cellular networks.

Downlink: a user at the origin served by its nearest base station, Rayleigh
fading, interference from every other station.  Uplink: a base station at the
origin served by its nearest user under fractional power control, with the
interfering users' positions approximated by their serving stations'.

Every probability exists in two forms: a density-free integral (the BS
density cancels exactly), and the raw density-carrying integral evaluated
numerically with the density still inside.  Their agreement is the executable
statement of the two density-invariance theorems this package validates.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np

from .params import CoverageMethod, CoveragePoint, SirThreshold
from .quadrature import (
    DEFAULT_SPEC,
    EvalBudget,
    IntegralResult,
    PerformanceBudgetError,
    QuadratureSpec,
    integrate_finite,
    integrate_semi_infinite,
)
from .sici import cosine_integral_ci, sine_integral_si

__all__ = [
    "NonConvergenceError",
    "dl_coverage",
    "dl_coverage_alpha4",
    "dl_coverage_alpha6",
    "dl_coverage_with_density",
    "ul_coverage",
    "ul_coverage_eps0",
    "ul_coverage_eps0_alpha4",
    "ul_coverage_eps1",
    "ul_coverage_with_density",
    "coverage_curve",
]


class NonConvergenceError(ArithmeticError):
    """A coverage integral failed to reach its requested tolerance."""


# Exponential factors exp(-x) are dead beyond this many decay lengths
# (e^-60 * 60^5 ~ 7e-18 even against a kappa=5 power); finite inner integrals
# are clamped there so huge nominal upper limits cannot hide the integrand's
# support from the adaptive rule.
_EXP_SPAN = 60.0

# Hard ceiling on integrand evaluations for one uplink probability.
_UL_EVAL_BUDGET = 10_000_000


def _xi_linear(xi: SirThreshold | float) -> float:
    if isinstance(xi, SirThreshold):
        return xi.xi_linear
    xi = float(xi)
    if not xi > 0:
        raise ValueError(f"xi must be > 0 (linear scale), got {xi}")
    return xi


def _checked(result: IntegralResult, what: str) -> float:
    if not result.converged:
        raise NonConvergenceError(
            f"{what} did not converge (error estimate {result.error_estimate:.3e})"
        )
    return result.value


def _clip01(p: float) -> float:
    return min(max(p, 0.0), 1.0)


# --------------------------------------------------------------------------
# downlink
# --------------------------------------------------------------------------

@lru_cache(maxsize=512)
def _dl_tail(xi: float, kappa: float, spec: QuadratureSpec) -> float:
    """int_{xi^(-1/kappa)}^inf du / (1 + u^kappa)."""
    a = xi ** (-1.0 / kappa)
    res = integrate_semi_infinite(
        lambda u: 1.0 / (1.0 + u ** kappa), a, spec, scale=max(a, 1.0)
    )
    return _checked(res, "downlink interference tail integral")


def dl_coverage(xi: SirThreshold | float, kappa: float,
                spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Density-free downlink coverage probability for path-loss kappa = alpha/2.

    p = 1 / (1 + xi^(1/kappa) * int_{xi^(-1/kappa)}^inf du/(1+u^kappa))
    """
    if kappa <= 1:
        raise ValueError(f"kappa must be > 1, got {kappa}")
    xi = _xi_linear(xi)
    return _clip01(1.0 / (1.0 + xi ** (1.0 / kappa) * _dl_tail(xi, kappa, spec)))


def dl_coverage_alpha4(xi: SirThreshold | float) -> float:
    """Closed form for alpha = 4: p = 1 / (1 + sqrt(xi)(pi/2 - atan(1/sqrt(xi))))."""
    rx = math.sqrt(_xi_linear(xi))
    return 1.0 / (1.0 + rx * (math.pi / 2.0 - math.atan(1.0 / rx)))


def dl_coverage_alpha6(xi: SirThreshold | float) -> float:
    """Closed form for alpha = 6, written in c = xi^(-1/3)."""
    c = _xi_linear(xi) ** (-1.0 / 3.0)
    den = (
        6.0 * c
        + math.log(c * c - c + 1.0)
        + math.sqrt(3.0) * (math.pi - 2.0 * math.atan((2.0 * c - 1.0) / math.sqrt(3.0)))
        - 2.0 * math.log(c + 1.0)
    )
    return 6.0 * c / den


def dl_coverage_with_density(xi: SirThreshold | float, density: float, kappa: float,
                             spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Downlink coverage from the raw density-carrying serving-distance integral.

    p = 2*lt * int_0^inf r exp(-lt r^2 (1 + xi^(1/kappa) * tail)) dr,  lt = pi*density.

    Numerically equal to :func:`dl_coverage` for every density; that equality
    is the executable density-invariance check.
    """
    if not density > 0:
        raise ValueError(f"density must be > 0, got {density}")
    if kappa <= 1:
        raise ValueError(f"kappa must be > 1, got {kappa}")
    xi = _xi_linear(xi)
    lt = math.pi * density
    factor = 1.0 + xi ** (1.0 / kappa) * _dl_tail(xi, kappa, spec)

    def integrand(r):
        return 2.0 * lt * r * np.exp(-lt * r * r * factor)

    res = integrate_semi_infinite(
        integrand, 0.0, spec, scale=1.0 / math.sqrt(lt * factor)
    )
    return _clip01(_checked(res, "downlink serving-distance integral"))


# --------------------------------------------------------------------------
# uplink
# --------------------------------------------------------------------------

def ul_coverage_eps0(xi: SirThreshold | float, kappa: float,
                     spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Density-free uplink coverage without power control (epsilon = 0).

    p = int_0^inf exp(-z (1 + xi z^(kappa-1) K(z))) dz with
    K(z) = int_0^inf (1 - e^-u) / (xi z^kappa + u^kappa) du.
    """
    if kappa <= 1:
        raise ValueError(f"kappa must be > 1, got {kappa}")
    xi = _xi_linear(xi)
    budget = EvalBudget(_UL_EVAL_BUDGET)
    inner_spec = spec.tighter(0.1)

    def k_of(z: float) -> float:
        a = xi * z ** kappa

        def f(u):
            return -np.expm1(-u) / (a + u ** kappa)

        res = integrate_semi_infinite(
            f, 0.0, inner_spec, scale=max(a ** (1.0 / kappa), 1e-8), budget=budget
        )
        return _checked(res, "uplink eps=0 inner integral")

    def outer(zs):
        zs = np.atleast_1d(zs)
        out = np.empty_like(zs)
        for i, z in enumerate(zs):
            out[i] = 1.0 if z <= 0.0 else math.exp(
                -z * (1.0 + xi * z ** (kappa - 1.0) * k_of(z))
            )
        return out

    res = integrate_semi_infinite(outer, 0.0, spec, budget=budget)
    return _clip01(_checked(res, "uplink eps=0 outer integral"))


def ul_coverage_eps0_alpha4(xi: SirThreshold | float,
                            spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Uplink coverage for alpha = 4, epsilon = 0, via sine/cosine integrals.

    p = int_0^inf exp(-z (1 + sqrt(xi) (pi/2 - ci(w) sin w + si(w) cos w))) dz,
    w = sqrt(xi) z.  The bracket tends to 0 as w -> 0 (the integrand limit at
    z = 0 is exp(-z), so ci is never needed at 0).
    """
    xi = _xi_linear(xi)
    rx = math.sqrt(xi)

    def integrand(zs):
        zs = np.atleast_1d(zs)
        out = np.empty_like(zs)
        for i, z in enumerate(zs):
            w = rx * z
            if w <= 0.0:
                out[i] = 1.0
                continue
            bracket = (
                math.pi / 2.0
                - cosine_integral_ci(w) * math.sin(w)
                + sine_integral_si(w) * math.cos(w)
            )
            out[i] = math.exp(-z * (1.0 + rx * bracket))
        return out

    res = integrate_semi_infinite(integrand, 0.0, spec)
    return _clip01(_checked(res, "uplink alpha=4 eps=0 integral"))


def ul_coverage_eps1(xi: SirThreshold | float, kappa: float,
                     spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Density-free uplink coverage under full channel inversion (epsilon = 1).

    p = exp(-xi * int_0^inf int_0^u x^kappa e^-x / (xi x^kappa + u^kappa) dx du);
    the outer exp(-z) integral collapses to 1 in this case.
    """
    if kappa <= 1:
        raise ValueError(f"kappa must be > 1, got {kappa}")
    xi = _xi_linear(xi)
    budget = EvalBudget(_UL_EVAL_BUDGET)
    inner_spec = spec.tighter(0.1)

    def g(u: float) -> float:
        if u <= 0.0:
            return 0.0
        uk = u ** kappa

        def f(x):
            xk = x ** kappa
            return xk * np.exp(-x) / (xi * xk + uk)

        res = integrate_finite(f, 0.0, min(u, _EXP_SPAN), inner_spec, budget=budget)
        return _checked(res, "uplink eps=1 inner integral")

    def outer(us):
        us = np.atleast_1d(us)
        return np.array([g(u) for u in us])

    res = integrate_semi_infinite(outer, 0.0, spec, budget=budget)
    exponent = xi * _checked(res, "uplink eps=1 outer integral")
    return _clip01(math.exp(-exponent))


def ul_coverage(xi: SirThreshold | float, kappa: float, epsilon: float,
                spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Density-free uplink coverage for any power-control factor epsilon.

    p = int_0^inf exp(-z (1 + xi z^(kappa(1-eps)-1) J(z))) dz with the double
    integral J(z) = int_0^inf int_0^u e^-x / (xi z^(kappa(1-eps)) +
    x^(-eps*kappa) u^kappa) dx du.  The x -> 0 limit of the inner integrand is
    0 whenever eps > 0, which the rescaled form below realises without
    special-casing.  This is the most expensive evaluation in the package;
    the epsilon = 0 and epsilon = 1 routines are cheaper special cases.
    """
    if kappa <= 1:
        raise ValueError(f"kappa must be > 1, got {kappa}")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    xi = _xi_linear(xi)
    ek = epsilon * kappa
    budget = EvalBudget(_UL_EVAL_BUDGET)
    mid_spec = spec.tighter(0.2)
    inner_spec = spec.tighter(0.04)
    j_cache: dict[float, float] = {}

    def j_of(z: float) -> float:
        # the double integral depends on z only through this prefactor, which
        # is constant in z at epsilon = 1
        a = xi * z ** (kappa * (1.0 - epsilon))
        if a in j_cache:
            return j_cache[a]

        def column(u: float) -> float:
            if u <= 0.0:
                return 0.0
            uk = u ** kappa

            def f(x):
                # numerator and denominator multiplied by x^(eps*kappa)
                xe = x ** ek if ek > 0.0 else np.ones_like(x)
                return xe * np.exp(-x) / (a * xe + uk)

            res = integrate_finite(f, 0.0, min(u, _EXP_SPAN), inner_spec, budget=budget)
            return _checked(res, "uplink general inner integral")

        def mid(us):
            us = np.atleast_1d(us)
            return np.array([column(u) for u in us])

        res = integrate_semi_infinite(
            mid, 0.0, mid_spec, scale=max(a ** (1.0 / kappa), 1e-8), budget=budget
        )
        value = _checked(res, "uplink general middle integral")
        if len(j_cache) < 4096:
            j_cache[a] = value
        return value

    def outer(zs):
        zs = np.atleast_1d(zs)
        out = np.empty_like(zs)
        for i, z in enumerate(zs):
            out[i] = 1.0 if z <= 0.0 else math.exp(
                -z * (1.0 + xi * z ** (kappa * (1.0 - epsilon) - 1.0) * j_of(z))
            )
        return out

    try:
        res = integrate_semi_infinite(outer, 0.0, spec, budget=budget)
    except PerformanceBudgetError as exc:
        raise PerformanceBudgetError(
            f"{exc}; the triple-nested evaluation at kappa={kappa}, "
            f"epsilon={epsilon} needs a looser QuadratureSpec (epsilon 0 and 1 "
            "have cheap special-case routines)"
        ) from None
    return _clip01(_checked(res, "uplink general outer integral"))


def ul_coverage_with_density(xi: SirThreshold | float, density: float, kappa: float,
                             epsilon: float,
                             spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Uplink coverage from the raw density-carrying integral.

    p = 2*lt int_0^inf r e^(-lt r^2) exp(-2 lt^2 xi r^(2k(1-e)) D(r)) dr with
    D(r) = int_0^inf x int_0^{x^2} e^(-lt u) / (xi r^(2k(1-e)) +
    u^(-e*k) x^(2k)) du dx and lt = pi*density.  Equality with
    :func:`ul_coverage` for every density is the uplink density-invariance
    check.  epsilon = 0 reduces the innermost integral to an elementary
    exponential step; epsilon = 1 makes the double integral independent of r
    (it is then computed once, in swapped order for conditioning); other
    epsilon values run the full triple nest and are slow.
    """
    if not density > 0:
        raise ValueError(f"density must be > 0, got {density}")
    if kappa <= 1:
        raise ValueError(f"kappa must be > 1, got {kappa}")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    xi = _xi_linear(xi)
    lt = math.pi * density
    budget = EvalBudget(_UL_EVAL_BUDGET)
    inner_spec = spec.tighter(0.1)
    r_scale = 1.0 / math.sqrt(lt)

    if epsilon == 0.0:
        def d_of(r: float) -> float:
            rk = r ** (2.0 * kappa)

            def f(x):
                return x * (-np.expm1(-lt * x * x)) / (lt * (xi * rk + x ** (2.0 * kappa)))

            res = integrate_semi_infinite(
                f, 0.0, inner_spec,
                scale=r * xi ** (0.5 / kappa), budget=budget,
            )
            return _checked(res, "uplink with-density eps=0 inner integral")

        def outer(rs):
            rs = np.atleast_1d(rs)
            out = np.empty_like(rs)
            for i, r in enumerate(rs):
                if r <= 0.0:
                    out[i] = 0.0
                    continue
                expo = lt * r * r + 2.0 * lt * lt * xi * r ** (2.0 * kappa) * d_of(r)
                out[i] = 2.0 * lt * r * math.exp(-expo)
            return out

        res = integrate_semi_infinite(outer, 0.0, spec, scale=r_scale, budget=budget)
        return _clip01(_checked(res, "uplink with-density eps=0 outer integral"))

    if epsilon == 1.0:
        def strip(u: float) -> float:
            if u <= 0.0:
                return 0.0
            uk = u ** kappa

            def f(x):
                return x / (xi * uk + x ** (2.0 * kappa))

            res = integrate_semi_infinite(
                f, math.sqrt(u), inner_spec,
                scale=max(math.sqrt(u), (xi * uk) ** (0.5 / kappa)), budget=budget,
            )
            return uk * math.exp(-lt * u) * _checked(
                res, "uplink with-density eps=1 inner integral"
            )

        def mid(us):
            us = np.atleast_1d(us)
            return np.array([strip(u) for u in us])

        res = integrate_semi_infinite(mid, 0.0, inner_spec, scale=1.0 / lt, budget=budget)
        expo = 2.0 * lt * lt * xi * _checked(res, "uplink with-density eps=1 double integral")

        def outer(rs):
            rs = np.atleast_1d(rs)
            return 2.0 * lt * rs * np.exp(-lt * rs * rs - expo)

        res = integrate_semi_infinite(outer, 0.0, spec, scale=r_scale, budget=budget)
        return _clip01(_checked(res, "uplink with-density eps=1 outer integral"))

    # general epsilon: full triple nest with the density in every layer;
    # slow, and exempt from the evaluation ceiling (the ceiling guards the
    # density-free general form; this branch exists for completeness)
    budget = None
    ek = epsilon * kappa
    u_cap = _EXP_SPAN / lt
    inner2_spec = spec.tighter(0.02)

    def d_general(r: float) -> float:
        base = xi * r ** (2.0 * kappa * (1.0 - epsilon))

        def column(x: float) -> float:
            if x <= 0.0:
                return 0.0
            x2k = x ** (2.0 * kappa)

            def f(u):
                ue = u ** ek
                return ue * np.exp(-lt * u) / (base * ue + x2k)

            res = integrate_finite(
                f, 0.0, min(x * x, u_cap), inner2_spec, budget=budget
            )
            return x * _checked(res, "uplink with-density general inner integral")

        def mid(xs):
            xs = np.atleast_1d(xs)
            return np.array([column(x) for x in xs])

        x_scale = max(r_scale, xi ** (0.5 / kappa) * r ** (1.0 - epsilon) * lt ** (-0.5 * epsilon))
        res = integrate_semi_infinite(mid, 0.0, inner_spec, scale=x_scale, budget=budget)
        return _checked(res, "uplink with-density general middle integral")

    def outer(rs):
        rs = np.atleast_1d(rs)
        out = np.empty_like(rs)
        for i, r in enumerate(rs):
            if r <= 0.0:
                out[i] = 0.0
                continue
            expo = (
                lt * r * r
                + 2.0 * lt * lt * xi * r ** (2.0 * kappa * (1.0 - epsilon)) * d_general(r)
            )
            out[i] = 2.0 * lt * r * math.exp(-expo)
        return out

    res = integrate_semi_infinite(outer, 0.0, spec, scale=r_scale, budget=budget)
    return _clip01(_checked(res, "uplink with-density general outer integral"))


# --------------------------------------------------------------------------
# curve evaluation
# --------------------------------------------------------------------------

def coverage_curve(mode: Literal["dl", "ul"], grid: Sequence[SirThreshold],
                   kappa: float, epsilon: float | None = None,
                   spec: QuadratureSpec = DEFAULT_SPEC) -> list[CoveragePoint]:
    """Evaluate a coverage curve on an ascending threshold grid.

    Dispatches each point to the cheapest applicable formula: the alpha=4/6
    closed forms for downlink, the si/ci form for uplink with epsilon=0 and
    alpha=4, the special-case integrals for epsilon in {0, 1}, and the
    general integrals otherwise.  Output order equals grid order.
    """
    if not grid:
        raise ValueError("grid must be non-empty")
    lin = [t.xi_linear for t in grid]
    if any(b <= a for a, b in zip(lin, lin[1:])):
        raise ValueError("grid must be strictly increasing in xi")
    if mode not in ("dl", "ul"):
        raise ValueError(f"mode must be 'dl' or 'ul', got {mode!r}")
    if mode == "ul" and epsilon is None:
        raise ValueError("uplink curves require epsilon")

    points = []
    for t in grid:
        if mode == "dl":
            if kappa == 2.0:
                p, method = dl_coverage_alpha4(t), CoverageMethod.ANALYTIC_CLOSED_FORM
            elif kappa == 3.0:
                p, method = dl_coverage_alpha6(t), CoverageMethod.ANALYTIC_CLOSED_FORM
            else:
                p, method = dl_coverage(t, kappa, spec), CoverageMethod.ANALYTIC_GENERAL
        else:
            if epsilon == 0.0 and kappa == 2.0:
                p, method = ul_coverage_eps0_alpha4(t, spec), CoverageMethod.ANALYTIC_CLOSED_FORM
            elif epsilon == 0.0:
                p, method = ul_coverage_eps0(t, kappa, spec), CoverageMethod.ANALYTIC_GENERAL
            elif epsilon == 1.0:
                p, method = ul_coverage_eps1(t, kappa, spec), CoverageMethod.ANALYTIC_GENERAL
            else:
                p, method = ul_coverage(t, kappa, epsilon, spec), CoverageMethod.ANALYTIC_GENERAL
        points.append(CoveragePoint(threshold=t, probability=p, method=method))
    return points
