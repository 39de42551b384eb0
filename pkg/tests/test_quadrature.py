"""Adaptive quadrature: exact values, split consistency, error contracts."""

import math

import numpy as np
import pytest

from cellcov.quadrature import (
    DEFAULT_SPEC,
    EvalBudget,
    NonFiniteEvaluationError,
    PerformanceBudgetError,
    QuadratureSpec,
    SlowDecayError,
    integrate_finite,
    integrate_semi_infinite,
)


def test_constant_integrand():
    res = integrate_finite(lambda x: np.ones_like(x), 0.0, 1.0)
    assert res.converged
    assert res.value == pytest.approx(1.0, abs=1e-13)


def test_sine_over_half_period():
    res = integrate_finite(np.sin, 0.0, math.pi)
    assert res.converged
    assert res.value == pytest.approx(2.0, abs=1e-12)


def test_rational_against_arctangent():
    res = integrate_finite(lambda x: 1.0 / (1.0 + x * x), 1.0, 10.0)
    assert res.value == pytest.approx(math.atan(10.0) - math.pi / 4.0, abs=1e-12)


def test_exponential_tail_normalization():
    res = integrate_semi_infinite(lambda u: np.exp(-u), 0.0)
    assert res.converged
    assert res.value == pytest.approx(1.0, abs=1e-10)


def test_algebraic_tail_against_arctangent():
    res = integrate_semi_infinite(lambda u: 1.0 / (1.0 + u * u), 1.0)
    assert res.value == pytest.approx(math.pi / 4.0, abs=1e-10)


def test_cubic_tail_against_closed_form():
    # int_1^inf du/(1+u^3) has the closed form (2*pi/sqrt(3) - 2*ln 2)/6
    expected = (2.0 * math.pi / math.sqrt(3.0) - 2.0 * math.log(2.0)) / 6.0
    res = integrate_semi_infinite(lambda u: 1.0 / (1.0 + u ** 3), 1.0)
    assert res.value == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("kappa", [1.5, 2.0, 3.0])
def test_slow_algebraic_tails_accurate(kappa):
    from scipy.integrate import quad

    ref = quad(lambda u: 1.0 / (1.0 + u ** kappa), 1.0, np.inf, limit=500)[0]
    res = integrate_semi_infinite(lambda u: 1.0 / (1.0 + u ** kappa), 1.0)
    assert res.converged
    assert res.value == pytest.approx(ref, abs=5e-10)


@pytest.mark.parametrize("split", [2.0, 7.5])
def test_semi_infinite_splits_consistently(split):
    f = lambda u: np.exp(-0.3 * u) / (1.0 + u * u)
    whole = integrate_semi_infinite(f, 0.5)
    head = integrate_finite(f, 0.5, split)
    tail = integrate_semi_infinite(f, split)
    assert whole.value == pytest.approx(
        head.value + tail.value,
        abs=4 * (whole.error_estimate + head.error_estimate + tail.error_estimate) + 1e-12,
    )


def test_halving_rel_tol_stays_within_error_estimate():
    f = lambda u: np.exp(-u) * np.sin(3.0 * u) ** 2
    for rel in (1e-6, 1e-8, 1e-10):
        coarse = integrate_semi_infinite(f, 0.0, QuadratureSpec(rel_tol=rel, abs_tol=1e-14, tail_cutoff=rel * 0.1))
        fine = integrate_semi_infinite(f, 0.0, QuadratureSpec(rel_tol=rel / 2, abs_tol=1e-14, tail_cutoff=rel * 0.05))
        assert abs(coarse.value - fine.value) <= coarse.error_estimate + 1e-14


def test_converged_flag_honours_error_bound():
    for f, a, b in [(np.cos, 0.0, 2.0), (lambda x: x ** 0.5, 0.0, 4.0)]:
        res = integrate_finite(f, a, b)
        if res.converged:
            assert res.error_estimate <= max(
                DEFAULT_SPEC.abs_tol, DEFAULT_SPEC.rel_tol * abs(res.value)
            )


def test_non_finite_integrand_raises():
    with pytest.raises(NonFiniteEvaluationError):
        integrate_finite(lambda x: 1.0 / (x - 0.5), 0.0, 1.0)


def test_subdivision_exhaustion_flags_not_converged():
    # needle far too sharp for a single allowed panel
    f = lambda x: np.exp(-((x - 0.3) / 1e-5) ** 2)
    res = integrate_finite(f, 0.0, 1.0, QuadratureSpec(max_subdivisions=2))
    assert not res.converged


def test_slow_decay_detected():
    with pytest.raises(SlowDecayError):
        integrate_semi_infinite(lambda u: 1.0 / (1.0 + u), 0.0)


def test_divergent_growth_detected():
    with pytest.raises(SlowDecayError):
        integrate_semi_infinite(lambda u: u / (1.0 + u), 1.0)


def test_eval_budget_enforced():
    budget = EvalBudget(40)
    with pytest.raises(PerformanceBudgetError):
        integrate_finite(lambda x: np.sin(50.0 * x) ** 2, 0.0, 20.0,
                         budget=budget)


def test_scalar_integrands_get_wrapped():
    res = integrate_finite(lambda x: math.exp(-x), 0.0, 1.0)
    assert res.value == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)


def test_empty_interval_is_zero():
    res = integrate_finite(np.sin, 1.0, 1.0)
    assert res.value == 0.0 and res.converged


def test_reversed_interval_rejected():
    with pytest.raises(ValueError):
        integrate_finite(np.sin, 1.0, 0.0)


@pytest.mark.parametrize("bad", [
    dict(rel_tol=0.0),
    dict(abs_tol=-1.0),
    dict(max_subdivisions=0),
    dict(tail_cutoff=0.0),
    dict(rel_tol=1e-9, tail_cutoff=1e-8),  # cutoff must not exceed rel_tol
])
def test_spec_invariants_rejected(bad):
    with pytest.raises(ValueError):
        QuadratureSpec(**bad)


def test_zero_integrand_converges_to_zero():
    res = integrate_semi_infinite(lambda u: np.zeros_like(u), 0.0)
    assert res.value == 0.0
