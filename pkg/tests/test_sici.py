"""Sine/cosine integrals against independent series and quadrature oracles."""

import math

import numpy as np
import pytest

from cellcov.sici import (
    CROSSOVER,
    _continued_fraction,
    _series,
    beta_half_half,
    beta_reciprocal_pair,
    cosine_integral_ci,
    sine_integral_si,
)

from _oracles import ci_oracle, ci_series, ci_zero_panels, si_oracle, si_series


def test_si_at_zero_is_exactly_minus_half_pi():
    assert sine_integral_si(0.0) == -math.pi / 2


def test_si_vanishes_at_infinity():
    assert abs(sine_integral_si(1e5)) < 1e-4
    assert abs(sine_integral_si(1e7)) < 1e-6


def test_si_at_one_against_series_oracle():
    assert sine_integral_si(1.0) == pytest.approx(si_series(1.0, terms=25), abs=1e-14)


def test_ci_small_argument_against_series_oracle():
    v = cosine_integral_ci(0.25)
    assert v == pytest.approx(ci_series(0.25, terms=12), abs=1e-12)
    assert v == pytest.approx(-0.8247, abs=1e-4)


def test_ci_at_two_against_quadrature_oracle():
    assert cosine_integral_ci(2.0) == pytest.approx(ci_zero_panels(2.0), abs=1e-12)


def test_ci_vanishes_at_infinity():
    assert abs(cosine_integral_ci(1e5)) < 1e-4
    assert abs(cosine_integral_ci(1e7)) < 1e-6


def test_branches_agree_at_crossover():
    s_series, c_series = _series(CROSSOVER)
    s_cf, c_cf = _continued_fraction(CROSSOVER)
    assert abs(s_series - s_cf) < 1e-12
    assert abs(c_series - c_cf) < 1e-12


def test_si_monotone_on_first_arch():
    # d si/dx = sin(x)/x > 0 on (0, pi)
    xs = np.linspace(0.0, math.pi, 200)
    vals = [sine_integral_si(float(x)) for x in xs]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("x", np.logspace(-3, math.log10(50.0), 20))
def test_against_oracles_across_range(x):
    x = float(x)
    assert sine_integral_si(x) == pytest.approx(si_oracle(x), abs=1e-10)
    assert cosine_integral_ci(x) == pytest.approx(ci_oracle(x), abs=1e-10)


def test_domain_errors():
    with pytest.raises(ValueError):
        sine_integral_si(-0.1)
    with pytest.raises(ValueError):
        cosine_integral_ci(0.0)
    with pytest.raises(ValueError):
        cosine_integral_ci(-2.0)


def test_beta_half_half_is_pi():
    assert beta_half_half() == math.pi


def test_beta_reflection_consistency_at_two():
    assert beta_reciprocal_pair(2.0) == pytest.approx(math.pi, abs=1e-15)


def test_beta_at_three_against_brute_force():
    from scipy.integrate import quad

    brute = quad(lambda t: t ** (-1.0 / 3.0) * (1.0 - t) ** (-2.0 / 3.0),
                 0.0, 1.0, limit=200)[0]
    v = beta_reciprocal_pair(3.0)
    assert v == pytest.approx(2.0 * math.pi / math.sqrt(3.0), abs=1e-12)
    assert v == pytest.approx(brute, abs=1e-6)


def test_beta_domain():
    with pytest.raises(ValueError):
        beta_reciprocal_pair(1.0)
