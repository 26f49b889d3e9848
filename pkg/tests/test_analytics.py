import csv
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate
from scipy import stats as sps

from genea_sel.analytics import (TAU_COEFFS, EquilibriumSpec, ExpansionValidityWarning,
                                 UnsupportedParameterError, equilibrium_density, equilibrium_moments,
                                 equilibrium_sampler, expansion_is_valid, laplace_expansion,
                                 moments_closed_form, moments_quadrature, neutral_cdf, small_alpha_cdf,
                                 small_alpha_density, tau, tau_at_zero_exact, tau_prime,
                                 upper_bound_curve, write_curves_csv)


def test_neutral_law():
    assert neutral_cdf(0.0) == 0.0
    assert neutral_cdf(math.log(2)) == pytest.approx(0.5, abs=1e-15)
    assert neutral_cdf(3.0, t=3.0) == 1.0
    assert neutral_cdf(4.0, t=3.0) == 1.0
    with pytest.raises(ValueError):
        neutral_cdf(-0.1)


def test_tau_vanishes_at_zero_exactly():
    assert tau_at_zero_exact() == 0
    assert isinstance(tau_at_zero_exact(), Fraction)


def test_tau_value_and_tail():
    # frozen value, recomputed here term by term from the rational coefficients
    c = {k: Fraction(v) for k, v in TAU_COEFFS.items()}
    e1 = math.exp(-1)
    direct = float(c["exp8"]) * math.exp(-8) + float(c["h_exp1"]) * e1 + float(c["exp3"]) * math.exp(-3) \
        + float(c["exp1"]) * e1
    assert tau(1.0) == pytest.approx(direct, rel=1e-14)
    assert tau(1.0) == pytest.approx(0.003957554601632577, rel=1e-12)
    assert abs(tau(60.0)) < 1e-20


def test_tau_prime_is_the_derivative():
    h = np.linspace(0.01, 12, 800)
    eps = 1e-5
    fd = (tau(h + eps) - tau(h - eps)) / (2 * eps)
    assert np.max(np.abs(fd - tau_prime(h))) < 1e-10


def test_small_alpha_expansion_reduces_to_neutral():
    h = np.linspace(0, 5, 11)
    assert np.array_equal(small_alpha_cdf(h, 0.0), neutral_cdf(h))


def test_expansion_warns_outside_validity():
    assert expansion_is_valid(0.5) and not expansion_is_valid(0.6)
    with pytest.warns(ExpansionValidityWarning):
        small_alpha_cdf(1.0, 2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        small_alpha_cdf(1.0, 0.3)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5])
def test_density_is_central_difference_of_cdf(alpha):
    h = np.linspace(0.01, 10, 2000)
    eps = 1e-5
    fd = (small_alpha_cdf(h + eps, alpha) - small_alpha_cdf(h - eps, alpha)) / (2 * eps)
    assert np.max(np.abs(fd - small_alpha_density(h, alpha))) <= 1e-10


def test_laplace_expansion_trivial_values():
    assert laplace_expansion(0.0, 0.7) == 1.0
    assert laplace_expansion(0.5, 0.0) == 0.5
    with pytest.raises(ValueError):
        laplace_expansion(-1.0, 0.1)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_laplace_transform_of_density_matches_expansion(lam):
    alpha = 0.1
    val = integrate.quad(lambda h: math.exp(-2 * lam * h) * small_alpha_density(h, alpha), 0, math.inf,
                         epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    assert abs(val - laplace_expansion(lam, alpha)) <= 1e-8


def test_upper_curve():
    assert upper_bound_curve(0.0, 3.0, 0.5) == 0.0
    h = np.linspace(0, 5, 21)
    assert np.allclose(upper_bound_curve(h, 1e9, 0.5), neutral_cdf(h), atol=1e-8)
    assert np.all(upper_bound_curve(h, 0.5, 0.5) <= 1.0)
    assert upper_bound_curve(0.5, 8.0, 0.5) == pytest.approx((1 - math.exp(-0.5)) * 1.5)
    assert upper_bound_curve(1.0, 4.0, 0.5) == 1.0
    with pytest.raises(ValueError):
        upper_bound_curve(1.0, 0.0, 0.5)


def test_stationary_law_needs_positive_mutation():
    with pytest.raises(UnsupportedParameterError):
        EquilibriumSpec(1.0, 0.0, 0.5)


def test_stationary_density_without_selection_is_beta():
    x = np.linspace(0.02, 0.98, 25)
    assert np.allclose(equilibrium_density(x, EquilibriumSpec(0.0)), 1.0)
    spec = EquilibriumSpec(0.0, 0.7, 1.3)
    assert np.allclose(equilibrium_density(x, spec), sps.beta(1.4, 2.6).pdf(x), rtol=1e-9)


def test_stationary_density_integrates_to_one():
    spec = EquilibriumSpec(3.0, 0.3, 0.8)
    total = integrate.quad(lambda v: equilibrium_density(v, spec), 0, 1, limit=200)[0]
    assert total == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 5.0])
def test_closed_form_moments_match_quadrature(alpha):
    m1, m2 = moments_closed_form(alpha)
    q1, q2 = moments_quadrature(alpha, 0.5, 0.5)
    assert abs(m1 - q1) <= 1e-9 and abs(m2 - q2) <= 1e-9


def test_moments_frozen_values():
    m = equilibrium_moments(1.0)
    assert m.method == "closed"
    assert m.m1 == pytest.approx(0.3434823572503344, rel=1e-13)
    assert m.m2 == pytest.approx(0.1869647145006687, rel=1e-13)
    assert moments_closed_form(0.0) == (0.5, 1 / 3)
    assert equilibrium_moments(1.0, 0.3, 0.6).method == "quadrature"


def test_moments_large_selection_limits():
    m = equilibrium_moments(50.0)
    assert abs(50 * m.m1 - 0.5) <= 0.01
    assert abs(2500 * m.m2 - 0.5) <= 0.025
    assert m.alpha_m1_limit == 0.5 and m.alpha2_m2_limit == 0.5


@pytest.mark.parametrize("alpha", [1.0, 50.0])
def test_sampler_moments(alpha):
    spec = EquilibriumSpec(alpha)
    draws = 1 - equilibrium_sampler(spec).sample(np.random.default_rng(11), 100_000)
    m = equilibrium_moments(alpha)
    for k, target in ((1, m.m1), (2, m.m2)):
        v = draws ** k
        assert abs(v.mean() - target) <= 3 * v.std(ddof=1) / math.sqrt(v.size)


def test_sampler_cdf_is_a_distribution():
    s = equilibrium_sampler(EquilibriumSpec(5.0, 0.2, 0.4))
    assert s.cdf[0] == 0 and s.cdf[-1] == 1 and np.all(np.diff(s.cdf) >= 0)
    draws = s.sample(np.random.default_rng(0), 1000)
    assert np.all((draws >= 0) & (draws <= 1))


def test_curves_csv(tmp_path):
    p = tmp_path / "c.csv"
    write_curves_csv(p, np.linspace(0, 3, 7), 0.0)
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["h", "neutral", "small_alpha", "upper_bound"]
    assert len(rows) == 8 and rows[1][3] == ""
