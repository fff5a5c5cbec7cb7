import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf
from scipy.integrate import quad

from umwkit.distribution import (
    ReparamParams,
    UmwParams,
    alpha_from_quantile,
    cdf,
    hazard,
    log_pdf,
    order_stat_pdf,
    pdf,
    quantile,
    reparam_cdf,
    reparam_log_pdf,
    sample,
    shape_coefficients,
)
from umwkit.errors import DomainError

from conftest import random_params

mp.dps = 50


def mp_cdf(a, g, l, y):
    a, g, l, y = (mpf(repr(v)) for v in (a, g, l, y))
    return mp.exp(-a * (-mp.log(y)) ** g * y**-l)


def mp_log_pdf(a, g, l, y):
    a, g, l, y = (mpf(repr(v)) for v in (a, g, l, y))
    ly = mp.log(y)
    return (mp.log(a) + mp.log(g - l * ly) - (l + 1) * ly
            + (g - 1) * mp.log(-ly) - a * y**-l * (-ly) ** g)


UNIFORM = UmwParams(1.0, 1.0, 0.0)


def total_probability_mass(p: UmwParams, eps: float = 1e-9) -> float:
    """Adaptive quadrature of the density plus the analytic left-tail mass.

    For gamma < 1 the density has an integrable singularity at y = 1, so the
    right side runs to the endpoint itself (interior quadrature nodes only);
    cutting at 1 - eps makes the extrapolation overshoot by the tail mass.
    """
    import warnings
    from scipy.integrate import IntegrationWarning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        if p.gamma >= 1.0:
            mass, _ = quad(lambda y: pdf(p, y), eps, 1 - eps, limit=500)
            return mass + cdf(p, eps) + (1.0 - cdf(p, 1 - eps))
        mass, _ = quad(lambda y: pdf(p, y), eps, 1.0, limit=500)
        return mass + cdf(p, eps)


class TestParams:
    def test_valid(self):
        p = UmwParams(0.5, 2.0, 0.0)
        assert p.lam == 0.0

    @pytest.mark.parametrize("bad", [(-1, 1, 0), (0, 1, 0), (1, 0, 0), (1, 1, -0.1),
                                     (math.inf, 1, 0), (1, math.nan, 0)])
    def test_rejects(self, bad):
        with pytest.raises(DomainError):
            UmwParams(*bad)

    @pytest.mark.parametrize("bad", [(0.0, 1, 0, 0.5), (1.0, 1, 0, 0.5),
                                     (0.5, 1, 0, 0.0), (0.5, 1, 0, 1.0),
                                     (0.5, -1, 0, 0.5), (0.5, 1, -1, 0.5)])
    def test_reparam_rejects(self, bad):
        with pytest.raises(DomainError):
            ReparamParams(*bad)


class TestCdf:
    def test_uniform_identity(self):
        assert cdf(UNIFORM, 0.3) == pytest.approx(0.3, abs=1e-15)
        e1 = math.exp(-1)
        assert cdf(UNIFORM, e1) == pytest.approx(e1, abs=1e-15)

    def test_high_precision_value(self):
        # independent arbitrary-precision evaluation of the closed form
        p = UmwParams(0.006, 3.213, 0.622)
        assert cdf(p, 0.09) == pytest.approx(float(mp_cdf(0.006, 3.213, 0.622, 0.09)),
                                             rel=1e-14)

    @pytest.mark.parametrize("y", [0.0, 1.0, -0.5, 1.5, math.nan])
    def test_domain(self, y):
        with pytest.raises(DomainError):
            cdf(UNIFORM, y)

    def test_monotone_grid(self, rng):
        for row in random_params(rng, 100):
            p = UmwParams(*row)
            grid = np.linspace(1e-4, 1 - 1e-4, 1000)
            f = cdf(p, grid)
            assert np.all(np.diff(f) >= 0)
            # strictly increasing wherever the value has not underflowed to 0
            inner = f > 0.0
            assert np.all(np.diff(f[inner]) > 0)
            assert f[-1] <= 1.0

    def test_limits(self):
        p = UmwParams(0.7, 1.3, 0.5)
        assert cdf(p, 1e-12) < 1e-6
        assert cdf(p, 1 - 1e-12) > 1 - 1e-6


class TestPdf:
    def test_uniform_density(self, rng):
        for y in rng.uniform(0.01, 0.99, size=10):
            assert pdf(UNIFORM, y) == pytest.approx(1.0, abs=1e-12)

    def test_integrates_to_one(self):
        assert total_probability_mass(UmwParams(0.4, 0.5, 0.3)) == pytest.approx(
            1.0, abs=1e-6)

    def test_matches_cdf_derivative(self):
        p = UmwParams(0.7, 1.3, 0.5)
        h = 1e-6
        fd = (cdf(p, 0.5 + h) - cdf(p, 0.5 - h)) / (2 * h)
        assert pdf(p, 0.5) == pytest.approx(fd, rel=1e-8)

    def test_exp_log_consistency(self):
        p = UmwParams(0.3, 0.8, 1.2)
        assert log_pdf(p, 0.6) == pytest.approx(math.log(pdf(p, 0.6)), abs=1e-12)


class TestLogPdf:
    def test_uniform_zero(self):
        assert log_pdf(UNIFORM, 0.42) == pytest.approx(0.0, abs=1e-14)

    def test_extreme_left_tail_finite(self):
        p = UmwParams(1.3, 1.1, 0.6)
        v = log_pdf(p, 1e-8)
        assert math.isfinite(v)
        assert v == pytest.approx(float(mp_log_pdf(1.3, 1.1, 0.6, 1e-8)), rel=1e-12)

    def test_high_precision_value(self):
        assert log_pdf(UmwParams(0.3, 0.8, 1.2), 0.6) == pytest.approx(
            float(mp_log_pdf(0.3, 0.8, 1.2, 0.6)), rel=1e-13)


class TestQuantile:
    def test_uniform(self):
        assert quantile(UNIFORM, 0.25) == pytest.approx(0.25, abs=1e-14)

    def test_lambda_zero_closed_form(self):
        # for lam = 0 the solution is exp(-(-log tau / alpha)^(1/gamma))
        p = UmwParams(2.0, 3.0, 0.0)
        expected = math.exp(-((math.log(2) / 2) ** (1.0 / 3.0)))
        assert quantile(p, 0.5) == pytest.approx(expected, rel=1e-14)
        # substitution back into the defining equation
        mu = quantile(p, 0.5)
        assert mu ** -0.0 * (-math.log(mu)) ** 3.0 == pytest.approx(
            -math.log(0.5) / 2.0, rel=1e-12)

    def test_roundtrip_fixed(self):
        p = UmwParams(0.5, 0.9, 0.8)
        y = quantile(p, 0.5)
        assert abs(cdf(p, y) - 0.5) < 1e-10

    def test_strictly_increasing(self, rng):
        p = UmwParams(0.7, 1.3, 0.5)
        taus = np.linspace(0.01, 0.99, 99)
        qs = quantile(p, taus)
        assert np.all(np.diff(qs) > 0)

    @pytest.mark.parametrize("tau", [0.0, 1.0, -0.1, 1.1])
    def test_domain(self, tau):
        with pytest.raises(DomainError):
            quantile(UNIFORM, tau)

    def test_roundtrip_grid_random_params(self, rng):
        taus = np.arange(1, 1000) / 1000.0
        for row in random_params(rng, 30):
            p = UmwParams(*row)
            err = np.abs(cdf(p, quantile(p, taus)) - taus)
            assert err.max() < 1e-9

    # box chosen so every quantile is representable as a double in (0, 1):
    # lam = 0 with small gamma/alpha pushes the tau -> 0 quantile below the
    # double underflow threshold exp(-745)
    @settings(max_examples=60, deadline=None)
    @given(
        alpha=st.floats(0.3, 3.0),
        gamma=st.floats(0.8, 3.0),
        lam=st.floats(0.0, 2.5),
        tau=st.floats(0.01, 0.99),
    )
    def test_roundtrip_property(self, alpha, gamma, lam, tau):
        p = UmwParams(alpha, gamma, lam)
        assert abs(cdf(p, quantile(p, tau)) - tau) < 1e-9


class TestSample:
    def test_uniform_mean(self):
        s = sample(UNIFORM, 100_000, seed=1)
        assert 0.497 <= s.mean() <= 0.503

    def test_ks_self_consistency(self):
        p = UmwParams(0.7, 1.3, 0.5)
        s = np.sort(sample(p, 100_000, seed=2))
        n = s.size
        f = cdf(p, s)
        i = np.arange(1, n + 1)
        ks = np.max(np.maximum(i / n - f, f - (i - 1) / n))
        # 1% critical value for the one-sample statistic
        assert ks < 1.63 / math.sqrt(n)

    def test_deterministic(self):
        a = sample(UmwParams(0.5, 0.9, 0.8), 1000, seed=9)
        b = sample(UmwParams(0.5, 0.9, 0.8), 1000, seed=9)
        assert np.array_equal(a, b)

    def test_open_interval(self):
        s = sample(UmwParams(0.3, 0.8, 1.2), 50_000, seed=3)
        assert np.all((s > 0) & (s < 1))

    def test_bad_n(self):
        with pytest.raises(DomainError):
            sample(UNIFORM, 0, seed=1)


class TestHazard:
    def test_uniform(self):
        assert hazard(UNIFORM, 0.5) == pytest.approx(2.0, rel=1e-12)
        assert hazard(UNIFORM, 0.9) == pytest.approx(10.0, rel=1e-12)

    def test_definition(self):
        p = UmwParams(2.0, 0.6, 0.0)
        expected = pdf(p, 0.5) / (1.0 - cdf(p, 0.5))
        assert hazard(p, 0.5) == pytest.approx(expected, rel=1e-10)

    def test_overflow(self):
        # survival underflows once the cumulative hazard is ~0 at double scale
        p = UmwParams(1.0, 30.0, 0.0)
        with pytest.raises(OverflowError):
            hazard(p, np.nextafter(1.0, 0.0))


class TestOrderStats:
    def test_max_of_three_uniforms(self):
        assert order_stat_pdf(UNIFORM, 3, 3, 0.5) == pytest.approx(0.75, rel=1e-12)

    def test_min_of_four_uniforms(self):
        assert order_stat_pdf(UNIFORM, 4, 1, 0.5) == pytest.approx(0.5, rel=1e-12)

    def test_corollary_forms(self):
        # r=1 and r=n closed forms written out directly
        p = UmwParams(0.7, 1.3, 0.5)
        n = 5
        for y in (0.2, 0.5, 0.8):
            f1 = n * pdf(p, y) * (1.0 - cdf(p, y)) ** (n - 1)
            fn = n * pdf(p, y) * cdf(p, y) ** (n - 1)
            assert order_stat_pdf(p, n, 1, y) == pytest.approx(f1, rel=1e-12)
            assert order_stat_pdf(p, n, n, y) == pytest.approx(fn, rel=1e-12)

    def test_normalizes(self):
        p = UmwParams(0.7, 1.3, 0.5)
        eps = 1e-10
        mass, _ = quad(lambda y: order_stat_pdf(p, 5, 2, y), eps, 1 - eps, limit=300)
        assert mass == pytest.approx(1.0, abs=1e-5)

    def test_r_out_of_range(self):
        with pytest.raises(DomainError):
            order_stat_pdf(UNIFORM, 3, 0, 0.5)
        with pytest.raises(DomainError):
            order_stat_pdf(UNIFORM, 3, 4, 0.5)


class TestShapeCoefficients:
    def test_uniform(self):
        sc = shape_coefficients(UNIFORM)
        assert sc.bowley_skewness == pytest.approx(0.0, abs=1e-12)
        assert sc.moors_kurtosis == pytest.approx(1.0, abs=1e-12)

    def test_matches_quantile_substitution(self):
        p = UmwParams(0.4, 1.2, 0.7)
        q = {i: quantile(p, i / 8.0) for i in range(1, 8)}
        s = (q[6] + q[2] - 2 * q[4]) / (q[6] - q[2])
        k = (q[7] + q[3] - q[5] - q[1]) / (q[6] - q[2])
        sc = shape_coefficients(p)
        assert sc.bowley_skewness == pytest.approx(s, rel=1e-12)
        assert sc.moors_kurtosis == pytest.approx(k, rel=1e-12)

    def test_bowley_bounded(self, rng):
        for row in random_params(rng, 25):
            sc = shape_coefficients(UmwParams(*row))
            assert -1.0 <= sc.bowley_skewness <= 1.0


class TestReparam:
    def test_direct_substitution(self):
        e1 = math.exp(-1)
        r = ReparamParams(mu_tau=e1, gamma=1.0, lam=0.0, tau=e1)
        assert alpha_from_quantile(r) == pytest.approx(1.0, rel=1e-14)

    def test_hand_value(self):
        r = ReparamParams(0.5, 2.0, 1.0, 0.5)
        assert alpha_from_quantile(r) == pytest.approx(0.5 / math.log(2), rel=1e-14)

    def test_quantile_roundtrip(self, rng):
        for _ in range(20):
            r = ReparamParams(
                mu_tau=float(rng.uniform(0.05, 0.95)),
                gamma=float(rng.uniform(0.4, 3)),
                lam=float(rng.uniform(0, 2.5)),
                tau=float(rng.uniform(0.05, 0.95)),
            )
            p = UmwParams(alpha_from_quantile(r), r.gamma, r.lam)
            assert quantile(p, r.tau) == pytest.approx(r.mu_tau, abs=1e-10)

    def test_cdf_at_mu_is_tau(self, rng):
        for _ in range(20):
            r = ReparamParams(
                mu_tau=float(rng.uniform(0.05, 0.95)),
                gamma=float(rng.uniform(0.4, 3)),
                lam=float(rng.uniform(0, 2.5)),
                tau=float(rng.uniform(0.05, 0.95)),
            )
            assert reparam_cdf(r, r.mu_tau) == pytest.approx(r.tau, abs=1e-12)

    def test_cdf_limit_near_one(self):
        r = ReparamParams(0.5, 1.0, 0.0, 0.5)
        assert reparam_cdf(r, 1 - 1e-12) > 1 - 1e-6

    def test_log_pdf_identity(self, rng):
        r = ReparamParams(0.7, 1.5, 0.3, 0.5)
        p = UmwParams(alpha_from_quantile(r), r.gamma, r.lam)
        for y in rng.uniform(0.02, 0.98, size=25):
            assert reparam_log_pdf(r, y) == pytest.approx(log_pdf(p, y), abs=1e-12)

    def test_log_pdf_oracle(self):
        # arbitrary-precision evaluation of the reparameterized density
        mu, g, l, tau, y = (mpf(v) for v in ("0.7", "1.5", "0.3", "0.5", "0.4"))
        num = -(mu**l * mp.log(tau) * (-mp.log(y)) ** g * (l * mp.log(y) - g))
        den = y ** (l + 1) * (-mp.log(mu)) ** g * mp.log(y)
        expo = (mu**l * mp.log(tau) * (-mp.log(y)) ** g) / (y**l * (-mp.log(mu)) ** g)
        expected = float(mp.log(num / den * mp.exp(expo)))
        r = ReparamParams(0.7, 1.5, 0.3, 0.5)
        assert reparam_log_pdf(r, 0.4) == pytest.approx(expected, rel=1e-13)

    def test_uniform_case(self):
        e1 = math.exp(-1)
        r = ReparamParams(mu_tau=e1, gamma=1.0, lam=0.0, tau=e1)  # alpha = 1
        for y in (0.2, 0.5, 0.9):
            assert reparam_log_pdf(r, y) == pytest.approx(0.0, abs=1e-12)


class TestSubmodel:
    def test_lambda_zero_density(self, rng):
        # closed form: alpha*gamma*(-log y)^(gamma-1) * y^-1 * exp(-alpha*(-log y)^gamma)
        a, g = 0.8, 1.4
        p = UmwParams(a, g, 0.0)
        for y in rng.uniform(0.02, 0.98, size=30):
            u = -math.log(y)
            closed = a * g * u ** (g - 1) / y * math.exp(-a * u**g)
            assert pdf(p, y) == pytest.approx(closed, rel=1e-12)


def test_normalization_bathtub_cases(rng):
    # gamma < 1 densities diverge at the right endpoint
    for row in random_params(rng, 8, gamma=(0.25, 0.9)):
        assert total_probability_mass(UmwParams(*row)) == pytest.approx(1.0, abs=1e-6)


def test_pdf_matches_cdf_differences(rng):
    for row in random_params(rng, 20):
        p = UmwParams(*row)
        for y in rng.uniform(0.05, 0.95, size=5):
            h = 1e-6 * y
            fd = (cdf(p, y + h) - cdf(p, y - h)) / (2 * h)
            assert pdf(p, y) == pytest.approx(fd, rel=1e-5)
