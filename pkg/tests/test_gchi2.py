import math

import numpy as np
import pytest

import oracles
from homoscope.errors import AccuracyError
from homoscope.gchi2 import (
    GChi2Spec,
    chi2_cdf,
    gchi2_cdf,
    noncentral_chi2_cdf,
    normal_cdf,
    quadratic_form_cdf,
)

# mpmath ncdf(1.96)
PHI_196 = 0.9750021048517795


class TestNormal:
    def test_values(self):
        assert normal_cdf(0.0) == 0.5
        assert normal_cdf(40.0) == 1.0
        assert normal_cdf(1.96) == pytest.approx(PHI_196, abs=1e-15)

    def test_relative_accuracy(self):
        import mpmath
        for z in np.linspace(-8, 8, 33):
            ref = float(mpmath.ncdf(z))
            assert normal_cdf(z) == pytest.approx(ref, rel=1e-12)


class TestNoncentral:
    def test_central_case(self):
        assert noncentral_chi2_cdf(2, 0.0, 2.0) == pytest.approx(1 - math.exp(-1), abs=1e-12)
        assert chi2_cdf(2, math.log(4)) == pytest.approx(0.5, abs=1e-12)

    def test_nonpositive_support(self):
        for x in (0.0, -1.0, -100.0):
            assert noncentral_chi2_cdf(3, 2.0, x) == 0.0

    def test_scipy_reference(self):
        from scipy.stats import ncx2
        for k, lam, x in [(1, 0.3, 0.5), (3, 2.5, 4.0), (7, 40.0, 30.0), (2, 900.0, 950.0),
                          (4, 1e4, 1e4 - 150), (3, 5e5, 5e5 + 400)]:
            assert noncentral_chi2_cdf(k, lam, x) == pytest.approx(ncx2.cdf(x, k, lam), abs=1e-9)

    def test_monte_carlo(self):
        rng = np.random.default_rng(5)
        n = 10 ** 7
        draws = oracles.sample_gchi2(rng, [(1.0, 3, 2.5)], 0.0, 0.0, 0.0, n)
        p = float(np.mean(draws <= 4.0))
        se = math.sqrt(p * (1 - p) / n)
        assert abs(noncentral_chi2_cdf(3, 2.5, 4.0) - p) <= 3 * se

    def test_large_lambda_route(self):
        from scipy.stats import ncx2
        lam = 4e6
        for dx in (-3000.0, 0.0, 2500.0):
            x = lam + 3 + dx
            assert noncentral_chi2_cdf(3, lam, x) == pytest.approx(ncx2.cdf(x, 3, lam), abs=1e-6)

    def test_monotone(self):
        xs = np.linspace(0, 40, 200)
        vals = [noncentral_chi2_cdf(4, 6.0, x) for x in xs]
        assert np.all(np.diff(vals) >= 0)
        assert vals[-1] > 0.999


class TestGeneralized:
    def test_single_term_dispatch(self):
        spec = GChi2Spec([(1.0, 2, 0.0)])
        assert gchi2_cdf(spec, math.log(4)) == pytest.approx(0.5, abs=1e-6)
        spec = GChi2Spec([(2.5, 3, 1.2)])
        for x in (0.5, 3.0, 12.0):
            assert gchi2_cdf(spec, x) == noncentral_chi2_cdf(3, 1.2, x / 2.5)

    def test_offset_support(self):
        spec = GChi2Spec([(1.0, 2, 0.0)], offset=5.0)
        assert gchi2_cdf(spec, 5.0) == pytest.approx(0.0, abs=1e-9)

    def test_pure_gaussian(self):
        spec = GChi2Spec([], mean=1.0, stdev=2.0)
        assert gchi2_cdf(spec, 3.0) == normal_cdf(1.0)

    def test_mixed_sign_monte_carlo(self):
        spec = GChi2Spec([(0.5, 2, 1.3), (-0.25, 2, 0.7)])
        rng = np.random.default_rng(11)
        n = 10 ** 7
        draws = oracles.sample_gchi2(rng, spec.terms, 0.0, 0.0, 0.0, n)
        p = float(np.mean(draws <= 0.0))
        se = math.sqrt(p * (1 - p) / n)
        assert abs(gchi2_cdf(spec, 0.0) - p) <= 3 * se

    def test_inversion_matches_series(self):
        # force the numerical inversion on a single-term spec by adding a tiny Gaussian
        from scipy.stats import ncx2
        spec = GChi2Spec([(1.0, 3, 2.5)], stdev=1e-9)
        for x in (0.5, 3.0, 10.0):
            assert gchi2_cdf(spec, x) == pytest.approx(ncx2.cdf(x, 3, 2.5), abs=1e-6)

    def test_negation_symmetry(self):
        spec = GChi2Spec([(0.7, 1, 0.4), (-1.1, 3, 2.0)], mean=0.2, stdev=0.5, offset=0.3)
        neg = spec.negated()
        for x in (-3.0, -0.5, 0.4, 2.0):
            assert gchi2_cdf(neg, -x) == pytest.approx(1 - gchi2_cdf(spec, x), abs=2e-6)

    def test_monotone_and_bounded(self):
        spec = GChi2Spec([(1.0, 2, 0.5), (-0.6, 1, 1.5)], stdev=0.3)
        xs = np.linspace(-15, 25, 60)
        vals = np.array([gchi2_cdf(spec, x) for x in xs])
        assert np.all(vals >= 0) and np.all(vals <= 1)
        assert np.all(np.diff(vals) >= -2e-6)
        assert vals[0] < 1e-3 and vals[-1] > 1 - 1e-3

    def test_invalid_specs(self):
        with pytest.raises(ValueError):
            GChi2Spec([(0.0, 1, 0.0)])
        with pytest.raises(ValueError):
            GChi2Spec([(1.0, 0, 0.0)])
        with pytest.raises(ValueError):
            GChi2Spec([(1.0, 1, -1.0)])
        with pytest.raises(ValueError):
            GChi2Spec([])

    def test_accuracy_error_reports_bound(self):
        spec = GChi2Spec([(1.0, 1, 0.0), (-1.0, 1, 0.0)])
        with pytest.raises(AccuracyError) as info:
            gchi2_cdf(spec, 0.3, tol=1e-30)
        assert info.value.requested == 1e-30
        assert info.value.achieved > 1e-30


class TestQuadraticForm:
    def test_matches_monte_carlo(self):
        rng = np.random.default_rng(3)
        a, b, c = 0.3, np.array([0.5, -1.0]), 0.2
        mean, var = np.array([0.1, 0.4]), 1.7
        x = mean + math.sqrt(var) * rng.standard_normal((10 ** 6, 2))
        q = a * np.sum(x * x, axis=1) + x @ b + c
        p = float(np.mean(q <= 0.0))
        se = math.sqrt(p * (1 - p) / len(q))
        assert abs(quadratic_form_cdf(a, b, c, mean, var) - p) <= 4 * se

    def test_small_a_is_continuous_with_gaussian_limit(self):
        b, c = np.array([1.0, -0.5]), 0.3
        mean, var = np.array([0.2, 0.1]), 0.8
        limit = quadratic_form_cdf(0.0, b, c, mean, var)
        for a in (1e-5, 1e-7, 1e-9, -1e-9):
            assert quadratic_form_cdf(a, b, c, mean, var) == pytest.approx(limit, abs=1e-4)

    def test_small_gaussian_part_in_oscillatory_tail(self):
        # a small Gaussian part leaves the truncation point beyond the tail
        # split, where exp(s^2 u^2 / 8) alone would overflow
        spec = GChi2Spec([(1.2523680533120682, 1, 0.0)], mean=0.559, stdev=0.0692,
                         offset=0.0011)
        rng = np.random.default_rng(17)
        n = 4 * 10 ** 6
        draws = oracles.sample_gchi2(rng, spec.terms, spec.mean, spec.stdev, spec.offset, n)
        p = float(np.mean(draws <= 0.577))
        se = math.sqrt(p * (1 - p) / n)
        assert abs(gchi2_cdf(spec, 0.577) - p) <= 4 * se
