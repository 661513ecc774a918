import numpy as np
import pytest

import oracles
from homoscope.gchi2 import normal_cdf
from homoscope.stats import Alternative, student_t_cdf, welch_ttest

# mpmath, 40 digits
WELCH_12345_VS_23456_LESS = 0.17329675354366712
T_CDF_2015_DOF5 = 0.9499969138365968


class TestStudentT:
    def test_center(self):
        for dof in (0.5, 1, 3.7, 1e6):
            assert student_t_cdf(0.0, dof) == 0.5

    def test_normal_limit(self):
        assert abs(student_t_cdf(1.96, 1e6) - normal_cdf(1.96)) < 1e-4

    def test_table_value(self):
        assert student_t_cdf(2.015, 5) == pytest.approx(T_CDF_2015_DOF5, rel=1e-10)
        assert abs(student_t_cdf(2.015, 5) - 0.95) < 5e-4

    def test_against_mpmath(self, rng):
        for _ in range(200):
            t = rng.normal(0, 4)
            dof = rng.uniform(0.3, 60)
            assert student_t_cdf(t, dof) == pytest.approx(oracles.mp_student_t_cdf(t, dof),
                                                          rel=1e-10, abs=1e-300)

    def test_symmetry(self, rng):
        for _ in range(200):
            t, dof = rng.normal(0, 5), rng.uniform(0.5, 100)
            assert student_t_cdf(-t, dof) == pytest.approx(1 - student_t_cdf(t, dof), abs=1e-12)

    def test_invalid_dof(self):
        with pytest.raises(ValueError):
            student_t_cdf(1.0, 0.0)


class TestWelch:
    def test_identical_samples(self):
        a = [1.0, 2.5, 3.0, 4.2]
        r = welch_ttest(a, a, Alternative.LESS)
        assert r.t_stat == 0.0
        assert r.p_value == 0.5

    def test_reference_value(self):
        r = welch_ttest([1, 2, 3, 4, 5], [2, 3, 4, 5, 6], Alternative.LESS)
        assert r.t_stat == pytest.approx(-1.0)
        assert r.dof == pytest.approx(8.0)
        assert r.p_value == pytest.approx(WELCH_12345_VS_23456_LESS, rel=1e-10)

    def test_extreme_separation(self, rng):
        a = rng.normal(0, 1, 30)
        b = rng.normal(100, 1, 30)
        assert welch_ttest(a, b, Alternative.LESS).p_value < 1e-10

    def test_against_mpmath(self, rng):
        for _ in range(50):
            a = rng.normal(0, rng.uniform(0.5, 2), int(rng.integers(2, 30)))
            b = rng.normal(0.3, rng.uniform(0.5, 2), int(rng.integers(2, 30)))
            t, dof, p = oracles.mp_welch_less(a, b)
            r = welch_ttest(a, b, "less")
            assert r.t_stat == pytest.approx(t, rel=1e-10)
            assert r.dof == pytest.approx(dof, rel=1e-10)
            assert r.p_value == pytest.approx(p, rel=1e-8, abs=1e-14)

    def test_two_sided(self):
        r = welch_ttest([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
        assert r.p_value == pytest.approx(2 * WELCH_12345_VS_23456_LESS, rel=1e-10)

    def test_constant_samples(self):
        assert welch_ttest([1, 1], [1, 1], "less").p_value == 0.5
        # mean(a) < mean(b) with zero spread: the "less" alternative is certain
        assert welch_ttest([1, 1], [2, 2], "less").p_value == 0.0
        assert welch_ttest([3, 3], [2, 2], "less").p_value == 1.0

    def test_pooled_variant(self):
        import scipy.stats
        a, b = [1.0, 2.0, 4.0, 7.0], [2.0, 2.5, 3.0, 9.0, 11.0]
        r = welch_ttest(a, b, "two-sided", equal_var=True)
        ref = scipy.stats.ttest_ind(a, b, equal_var=True)
        assert r.p_value == pytest.approx(ref.pvalue, rel=1e-10)

    def test_too_small(self):
        with pytest.raises(ValueError):
            welch_ttest([1.0], [1.0, 2.0])

    def test_antisymmetry(self, rng):
        for _ in range(100):
            a = rng.normal(size=int(rng.integers(2, 20)))
            b = rng.normal(size=int(rng.integers(2, 20)))
            less = welch_ttest(a, b, "less")
            greater = welch_ttest(a, b, "greater")
            swapped = welch_ttest(b, a, "less")
            assert less.p_value + greater.p_value == pytest.approx(1.0, abs=1e-12)
            assert swapped.t_stat == pytest.approx(-less.t_stat, abs=1e-12)
            assert swapped.p_value == pytest.approx(greater.p_value, abs=1e-12)
