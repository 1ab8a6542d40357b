import math

import numpy as np
import pytest

from fractalcalc import (
    KOCH_DIMENSION,
    DistributionOnCurve,
    build_koch,
    build_line,
    build_polyline,
    build_staircase,
    falpha_derivative,
    falpha_integral,
    ks_distance,
    sampling_cdf,
)
from fractalcalc.errors import CurveDomainError
from fractalcalc.special import lanczos_gamma


@pytest.fixture(scope="module")
def koch_table():
    return build_staircase(build_koch(6))


@pytest.fixture(scope="module")
def long_line_table():
    # mass range [0, 25]: exponential truncation below 2e-11
    return build_staircase(build_line(0, 25), grid_size=4096)


@pytest.fixture(scope="module")
def unit_line_table():
    return build_staircase(build_line(0, 1))


class TestUniform:
    def test_pdf_is_gamma_constant_on_koch(self, koch_table):
        # unit-base Koch at its own order has total mass 1/Gamma(alpha+1),
        # so the normalized density equals the constant Gamma(alpha+1)
        dist = DistributionOnCurve.uniform(koch_table)
        rng = np.random.default_rng(5)
        vals = np.array(
            [dist.pdf(koch_table.curve.point(t)) for t in rng.uniform(0.02, 0.98, 100)]
        )
        assert np.ptp(vals) / vals.mean() < 1e-12
        assert vals[0] == pytest.approx(lanczos_gamma(KOCH_DIMENSION + 1.0), rel=1e-9)

    def test_cdf_reaches_one_at_curve_end(self, koch_table):
        dist = DistributionOnCurve.uniform(koch_table)
        assert dist.cdf(koch_table.curve.point(1.0)) == pytest.approx(1.0, abs=1e-9)

    def test_cdf_is_normalized_chart(self, koch_table):
        dist = DistributionOnCurve.uniform(koch_table)
        theta = koch_table.curve.point(0.25)
        expected = koch_table.j_of_theta(theta) / koch_table.s[-1]
        assert dist.cdf(theta) == pytest.approx(expected, rel=1e-12)


class TestMemoryless:
    def test_cdf_edges(self, long_line_table):
        dist = DistributionOnCurve.memoryless(long_line_table, 1.0)
        assert dist.cdf_at_j(0.0) == 0.0
        assert dist.cdf_at_j(1.0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-12)
        assert float(dist.cdf_at_j(dist.support[1])) == pytest.approx(1.0, abs=1e-9)

    def test_pdf_at_origin_is_rate(self, long_line_table):
        dist = DistributionOnCurve.memoryless(long_line_table, 2.0)
        assert dist.pdf_at_j(0.0) == pytest.approx(2.0, rel=1e-12)

    def test_truncation_reported_on_short_curve(self, koch_table):
        dist = DistributionOnCurve.memoryless(koch_table, 1.0)
        expected = math.exp(-koch_table.s[-1])
        assert dist.truncated_mass == pytest.approx(expected, rel=1e-9)

    def test_memoryless_property_in_chart(self, long_line_table):
        dist = DistributionOnCurve.memoryless(long_line_table, 1.3)

        def tail(j):
            return 1.0 - float(dist.cdf_at_j(j))

        for s, t in [(0.3, 0.9), (1.1, 0.4), (2.0, 2.5)]:
            assert tail(s + t) / tail(s) == pytest.approx(tail(t), abs=1e-9)

    def test_pdf_cdf_consistency_via_derivative(self, unit_line_table):
        # definition-level oracle: the chart derivative of the cdf is the pdf
        dist = DistributionOnCurve.memoryless(unit_line_table, 1.0)
        for t in np.linspace(0.05, 0.95, 20):
            theta = np.array([t])
            num = falpha_derivative(dist.cdf, unit_line_table, theta, h=1e-4)
            assert num == pytest.approx(dist.pdf(theta), abs=1e-3)

    def test_rejects_bad_rate(self, unit_line_table):
        with pytest.raises(CurveDomainError):
            DistributionOnCurve.memoryless(unit_line_table, 0.0)


class TestNormalization:
    @pytest.mark.parametrize("family", ["uniform", "memoryless", "custom"])
    def test_pdf_integrates_to_one(self, family, koch_table, long_line_table):
        if family == "uniform":
            dist, table = DistributionOnCurve.uniform(koch_table), koch_table
        elif family == "memoryless":
            dist, table = (
                DistributionOnCurve.memoryless(long_line_table, 1.0),
                long_line_table,
            )
        else:
            dist = DistributionOnCurve.custom(
                long_line_table, lambda j: math.exp(-((j - 5.0) ** 2))
            )
            table = long_line_table

        lo, hi = dist.support
        ta, tb = table.t_from_mass(lo), table.t_from_mass(hi)

        def integrand(pts):
            return dist.pdf_at_j(table.j_of_many(np.atleast_2d(pts)))

        total = falpha_integral(integrand, table, ta, tb, k=512)
        assert total == pytest.approx(1.0, abs=1e-6)


class TestSampling:
    def test_same_seed_reproduces(self, koch_table):
        dist = DistributionOnCurve.uniform(koch_table)
        one = dist.sample(123, 500)
        two = dist.sample(123, 500)
        assert np.array_equal(one.points, two.points)
        three = dist.sample(124, 500)
        assert not np.array_equal(one.points, three.points)

    def test_all_samples_on_curve(self, koch_table):
        dist = DistributionOnCurve.uniform(koch_table)
        sample = dist.sample(9, 200)
        recovered = koch_table.j_of_many(sample.points)
        np.testing.assert_allclose(recovered, sample.j, atol=1e-9)

    def test_uniform_ks_band(self, koch_table):
        dist = DistributionOnCurve.uniform(koch_table)
        sample = dist.sample(2024, 10 ** 5)
        assert ks_distance(sample.j, sampling_cdf(dist)) < 0.01

    def test_memoryless_ks_band(self, long_line_table):
        dist = DistributionOnCurve.memoryless(long_line_table, 1.0)
        sample = dist.sample(77, 10 ** 5)
        band = 1.36 / math.sqrt(10 ** 5)
        assert ks_distance(sample.j, sampling_cdf(dist)) < band

    def test_memoryless_mean_matches_rate(self, long_line_table):
        dist = DistributionOnCurve.memoryless(long_line_table, 1.0)
        sample = dist.sample(31, 10 ** 5)
        assert abs(sample.j.mean() - 1.0) < 3.0 / math.sqrt(10 ** 5)

    def test_count_floor(self, koch_table):
        with pytest.raises(CurveDomainError):
            DistributionOnCurve.uniform(koch_table).sample(0, 0)

    def test_plateau_draws_snap_right_and_count(self):
        # a microscopic edge underflows to a flat staircase cell at alpha=2
        curve = build_polyline(
            [0.0, 0.25, 0.5, 0.75, 1.0],
            [[0.0, 0.0], [0.25, 0.0], [0.25, 1e-200], [0.75, 0.0], [1.0, 0.0]],
            2.0,
        )
        table = build_staircase(curve, alpha=2.0, grid_size=4)
        assert table.plateau_cells >= 1
        flat = np.flatnonzero(np.diff(table.s) == 0.0)[0]
        t = table.t_from_mass(float(table.s[flat]))
        assert t == pytest.approx(float(table.t[flat + 1]))
        assert table.plateau_hits >= 1


class TestMoments:
    def test_uniform_line_mean(self, unit_line_table):
        dist = DistributionOnCurve.uniform(unit_line_table)
        np.testing.assert_allclose(dist.mean(), [0.5], atol=1e-9)

    def test_uniform_line_second_moment(self, unit_line_table):
        dist = DistributionOnCurve.uniform(unit_line_table)
        np.testing.assert_allclose(dist.moment(2), [1.0 / 3.0], atol=1e-9)

    def test_uniform_line_variance(self, unit_line_table):
        dist = DistributionOnCurve.uniform(unit_line_table)
        np.testing.assert_allclose(dist.variance(), [1.0 / 12.0], atol=1e-9)

    def test_variance_identity(self, koch_table):
        dist = DistributionOnCurve.uniform(koch_table)
        direct = dist.variance()
        algebraic = dist.moment(2) - dist.mean() ** 2
        np.testing.assert_allclose(direct, algebraic, atol=1e-6)

    def test_mean_against_monte_carlo(self, koch_table):
        # panels aligned with the table grid keep the quadrature exact on
        # the oscillatory coordinate functions
        dist = DistributionOnCurve.uniform(koch_table)
        sample = dist.sample(100, 10 ** 6)
        mu = dist.mean(k=4096)
        se = sample.points.std(axis=0, ddof=1) / math.sqrt(len(sample.t))
        assert np.all(np.abs(sample.points.mean(axis=0) - mu) <= 3.0 * se)

    def test_point_mass_limit(self, unit_line_table):
        # tightening the bump shrinks the variance toward zero
        sizes = []
        for width in (0.2, 0.05, 0.01):
            dist = DistributionOnCurve.custom(
                unit_line_table,
                lambda j, w=width: math.exp(-(((j - 0.5) / w) ** 2)),
                grid=4096,
            )
            sizes.append(float(dist.variance(k=1024)[0]))
        assert sizes[0] > sizes[1] > sizes[2]
        assert sizes[2] < 1e-3

    def test_moment_order_floor(self, unit_line_table):
        with pytest.raises(CurveDomainError):
            DistributionOnCurve.uniform(unit_line_table).moment(0)

    def test_moment_of_j_option(self, unit_line_table):
        dist = DistributionOnCurve.uniform(unit_line_table)
        assert dist.moment_of_j(1) == pytest.approx(0.5, abs=1e-9)
