from fractions import Fraction
from math import log
from unittest import TestCase

from urnlab import exceptions
from urnlab._arith import EXACT
from urnlab._utils import powers_of_two
from urnlab.moments import (
    LOG_GRID,
    bounded_trend,
    degenerate_variance,
    divergent_trend,
    estimate_sigma,
    exact_covariance,
    exact_moment_series,
    exact_standardized_moments,
    gaussian_moment,
    mean_remainder,
    moment_oracle,
    projection_moments,
    variance_series,
    verify_momQ,
    verify_power_moments,
)
from urnlab.polynomials import UPolynomial
from urnlab.spectral import decompose
from urnlab.tests._fixtures import (
    CIRCULANT,
    CRITICAL,
    JORDAN,
    LARGE,
    NEGATIVE,
    STRICTLY_SMALL,
    decomposition,
)
from urnlab.urn import UrnSpec, enumerate_paths

#: a strictly small urn whose mean starts off its deterministic part
LOPSIDED = UrnSpec(R=[[2, 1], [1, 2]], X0=[2, 1], name="lopsided")

SHORT = powers_of_two(4, 13)


def u(*powers, coefficient=1):
    return UPolynomial.monomial(powers, EXACT, coefficient)


def enumerated_moments(spec, n, observable, k_max):
    """
    Raw moments of an observable over every path of the urn.
    """
    leaves = enumerate_paths(spec, n, merge=True)
    return [
        sum(p * Fraction(observable(x)) ** k for x, p in leaves)
        for k in range(k_max + 1)
    ]


class TestGaussianMoment(TestCase):
    def test_values(self):
        self.assertEqual(
            [gaussian_moment(k) for k in range(7)],
            [1, 0, 1, 0, 3, 0, 15],
        )

    def test_negative(self):
        with self.assertRaises(ValueError):
            gaussian_moment(-1)


class TestExactMomentSeries(TestCase):
    def test_principal_coordinate_grows_deterministically(self):
        series = exact_moment_series(
            u(1, 0), 10, decomposition(STRICTLY_SMALL),
        )
        self.assertEqual(series.arithmetic, "rational")
        self.assertEqual(
            list(series.values),
            [Fraction(2, 3) + n for n in range(11)],
        )

    def test_constant(self):
        dec = decomposition(JORDAN)
        one = UPolynomial.constant(1, 4, EXACT)
        series = exact_moment_series(one, 5, dec)
        self.assertEqual(set(series.values), {1})

    def test_eigen_covector(self):
        series = exact_moment_series(u(0, 1), 3, decompose(LOPSIDED))
        self.assertEqual(series.at(0), Fraction(1, 6))
        self.assertEqual(series.at(3), Fraction(70, 243))

    def test_agrees_with_enumeration(self):
        for spec, f, n_max in [
            (STRICTLY_SMALL, u(0, 2) + u(1, 1), 8),
            (CRITICAL, u(0, 3) + u(2, 0, coefficient=5), 8),
            (NEGATIVE, u(1, 2), 8),
            (JORDAN, u(0, 0, 1, 1) + u(0, 1, 0, 0), 5),
        ]:
            dec = decomposition(spec)
            with self.subTest(spec=spec.name):
                self.assertEqual(
                    exact_moment_series(f, n_max, dec).values,
                    moment_oracle(f, n_max, dec).values,
                )

    def test_float_agrees_with_rational(self):
        dec = decomposition(CRITICAL)
        f = u(0, 2) + u(1, 1)
        rational = exact_moment_series(f, 50, dec, arithmetic="rational")
        floating = exact_moment_series(f, 50, dec, arithmetic="float")
        self.assertEqual(floating.arithmetic, "float")
        for exact, approximate in zip(rational.values, floating.values):
            self.assertAlmostEqual(
                complex(approximate), float(exact), places=6,
            )

    def test_long_runs_use_floats(self):
        series = exact_moment_series(
            u(1, 0), 300, decomposition(STRICTLY_SMALL),
        )
        self.assertEqual(series.arithmetic, "float")
        self.assertAlmostEqual(series.at(300).real, 300 + 2 / 3)

    def test_rational_needs_an_exact_decomposition(self):
        with self.assertRaises(exceptions.UrnError):
            exact_moment_series(
                UPolynomial.constant(1, 3, EXACT),
                3,
                decomposition(CIRCULANT),
                arithmetic="rational",
            )

    def test_unknown_arithmetic(self):
        with self.assertRaises(ValueError):
            exact_moment_series(
                u(1, 0), 3, decomposition(CRITICAL), arithmetic="interval",
            )

    def test_budget(self):
        with self.assertRaises(exceptions.BudgetExceeded):
            exact_moment_series(
                u(0, 2), 100, decomposition(CRITICAL), budget=10,
            )


class TestTrends(TestCase):
    grid = powers_of_two()

    def test_constant(self):
        ratios = [1.0] * len(self.grid)
        self.assertTrue(bounded_trend(self.grid, ratios))
        self.assertFalse(divergent_trend(self.grid, ratios))

    def test_logarithm_doubles_over_the_long_grid(self):
        ratios = [log(n) for n in LOG_GRID]
        self.assertTrue(divergent_trend(LOG_GRID, ratios))

    def test_power_growth(self):
        ratios = [n ** 0.5 for n in self.grid]
        self.assertFalse(bounded_trend(self.grid, ratios))
        self.assertTrue(divergent_trend(self.grid, ratios))

    def test_vanishing(self):
        ratios = [0.0] * len(self.grid)
        self.assertTrue(bounded_trend(self.grid, ratios))
        self.assertFalse(divergent_trend(self.grid, ratios))


class TestGrowth(TestCase):
    def test_rising_product(self):
        report = verify_momQ((2, 0), decomposition(STRICTLY_SMALL), grid=SHORT)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.ratios[-1], 1, places=2)

    def test_critical_resonance(self):
        report = verify_momQ((0, 2), decomposition(CRITICAL), grid=SHORT)
        self.assertTrue(report.passed)

    def test_jordan_block(self):
        report = verify_momQ((0, 0, 1, 0), decomposition(JORDAN), grid=SHORT)
        self.assertTrue(report.passed, report.ratios)

    def test_power_moments_of_a_strictly_small_urn(self):
        bounds = verify_power_moments(
            decomposition(STRICTLY_SMALL), cap=4, grid=SHORT,
        )
        self.assertEqual(len(bounds), 4)
        self.assertTrue(bounds.passed)
        self.assertEqual(
            {report.name for report in bounds}, {"strictly small power"},
        )

    def test_power_moments_of_a_critical_urn(self):
        bounds = verify_power_moments(
            decomposition(CRITICAL), cap=3, grid=SHORT,
        )
        self.assertTrue(bounds.passed)
        self.assertEqual(
            [report.alpha for report in bounds], [(0, 1), (0, 2), (0, 3)],
        )

    def test_critical_second_moment_needs_its_logarithm(self):
        bounds = verify_power_moments(decomposition(CRITICAL), cap=2)
        (report,) = [each for each in bounds if each.alpha == (0, 2)]
        self.assertEqual(report.grid, LOG_GRID)
        self.assertTrue(report.passed, report.ratios)
        self.assertIs(report.diverges_without_log, True)
        self.assertTrue(bounds.log_factor_necessary)
        self.assertTrue(bounds.passed)

    def test_vanishing_critical_moments_make_no_log_claim(self):
        bounds = verify_power_moments(decomposition(CRITICAL), cap=1)
        self.assertEqual(
            [each.diverges_without_log for each in bounds], [None],
        )
        self.assertIsNone(bounds.log_factor_necessary)

    def test_an_unneeded_logarithm_fails(self):
        bounds = verify_power_moments(
            decomposition(CRITICAL), cap=2, critical_grid=SHORT,
        )
        (report,) = [each for each in bounds if each.alpha == (0, 2)]
        self.assertTrue(report.passed)
        self.assertIs(report.diverges_without_log, False)
        self.assertFalse(bounds.passed)

    def test_power_moments_of_a_large_urn(self):
        with self.assertRaises(exceptions.NotSmall):
            verify_power_moments(decomposition(LARGE))

    def test_projection_moments(self):
        for spec, part in [
            (STRICTLY_SMALL, "PI"),
            (NEGATIVE, "PI"),
            (CRITICAL, "PII"),
        ]:
            with self.subTest(spec=spec.name, part=part):
                report = projection_moments(
                    decomposition(spec), part, 2, grid=SHORT,
                )
                self.assertTrue(report.passed, report.ratios)

    def test_complex_projection_moments(self):
        report = projection_moments(decomposition(CIRCULANT), "PI", 1, SHORT)
        self.assertTrue(report.passed, report.ratios)

    def test_unknown_projection(self):
        with self.assertRaises(ValueError):
            projection_moments(decomposition(CRITICAL), "PIII", 1)

    def test_mean_remainder(self):
        report = mean_remainder(decompose(LOPSIDED))
        self.assertAlmostEqual(report.exponent, 1 / 3, places=2)
        self.assertEqual(report.sigma2, Fraction(1, 3))

    def test_mean_remainder_vanishes_from_a_balanced_start(self):
        report = mean_remainder(decomposition(STRICTLY_SMALL), grid=SHORT)
        self.assertIsNone(report.exponent)


class TestCovariance(TestCase):
    def test_exact_covariance_agrees_with_enumeration(self):
        n = 6
        leaves = enumerate_paths(STRICTLY_SMALL, n, merge=True)
        mean = [sum(p * x[i] for x, p in leaves) for i in range(2)]
        expected = [
            [
                sum(p * x[i] * x[j] for x, p in leaves) - mean[i] * mean[j]
                for j in range(2)
            ]
            for i in range(2)
        ]
        cov = exact_covariance(decomposition(STRICTLY_SMALL), n)
        self.assertEqual(cov.tolist(), expected)

    def test_variance_series(self):
        dec = decomposition(NEGATIVE)
        cov = exact_covariance(dec, 5)
        self.assertEqual(variance_series(dec, [1, 0], [5]), {5: cov[0, 0]})

    def test_total_mass_has_no_variance(self):
        dec = decomposition(CRITICAL)
        variances = degenerate_variance(dec, [1, 1], [1, 7, 20])
        self.assertEqual(set(variances.values()), {0})

    def test_estimate_sigma(self):
        estimate = estimate_sigma(decomposition(STRICTLY_SMALL))
        self.assertEqual(estimate.nu, 0)
        self.assertAlmostEqual(estimate.sigma[0, 0], 0.75, delta=0.1)
        self.assertAlmostEqual(estimate.sigma[0, 1], -0.75, delta=0.1)
        self.assertAlmostEqual(estimate.variance([1, 1]), 0, places=6)
        self.assertLess(estimate.relative_change, 0.1)

    def test_estimate_sigma_of_a_large_urn(self):
        with self.assertRaises(exceptions.NotSmall):
            estimate_sigma(decomposition(LARGE))


class TestStandardizedMoments(TestCase):
    def test_first_two_are_fixed(self):
        moments = exact_standardized_moments(
            decomposition(CRITICAL), [1, 0], 30,
        )
        self.assertEqual((moments[1], moments[2]), (0.0, 1.0))

    def test_agrees_with_enumeration(self):
        n, k_max = 8, 4
        raw = enumerated_moments(NEGATIVE, n, lambda x: x[0], k_max)
        mean = raw[1]
        central = [
            sum(p * (Fraction(x[0]) - mean) ** k
                for x, p in enumerate_paths(NEGATIVE, n, merge=True))
            for k in range(k_max + 1)
        ]
        moments = exact_standardized_moments(
            decomposition(NEGATIVE), [1, 0], n, k_max=k_max,
        )
        for k in (3, 4):
            with self.subTest(k=k):
                self.assertAlmostEqual(
                    moments[k],
                    float(central[k]) / float(central[2]) ** (k / 2),
                    places=9,
                )

    def test_symmetric_urn_has_no_skew(self):
        moments = exact_standardized_moments(
            decomposition(STRICTLY_SMALL), [1, 0], 20,
        )
        self.assertEqual(moments[3], 0)

    def test_deterministic_direction(self):
        moments = exact_standardized_moments(
            decomposition(STRICTLY_SMALL), [1, 1], 20, k_max=4,
        )
        self.assertTrue(all(value != value for value in moments.values()))
