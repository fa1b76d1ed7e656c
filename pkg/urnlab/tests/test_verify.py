from unittest import TestCase, mock, skipUnless

from urnlab import exceptions, verify
from urnlab.moments import (
    LOG_GRID,
    exact_standardized_moments,
    gaussian_moment,
)
from urnlab.montecarlo import StandardizedMoments
from urnlab.spectral import Kind
from urnlab.tests._fixtures import (
    CRITICAL,
    FULL_ACCEPTANCE,
    LARGE,
    SMALL_FIXTURES,
    STRICTLY_SMALL,
    decomposition,
)
from urnlab.verify import Check, VerifyReport, _Suite, run_acceptance

#: enough to exercise every check without a long run
QUICK = dict(degree_cap=3, n_max=2 ** 10, samples=4000, mc_n=200)


def quick_report(spec, **kwargs):
    return run_acceptance(spec, decomposition(spec), **{**QUICK, **kwargs})


class TestRunAcceptance(TestCase):
    @classmethod
    def setUpClass(cls):
        cls.report = quick_report(STRICTLY_SMALL)

    def test_passes(self):
        self.assertEqual(self.report.failures, [])
        self.assertTrue(self.report.passed)

    def test_check_order(self):
        self.assertEqual(
            [check.name for check in self.report.checks],
            [
                "classification",
                "moment oracle",
                "centering",
                "pointwise transition",
                "phi stability",
                "reduced polynomials",
                "rising products",
                "stability",
                "region stability",
                "decomposition consistency",
                "lemmas",
                "nilpotence bounds",
                "reduced growth",
                "power moments",
                "projection moments",
                "variance scaling",
                "degenerate direction",
                "mean variance agreement",
                "standardized moments",
                "cone equivalence",
            ],
        )

    def test_classification_is_informational(self):
        check = self.report.checks[0]
        self.assertTrue(check.informational)
        self.assertEqual(check.measured["class"], "StrictlySmall")
        self.assertAlmostEqual(check.measured["sigma2"], 1 / 3)
        self.assertEqual(self.report.urn_class.kind, Kind.STRICTLY_SMALL)

    def test_variance_scaling_is_informational_when_strictly_small(self):
        checks = {check.name: check for check in self.report.checks}
        self.assertTrue(checks["variance scaling"].informational)

    def test_standardized_moments_use_the_gaussian_reference(self):
        checks = {check.name: check for check in self.report.checks}
        measured = checks["standardized moments"].measured
        self.assertFalse(measured["exact_reference"])

    def test_oracle_compares_exactly(self):
        checks = {check.name: check for check in self.report.checks}
        self.assertEqual(checks["moment oracle"].measured["steps"], 10)

    def test_reproducible(self):
        again = quick_report(STRICTLY_SMALL)
        self.assertEqual(
            [check.to_json() for check in again.checks],
            [check.to_json() for check in self.report.checks],
        )


class TestCriticalChecks(TestCase):
    @classmethod
    def setUpClass(cls):
        cls.report = quick_report(CRITICAL)
        cls.checks = {check.name: check for check in cls.report.checks}

    def test_algebraic_checks_pass(self):
        for name in [
            "moment oracle",
            "centering",
            "pointwise transition",
            "phi stability",
            "reduced polynomials",
            "rising products",
            "stability",
            "lemmas",
            "nilpotence bounds",
            "degenerate direction",
        ]:
            with self.subTest(name=name):
                check = self.checks[name]
                self.assertTrue(check.passed, check.violations)
        self.assertFalse(self.checks["variance scaling"].informational)
        self.assertEqual(self.checks["classification"].measured["nu"], 1)

    def test_power_moments_need_their_logarithm(self):
        check = self.checks["power moments"]
        self.assertTrue(check.passed, check.violations)
        self.assertIs(check.measured["log_factor_necessary"], True)

    def test_variance_outgrows_n(self):
        check = self.checks["variance scaling"]
        self.assertIs(check.measured["variance_over_n_diverges"], True)
        over_n = check.measured["variance_over_n"]
        self.assertEqual(len(over_n), len(LOG_GRID))
        self.assertEqual(
            [v for v in check.violations if "over the grid" in v], [],
        )
        self.assertNotIn("Var(Y_n) / n stays bounded", check.violations)

    def test_phi_stability_is_measured(self):
        check = self.checks["phi stability"]
        self.assertGreater(check.measured["columns"], 0)
        self.assertEqual(check.violations, [])

    def test_standardized_moments_may_use_exact_values(self):
        measured = self.checks["standardized moments"].measured
        self.assertTrue(measured["exact_reference"])

    def test_large(self):
        with self.assertRaises(exceptions.NotSmall) as e:
            quick_report(LARGE)
        self.assertIn("urn is large", str(e.exception))

    @skipUnless(FULL_ACCEPTANCE, "full acceptance run")
    def test_full_acceptance(self):
        for spec in SMALL_FIXTURES:
            with self.subTest(spec=spec.name):
                report = run_acceptance(spec, decomposition(spec), n_jobs=-1)
                self.assertTrue(report.passed, report.failures)


class TestVerifyReport(TestCase):
    def test_informational_failures_do_not_count(self):
        report = VerifyReport(
            urn_class=None,
            checks=[
                Check(name="one", passed=True),
                Check(name="two", passed=False, informational=True),
            ],
        )
        self.assertTrue(report.passed)
        self.assertEqual(report.failures, [])

    def test_failures(self):
        failed = Check(name="two", passed=False, violations=["too big"])
        report = VerifyReport(
            urn_class=None,
            checks=[Check(name="one", passed=True), failed],
        )
        self.assertFalse(report.passed)
        self.assertEqual(report.failures, [failed])

    def test_to_json(self):
        check = Check(name="one", passed=True, measured={"n": 3})
        self.assertEqual(
            check.to_json(),
            {
                "name": "one",
                "passed": True,
                "informational": False,
                "measured": {"n": 3},
                "violations": [],
            },
        )


class TestStandardizedMomentReference(TestCase):
    def check_exact_finite_n_values(self, spec, n=20):
        """
        Run the check on sampled moments equal to the exact ones at ``n``.
        """
        dec = decomposition(spec)
        exact = exact_standardized_moments(dec, [1, -1], n)
        sampled = StandardizedMoments(
            w=[1, -1],
            n=n,
            samples=1,
            values=[exact[k] for k in range(1, 7)],
            stderr=[1e-6] * 6,
            reference=[gaussian_moment(k) for k in range(1, 7)],
        )
        suite = _Suite(
            spec, dec, seed=0, samples=1, mc_n=n, w=[1, -1], n_jobs=1,
            degree_cap=QUICK["degree_cap"], n_max=QUICK["n_max"],
        )
        with mock.patch.object(
            verify, "mc_standardized_moments", return_value=sampled,
        ):
            return suite.standardized_moments()

    def test_strictly_small_urns_are_held_to_the_gaussian(self):
        check = self.check_exact_finite_n_values(STRICTLY_SMALL)
        self.assertFalse(check.passed)
        self.assertFalse(check.measured["exact_reference"])
        self.assertIn("k = 4", "".join(check.violations))
