"""
The acceptance suite run by ``urnlab verify``.

Each check measures something about one urn and reports whether it passed,
together with the measured quantities. Checks marked informational are
reported but never fail the suite.
"""
from __future__ import annotations

from fractions import Fraction
from math import log
from typing import TYPE_CHECKING, Any
import logging

from attrs import field, frozen
import numpy as np

from urnlab._utils import format_multi_index, log_factor, powers_of_two
from urnlab.cone import ConeSigma
from urnlab.exceptions import (
    DegenerateDirection,
    NotSmall,
    StabilityViolation,
    UrnError,
)
from urnlab.moments import (
    LOG_GRID,
    TREND_FLOOR,
    bounded_trend,
    degenerate_variance,
    divergent_trend,
    estimate_sigma,
    exact_moment_series,
    exact_standardized_moments,
    expectations,
    projection_moments,
    variance_series,
    verify_momQ,
    verify_power_moments,
)
from urnlab.montecarlo import mc_mean_variance, mc_standardized_moments
from urnlab.polynomials import (
    MultiIndex,
    UPolynomial,
    evaluate,
    monomials,
    phi_apply,
    phi_matrix,
    phi_shifted,
)
from urnlab.reduction import (
    NILPOTENCE_TOLERANCE,
    check_lemmas,
    check_nilpotence_bounds,
    decomposition_coefficients,
    f_alpha_stability,
    q_basis,
    reduced_polynomial,
    verify_stability,
)
from urnlab.spectral import Kind, classify
from urnlab.urn import enumerate_paths, stream

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from urnlab.spectral import SpectralDecomposition, UrnClass
    from urnlab.urn import UrnSpec

logger = logging.getLogger(__name__)

#: the largest number of leaves the oracle check enumerates
ORACLE_LEAVES = 10 ** 5
#: random points per dimension in the cone check
CONE_POINTS = 1000
#: random polynomial and point pairs in the pointwise transition check
POINTWISE_PAIRS = 100
#: relative tolerance of floating point comparisons between two methods
AGREEMENT_TOLERANCE = 1e-8
#: relative change allowed in the scaled variance between n / 2 and n
VARIANCE_STABILITY = 0.1


@frozen
class Check:
    """
    The outcome of one check.
    """

    name: str
    passed: bool
    measured: dict[str, Any] = field(factory=dict)
    violations: list[str] = field(factory=list)
    informational: bool = False

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "informational": self.informational,
            "measured": self.measured,
            "violations": self.violations,
        }


@frozen
class VerifyReport:
    urn_class: UrnClass
    checks: tuple[Check, ...] = field(converter=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.informational)

    @property
    def failures(self) -> list[Check]:
        return [
            c for c in self.checks if not c.passed and not c.informational
        ]


def _close(one, two, tolerance=AGREEMENT_TOLERANCE) -> bool:
    if isinstance(one, Fraction) and isinstance(two, Fraction):
        return one == two
    return abs(complex(one) - complex(two)) <= tolerance * max(
        1.0, abs(complex(two)),
    )


def _number(value) -> float:
    return float(complex(value).real)


def _random_polynomial(dec, rng, degree) -> UPolynomial:
    terms = {}
    for d in range(degree + 1):
        for beta in monomials(dec.s, d):
            if rng.random() < 0.5:
                value = int(rng.integers(-5, 6))
                terms[beta] = Fraction(value) if dec.exact else float(value)
    return UPolynomial.from_terms(terms, dec.s, dec.arithmetic)


class _Suite:
    """
    The checks of one urn, in the order they are reported.
    """

    def __init__(
        self,
        spec: UrnSpec,
        dec: SpectralDecomposition,
        seed: int,
        degree_cap: int,
        n_max: int,
        samples: int,
        mc_n: int,
        w: Sequence[float] | None,
        n_jobs: int,
    ):
        self.spec = spec
        self.dec = dec
        self.seed = seed
        self.degree_cap = degree_cap
        self.grid = tuple(n for n in powers_of_two() if n <= n_max) or (n_max,)
        self.samples = samples
        self.mc_n = mc_n
        if w is None:
            w = [1, -1] + [0] * (dec.s - 2) if dec.s > 1 else [1]
        self.w = list(w)
        self.n_jobs = n_jobs
        self.urn_class = classify(dec)

    def checks(self) -> list[Callable[[], Check]]:
        return [
            self.classification,
            self.moment_oracle,
            self.centering,
            self.pointwise_transition,
            self.phi_stability,
            self.reduced_polynomials,
            self.rising_products,
            self.stability,
            self.region_stability,
            self.decomposition_consistency,
            self.lemmas,
            self.nilpotence_bounds,
            self.reduced_growth,
            self.power_moments,
            self.projection_moments,
            self.variance_scaling,
            self.degenerate_direction,
            self.mean_variance_agreement,
            self.standardized_moments,
            self.cone_equivalence,
        ]

    def run(self) -> VerifyReport:
        results = []
        for check in self.checks():
            name = check.__name__.replace("_", " ")
            logger.info("running check %r", name)
            try:
                result = check()
            except NotSmall:
                raise
            except UrnError as error:
                result = Check(
                    name=name,
                    passed=False,
                    violations=[f"{type(error).__name__}: {error.message}"],
                )
            results.append(result)
        return VerifyReport(urn_class=self.urn_class, checks=results)

    def classification(self) -> Check:
        urn_class = self.urn_class
        sigma2 = urn_class.sigma2
        return Check(
            name="classification",
            passed=True,
            informational=True,
            measured={
                "class": urn_class.kind.value,
                "sigma2": None if sigma2 is None else _number(sigma2),
                "d": urn_class.d,
                "nu": urn_class.nu,
            },
        )

    def moment_oracle(self) -> Check:
        dec = self.dec
        steps = min(10, int(log(ORACLE_LEAVES) / log(max(dec.s, 2))))
        powers = self._powers(3)
        polynomials = [
            UPolynomial.monomial(beta, dec.arithmetic) for beta in powers
        ]
        _, exact = expectations(polynomials, dec, range(steps + 1))
        violations, compared = [], 0
        for n in range(steps + 1):
            leaves = enumerate_paths(dec.urn, n, merge=True)
            for beta, f, one in zip(powers, polynomials, exact[n]):
                two = sum(
                    (p * evaluate(f, x, dec) for x, p in leaves),
                    dec.arithmetic.zero,
                )
                compared += 1
                if not _close(one, two):
                    violations.append(
                        f"u^({format_multi_index(beta)}) at n = {n}: "
                        f"{one} != {two}",
                    )
        return Check(
            name="moment oracle",
            passed=not violations,
            measured={"steps": steps, "compared": compared},
            violations=violations,
        )

    def centering(self) -> Check:
        dec = self.dec
        f = UPolynomial.monomial(MultiIndex.delta(dec.s, 0), dec.arithmetic)
        steps = 50
        series = exact_moment_series(f, steps, dec)
        t0 = sum(dec.urn.X0)
        violations = [
            f"E u_1(X_{n}) = {value}, expected {t0 + n}"
            for n, value in zip(series.n, series.values)
            if not _close(value, t0 + n)
        ]
        return Check(
            name="centering",
            passed=not violations,
            measured={"steps": steps},
            violations=violations,
        )

    def pointwise_transition(self) -> Check:
        dec = self.dec
        rng = stream(self.seed, 2)
        rows = dec.urn.R
        worst, violations = 0.0, []
        for _ in range(POINTWISE_PAIRS):
            f = _random_polynomial(dec, rng, 3)
            x = [int(each) for each in rng.integers(1, 20, dec.s)]
            direct = evaluate(phi_apply(f, dec), x, dec)
            oracle = sum(
                x[k] * (
                    evaluate(f, [a + b for a, b in zip(x, rows[k])], dec)
                    - evaluate(f, x, dec)
                )
                for k in range(dec.s)
            )
            scale = max(1.0, abs(complex(oracle)))
            error = abs(complex(direct) - complex(oracle)) / scale
            worst = max(worst, error)
            if not _close(direct, oracle):
                violations.append(f"at {x}: {direct} != {oracle}")
        return Check(
            name="pointwise transition",
            passed=not violations,
            measured={"pairs": POINTWISE_PAIRS, "max_relative_error": worst},
            violations=violations,
        )

    def phi_stability(self) -> Check:
        dec = self.dec
        top = MultiIndex.delta(dec.s, dec.s - 1, self.degree_cap)
        try:
            matrix = phi_matrix(top, dec, n_jobs=self.n_jobs)
        except StabilityViolation as error:
            return Check(
                name="phi stability",
                passed=False,
                measured={"leaked": len(error.leaks)},
                violations=[error.message],
            )
        violations = []
        for b, (beta, column) in enumerate(zip(matrix.basis, matrix.columns)):
            above = [matrix.basis[g] for g in column if g > b]
            if above:
                violations.append(f"Phi(u^{beta}) reaches {above}")
            diagonal = column.get(b, dec.arithmetic.zero)
            if not _close(diagonal, beta.inner(dec)):
                violations.append(
                    f"Phi(u^{beta}) has diagonal {diagonal}, "
                    f"expected {beta.inner(dec)}",
                )
        return Check(
            name="phi stability",
            passed=not violations,
            measured={"columns": len(matrix), "degree_cap": self.degree_cap},
            violations=violations,
        )

    def _powers(self, cap):
        return [
            alpha
            for degree in range(cap + 1)
            for alpha in monomials(self.dec.s, degree)
        ]

    def reduced_polynomials(self) -> Check:
        dec = self.dec
        violations = []
        powers = self._powers(self.degree_cap)
        for alpha in powers:
            reduced = reduced_polynomial(alpha, dec, budget=self.degree_cap)
            scale = max(1.0, reduced.Q.norm())
            image = reduced.Q
            for _ in range(reduced.nu):
                image = phi_shifted(image, reduced.eigenvalue, dec)
            if image.norm() <= NILPOTENCE_TOLERANCE * scale:
                violations.append(
                    f"{alpha}: nilpotent below nu = {reduced.nu}",
                )
            image = phi_shifted(image, reduced.eigenvalue, dec)
            if image.norm() > NILPOTENCE_TOLERANCE * scale:
                violations.append(
                    f"{alpha}: not nilpotent after nu + 1 = {reduced.nu + 1}",
                )
        top = powers[-1]
        basis = q_basis(top, dec, budget=self.degree_cap)
        if not basis.unit_triangular:
            violations.append("reduced polynomials are not unit triangular")
        return Check(
            name="reduced polynomials",
            passed=not violations,
            measured={
                "powers": len(powers),
                "basis_condition": basis.condition,
            },
            violations=violations,
        )

    def rising_products(self) -> Check:
        dec = self.dec
        u1 = UPolynomial.monomial(MultiIndex.delta(dec.s, 0), dec.arithmetic)
        product = UPolynomial.constant(1, dec.s, dec.arithmetic)
        violations = []
        for c in range(1, 5):
            product = product * (
                u1 + UPolynomial.constant(c - 1, dec.s, dec.arithmetic)
            )
            reduced = reduced_polynomial(MultiIndex.delta(dec.s, 0, c), dec)
            difference = reduced.Q - product
            if dec.exact and difference:
                violations.append(f"c = {c}: {reduced.Q} != {product}")
            elif difference.norm() > AGREEMENT_TOLERANCE * product.norm():
                violations.append(f"c = {c}: differs by {difference.norm()}")
        return Check(
            name="rising products",
            passed=not violations,
            measured={"c_max": 4},
            violations=violations,
        )

    def stability(self) -> Check:
        violations = []
        powers = self._powers(min(self.degree_cap, 5))
        for alpha in powers:
            report = verify_stability(alpha, self.dec)
            if not report.passed:
                violations.append(
                    f"{alpha}: outside K {sorted(report.outside_K)}, "
                    f"not resonant {sorted(report.outside_resonant)}",
                )
        return Check(
            name="stability",
            passed=not violations,
            measured={"powers": len(powers)},
            violations=violations,
        )

    def region_stability(self) -> Check:
        violations = []
        powers = self._powers(min(self.degree_cap, 4))
        for alpha in powers:
            report = f_alpha_stability(alpha, self.dec)
            if not report.passed:
                violations.append(
                    f"{alpha}: leaks {sorted(report.leaks)}, "
                    f"reduced leaks {sorted(report.q_leaks)}",
                )
        return Check(
            name="region stability",
            passed=not violations,
            measured={"powers": len(powers)},
            violations=violations,
        )

    def decomposition_consistency(self) -> Check:
        dec = self.dec
        n = self.grid[len(self.grid) // 2]
        violations = []
        powers = self._powers(min(self.degree_cap, 3))
        for alpha in powers:
            report = decomposition_coefficients(alpha, dec)
            if not report.passed:
                violations.append(
                    f"{alpha}: coefficients outside the region "
                    f"{sorted(report.outside)}",
                )
            reduced = [
                reduced_polynomial(beta, dec).Q for beta in report.coefficients
            ]
            direct = UPolynomial.monomial(alpha, dec.arithmetic)
            _, values = expectations(
                [direct, *reduced], dec, [n], arithmetic="float",
            )
            first, *rest = values[n]
            combined = sum(
                complex(q) * value
                for q, value in zip(report.coefficients.values(), rest)
            )
            if not _close(combined, first):
                violations.append(f"{alpha}: {combined} != {first}")
        return Check(
            name="decomposition consistency",
            passed=not violations,
            measured={"powers": len(powers), "n": n},
            violations=violations,
        )

    def lemmas(self) -> Check:
        report = check_lemmas(self.dec, cap=min(self.degree_cap, 6))
        return Check(
            name="lemmas",
            passed=report.passed,
            measured={"checked": report.checked},
            violations=[
                f"{v.lemma}: alpha = {v.alpha}, beta = {v.beta}: {v.detail}"
                for v in report.violations
            ],
        )

    def nilpotence_bounds(self) -> Check:
        report = check_nilpotence_bounds(self.dec, cap=min(self.degree_cap, 6))
        return Check(
            name="nilpotence bounds",
            passed=report.passed,
            measured={"entries": len(report.entries)},
            violations=[
                f"{e.alpha}: nu = {e.nu}, M = {e.M}, bound {e.block_bound}"
                for e in report.violations
            ],
        )

    def reduced_growth(self) -> Check:
        violations, ratios = [], {}
        for alpha in self._powers(min(self.degree_cap, 3))[1:]:
            report = verify_momQ(alpha, self.dec, grid=self.grid)
            ratios[format_multi_index(alpha)] = max(report.ratios)
            if not report.passed:
                violations.append(f"{alpha}: {report.detail}")
        return Check(
            name="reduced growth",
            passed=not violations,
            measured={"max_ratio": ratios},
            violations=violations,
        )

    def power_moments(self) -> Check:
        bounds = verify_power_moments(
            self.dec, cap=min(self.degree_cap, 4), grid=self.grid,
        )
        violations = [
            f"{report.name} {report.alpha}: ratios up to "
            f"{max(report.ratios):.6g}"
            for report in bounds if not report.passed
        ]
        violations.extend(
            f"{report.name} {report.alpha}: bounded without its "
            "logarithmic factor"
            for report in bounds if report.diverges_without_log is False
        )
        return Check(
            name="power moments",
            passed=bounds.passed,
            measured={
                "powers": len(bounds),
                "log_factor_necessary": bounds.log_factor_necessary,
            },
            violations=violations,
        )

    def projection_moments(self) -> Check:
        parts = ["PI"]
        if self.urn_class.kind is Kind.CRITICALLY_SMALL:
            parts.append("PII")
        violations, measured = [], {}
        for part in parts:
            for ell in (1, 2):
                report = projection_moments(self.dec, part, ell, self.grid)
                measured[f"{part}^{2 * ell}"] = max(report.ratios)
                if not report.passed:
                    violations.append(f"{part}, ell = {ell}")
        return Check(
            name="projection moments",
            passed=not violations,
            measured=measured,
            violations=violations,
        )

    def variance_scaling(self) -> Check:
        n = self.mc_n
        half = n // 2
        critical = self.urn_class.kind is Kind.CRITICALLY_SMALL
        grid = sorted({half, n, *(LOG_GRID if critical else ())})
        variances = variance_series(
            self.dec, self.w, grid, arithmetic="float",
        )
        nu = self.urn_class.nu
        scaled = {
            each: float(variances[each]) / (each * log_factor(each, nu))
            for each in grid
        }
        change = abs(scaled[n] - scaled[half]) / max(abs(scaled[n]), 1e-300)
        measured = {"scaled_variance": scaled[n], "relative_change": change}
        violations = []
        if change > VARIANCE_STABILITY:
            violations.append(
                f"Var(Y_n) / (n log^{nu} n) changes by {change:.3g} "
                f"between n = {half} and n = {n}",
            )
        if critical:
            estimate = estimate_sigma(self.dec, n_max=n)
            measured["sigma_relative_change"] = estimate.relative_change
            over_n = [float(variances[each]) / each for each in LOG_GRID]
            ratios = [scaled[each] for each in LOG_GRID]
            stable = bounded_trend(LOG_GRID, ratios)
            diverges = divergent_trend(LOG_GRID, over_n)
            measured["variance_over_n"] = dict(
                zip(map(str, LOG_GRID), over_n),
            )
            measured["variance_over_n_diverges"] = diverges
            if not stable:
                violations.append(
                    f"Var(Y_n) / (n log^{nu} n) grows over the grid",
                )
            if estimate.variance(self.w) > TREND_FLOOR and not diverges:
                violations.append("Var(Y_n) / n stays bounded")
        return Check(
            name="variance scaling",
            passed=not violations,
            informational=not critical,
            measured=measured,
            violations=violations,
        )

    def degenerate_direction(self) -> Check:
        grid = [1, 2, 5, 10, 50]
        variances = degenerate_variance(self.dec, [1] * self.dec.s, grid)
        violations = [
            f"Var(Y_{n}) = {value}"
            for n, value in variances.items()
            if not _close(
                value, 0, tolerance=AGREEMENT_TOLERANCE * (n + 1) ** 2,
            )
        ]
        return Check(
            name="degenerate direction",
            passed=not violations,
            measured={"steps": grid},
            violations=violations,
        )

    def mean_variance_agreement(self) -> Check:
        dec, w = self.dec, self.w
        n = min(self.mc_n, 1000)
        samples = min(self.samples, 20_000)
        sampled = mc_mean_variance(
            self.spec, w, n, samples, self.seed, n_jobs=self.n_jobs,
        )
        s = dec.s
        linear = [
            UPolynomial.monomial(MultiIndex.delta(s, j), dec.arithmetic)
            for j in range(s)
        ]
        _, values = expectations(linear, dec, [n], arithmetic="float")
        projections = np.asarray(w, dtype=float) @ dec.V.astype(complex)
        mean = float(
            (projections @ np.array(values[n], dtype=complex)).real,
        ) * float(dec.scale)
        variance = float(variance_series(dec, w, [n])[n])
        violations = []
        if abs(sampled.mean - mean) > 4 * sampled.mean_stderr + 1e-9:
            violations.append(f"mean {sampled.mean} vs exact {mean}")
        if abs(sampled.variance - variance) > (
            4 * sampled.variance_stderr + 1e-9
        ):
            violations.append(
                f"variance {sampled.variance} vs exact {variance}",
            )
        return Check(
            name="mean variance agreement",
            passed=not violations,
            measured={
                "n": n,
                "samples": samples,
                "mean": sampled.mean,
                "exact_mean": mean,
                "variance": sampled.variance,
                "exact_variance": variance,
            },
            violations=violations,
        )

    def standardized_moments(self) -> Check:
        dec, n = self.dec, self.mc_n
        try:
            moments = mc_standardized_moments(
                self.spec,
                dec,
                self.w,
                n,
                self.samples,
                self.seed,
                n_jobs=self.n_jobs,
            )
        except DegenerateDirection as error:
            return Check(
                name="standardized moments",
                passed=True,
                informational=True,
                measured={"gamma": error.gamma},
            )
        exact = exact_standardized_moments(dec, self.w, n)
        earlier = exact_standardized_moments(dec, self.w, n // 2)
        # convergence is logarithmic on the critical line, so there the
        # exact finite-n moments stand in for the Gaussian ones
        relaxed = self.urn_class.kind is Kind.CRITICALLY_SMALL
        violations = []
        for k in moments.k:
            if moments.within(k):
                continue
            gaussian = moments.reference[k - 1]
            approaching = (
                abs(exact[k] - gaussian) <= abs(earlier[k] - gaussian)
            )
            if not (
                relaxed
                and approaching
                and moments.within(k, exact[k])
            ):
                violations.append(
                    f"k = {k}: {moments.values[k - 1]:.4f} "
                    f"+- {moments.stderr[k - 1]:.4f}, exact {exact[k]:.4f}",
                )
        return Check(
            name="standardized moments",
            passed=not violations,
            measured={
                "n": n,
                "samples": self.samples,
                "values": list(moments.values),
                "stderr": list(moments.stderr),
                "exact": [exact[k] for k in moments.k],
                "exact_reference": relaxed,
            },
            violations=violations,
        )

    def cone_equivalence(self) -> Check:
        violations, compared = [], 0
        for s in (2, 3, 4):
            cone = ConeSigma(s)
            rng = stream(self.seed, 3, s)
            for each in range(CONE_POINTS):
                if each % 2:
                    point = [float(v) for v in rng.uniform(-2, 2, s)]
                else:
                    point = [int(v) for v in rng.integers(-3, 4, s)]
                certificate = cone.certificate(point)
                compared += 1
                if not certificate.consistent:
                    violations.append(
                        f"{point}: faces say {certificate.contained}, "
                        f"edges say {certificate.feasible}",
                    )
                elif certificate.feasible:
                    rebuilt = np.zeros(s)
                    for (i, j), value in certificate.coefficients.items():
                        rebuilt += value * np.array(cone.edge(i, j))
                    if not np.allclose(rebuilt, point, atol=1e-7):
                        violations.append(f"{point}: bad certificate")
        return Check(
            name="cone equivalence",
            passed=not violations,
            measured={"points": compared},
            violations=violations,
        )


def run_acceptance(
    spec: UrnSpec,
    dec: SpectralDecomposition,
    seed: int = 0,
    degree_cap: int = 6,
    n_max: int = 2 ** 17,
    samples: int = 200_000,
    mc_n: int = 10_000,
    w: Sequence[float] | None = None,
    n_jobs: int = 1,
) -> VerifyReport:
    """
    Run every check on an urn.

    Arguments:

        spec:

            the urn as given (Monte Carlo runs in its units)

        dec:

            its spectral decomposition

        w:

            the observable direction, by default ``delta_1 - delta_2``

    Raises:

        `urnlab.exceptions.NotSmall`:

            for a large urn, since the limit theorems being checked need a
            small one

    """
    urn_class = classify(dec)
    if urn_class.kind is Kind.LARGE:
        raise NotSmall(urn_class.sigma2, what="verification")
    suite = _Suite(
        spec=spec,
        dec=dec,
        seed=seed,
        degree_cap=degree_cap,
        n_max=n_max,
        samples=samples,
        mc_n=mc_n,
        w=w,
        n_jobs=n_jobs,
    )
    return suite.run()
