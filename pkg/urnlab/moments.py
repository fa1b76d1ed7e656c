"""
Exact moments of polynomial observables, and checks of their growth.

Conditioning on the urn at step ``n``, a polynomial ``f`` in the dual
coordinates satisfies ::

    E[f(X_(n+1)) | X_n] = f(X_n) + Phi(f)(X_n) / (t0 + n)

where ``t0 = u_1(X_0)`` is the initial total mass in units of ``m``. On the
span of ``u^beta`` for ``beta`` up to the leading power of ``f``, this is a
linear recursion for the vector of all moments ``E u^beta(X_n)``, run either
in exact rational arithmetic or in floating point.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb, isfinite, prod
from typing import TYPE_CHECKING, Any
import logging

from attrs import field, frozen
import numpy as np

from urnlab._utils import decades, log_factor, powers_of_two
from urnlab.exceptions import BudgetExceeded, NotSmall, UrnError
from urnlab.polynomials import (
    DEGREE_BUDGET,
    MultiIndex,
    UPolynomial,
    evaluate,
    monomials,
    phi_matrix,
)
from urnlab.reduction import reduced_polynomial
from urnlab.spectral import Kind, classify
from urnlab.urn import ENUMERATION_BUDGET, enumerate_paths

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from urnlab.spectral import SpectralDecomposition

logger = logging.getLogger(__name__)

#: rational arithmetic is used automatically up to this many steps
RATIONAL_STEPS = 200
#: the largest ``n_max * dim ** 2`` the moment engine will run
MOMENT_BUDGET = 10 ** 11
#: absolute slack of the bounded-trend proxy
TREND_FLOOR = 1e-9
#: a trend is bounded when its late maximum is at most this many times its
#: early maximum
TREND_FACTOR = 2
#: a grid long enough for a single logarithm to double between its first
#: and last decades
LOG_GRID = powers_of_two(4, 19)


def gaussian_moment(k: int) -> int:
    """
    The ``k``-th moment of a standard normal variable.
    """
    if k < 0:
        raise ValueError(f"moments are indexed from 0, not {k}")
    if k % 2:
        return 0
    return prod(range(k - 1, 0, -2))


@frozen(eq=False)
class MomentSeries:
    """
    ``n -> E f(X_n)`` for one observable.

    Attributes:

        mode:

            ``"exact"`` for the moment recursion, ``"oracle"`` for brute
            force enumeration, or ``"montecarlo"``

        arithmetic:

            ``"rational"`` or ``"float"``

    """

    observable: str
    n: tuple[int, ...] = field(converter=tuple)
    values: tuple[Any, ...] = field(converter=tuple)
    mode: str = "exact"
    arithmetic: str = "float"
    stderr: tuple[float, ...] | None = None
    normalization: str | None = None

    def at(self, n: int):
        return self.values[self.n.index(n)]

    def __len__(self):
        return len(self.n)


def _use_rational(dec, n_max: int, arithmetic: str) -> bool:
    if arithmetic == "auto":
        return dec.exact and n_max <= RATIONAL_STEPS
    if arithmetic == "rational":
        if not dec.exact:
            raise UrnError(
                "rational moments need an exact decomposition, but this "
                "urn has irrational eigenvalues",
            )
        return True
    if arithmetic == "float":
        return False
    raise ValueError(f"unknown arithmetic {arithmetic!r}")


def _top_power(polynomials: Iterable[UPolynomial], s: int) -> MultiIndex:
    tops = [f.leading for f in polynomials if f]
    return max(tops, key=MultiIndex.key, default=MultiIndex.zero(s))


class _Engine:
    """
    The moment recursion on the span below one power.
    """

    def __init__(self, dec, top, rational: bool, budget: int):
        self.dec = dec
        self.rational = rational
        self.budget = budget
        matrix = phi_matrix(top, dec, budget=DEGREE_BUDGET)
        self.basis = matrix.basis
        self.index = matrix.index
        self.columns = matrix.columns
        x0 = dec.urn.X0
        if rational:
            coordinates = dec.coordinates(x0)
            self.t0 = sum(Fraction(each) for each in x0)
            self.start = [
                prod((coordinates[j] ** e for j, e in enumerate(beta)),
                     start=Fraction(1))
                for beta in self.basis
            ]
        else:
            coordinates = dec.coordinates(x0).astype(complex)
            self.t0 = float(sum(x0))
            self.start = np.array(
                [
                    prod(coordinates[j] ** e for j, e in enumerate(beta))
                    for beta in self.basis
                ],
                dtype=complex,
            )
            self.transposed = matrix.matrix.astype(complex).T

    def run(self, n_max: int, record: Iterable[int]) -> dict[int, Any]:
        """
        The moment vectors at each recorded step.
        """
        record = set(record)
        dimension = len(self.basis)
        if n_max * dimension ** 2 > self.budget:
            raise BudgetExceeded(
                "moments",
                requested=n_max * dimension ** 2,
                limit=self.budget,
            )
        logger.debug(
            "running %s moment recursion of dimension %d for %d steps",
            "rational" if self.rational else "float",
            dimension,
            n_max,
        )
        recorded = {}
        moments = self.start
        if 0 in record:
            recorded[0] = list(moments) if self.rational else moments.copy()
        for n in range(n_max):
            if self.rational:
                mass = self.t0 + n
                moments = [
                    moments[b] + sum(
                        (t * moments[g] for g, t in column.items()),
                        Fraction(0),
                    ) / mass
                    for b, column in enumerate(self.columns)
                ]
            else:
                moments = moments + (self.transposed @ moments) / (self.t0 + n)
            if n + 1 in record:
                recorded[n + 1] = (
                    list(moments) if self.rational else moments.copy()
                )
        return recorded

    def expectation(self, f: UPolynomial, moments) -> Any:
        total = Fraction(0) if self.rational else 0j
        for beta, coefficient in f.terms.items():
            if not self.rational:
                coefficient = complex(coefficient)
            total += coefficient * moments[self.index[beta]]
        return total


def expectations(
    polynomials: Sequence[UPolynomial],
    dec: SpectralDecomposition,
    grid: Iterable[int],
    arithmetic: str = "auto",
    budget: int = MOMENT_BUDGET,
) -> tuple[bool, dict[int, list[Any]]]:
    """
    ``E f(X_n)`` for several polynomials at each ``n`` of a grid.

    Returns whether rational arithmetic was used, and the expectations per
    step.
    """
    grid = sorted(set(grid))
    n_max = grid[-1] if grid else 0
    rational = _use_rational(dec, n_max, arithmetic)
    engine = _Engine(
        dec,
        _top_power(polynomials, dec.s),
        rational=rational,
        budget=budget,
    )
    recorded = engine.run(n_max, grid)
    return rational, {
        n: [engine.expectation(f, recorded[n]) for f in polynomials]
        for n in grid
    }


def exact_moment_series(
    f: UPolynomial,
    n_max: int,
    dec: SpectralDecomposition,
    arithmetic: str = "auto",
    budget: int = MOMENT_BUDGET,
) -> MomentSeries:
    """
    ``E f(X_n)`` for every ``n`` from 0 to ``n_max``.

    Arguments:

        arithmetic:

            ``"rational"``, ``"float"``, or ``"auto"`` for rational
            arithmetic when the decomposition is exact and ``n_max`` is at
            most 200

    Raises:

        `urnlab.exceptions.BudgetExceeded`:

            if ``n_max * dim ** 2`` exceeds the budget

    """
    rational, values = expectations(
        [f], dec, range(n_max + 1), arithmetic=arithmetic, budget=budget,
    )
    return MomentSeries(
        observable=_describe(f),
        n=range(n_max + 1),
        values=[values[n][0] for n in range(n_max + 1)],
        mode="exact",
        arithmetic="rational" if rational else "float",
    )


def _describe(f: UPolynomial) -> str:
    terms = [
        f"{coefficient}*u^({','.join(str(e) for e in beta)})"
        for beta, coefficient in f
    ]
    return " + ".join(terms) or "0"


def moment_oracle(
    f: UPolynomial,
    n_max: int,
    dec: SpectralDecomposition,
    budget: int = ENUMERATION_BUDGET,
) -> MomentSeries:
    """
    ``E f(X_n)`` by enumerating every path of the urn.
    """
    values = []
    for n in range(n_max + 1):
        leaves = enumerate_paths(dec.urn, n, merge=True, budget=budget)
        values.append(
            sum(
                (
                    probability * evaluate(f, x, dec)
                    for x, probability in leaves
                ),
                dec.arithmetic.zero,
            ),
        )
    return MomentSeries(
        observable=_describe(f),
        n=range(n_max + 1),
        values=values,
        mode="oracle",
        arithmetic="rational" if dec.exact else "float",
    )


def bounded_trend(grid: Sequence[int], ratios: Sequence[float]) -> bool:
    """
    Whether the late maximum of a ratio is at most twice its early maximum.
    """
    first, last = decades(grid)
    early = max(ratios[i] for i in first)
    late = max(ratios[i] for i in last)
    return late <= TREND_FACTOR * early + TREND_FLOOR


def divergent_trend(grid: Sequence[int], ratios: Sequence[float]) -> bool:
    """
    Whether the late maximum of a ratio is at least twice its early maximum.

    A ratio which vanishes throughout does not diverge.
    """
    first, last = decades(grid)
    early = max(ratios[i] for i in first)
    late = max(ratios[i] for i in last)
    return late > TREND_FLOOR and late >= TREND_FACTOR * early


@frozen(eq=False)
class BoundReport:
    """
    A measured growth ratio over an ``n`` grid and whether it stays bounded.

    Attributes:

        values:

            the absolute values of the measured moments

        reference:

            the reference growth the moments are divided by

        diverges_without_log:

            for bounds with a logarithmic factor, whether the ratio without
            that factor grows (showing the factor is needed)

    """

    name: str
    alpha: MultiIndex | None
    grid: tuple[int, ...] = field(converter=tuple)
    values: tuple[float, ...] = field(converter=tuple)
    reference: tuple[float, ...] = field(converter=tuple)
    ratios: tuple[float, ...] = field(converter=tuple)
    passed: bool = True
    diverges_without_log: bool | None = None
    detail: str = ""


def _bound_report(
    name, alpha, grid, values, exponent, log_exponent, detail="",
    check_log=False,
) -> BoundReport:
    magnitudes = [float(abs(each)) for each in values]
    reference = [
        float(n) ** exponent * log_factor(n, log_exponent) for n in grid
    ]
    ratios = [v / r for v, r in zip(magnitudes, reference)]
    passed = all(isfinite(each) for each in ratios) and bounded_trend(
        grid, ratios,
    )
    diverges = None
    _, last = decades(grid)
    vanishing = max(ratios[i] for i in last) <= TREND_FLOOR
    if check_log and log_exponent and not vanishing:
        without = [
            v / float(n) ** exponent for v, n in zip(magnitudes, grid)
        ]
        diverges = divergent_trend(grid, without)
    return BoundReport(
        name=name,
        alpha=alpha,
        grid=grid,
        values=magnitudes,
        reference=reference,
        ratios=ratios,
        passed=passed,
        diverges_without_log=diverges,
        detail=detail,
    )


def verify_momQ(
    alpha: Iterable[int],
    dec: SpectralDecomposition,
    grid: Sequence[int] = powers_of_two(),
) -> BoundReport:
    """
    Check that ``E Q_alpha(X_n) = O(n^Re<lambda, alpha> log^nu n)``.
    """
    reduced = reduced_polynomial(alpha, dec)
    _, values = expectations([reduced.Q], dec, grid, arithmetic="float")
    exponent = float(dec.arithmetic.real(reduced.eigenvalue))
    return _bound_report(
        "reduced polynomial growth",
        reduced.alpha,
        grid,
        [values[n][0] for n in grid],
        exponent,
        reduced.nu,
        detail=f"exponent {exponent:g}, nu = {reduced.nu}",
    )


@frozen(eq=False)
class MomentBounds:
    """
    A collection of growth reports.

    They pass when every bound holds and no logarithmic factor turned out to
    be unnecessary.
    """

    reports: tuple[BoundReport, ...] = field(converter=tuple)

    @property
    def passed(self) -> bool:
        return all(
            report.passed and report.diverges_without_log is not False
            for report in self.reports
        )

    @property
    def log_factor_necessary(self) -> bool | None:
        """
        Whether every checked logarithmic factor is needed, or ``None`` if
        none was checked.
        """
        checked = [
            report.diverges_without_log for report in self.reports
            if report.diverges_without_log is not None
        ]
        return all(checked) if checked else None

    def __iter__(self):
        return iter(self.reports)

    def __len__(self):
        return len(self.reports)


def verify_power_moments(
    dec: SpectralDecomposition,
    cap: int = 4,
    grid: Sequence[int] = powers_of_two(),
    critical_grid: Sequence[int] = LOG_GRID,
) -> MomentBounds:
    """
    Check the growth of ``E u^alpha(X_n)`` for strictly small and strictly
    critical powers up to degree ``cap``.

    Strictly small powers grow at most like ``n^(|alpha| / 2)``, strictly
    critical ones at most like ``(n log^(2 d + 1) n)^(|alpha| / 2)``.

    Strictly critical powers are measured over ``critical_grid``, where the
    even ones must also outgrow ``n^(|alpha| / 2)`` unless their moments
    vanish.

    Raises:

        `urnlab.exceptions.NotSmall`:

            for a large urn

    """
    urn_class = classify(dec)
    if urn_class.kind is Kind.LARGE:
        raise NotSmall(urn_class.sigma2, what="checking moment growth")
    log_exponent = 2 * urn_class.d + 1

    small, critical = [], []
    for degree in range(1, cap + 1):
        for alpha in monomials(dec.s, degree):
            if alpha.is_strictly_small(dec):
                small.append(alpha)
            elif alpha.is_strictly_critical(dec):
                critical.append(alpha)

    reports = []
    for alpha, series in _power_series(small, dec, grid):
        reports.append(
            _bound_report(
                "strictly small power", alpha, grid, series, alpha.degree / 2,
                0,
            ),
        )
    for alpha, series in _power_series(critical, dec, critical_grid):
        half = alpha.degree / 2
        reports.append(
            _bound_report(
                "strictly critical power",
                alpha,
                critical_grid,
                series,
                half,
                log_exponent * half,
                check_log=all(each % 2 == 0 for each in alpha),
            ),
        )
    reports.sort(key=lambda report: report.alpha.key())
    return MomentBounds(reports=reports)


def _power_series(powers, dec, grid):
    if not powers:
        return
    polynomials = [
        UPolynomial.monomial(alpha, dec.arithmetic) for alpha in powers
    ]
    _, values = expectations(polynomials, dec, grid, arithmetic="float")
    for position, alpha in enumerate(powers):
        yield alpha, [values[n][position] for n in grid]


@frozen(eq=False)
class CovarianceEstimate:
    """
    ``Cov(X_n) / (n log^nu n)`` at the largest ``n``, in user units.

    Attributes:

        previous:

            the same estimate at half the number of steps

        relative_change:

            the relative difference between the two estimates

    """

    sigma: np.ndarray
    nu: int
    n: int
    previous: np.ndarray = field(repr=False)
    relative_change: float

    def variance(self, w: Sequence[float]) -> float:
        """
        ``w^T sigma w``.
        """
        w = np.asarray(w, dtype=float)
        return float(w @ self.sigma @ w)


def _second_moments(dec, grid, arithmetic):
    s = dec.s
    linear = [UPolynomial.monomial(MultiIndex.delta(s, j), dec.arithmetic)
              for j in range(s)]
    products = [
        linear[i] * linear[j] for i in range(s) for j in range(s)
    ]
    return expectations(linear + products, dec, grid, arithmetic=arithmetic)


def _covariance(dec, values) -> np.ndarray:
    """
    Covariance of ``X_n`` (normalized units) from first and second moments
    of the dual coordinates, omitting the deterministic ``u_1``.
    """
    s = dec.s
    means = values[:s]
    cov = np.zeros((s, s), dtype=complex)
    for i in range(1, s):
        for j in range(1, s):
            cov[i, j] = complex(values[s + i * s + j] - means[i] * means[j])
    V = dec.V.astype(complex)
    return (V @ cov @ V.T).real


def estimate_sigma(
    dec: SpectralDecomposition,
    n_max: int = 10_000,
    arithmetic: str = "auto",
) -> CovarianceEstimate:
    """
    Estimate the asymptotic covariance matrix from exact second moments.

    Raises:

        `urnlab.exceptions.NotSmall`:

            for a large urn, whose covariance grows faster than ``n``

    """
    urn_class = classify(dec)
    if urn_class.kind is Kind.LARGE:
        raise NotSmall(urn_class.sigma2, what="estimating the covariance")
    half = max(1, n_max // 2)
    _, values = _second_moments(dec, [half, n_max], arithmetic)
    m2 = float(dec.scale) ** 2
    estimates = []
    for n in (half, n_max):
        cov = _covariance(dec, values[n]) * m2
        cov /= n * log_factor(n, urn_class.nu)
        estimates.append((cov + cov.T) / 2)
    previous, sigma = estimates
    size = np.abs(sigma).max()
    change = float(np.abs(sigma - previous).max() / size) if size else 0.0
    return CovarianceEstimate(
        sigma=sigma,
        nu=urn_class.nu,
        n=n_max,
        previous=previous,
        relative_change=change,
    )


def exact_covariance(
    dec: SpectralDecomposition,
    n: int,
    arithmetic: str = "auto",
) -> np.ndarray:
    """
    ``Cov(X_n)`` in user units, exactly when the arithmetic allows it.

    In rational arithmetic the result has `fractions.Fraction` entries.
    """
    rational, values = _second_moments(dec, [n], arithmetic)
    if not rational:
        return _covariance(dec, values[n]) * float(dec.scale) ** 2
    s = dec.s
    moments = values[n]
    cov = np.full((s, s), Fraction(0), dtype=object)
    for i in range(s):
        for j in range(s):
            cov[i, j] = moments[s + i * s + j] - moments[i] * moments[j]
    scale = Fraction(dec.scale)
    return dec.V @ cov @ dec.V.T * scale ** 2


def _weights(dec, w):
    if dec.exact:
        return [Fraction(each) for each in w]
    return [complex(each) for each in w]


def _observable(dec, w) -> UPolynomial:
    """
    ``w . X`` in dual coordinates, without its deterministic ``u_1`` part.
    """
    s = dec.s
    weights = _weights(dec, w)
    return UPolynomial.from_terms(
        (
            (MultiIndex.delta(s, j), sum(
                weights[i] * dec.V[i, j] for i in range(s)
            ))
            for j in range(1, s)
        ),
        s,
        dec.arithmetic,
    )


def _standardize(raw: list[float], k_max: int) -> dict[int, float]:
    mean = raw[1]
    central = [
        sum(comb(k, i) * raw[i] * (-mean) ** (k - i) for i in range(k + 1))
        for k in range(k_max + 1)
    ]
    variance = central[2]
    if variance <= 0:
        return {k: float("nan") for k in range(1, k_max + 1)}
    standardized = {1: 0.0, 2: 1.0}
    for k in range(3, k_max + 1):
        standardized[k] = float(central[k]) / float(variance) ** (k / 2)
    return standardized


def exact_standardized_moments(
    dec: SpectralDecomposition,
    w: Sequence[float],
    n: int,
    k_max: int = 6,
    arithmetic: str = "auto",
) -> dict[int, float]:
    """
    Standardized moments of ``Y_n = w . X_n``, from exact moments.
    """
    observable = _observable(dec, w)
    powers = [UPolynomial.constant(1, dec.s, dec.arithmetic)]
    for _ in range(k_max):
        powers.append(powers[-1] * observable)
    _, values = expectations(powers, dec, [n], arithmetic=arithmetic)
    raw = [
        each if isinstance(each, Fraction) else complex(each).real
        for each in values[n]
    ]
    return _standardize(raw, k_max)


def variance_series(
    dec: SpectralDecomposition,
    w: Sequence[float],
    grid: Sequence[int],
    arithmetic: str = "auto",
) -> dict[int, Any]:
    """
    ``Var(w . X_n)`` in user units at each step of a grid.
    """
    observable = _observable(dec, w)
    _, values = expectations(
        [observable, observable * observable],
        dec,
        grid,
        arithmetic=arithmetic,
    )
    scale = dec.scale ** 2
    result = {}
    for n in grid:
        first, second = values[n]
        variance = second - first * first
        if not isinstance(variance, Fraction):
            variance = complex(variance).real
        result[n] = variance * scale
    return result


def degenerate_variance(
    dec: SpectralDecomposition,
    w: Sequence[float],
    grid: Sequence[int],
    arithmetic: str = "auto",
) -> dict[int, Any]:
    """
    ``Var(w . X_n)`` including the ``u_1`` part, from raw second moments.

    Unlike `variance_series`, nothing is assumed about which parts are
    deterministic, so this shows directly that ``u_1(X_n)`` has no variance.
    """
    s = dec.s
    weights = _weights(dec, w)
    full = UPolynomial.from_terms(
        (
            (MultiIndex.delta(s, j), sum(
                weights[i] * dec.V[i, j] for i in range(s)
            ))
            for j in range(s)
        ),
        s,
        dec.arithmetic,
    )
    _, values = expectations([full, full * full], dec, grid, arithmetic)
    return {n: values[n][1] - values[n][0] ** 2 for n in grid}


@frozen(eq=False)
class RemainderReport:
    """
    The size of ``E X_n - (t0 + n) v_1`` and its fitted growth exponent.
    """

    grid: tuple[int, ...] = field(converter=tuple)
    norms: tuple[float, ...] = field(converter=tuple)
    exponent: float | None
    sigma2: Any


def mean_remainder(
    dec: SpectralDecomposition,
    grid: Sequence[int] = powers_of_two(),
) -> RemainderReport:
    """
    Measure how fast the mean approaches its deterministic part.

    The exponent is a least squares fit of ``log |remainder|`` against
    ``log n`` over the second half of the grid; it is ``None`` when the
    remainder vanishes.
    """
    s = dec.s
    linear = [
        UPolynomial.monomial(MultiIndex.delta(s, j), dec.arithmetic)
        for j in range(1, s)
    ]
    _, values = expectations(linear, dec, grid, arithmetic="float")
    V = dec.V.astype(complex)
    norms = []
    for n in grid:
        remainder = V[:, 1:] @ np.array(values[n], dtype=complex)
        norms.append(float(np.linalg.norm(remainder)) * float(dec.scale))
    tail = [(n, v) for n, v in zip(grid, norms)][len(grid) // 2:]
    exponent = None
    if tail and all(v > TREND_FLOOR for _, v in tail):
        slope, _ = np.polyfit(
            np.log([n for n, _ in tail]), np.log([v for _, v in tail]), 1,
        )
        exponent = float(slope)
    return RemainderReport(
        grid=grid,
        norms=norms,
        exponent=exponent,
        sigma2=classify(dec).sigma2,
    )


def _squared_norm(dec, selected) -> UPolynomial:
    """
    ``|P(x)|^2`` for ``P = sum over selected k of pi_k``, at real ``x``.

    The conjugate of a dual coordinate at a real point is again a linear
    form, ``conj(u_k) = sum_j (conj(U) V)[k, j] u_j``.
    """
    s, arithmetic = dec.s, dec.arithmetic
    V = dec.V
    if arithmetic.exact:
        conjugates = np.identity(s, dtype=int)
    else:
        conjugates = dec.U.conj() @ V
    total = UPolynomial.constant(0, s, arithmetic)
    for i in range(s):
        part = UPolynomial.from_terms(
            ((MultiIndex.delta(s, k), V[i, k]) for k in selected),
            s,
            arithmetic,
        )
        conjugate = UPolynomial.from_terms(
            (
                (MultiIndex.delta(s, j), sum(
                    (V[i, k].conjugate() if not arithmetic.exact else V[i, k])
                    * conjugates[k, j]
                    for k in selected
                ))
                for j in range(s)
            ),
            s,
            arithmetic,
        )
        total = total + part * conjugate
    return total


def projection_moments(
    dec: SpectralDecomposition,
    part: str,
    ell: int,
    grid: Sequence[int] = powers_of_two(),
) -> BoundReport:
    """
    Check ``E |P(X_n)|^(2 ell)`` against ``n^ell`` (``part="PI"``, the
    eigenvalues with real part below 1/2) or ``(n log^nu n)^ell``
    (``part="PII"``, the critical eigenvalues).
    """
    urn_class = classify(dec)
    if urn_class.kind is Kind.LARGE:
        raise NotSmall(urn_class.sigma2, what="checking projection moments")
    if part == "PI":
        selected = [k for k in range(1, dec.s) if dec.is_strictly_small(k)]
        log_exponent = 0
    elif part == "PII":
        selected = [k for k in range(1, dec.s) if dec.is_critical(k)]
        log_exponent = urn_class.nu * ell
    else:
        raise ValueError(f"unknown projection {part!r}")

    squared = _squared_norm(dec, selected)
    power = UPolynomial.constant(1, dec.s, dec.arithmetic)
    for _ in range(ell):
        power = power * squared
    _, values = expectations([power], dec, grid, arithmetic="float")
    return _bound_report(
        f"{part} projection moment",
        None,
        grid,
        [complex(values[n][0]).real for n in grid],
        ell,
        log_exponent,
        detail=f"ell = {ell}",
    )
