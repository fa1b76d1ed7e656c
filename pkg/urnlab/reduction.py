"""
Reduced polynomials, their nilpotence indices, and the power sets which
control how the transition operator acts on them.

The reduced polynomial of a power ``alpha`` is the projection of ``u^alpha``
onto the generalized eigenspace of the transition operator for the eigenvalue
``<lambda, alpha>``, inside the span of all ``u^beta`` with ``beta <= alpha``.
Since the transition matrix is upper triangular in that span, the projection
is computed by decoupling the triangular matrix into blocks of equal diagonal
values (a triangular Sylvester system) rather than by any matrix function.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb
from threading import Lock
from typing import TYPE_CHECKING, Any
from weakref import WeakKeyDictionary
import logging

from attrs import field, frozen
import numpy as np

from urnlab.cone import ConeSigma
from urnlab.exceptions import (
    BudgetExceeded,
    NotSmall,
    ResonanceAmbiguity,
    UnsupportedSupport,
)
from urnlab.polynomials import (
    MultiIndex,
    UPolynomial,
    monomials,
    order_less,
    phi_apply,
    phi_matrix,
)
from urnlab.spectral import Kind, classify
from urnlab.urn import ENUMERATION_BUDGET

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from urnlab._typing import Scalar
    from urnlab.spectral import JordanBlock, SpectralDecomposition

logger = logging.getLogger(__name__)

#: the largest degree for which full families of reduced polynomials are built
DEGREE_CAP = 8
#: expansion coefficients below this (relative) are treated as absent
EXPANSION_TOLERANCE = 1e-8
#: scale separation used to decide that an iterate has vanished
NILPOTENCE_TOLERANCE = 1e-8


class _Reduction:
    """
    The incremental decoupling of one decomposition's transition matrix.

    ``Z`` is unit upper triangular with ``T Z = Z T'``, where ``T'`` has no
    entries between positions of distinct eigenvalue sums. Entries of ``Z``
    between positions of equal sums are zero. Columns are processed in basis
    order, and a longer basis extends a shorter one, so the state only ever
    grows.
    """

    def __init__(self, dec: SpectralDecomposition):
        self.dec = dec
        self.arithmetic = dec.arithmetic
        self.basis: list[MultiIndex] = []
        self.index: dict[MultiIndex, int] = {}
        self.T: list[dict[int, Scalar]] = []
        self.Z: list[dict[int, Scalar]] = []
        self.values: list[Scalar] = []
        self.classes: list[int] = []
        self._representatives: list[Scalar] = []
        self._exact_classes: dict[Any, int] = {}
        self._Q: dict[int, dict[int, Scalar]] = {}
        self._nu: dict[int, int] = {}
        self._norm = 1.0
        self.lock = Lock()

    def extend(self, alpha: MultiIndex, budget: int = DEGREE_CAP):
        if alpha in self.index:
            return
        matrix = phi_matrix(alpha, self.dec, budget=budget)
        for b in range(len(self.basis), len(matrix.basis)):
            beta = matrix.basis[b]
            self.basis.append(beta)
            self.index[beta] = b
            column = matrix.columns[b]
            self.T.append(column)
            self._norm = max(
                self._norm,
                float(sum(abs(each) for each in column.values())),
            )
            value = beta.inner(self.dec)
            self.values.append(value)
            self.classes.append(self._class_of(value))
            self.Z.append(self._decouple(b))
        logger.debug(
            "decoupled %d transition columns up to %s",
            len(self.basis),
            alpha,
        )

    def _class_of(self, value) -> int:
        if self.arithmetic.exact:
            return self._exact_classes.setdefault(
                value, len(self._exact_classes),
            )
        ambiguous = []
        for label, representative in enumerate(self._representatives):
            if self.arithmetic.same(value, representative):
                return label
            if self.arithmetic.ambiguous(value, representative):
                ambiguous.append((value, representative))
        if ambiguous:
            raise ResonanceAmbiguity(ambiguous, self.arithmetic.tolerance)
        self._representatives.append(value)
        return len(self._representatives) - 1

    def _is_zero(self, value, scale=1.0) -> bool:
        return self.arithmetic.is_zero(value, scale=scale)

    def _decouple(self, b: int) -> dict[int, Scalar]:
        T, Z, classes, values = self.T, self.Z, self.classes, self.values
        column = T[b]
        label, target = classes[b], values[b]
        z: dict[int, Scalar] = {}
        decoupled: dict[int, Scalar] = {}
        for g in range(b - 1, -1, -1):
            above = column.get(g, 0)
            for delta, entry in z.items():
                t = T[delta].get(g)
                if t is not None:
                    above += t * entry
            coupled = 0
            for epsilon, entry in decoupled.items():
                zg = Z[epsilon].get(g)
                if zg is not None:
                    coupled += zg * entry
            scale = max(1.0, abs(above), abs(coupled))
            if classes[g] == label:
                value = above - coupled
                if not self._is_zero(value, scale):
                    decoupled[g] = value
            else:
                value = (coupled - above) / (values[g] - target)
                if not self._is_zero(value, scale):
                    z[g] = value
        return z

    def q(self, b: int) -> dict[int, Scalar]:
        """
        Coordinates of the reduced polynomial at basis position ``b``.
        """
        cached = self._Q.get(b)
        if cached is not None:
            return cached
        one = self.arithmetic.one
        y: dict[int, Scalar] = {b: one}
        for delta in range(b, -1, -1):
            entry = y.get(delta)
            if entry is None or self._is_zero(entry):
                continue
            for g, z in self.Z[delta].items():
                y[g] = y.get(g, 0) - z * entry

        label = self.classes[b]
        q: dict[int, Scalar] = {}
        for rho, entry in y.items():
            if self.classes[rho] != label or self._is_zero(entry):
                continue
            q[rho] = q.get(rho, 0) + entry
            for g, z in self.Z[rho].items():
                q[g] = q.get(g, 0) + entry * z
        q = {g: value for g, value in q.items() if not self._is_zero(value)}
        q[b] = one
        self._Q[b] = q
        return q

    def apply(self, vector: dict[int, Scalar], shift) -> dict[int, Scalar]:
        """
        ``(T - shift) vector`` for a sparse coordinate vector.
        """
        image: dict[int, Scalar] = {}
        for delta, entry in vector.items():
            for g, t in self.T[delta].items():
                image[g] = image.get(g, 0) + t * entry
            image[delta] = image.get(delta, 0) - shift * entry
        return image

    def _norm_of(self, vector) -> float:
        return max((abs(each) for each in vector.values()), default=0.0)

    def nu(self, b: int) -> int:
        """
        The nilpotence index of the reduced polynomial at position ``b``.
        """
        cached = self._nu.get(b)
        if cached is not None:
            return cached
        shift = self.values[b]
        q = self.q(b)
        size = self.classes.count(self.classes[b])
        scale = self._norm_of(q)
        vector = q
        nu = 0
        for nu in range(size + 1):
            vector = self.apply(vector, shift)
            if self.arithmetic.exact:
                vanished = all(each == 0 for each in vector.values())
            else:
                bound = NILPOTENCE_TOLERANCE * scale * self._norm ** (nu + 1)
                vanished = self._norm_of(vector) <= bound
            if vanished:
                break
        self._nu[b] = nu
        return nu

    def expand(self, vector: dict[int, Scalar], top: int) -> dict[int, Scalar]:
        """
        Coefficients of a coordinate vector in the reduced polynomial basis.
        """
        remaining = dict(vector)
        scale = max(1.0, self._norm_of(vector))
        coefficients: dict[int, Scalar] = {}
        for rho in range(top, -1, -1):
            entry = remaining.get(rho)
            if entry is None or self._is_zero(entry, scale):
                continue
            coefficients[rho] = entry
            for g, q in self.q(rho).items():
                remaining[g] = remaining.get(g, 0) - entry * q
        return coefficients

    def polynomial(self, vector: dict[int, Scalar]) -> UPolynomial:
        return UPolynomial.from_terms(
            ((self.basis[g], value) for g, value in vector.items()),
            self.dec.s,
            self.arithmetic,
        )


_REDUCTIONS: WeakKeyDictionary[Any, _Reduction] = WeakKeyDictionary()
_REDUCTIONS_LOCK = Lock()


def _reduction_for(dec: SpectralDecomposition) -> _Reduction:
    with _REDUCTIONS_LOCK:
        reduction = _REDUCTIONS.get(dec)
        if reduction is None:
            reduction = _REDUCTIONS[dec] = _Reduction(dec)
        return reduction


def _reduced(alpha, dec, budget):
    alpha = MultiIndex(alpha)
    reduction = _reduction_for(dec)
    with reduction.lock:
        reduction.extend(alpha, budget=budget)
        b = reduction.index[alpha]
        reduction.q(b)
        reduction.nu(b)
    return reduction, b


@frozen
class ReducedPolynomial:
    """
    The projection ``Q`` of ``u^alpha`` onto its generalized eigenspace.

    Attributes:

        nu:

            the nilpotence index: ``(Phi - eigenvalue) ** (nu + 1) Q = 0``
            while ``(Phi - eigenvalue) ** nu Q != 0``

    """

    alpha: MultiIndex
    Q: UPolynomial
    nu: int
    eigenvalue: Any


def reduced_polynomial(
    alpha: Iterable[int],
    dec: SpectralDecomposition,
    budget: int = DEGREE_CAP,
) -> ReducedPolynomial:
    """
    Compute ``Q_alpha`` and its nilpotence index.

    Results are cached per decomposition; in exact arithmetic, repeated
    calls return identical polynomials.

    Raises:

        `urnlab.exceptions.ResonanceAmbiguity`:

            if two eigenvalue sums in the span straddle the clustering
            tolerance

        `urnlab.exceptions.BudgetExceeded`:

            if ``|alpha|`` exceeds the degree cap

    """
    reduction, b = _reduced(alpha, dec, budget)
    with reduction.lock:
        return ReducedPolynomial(
            alpha=reduction.basis[b],
            Q=reduction.polynomial(reduction.q(b)),
            nu=reduction.nu(b),
            eigenvalue=reduction.values[b],
        )


@frozen(eq=False)
class QBasis:
    """
    The reduced polynomials for every ``beta <= alpha``, as a matrix.

    Column ``b`` holds the monomial coordinates of ``Q_(basis[b])``; the
    matrix is unit upper triangular.
    """

    basis: tuple[MultiIndex, ...] = field(converter=tuple)
    matrix: np.ndarray = field(repr=False)
    condition: float

    @property
    def unit_triangular(self) -> bool:
        size = len(self.basis)
        return all(
            self.matrix[i, i] == 1
            and all(self.matrix[j, i] == 0 for j in range(i + 1, size))
            for i in range(size)
        )


def q_basis(
    alpha: Iterable[int],
    dec: SpectralDecomposition,
    budget: int = DEGREE_CAP,
) -> QBasis:
    reduction, top = _reduced(alpha, dec, budget)
    size = top + 1
    with reduction.lock:
        if dec.exact:
            matrix = np.full((size, size), Fraction(0), dtype=object)
        else:
            matrix = np.zeros((size, size), dtype=complex)
        for b in range(size):
            for g, value in reduction.q(b).items():
                matrix[g, b] = value
        basis = reduction.basis[:size]
    condition = float(np.linalg.cond(matrix.astype(complex)))
    return QBasis(basis=basis, matrix=matrix, condition=condition)


@frozen
class PowerSets:
    """
    The power sets attached to ``alpha``.

    Attributes:

        generators:

            the vectors ``delta_k - delta_(k - 1)`` for every ``k`` whose
            dual vector is not an eigen-covector

        A:

            the nonnegative powers reached from ``alpha`` by subtracting
            generators

        region:

            the nonnegative powers ``beta`` with ``alpha' - beta`` in the
            cone for some ``alpha'`` in ``A``

        K:

            the powers of the region below ``alpha`` sharing its eigenvalue
            sum

    """

    alpha: MultiIndex
    generators: tuple[MultiIndex, ...] = field(converter=tuple)
    A: frozenset[MultiIndex] = field(converter=frozenset)
    region: frozenset[MultiIndex] = field(converter=frozenset)
    K: frozenset[MultiIndex] = field(converter=frozenset)


def _generators(dec: SpectralDecomposition) -> list[MultiIndex]:
    s = dec.s
    return [
        MultiIndex.delta(s, k).minus(MultiIndex.delta(s, k - 1))
        for k, chained in enumerate(dec.chained)
        if chained
    ]


def _closure(alpha: MultiIndex, generators) -> set[MultiIndex]:
    reached = {alpha}
    frontier = [alpha]
    while frontier:
        current = frontier.pop()
        for generator in generators:
            candidate = current.minus(generator)
            if candidate.nonnegative and candidate not in reached:
                reached.add(candidate)
                frontier.append(candidate)
    return reached


def _below_in_cone(tops, degree: int, s: int) -> set[MultiIndex]:
    """
    Nonnegative ``beta`` with ``top - beta`` in the cone for some top.
    """
    cone = ConeSigma(s)
    return {
        beta
        for d in range(degree + 1)
        for beta in monomials(s, d)
        if any(cone.contains(top.minus(beta)) for top in tops)
    }


def compute_power_sets(
    alpha: Iterable[int],
    dec: SpectralDecomposition,
    budget: int = ENUMERATION_BUDGET,
) -> PowerSets:
    """
    Enumerate ``A_alpha``, the region below it, and ``K_alpha``.

    Every element of the region has degree at most ``|alpha|``, since the
    cone lies in the half-space of nonnegative coordinate sums.

    Raises:

        `urnlab.exceptions.BudgetExceeded`:

            if the number of candidate powers exceeds the budget

    """
    alpha = MultiIndex(alpha)
    s = dec.s
    candidates = comb(alpha.degree + s, s)
    if candidates > budget:
        raise BudgetExceeded("enumeration", requested=candidates, limit=budget)

    generators = _generators(dec)
    A = _closure(alpha, generators)
    region = _below_in_cone(A, alpha.degree, s)
    value = alpha.inner(dec)
    K = {
        beta for beta in region
        if order_less(beta, alpha)
        and dec.arithmetic.same(beta.inner(dec), value)
    }
    return PowerSets(
        alpha=alpha,
        generators=generators,
        A=A,
        region=region,
        K=K,
    )


def _significant(coefficients: dict, scale, arithmetic) -> dict:
    if arithmetic.exact:
        return {key: value for key, value in coefficients.items() if value}
    return {
        key: value for key, value in coefficients.items()
        if abs(value) > EXPANSION_TOLERANCE * scale
    }


@frozen
class StabilityReport:
    """
    Where ``(Phi - <lambda, alpha>) Q_alpha`` lands in the ``Q`` basis.

    Attributes:

        expansion:

            the nonzero coefficients, by power

        outside_K:

            coefficients on powers outside of ``K_alpha``

        outside_resonant:

            coefficients on powers which are not below ``alpha`` with the
            same eigenvalue sum

    """

    alpha: MultiIndex
    expansion: dict[MultiIndex, Any]
    K: frozenset[MultiIndex]
    outside_K: dict[MultiIndex, Any]
    outside_resonant: dict[MultiIndex, Any]

    @property
    def passed(self) -> bool:
        return not (self.outside_K or self.outside_resonant)


def verify_stability(
    alpha: Iterable[int],
    dec: SpectralDecomposition,
    budget: int = DEGREE_CAP,
) -> StabilityReport:
    reduction, b = _reduced(alpha, dec, budget)
    sets = compute_power_sets(reduction.basis[b], dec)
    with reduction.lock:
        q = reduction.q(b)
        image = reduction.apply(q, reduction.values[b])
        expansion = reduction.expand(image, b)
        scale = max(1.0, reduction._norm_of(q))
        significant = _significant(expansion, scale, dec.arithmetic)
        label = reduction.classes[b]
        by_power = {
            reduction.basis[rho]: value for rho, value in significant.items()
        }
        outside_resonant = {
            reduction.basis[rho]: value
            for rho, value in significant.items()
            if rho >= b or reduction.classes[rho] != label
        }
    return StabilityReport(
        alpha=reduction.basis[b],
        expansion=by_power,
        K=sets.K,
        outside_K={
            beta: value for beta, value in by_power.items()
            if beta not in sets.K
        },
        outside_resonant=outside_resonant,
    )


@frozen
class DecompositionReport:
    """
    The expansion ``u^alpha = sum q_(alpha, beta) Q_beta``.
    """

    alpha: MultiIndex
    coefficients: dict[MultiIndex, Any]
    region: frozenset[MultiIndex]
    outside: dict[MultiIndex, Any]

    @property
    def passed(self) -> bool:
        return not self.outside


def decomposition_coefficients(
    alpha: Iterable[int],
    dec: SpectralDecomposition,
    budget: int = DEGREE_CAP,
) -> DecompositionReport:
    """
    Expand ``u^alpha`` in reduced polynomials, checking that only powers in
    the region below ``A_alpha`` appear.
    """
    reduction, b = _reduced(alpha, dec, budget)
    sets = compute_power_sets(reduction.basis[b], dec)
    with reduction.lock:
        expansion = reduction.expand({b: dec.arithmetic.one}, b)
        coefficients = {
            reduction.basis[rho]: value
            for rho, value in _significant(
                expansion, 1.0, dec.arithmetic,
            ).items()
        }
    return DecompositionReport(
        alpha=reduction.basis[b],
        coefficients=coefficients,
        region=sets.region,
        outside={
            beta: value for beta, value in coefficients.items()
            if beta not in sets.region
        },
    )


@frozen
class RegionStabilityReport:
    """
    Whether the span of ``u^beta`` over the region below ``A_alpha`` is
    mapped into itself, and spanned by the corresponding ``Q_beta``.
    """

    alpha: MultiIndex
    region: frozenset[MultiIndex]
    leaks: dict[MultiIndex, frozenset[MultiIndex]]
    q_leaks: dict[MultiIndex, frozenset[MultiIndex]]

    @property
    def passed(self) -> bool:
        return not (self.leaks or self.q_leaks)


def f_alpha_stability(
    alpha: Iterable[int],
    dec: SpectralDecomposition,
    budget: int = DEGREE_CAP,
) -> RegionStabilityReport:
    sets = compute_power_sets(alpha, dec)
    region = sets.region
    leaks, q_leaks = {}, {}
    for beta in region:
        image = phi_apply(UPolynomial.monomial(beta, dec.arithmetic), dec)
        outside = frozenset(gamma for gamma, _ in image if gamma not in region)
        if outside:
            leaks[beta] = outside
        reduced = reduced_polynomial(beta, dec, budget=budget)
        outside = frozenset(
            gamma for gamma, _ in reduced.Q if gamma not in region
        )
        if outside:
            q_leaks[beta] = outside
    return RegionStabilityReport(
        alpha=sets.alpha,
        region=region,
        leaks=leaks,
        q_leaks=q_leaks,
    )


def m_functional(
    gamma: Sequence[int],
    block: JordanBlock | Sequence[int],
) -> Fraction:
    """
    The linear functional weighting position ``i`` of a block by ``i + 1/2``.

    Raises:

        `urnlab.exceptions.UnsupportedSupport`:

            if ``gamma`` is supported outside of index 0 and the block

    """
    indices = list(getattr(block, "indices", block))
    allowed = {0, *indices}
    support = {k for k, each in enumerate(gamma) if each}
    if not support <= allowed:
        raise UnsupportedSupport(gamma, allowed)
    return sum(
        (Fraction(2 * position + 1, 2) * gamma[k]
         for position, k in enumerate(indices)),
        Fraction(0),
    )


def _compare(arithmetic):
    def le(one, two):
        return one <= two or arithmetic.same(one, two)

    def eq(one, two):
        return arithmetic.same(one, two)

    return le, eq


@frozen
class NilpotenceEntry:
    alpha: MultiIndex
    block: int
    nu: int
    M: Fraction
    block_bound: Fraction
    class_bound: Fraction

    @property
    def passed(self) -> bool:
        return (
            self.nu <= self.M <= self.block_bound
            and self.nu <= self.class_bound
        )


@frozen
class NilpotenceReport:
    """
    Nilpotence indices of quasi-monogenic critical powers against their
    bounds.
    """

    entries: tuple[NilpotenceEntry, ...] = field(converter=tuple)

    @property
    def violations(self) -> list[NilpotenceEntry]:
        return [entry for entry in self.entries if not entry.passed]

    @property
    def passed(self) -> bool:
        return not self.violations


def _critical_blocks(dec: SpectralDecomposition) -> list[JordanBlock]:
    return [
        block for block in dec.blocks[1:] if dec.is_critical(block.start)
    ]


def _quasi_monogenic(dec, block, cap) -> list[MultiIndex]:
    s = dec.s
    allowed = [0, *block.indices]
    powers = []
    for degree in range(cap + 1):
        for gamma in monomials(len(allowed), degree):
            values = [0] * s
            for position, k in enumerate(allowed):
                values[k] = gamma[position]
            powers.append(MultiIndex(values))
    return powers


def check_nilpotence_bounds(
    dec: SpectralDecomposition,
    cap: int = DEGREE_CAP,
) -> NilpotenceReport:
    """
    Check ``nu_alpha <= M(alpha) <= (r + 1/2) |alpha|`` and
    ``nu_alpha <= (d + 1/2) |alpha|`` for quasi-monogenic critical powers.

    Raises:

        `urnlab.exceptions.NotSmall`:

            for a large urn

    """
    urn_class = classify(dec)
    if urn_class.kind is Kind.LARGE:
        raise NotSmall(urn_class.sigma2, what="checking nilpotence bounds")
    d = urn_class.d
    entries = []
    for block in _critical_blocks(dec):
        r = block.size - 1
        for alpha in _quasi_monogenic(dec, block, cap):
            reduced = reduced_polynomial(alpha, dec, budget=cap)
            entries.append(
                NilpotenceEntry(
                    alpha=alpha,
                    block=block.start,
                    nu=reduced.nu,
                    M=m_functional(alpha, block),
                    block_bound=Fraction(2 * r + 1, 2) * alpha.degree,
                    class_bound=Fraction(2 * d + 1, 2) * alpha.degree,
                ),
            )
    return NilpotenceReport(entries=entries)


@frozen
class LemmaViolation:
    lemma: str
    alpha: MultiIndex
    beta: MultiIndex | None
    detail: str


@frozen
class LemmaReport:
    """
    Counts of checked instances per statement, and every violation found.
    """

    checked: dict[str, int]
    violations: tuple[LemmaViolation, ...] = field(converter=tuple)

    @property
    def passed(self) -> bool:
        return not self.violations


class _LemmaChecker:

    def __init__(self, dec: SpectralDecomposition, cap: int):
        self.dec = dec
        self.cap = cap
        self.arithmetic = dec.arithmetic
        self.le, self.eq = _compare(dec.arithmetic)
        self.checked: dict[str, int] = {}
        self.violations: list[LemmaViolation] = []
        self.critically_small = classify(dec).kind is Kind.CRITICALLY_SMALL
        self.blocks = _critical_blocks(dec)

    def record(self, lemma, alpha, beta, ok, detail=""):
        self.checked[lemma] = self.checked.get(lemma, 0) + 1
        if not ok:
            self.violations.append(
                LemmaViolation(
                    lemma=lemma, alpha=alpha, beta=beta, detail=detail,
                ),
            )

    def re(self, power: MultiIndex):
        return self.arithmetic.real(power.inner(self.dec))

    def run(self) -> LemmaReport:
        for degree in range(self.cap + 1):
            for alpha in monomials(self.dec.s, degree):
                self.check(alpha)
        self.check_m_values()
        self.check_remark()
        return LemmaReport(checked=self.checked, violations=self.violations)

    def check(self, alpha: MultiIndex):
        dec = self.dec
        sets = compute_power_sets(alpha, dec)
        half = Fraction(alpha.degree, 2)

        if alpha.is_strictly_small(dec):
            for beta in sets.region:
                value = self.re(beta)
                principal = MultiIndex.delta(dec.s, 0, alpha.degree // 2)
                ok = self.le(value, half) and (
                    not self.eq(value, half)
                    or (alpha.degree % 2 == 0 and beta == principal)
                )
                self.record("strictly small powers", alpha, beta, ok,
                            f"Re<lambda, beta> = {value}")

        if not (self.critically_small and alpha.is_critical(dec)):
            return
        target = self.re(alpha)
        for beta in sets.region:
            value = self.re(beta)
            ok = self.le(value, target) and (
                not self.eq(value, target) or beta.is_critical(dec)
            )
            self.record("critical powers", alpha, beta, ok,
                        f"Re<lambda, beta> = {value}")
        for beta in sets.K:
            self.record("critical resonances", alpha, beta,
                        beta.is_critical(dec))

        reduction, b = _reduced(alpha, dec, self.cap)
        with reduction.lock:
            nu = reduction.nu(b)
            below = [
                reduction.nu(reduction.index[beta]) for beta in sets.K
            ]
        bound = 1 + max(below) if below else 0
        self.record("nilpotence recursion", alpha, None, nu <= bound,
                    f"nu = {nu}, bound = {bound}")

        for block in alpha.critical_blocks(dec, allow_principal=True):
            allowed = {0, *block.indices}
            M = m_functional(alpha, block)
            for other in sets.A - {alpha}:
                ok = (
                    other.is_critical(dec)
                    and other.support <= allowed
                    and m_functional(other, block) <= M - 1
                )
                self.record("subtracted generators", alpha, other, ok)
            for beta in _below_in_cone([alpha], alpha.degree, dec.s):
                if beta == alpha or not self.eq(self.re(beta), target):
                    continue
                ok = (
                    beta.is_critical(dec)
                    and beta.support <= allowed
                    and m_functional(beta, block) <= M - 1
                )
                self.record("cone neighbours", alpha, beta, ok)
            self.record(
                "nilpotence bound",
                alpha,
                None,
                nu <= M <= Fraction(2 * block.size - 1, 2) * alpha.degree,
                f"nu = {nu}, M = {M}",
            )

    def check_m_values(self):
        s = self.dec.s
        for block in self.blocks:
            for position, k in enumerate(block.indices):
                doubled = MultiIndex.delta(s, k, 2).minus(
                    MultiIndex.delta(s, 0),
                )
                self.record(
                    "functional values",
                    doubled,
                    None,
                    m_functional(doubled, block) == 2 * position + 1,
                )
                if position:
                    step = MultiIndex.delta(s, k).minus(
                        MultiIndex.delta(s, k - 1),
                    )
                    self.record(
                        "functional values",
                        step,
                        None,
                        m_functional(step, block) == 1,
                    )

    def check_remark(self):
        if self.cap < 2:
            return
        for block in self.blocks:
            eigenvalue = complex(block.eigenvalue)
            if abs(eigenvalue.imag) <= self.arithmetic.tolerance:
                continue
            alpha = MultiIndex.delta(self.dec.s, block.start, 2)
            nu = reduced_polynomial(alpha, self.dec, budget=self.cap).nu
            self.record("non-real critical squares", alpha, None, nu == 0,
                        f"nu = {nu}")


def check_lemmas(
    dec: SpectralDecomposition,
    cap: int = 6,
) -> LemmaReport:
    """
    Check the inequalities satisfied by powers below the cone, by
    enumeration over every power of degree at most ``cap``.

    Strictly small powers have ``Re <lambda, beta> <= |alpha| / 2`` over
    their region, with equality only at ``(|alpha| / 2) delta_1``. For
    critically small urns, critical powers dominate their region with
    equality only at critical powers, members of ``K_alpha`` are critical,
    and quasi-monogenic critical powers strictly decrease the weighting
    functional along generators and cone neighbours of equal real part.
    """
    return _LemmaChecker(dec, cap).run()
