"""
Polynomials in the dual coordinates ``u_1, ..., u_s`` and the transition
operator acting on them.

For a function ``f`` on mass vectors, the transition operator is ::

    Phi(f)(v) = sum_k l_k(v) (f(v + w_k) - f(v))

where ``l_k`` is the ``k``-th coordinate and ``w_k`` the ``k``-th replacement
row. It maps each span of monomials ``u^beta`` for ``beta`` up to some power
into itself, and in the order used here its matrix on such a span is upper
triangular with ``<lambda, beta>`` on the diagonal.
"""
from __future__ import annotations

from itertools import combinations_with_replacement
from math import comb, prod
from threading import Lock
from typing import TYPE_CHECKING, Any
from weakref import WeakKeyDictionary
import logging

from attrs import field, frozen
from joblib import Parallel, delayed
from rpds import HashTrieMap
import numpy as np

from urnlab.exceptions import BudgetExceeded, StabilityViolation

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Mapping

    from urnlab._arith import Arithmetic
    from urnlab._typing import Scalar
    from urnlab.spectral import JordanBlock, SpectralDecomposition

logger = logging.getLogger(__name__)

#: the largest total degree `basis_upto` will enumerate by default
DEGREE_BUDGET = 12
#: coefficients of a transition image outside the expected span beyond this
#: (relative to the largest coefficient) are reported as leaks
LEAK_TOLERANCE = 1e-9


class MultiIndex(tuple):
    """
    A power ``alpha``: a tuple of nonnegative integers, one per colour.

    Predicates which depend on eigenvalues take the decomposition they refer
    to, since ``alpha`` itself only records exponents.
    """

    __slots__ = ()

    def __new__(cls, values: Iterable[int] = ()):
        return super().__new__(cls, (int(each) for each in values))

    def __repr__(self):
        return f"MultiIndex({tuple(self)!r})"

    @classmethod
    def zero(cls, s: int) -> MultiIndex:
        return cls([0] * s)

    @classmethod
    def delta(cls, s: int, k: int, c: int = 1) -> MultiIndex:
        """
        ``c`` times the ``k``-th unit vector.
        """
        values = [0] * s
        values[k] = c
        return cls(values)

    @property
    def degree(self) -> int:
        return sum(self)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(k for k, each in enumerate(self) if each)

    @property
    def nonnegative(self) -> bool:
        return all(each >= 0 for each in self)

    def plus(self, other: Iterable[int]) -> MultiIndex:
        return MultiIndex(a + b for a, b in zip(self, other))

    def minus(self, other: Iterable[int]) -> MultiIndex:
        return MultiIndex(a - b for a, b in zip(self, other))

    def times(self, c: int) -> MultiIndex:
        return MultiIndex(c * each for each in self)

    def key(self):
        """
        The sort key of the degree-antialphabetic order.
        """
        return self.degree, tuple(reversed(self))

    def inner(self, dec: SpectralDecomposition) -> Scalar:
        """
        ``<lambda, alpha> = sum_k alpha_k lambda_k``.
        """
        total = dec.arithmetic.zero
        for k, each in enumerate(self):
            if each:
                total += each * dec.eigenvalues[k]
        return total

    def is_small(self, dec: SpectralDecomposition) -> bool:
        return all(dec.is_small(k) for k in self.support)

    def is_strictly_small(self, dec: SpectralDecomposition) -> bool:
        return all(dec.is_strictly_small(k) for k in self.support)

    def is_critical(self, dec: SpectralDecomposition) -> bool:
        """
        Whether only ``u_1`` and critical coordinates appear in ``u^alpha``.
        """
        return all(k == 0 or dec.is_critical(k) for k in self.support)

    def is_strictly_critical(self, dec: SpectralDecomposition) -> bool:
        return all(k != 0 and dec.is_critical(k) for k in self.support)

    def critical_blocks(
        self,
        dec: SpectralDecomposition,
        allow_principal: bool = False,
    ) -> list[JordanBlock]:
        """
        The critical Jordan blocks containing the support of ``alpha``.

        With ``allow_principal``, index 0 is ignored, so that a power
        ``c delta_1`` belongs to every critical block.
        """
        support = self.support - {0} if allow_principal else self.support
        return [
            block for block in dec.blocks[1:]
            if dec.is_critical(block.start)
            and all(k in block for k in support)
        ]

    def is_monogenic(self, dec: SpectralDecomposition) -> bool:
        return bool(self.critical_blocks(dec))

    def is_quasi_monogenic(self, dec: SpectralDecomposition) -> bool:
        return bool(self.critical_blocks(dec, allow_principal=True))


def order_less(alpha: Iterable[int], beta: Iterable[int]) -> bool:
    """
    The degree-antialphabetic order.

    Lower degree comes first. At equal degree, ``alpha < beta`` iff at the
    last position where they differ ``alpha`` is smaller.
    """
    return MultiIndex(alpha).key() < MultiIndex(beta).key()


def monomials(s: int, degree: int) -> list[MultiIndex]:
    """
    Every power of the given total degree, in increasing order.
    """
    powers = []
    for chosen in combinations_with_replacement(range(s), degree):
        values = [0] * s
        for k in chosen:
            values[k] += 1
        powers.append(MultiIndex(values))
    return sorted(powers, key=MultiIndex.key)


def basis_upto(
    alpha: Iterable[int],
    budget: int = DEGREE_BUDGET,
) -> list[MultiIndex]:
    """
    Every power ``beta <= alpha``, in increasing order.

    Raises:

        `urnlab.exceptions.BudgetExceeded`:

            if ``|alpha|`` is above the degree budget

    """
    alpha = MultiIndex(alpha)
    if alpha.degree > budget:
        raise BudgetExceeded("degree", requested=alpha.degree, limit=budget)
    cap = alpha.key()
    return [
        beta
        for degree in range(alpha.degree + 1)
        for beta in monomials(len(alpha), degree)
        if beta.key() <= cap
    ]


def _convert_terms(terms) -> HashTrieMap:
    if isinstance(terms, HashTrieMap):
        return terms
    return HashTrieMap({MultiIndex(k): v for k, v in dict(terms).items()})


@frozen
class UPolynomial:
    """
    A polynomial ``sum c_beta u^beta`` with no stored zero coefficients.

    Use `UPolynomial.from_terms` (or `monomial` / `constant`) to build one,
    which prunes zero coefficients according to the arithmetic.
    """

    s: int
    arithmetic: Arithmetic = field(repr=False)
    terms: HashTrieMap = field(converter=_convert_terms, factory=HashTrieMap)

    @classmethod
    def from_terms(
        cls,
        terms: Mapping | Iterable[tuple[Any, Scalar]],
        s: int,
        arithmetic: Arithmetic,
    ) -> UPolynomial:
        pairs = terms.items() if hasattr(terms, "items") else terms
        collected: dict[MultiIndex, Scalar] = {}
        for beta, coefficient in pairs:
            beta = MultiIndex(beta)
            collected[beta] = collected.get(beta, 0) + coefficient
        kept = {
            beta: arithmetic.convert(coefficient)
            for beta, coefficient in collected.items()
            if not arithmetic.is_zero(coefficient)
        }
        return cls(s=s, arithmetic=arithmetic, terms=kept)

    @classmethod
    def monomial(
        cls,
        beta: Iterable[int],
        arithmetic: Arithmetic,
        coefficient: Scalar = 1,
    ) -> UPolynomial:
        beta = MultiIndex(beta)
        return cls.from_terms({beta: coefficient}, len(beta), arithmetic)

    @classmethod
    def constant(cls, value: Scalar, s: int, arithmetic: Arithmetic):
        return cls.from_terms({MultiIndex.zero(s): value}, s, arithmetic)

    def __len__(self):
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[MultiIndex, Scalar]]:
        """
        Terms in increasing order of their powers.
        """
        for beta in sorted(self.terms.keys(), key=MultiIndex.key):
            yield beta, self.terms[beta]

    def __bool__(self):
        return bool(len(self.terms))

    def coefficient(self, beta: Iterable[int]) -> Scalar:
        return self.terms.get(MultiIndex(beta), self.arithmetic.zero)

    @property
    def degree(self) -> int:
        """
        The largest total degree of a term (-1 for the zero polynomial).
        """
        return max((beta.degree for beta in self.terms.keys()), default=-1)

    @property
    def leading(self) -> MultiIndex | None:
        """
        The largest power in the polynomial, in the order.
        """
        return max(self.terms.keys(), key=MultiIndex.key, default=None)

    def norm(self) -> float:
        return max((abs(each) for each in self.terms.values()), default=0)

    def _combine(self, other: UPolynomial, sign: int) -> UPolynomial:
        combined = dict(self.terms.items())
        for beta, coefficient in other.terms.items():
            combined[beta] = combined.get(beta, 0) + sign * coefficient
        return UPolynomial.from_terms(combined, self.s, self.arithmetic)

    def __add__(self, other: UPolynomial) -> UPolynomial:
        return self._combine(other, 1)

    def __sub__(self, other: UPolynomial) -> UPolynomial:
        return self._combine(other, -1)

    def __neg__(self) -> UPolynomial:
        return self.scale(-1)

    def scale(self, factor: Scalar) -> UPolynomial:
        return UPolynomial.from_terms(
            ((beta, factor * each) for beta, each in self.terms.items()),
            self.s,
            self.arithmetic,
        )

    def __mul__(self, other: UPolynomial | Scalar) -> UPolynomial:
        if not isinstance(other, UPolynomial):
            return self.scale(other)
        product: dict[MultiIndex, Scalar] = {}
        for beta, a in self.terms.items():
            for gamma, b in other.terms.items():
                key = beta.plus(gamma)
                product[key] = product.get(key, 0) + a * b
        return UPolynomial.from_terms(product, self.s, self.arithmetic)

    __rmul__ = __mul__

    def conjugate(self) -> UPolynomial:
        """
        Conjugate every coefficient (the identity in exact arithmetic).
        """
        if self.arithmetic.exact:
            return self
        return UPolynomial.from_terms(
            ((beta, each.conjugate()) for beta, each in self.terms.items()),
            self.s,
            self.arithmetic,
        )

    def evaluate_at(self, coordinates) -> Scalar:
        """
        Evaluate at given dual coordinates ``(u_1(x), ..., u_s(x))``.
        """
        total = self.arithmetic.zero
        for beta, coefficient in self.terms.items():
            total += coefficient * prod(
                coordinates[j] ** each for j, each in enumerate(beta) if each
            )
        return total


def evaluate(f: UPolynomial, x, dec: SpectralDecomposition) -> Scalar:
    """
    Evaluate ``f`` at the mass vector ``x``.
    """
    return f.evaluate_at(dec.coordinates(x))


def linear_form(dec: SpectralDecomposition, k: int) -> UPolynomial:
    """
    The coordinate ``l_k = sum_j l_k(v_j) u_j`` as a polynomial.
    """
    return UPolynomial.from_terms(
        (
            (MultiIndex.delta(dec.s, j), dec.V[k, j])
            for j in range(dec.s)
        ),
        dec.s,
        dec.arithmetic,
    )


class _TransitionCache:
    """
    Transition images of monomials, per decomposition.
    """

    def __init__(self):
        self._images: WeakKeyDictionary[Any, dict[MultiIndex, UPolynomial]]
        self._images = WeakKeyDictionary()
        self._lock = Lock()

    def images_for(self, dec) -> dict[MultiIndex, UPolynomial]:
        with self._lock:
            images = self._images.get(dec)
            if images is None:
                images = self._images[dec] = {}
            return images

    def image(self, beta: MultiIndex, dec) -> UPolynomial:
        images = self.images_for(dec)
        image = images.get(beta)
        if image is None:
            image = images[beta] = _transition_of_monomial(beta, dec)
        return image


_CACHE = _TransitionCache()


def _transition_of_monomial(beta: MultiIndex, dec) -> UPolynomial:
    """
    Expand ``Phi(u^beta)``.

    With ``D_k = prod_j (u_j + W[j, k]) ** beta_j - u^beta`` and
    ``l_k = sum_i V[k, i] u_i``, the image is ``sum_i u_i G_i`` where
    ``G_i = sum_k V[k, i] D_k``.
    """
    s, arithmetic = dec.s, dec.arithmetic
    W, V = dec.W, dec.V
    lower = [
        MultiIndex(each)
        for each in np.ndindex(*(b + 1 for b in beta))
        if tuple(each) != tuple(beta)
    ]
    image: dict[MultiIndex, Scalar] = {}
    for k in range(s):
        shifts = {}
        for a in lower:
            coefficient = arithmetic.one
            for j, (b, c) in enumerate(zip(beta, a)):
                if b != c:
                    coefficient *= comb(b, c) * W[j, k] ** (b - c)
            if not arithmetic.is_zero(coefficient):
                shifts[a] = coefficient
        for i in range(s):
            weight = V[k, i]
            if arithmetic.is_zero(weight):
                continue
            delta = MultiIndex.delta(s, i)
            for a, coefficient in shifts.items():
                key = a.plus(delta)
                image[key] = image.get(key, 0) + weight * coefficient
    return UPolynomial.from_terms(image, s, arithmetic)


def phi_apply(f: UPolynomial, dec: SpectralDecomposition) -> UPolynomial:
    """
    Apply the transition operator to a polynomial.
    """
    image: dict[MultiIndex, Scalar] = {}
    for beta, coefficient in f.terms.items():
        for gamma, each in _CACHE.image(beta, dec).terms.items():
            image[gamma] = image.get(gamma, 0) + coefficient * each
    return UPolynomial.from_terms(image, f.s, f.arithmetic)


def phi_shifted(
    f: UPolynomial,
    eigenvalue: Scalar,
    dec: SpectralDecomposition,
) -> UPolynomial:
    """
    ``(Phi - eigenvalue) f``.
    """
    return phi_apply(f, dec) - f.scale(eigenvalue)


@frozen(eq=False)
class PhiMatrix:
    """
    The transition operator on the span of ``u^beta`` for ``beta <= alpha``.

    ``columns[b]`` maps row positions to the coefficients of
    ``Phi(u^basis[b])``; every row position is at most ``b``.
    """

    alpha: MultiIndex
    basis: tuple[MultiIndex, ...] = field(converter=tuple)
    columns: tuple[dict[int, Scalar], ...] = field(converter=tuple, repr=False)
    arithmetic: Arithmetic = field(repr=False)

    def __len__(self):
        return len(self.basis)

    @property
    def index(self) -> dict[MultiIndex, int]:
        return {beta: position for position, beta in enumerate(self.basis)}

    @property
    def diagonal(self) -> list[Scalar]:
        return [
            column.get(b, self.arithmetic.zero)
            for b, column in enumerate(self.columns)
        ]

    @property
    def matrix(self) -> np.ndarray:
        """
        The matrix as a dense array (``object`` dtype in exact mode).
        """
        size = len(self.basis)
        if self.arithmetic.exact:
            dense = np.full((size, size), self.arithmetic.zero, dtype=object)
        else:
            dense = np.zeros((size, size), dtype=complex)
        for b, column in enumerate(self.columns):
            for g, value in column.items():
                dense[g, b] = value
        return dense


def _column(beta, position, index, dec):
    image = _CACHE.image(beta, dec)
    scale = max(1.0, image.norm())
    column, leaks = {}, {}
    for gamma, coefficient in image.terms.items():
        row = index.get(gamma)
        if row is None or row > position:
            if not dec.arithmetic.exact and abs(coefficient) <= (
                LEAK_TOLERANCE * scale
            ):
                continue
            leaks[gamma] = coefficient
        else:
            column[row] = coefficient
    return column, leaks


def phi_matrix(
    alpha: Iterable[int],
    dec: SpectralDecomposition,
    budget: int = DEGREE_BUDGET,
    n_jobs: int = 1,
) -> PhiMatrix:
    """
    The matrix of the transition operator on ``span{u^beta : beta <= alpha}``.

    Arguments:

        n_jobs:

            the number of threads computing columns

    Raises:

        `urnlab.exceptions.StabilityViolation`:

            if some ``Phi(u^beta)`` has a coefficient on a power above
            ``beta``

    """
    alpha = MultiIndex(alpha)
    basis = basis_upto(alpha, budget=budget)
    index = {beta: position for position, beta in enumerate(basis)}
    if n_jobs == 1:
        results = [
            _column(beta, position, index, dec)
            for position, beta in enumerate(basis)
        ]
    else:
        results = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_column)(beta, position, index, dec)
            for position, beta in enumerate(basis)
        )
    leaks = {gamma: c for _, leaked in results for gamma, c in leaked.items()}
    if leaks:
        raise StabilityViolation(alpha, leaks)
    logger.debug(
        "built transition matrix of size %d below %s", len(basis), alpha,
    )
    return PhiMatrix(
        alpha=alpha,
        basis=basis,
        columns=[column for column, _ in results],
        arithmetic=dec.arithmetic,
    )
