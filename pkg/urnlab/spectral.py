"""
Eigenstructure of the replacement operator and the urn classification.

The replacement operator ``A`` acts on mass vectors as ``R`` transposed
(after normalizing so that ``m = 1``). A decomposition fixes a Jordan basis
``v_1, ..., v_s`` of ``A`` together with its dual basis ``u_1, ..., u_s``.
Inside a Jordan block with indices ``k0, ..., k0 + r`` the chain runs
``A v_k = lambda v_k + v_(k + 1)``, so the last vector of a block is an
eigenvector while the first dual vector is an eigen-covector, and for every
later index ``u_k A = lambda u_k + u_(k - 1)``.
"""
from __future__ import annotations

from enum import Enum
from typing import TYPE_CHECKING, Any
import logging
import warnings

from attrs import field, frozen
from scipy import linalg
import numpy as np
import sympy

from urnlab._arith import (
    AMBIGUITY_FACTOR,
    CLUSTER_TOLERANCE,
    EXACT,
    FLOAT,
    Arithmetic,
    to_fraction,
)
from urnlab.exceptions import (
    IllConditioned,
    NearCriticalWarning,
    UrnError,
)

if TYPE_CHECKING:
    from collections.abc import Sequence

    from urnlab._typing import Number, Scalar
    from urnlab.urn import UrnSpec

logger = logging.getLogger(__name__)

#: singular values below this (times ``max(1, |A|) ** p``) count as zero
RANK_THRESHOLD = 1e-9
#: allowed residual of the duality and chain relations in float mode
RELATION_TOLERANCE = 1e-8

ARITHMETIC_MODES = ("auto", "rational", "float")


@frozen
class JordanBlock:
    """
    One Jordan block: an eigenvalue and a contiguous range of indices.
    """

    eigenvalue: Scalar
    start: int
    size: int

    @property
    def indices(self) -> range:
        return range(self.start, self.start + self.size)

    def __contains__(self, k: int) -> bool:
        return self.start <= k < self.start + self.size


@frozen(eq=False)
class SpectralDecomposition:
    """
    A Jordan-adapted pair of dual bases for an urn's replacement operator.

    Attributes:

        urn:

            the normalized (``m = 1``) specification that was decomposed

        scale:

            the balance constant of the specification as given

        arithmetic:

            exact (`fractions.Fraction` entries) or float (complex entries)

        eigenvalues:

            ``lambda_k`` for each index, ``lambda_1 = 1`` first

        blocks:

            the Jordan blocks, the block of 1 first

        V:

            the matrix whose columns are ``v_k``

        U:

            the matrix whose rows are ``u_k``, with ``U V = I``

    """

    urn: UrnSpec
    scale: Number
    arithmetic: Arithmetic
    eigenvalues: tuple[Scalar, ...] = field(converter=tuple)
    blocks: tuple[JordanBlock, ...] = field(converter=tuple)
    V: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)

    @property
    def s(self) -> int:
        return len(self.eigenvalues)

    @property
    def exact(self) -> bool:
        return self.arithmetic.exact

    @property
    def A(self) -> np.ndarray:
        """
        The replacement operator in coordinates, i.e. normalized ``R.T``.
        """
        return _array(self.urn.R, self.arithmetic).T

    @property
    def W(self) -> np.ndarray:
        """
        ``W[j, k] = u_j(w_k)``, the dual coordinates of the replacement rows.
        """
        return self.U @ self.A

    @property
    def v1(self) -> np.ndarray:
        return self.V[:, 0]

    @property
    def chained(self) -> tuple[bool, ...]:
        """
        For each index, whether ``u_k A = lambda_k u_k + u_(k - 1)``.
        """
        flags = [False] * self.s
        for block in self.blocks:
            for k in block.indices[1:]:
                flags[k] = True
        return tuple(flags)

    def block_of(self, k: int) -> JordanBlock:
        for block in self.blocks:
            if k in block:
                return block
        raise IndexError(k)

    def jordan_matrix(self) -> np.ndarray:
        """
        The matrix ``J`` with ``U A = J U``: eigenvalues on the diagonal,
        ones just below it inside each block.
        """
        J = _array(np.zeros((self.s, self.s), dtype=int), self.arithmetic)
        for k, eigenvalue in enumerate(self.eigenvalues):
            J[k, k] = eigenvalue
        for k, chained in enumerate(self.chained):
            if chained:
                J[k, k - 1] = self.arithmetic.one
        return J

    def coordinates(self, x) -> np.ndarray:
        """
        ``(u_1(x), ..., u_s(x))`` for a mass vector ``x``.
        """
        return self.U @ _array(x, self.arithmetic)

    def real_part(self, k: int):
        return self.arithmetic.real(self.eigenvalues[k])

    def is_critical(self, k: int) -> bool:
        """
        Whether ``Re lambda_k = 1/2`` (up to the clustering tolerance).
        """
        return self.arithmetic.same(self.real_part(k), self.arithmetic.half)

    def is_small(self, k: int) -> bool:
        half = self.arithmetic.half
        return self.real_part(k) <= half or self.is_critical(k)

    def is_strictly_small(self, k: int) -> bool:
        return self.is_small(k) and not self.is_critical(k)

    def residuals(self) -> tuple[Any, Any]:
        """
        The duality residual ``U V - I`` and the chain residual ``U A - J U``.
        """
        identity = _array(np.eye(self.s, dtype=int), self.arithmetic)
        duality = self.U @ self.V - identity
        chain = self.U @ self.A - self.jordan_matrix() @ self.U
        if self.exact:
            return max(abs(each) for each in duality.flat), max(
                abs(each) for each in chain.flat
            )
        return np.abs(duality).max(), np.abs(chain).max()


def _array(values, arithmetic: Arithmetic) -> np.ndarray:
    if arithmetic.exact:
        return np.array(
            [
                [to_fraction(each) for each in row]
                if np.ndim(row) else to_fraction(row)
                for row in values
            ],
            dtype=object,
        )
    return np.array(values, dtype=complex)


def _block_order(eigenvalue, size: int, arithmetic: Arithmetic):
    value = complex(eigenvalue)
    principal = 0 if arithmetic.same(eigenvalue, arithmetic.one) else 1
    return principal, -value.real, -size, -value.imag


def _rational_matrix(rows) -> sympy.Matrix:
    return sympy.Matrix(
        [
            [
                sympy.Rational(value.numerator, value.denominator)
                for value in (to_fraction(each) for each in row)
            ]
            for row in rows
        ],
    )


def _splits_over_rationals(matrix: sympy.Matrix) -> bool:
    x = sympy.Symbol("x")
    _, factors = sympy.factor_list(matrix.charpoly(x).as_expr(), x)
    return all(sympy.degree(factor, x) == 1 for factor, _ in factors)


def _exact_chains(matrix: sympy.Matrix):
    """
    Jordan chains from sympy, reversed so that eigenvectors come last.
    """
    P, J = matrix.jordan_form()
    s = matrix.rows
    chains = []
    start = 0
    while start < s:
        end = start + 1
        while end < s and J[end - 1, end] == 1:
            end += 1
        vectors = [
            [to_fraction(each) for each in P[:, i]]
            for i in reversed(range(start, end))
        ]
        chains.append((to_fraction(J[start, start]), vectors))
        start = end
    return chains


def _cluster(values, tolerance: float) -> list[tuple[complex, int]]:
    clusters: list[list[complex]] = []
    for value in sorted(values, key=lambda z: (-z.real, -z.imag)):
        for cluster in clusters:
            if abs(np.mean(cluster) - value) <= tolerance:
                cluster.append(value)
                break
        else:
            clusters.append([value])
    centers = []
    for cluster in clusters:
        center = complex(np.mean(cluster))
        if abs(center - 1) <= tolerance:
            center = 1 + 0j
        elif abs(center.imag) <= tolerance:
            center = complex(center.real, 0)
        centers.append((center, len(cluster)))
    return centers


def _float_chains(A, eigenvalue, multiplicity, threshold):
    """
    Jordan chains for one clustered eigenvalue from ranks of powers.

    Each chain is ``[x, N x, N^2 x, ...]`` with ``N = A - eigenvalue``,
    chosen longest first, with ``x`` spanning a complement of the lower
    kernel and of the chains already chosen.
    """
    s = A.shape[0]
    N = A - eigenvalue * np.eye(s)
    scale = max(1.0, linalg.norm(A, 2))
    kernels = [np.zeros((s, 0), dtype=complex)]
    power = np.eye(s, dtype=complex)
    for p in range(1, multiplicity + 1):
        power = power @ N
        cutoff = threshold * scale ** p
        _, sigma, vh = linalg.svd(power)
        near = sigma[(sigma > cutoff / 1e3) & (sigma < cutoff * 1e3)]
        if near.size:
            raise IllConditioned(eigenvalue, near, cutoff)
        nullity = int(np.sum(sigma <= cutoff))
        kernels.append(vh[s - nullity:].conj().T)
        if nullity == multiplicity:
            break
    else:
        raise IllConditioned(eigenvalue, sigma, cutoff)

    top = len(kernels) - 1
    at_least = {
        p: kernels[p].shape[1] - kernels[p - 1].shape[1]
        for p in range(1, top + 1)
    }
    at_least[top + 1] = 0

    chains: list[list[np.ndarray]] = []
    for p in range(top, 0, -1):
        needed = at_least[p] - at_least[p + 1]
        if not needed:
            continue
        spanning = [kernels[p - 1], *(
            chain[len(chain) - p][:, np.newaxis] for chain in chains
        )]
        span = np.hstack(spanning)
        basis = linalg.orth(span) if span.shape[1] else span
        candidates = kernels[p] - basis @ (basis.conj().T @ kernels[p])
        directions, _, _ = linalg.svd(candidates, full_matrices=False)
        for x in directions[:, :needed].T:
            biggest = x[np.argmax(np.abs(x))]
            chain = [x * (abs(biggest) / biggest)]
            for _ in range(p - 1):
                chain.append(N @ chain[-1])
            chains.append(chain)
    return chains


def _normalize_exact_chain(vectors):
    eigenvector = vectors[-1]
    pivot = next(each for each in eigenvector if each != 0)
    return [[each / pivot for each in vector] for vector in vectors]


def decompose(
    spec: UrnSpec,
    arithmetic: str = "auto",
    tolerance: float = CLUSTER_TOLERANCE,
    rank_threshold: float = RANK_THRESHOLD,
) -> SpectralDecomposition:
    """
    Compute a Jordan-adapted dual basis pair for a validated urn.

    Arguments:

        spec:

            a validated specification (it is normalized here if ``m != 1``)

        arithmetic:

            ``"rational"`` to insist on exact arithmetic, ``"float"`` to
            use floating point, or ``"auto"`` to use exact arithmetic
            whenever the specification is rational and its characteristic
            polynomial splits over the rationals

        tolerance:

            the eigenvalue clustering tolerance used in float mode

        rank_threshold:

            the relative singular value threshold for Jordan chain ranks

    Raises:

        `urnlab.exceptions.IllConditioned`:

            if a Jordan chain rank decision is ambiguous, or the relations
            the basis must satisfy fail at the float tolerance

    """
    if arithmetic not in ARITHMETIC_MODES:
        raise ValueError(f"unknown arithmetic {arithmetic!r}")

    scale = spec.m
    urn = spec.normalized()
    exact = False
    if arithmetic != "float" and urn.rational:
        matrix = _rational_matrix(urn.R).T
        exact = _splits_over_rationals(matrix)
    if arithmetic == "rational" and not exact:
        raise UrnError(
            "exact arithmetic was requested, but the eigenvalues of "
            f"{spec.name or 'the urn'} are not all rational",
        )
    logger.debug(
        "decomposing %s with %s arithmetic",
        spec.name or "urn",
        "exact" if exact else "float",
    )

    if exact:
        mode = EXACT
        chains = [
            (eigenvalue, _normalize_exact_chain(vectors))
            for eigenvalue, vectors in _exact_chains(matrix)
        ]
    else:
        mode = FLOAT.with_tolerance(tolerance)
        A = np.array(urn.R, dtype=complex).T
        chains = [
            (eigenvalue, chain)
            for eigenvalue, multiplicity in _cluster(
                linalg.eigvals(A), tolerance,
            )
            for chain in _float_chains(
                A, eigenvalue, multiplicity, rank_threshold,
            )
        ]

    chains.sort(key=lambda each: _block_order(each[0], len(each[1]), mode))
    eigenvalues: list[Scalar] = []
    blocks = []
    columns = []
    for eigenvalue, vectors in chains:
        blocks.append(
            JordanBlock(
                eigenvalue=eigenvalue,
                start=len(columns),
                size=len(vectors),
            ),
        )
        eigenvalues.extend([eigenvalue] * len(vectors))
        columns.extend(vectors)

    if len(blocks[0].indices) != 1 or not mode.same(eigenvalues[0], 1):
        raise IllConditioned(eigenvalues[0], [blocks[0].size], tolerance)

    V = _array(np.array(columns, dtype=object).T.tolist(), mode)
    V[:, 0] = V[:, 0] / sum(V[:, 0])
    if exact:
        U = _array(_rational_matrix(V).inv().tolist(), mode)
    else:
        U = linalg.solve(V, np.eye(len(columns), dtype=complex))
        U[0] = 1
        v1 = V[:, 0]
        if np.abs(v1.imag).max() > RELATION_TOLERANCE or v1.real.min() <= 0:
            raise IllConditioned(1, v1.real, RELATION_TOLERANCE)
        V[:, 0] = v1.real

    decomposition = SpectralDecomposition(
        urn=urn,
        scale=scale,
        arithmetic=mode,
        eigenvalues=eigenvalues,
        blocks=blocks,
        V=V,
        U=U,
    )
    duality, chain = decomposition.residuals()
    bound = 0 if exact else RELATION_TOLERANCE * max(1.0, linalg.norm(U, 2))
    if duality > bound or chain > bound:
        raise IllConditioned(
            eigenvalues,
            [float(duality), float(chain)],
            float(bound),
        )
    return decomposition


class Kind(Enum):
    """
    The three classes a balanced irreducible urn falls into.
    """

    STRICTLY_SMALL = "StrictlySmall"
    CRITICALLY_SMALL = "CriticallySmall"
    LARGE = "Large"


@frozen
class UrnClass:
    """
    The classification of an urn by its second largest real eigenvalue part.

    Attributes:

        sigma2:

            ``max Re lambda_k`` over ``k >= 2`` (``None`` for a single colour)

        kind:

            the class, a `Kind`

        d:

            the largest critical Jordan block size minus one (critically
            small urns only)

        nu:

            the logarithmic exponent of the variance: 0 for strictly small
            urns and ``2 d + 1`` for critically small ones

        critical:

            the indices ``k`` whose eigenvalue has real part 1/2

    """

    sigma2: Any
    kind: Kind
    d: int = 0
    nu: int = 0
    critical: tuple[int, ...] = ()

    @property
    def small(self) -> bool:
        return self.kind is not Kind.LARGE


def classify(dec: SpectralDecomposition) -> UrnClass:
    """
    Classify an urn as strictly small, critically small or large.

    Emits a `urnlab.exceptions.NearCriticalWarning` when ``sigma2`` is close
    to 1/2 without being clustered onto it, since the classification is then
    sensitive to the tolerance.
    """
    arithmetic = dec.arithmetic
    rest = range(1, dec.s)
    if not rest:
        return UrnClass(sigma2=None, kind=Kind.STRICTLY_SMALL)

    sigma2 = max(dec.real_part(k) for k in rest)
    critical = tuple(k for k in rest if dec.is_critical(k))
    half = arithmetic.half
    if not arithmetic.same(sigma2, half) and arithmetic.ambiguous(
        sigma2, half,
    ):
        warnings.warn(
            f"sigma2 = {sigma2} is within {AMBIGUITY_FACTOR} clustering "
            "tolerances of 1/2; the classification depends on the tolerance",
            NearCriticalWarning,
            stacklevel=2,
        )

    if sigma2 > half and not arithmetic.same(sigma2, half):
        return UrnClass(sigma2=sigma2, kind=Kind.LARGE, critical=critical)
    if not critical:
        return UrnClass(sigma2=sigma2, kind=Kind.STRICTLY_SMALL)
    d = max(
        block.size for block in dec.blocks
        if block.start > 0 and dec.is_critical(block.start)
    ) - 1
    return UrnClass(
        sigma2=arithmetic.half if arithmetic.exact else sigma2,
        kind=Kind.CRITICALLY_SMALL,
        d=d,
        nu=2 * d + 1,
        critical=critical,
    )


#: projection names accepted by `project`
PROJECTIONS = ("Pi1", "PI", "PII")


def project(dec: SpectralDecomposition, x: Sequence, which: str | int):
    """
    Project a vector onto part of the spectrum.

    Arguments:

        which:

            ``"Pi1"`` for the projection onto ``v_1``, ``"PI"`` for the sum
            over eigenvalues with real part below 1/2, ``"PII"`` for the sum
            over critical eigenvalues, or an index ``k`` for ``pi_k``

    Returns:

        ``sum u_k(x) v_k`` over the selected indices

    """
    if isinstance(which, int):
        if not 0 <= which < dec.s:
            raise IndexError(which)
        selected = [which]
    elif which == "Pi1":
        selected = [0]
    elif which == "PI":
        selected = [
            k for k in range(1, dec.s) if dec.is_strictly_small(k)
        ]
    elif which == "PII":
        selected = [k for k in range(1, dec.s) if dec.is_critical(k)]
    else:
        raise ValueError(f"unknown projection {which!r}")

    coordinates = dec.coordinates(x)
    result = _array([0] * dec.s, dec.arithmetic)
    for k in selected:
        result = result + coordinates[k] * dec.V[:, k]
    return result
