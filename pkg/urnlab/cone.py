"""
The cone spanned by the vectors ``2 delta_i - delta_j``.

The same cone is cut out by the functionals ::

    delta_I*(x) = sum_i x_i + sum_(i in I) x_i

over subsets ``I`` of the colours. The empty and the full subset are implied
by the singletons, so only proper nonempty subsets are used as faces. In one
dimension there are no edges, and the cone is ``{0}``.
"""
from __future__ import annotations

from itertools import combinations
from typing import TYPE_CHECKING
import logging

from attrs import field, frozen
from scipy.optimize import linprog
import numpy as np

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

#: slack allowed for floating point points on a face
FACE_TOLERANCE = 1e-12


@frozen
class ConeSigma:
    """
    The cone in dimension ``s``.
    """

    s: int = field()

    @s.validator
    def _positive(self, attribute, value):
        if value < 1:
            raise ValueError(f"dimension must be positive, not {value}")

    @property
    def edges(self) -> list[tuple[int, int]]:
        """
        Pairs ``(i, j)``, ``i != j``, naming the edges ``2 delta_i - delta_j``.
        """
        return [
            (i, j) for i in range(self.s) for j in range(self.s) if i != j
        ]

    def edge(self, i: int, j: int) -> tuple[int, ...]:
        vector = [0] * self.s
        vector[i], vector[j] = 2, -1
        return tuple(vector)

    @property
    def faces(self) -> list[tuple[int, ...]]:
        """
        The proper nonempty subsets ``I``, smallest first.
        """
        return [
            subset
            for size in range(1, self.s)
            for subset in combinations(range(self.s), size)
        ]

    def face_value(self, face: Sequence[int], x: Sequence) -> float:
        return sum(x) + sum(x[i] for i in face)

    def weakest_face(self, x: Sequence):
        """
        The face on which ``x`` is smallest, and the value there.

        The smallest partial sum over a proper nonempty subset takes every
        negative coordinate, at least one coordinate, and not all of them.
        """
        order = sorted(range(self.s), key=lambda i: x[i])
        chosen = [i for i in order if x[i] < 0][: self.s - 1] or order[:1]
        face = tuple(sorted(chosen))
        return face, self.face_value(face, x)

    def contains(self, x: Sequence, tolerance: float = FACE_TOLERANCE) -> bool:
        if len(x) != self.s:
            raise ValueError(f"expected {self.s} coordinates, got {len(x)}")
        if self.s == 1:
            return x[0] == 0 or abs(x[0]) <= tolerance
        _, value = self.weakest_face(x)
        if isinstance(value, int):
            return value >= 0
        scale = 1 + max(abs(each) for each in x)
        return value >= -tolerance * scale

    def certificate(self, x: Sequence) -> Certificate:
        """
        Decide membership and solve for nonnegative edge coefficients.
        """
        contained = self.contains(x)
        violated = None
        if not contained and self.s > 1:
            violated, _ = self.weakest_face(x)

        coefficients: dict[tuple[int, int], float] = {}
        if self.s == 1:
            feasible = contained
        else:
            edges = self.edges
            generators = np.array(
                [self.edge(i, j) for i, j in edges], dtype=float,
            ).T
            result = linprog(
                c=np.zeros(len(edges)),
                A_eq=generators,
                b_eq=np.asarray(x, dtype=float),
                bounds=[(0, None)],
                method="highs",
            )
            feasible = bool(result.success)
            if feasible:
                coefficients = {
                    edge: float(value)
                    for edge, value in zip(edges, result.x)
                    if value > FACE_TOLERANCE
                }
        return Certificate(
            point=tuple(x),
            contained=contained,
            feasible=feasible,
            violated_face=violated,
            coefficients=coefficients,
        )


@frozen
class Certificate:
    """
    Membership of a point in the cone, decided both ways.

    Attributes:

        contained:

            whether every face functional is nonnegative at the point

        feasible:

            whether the point is a nonnegative combination of edges

        violated_face:

            the weakest face ``I`` when the point is outside

        coefficients:

            nonnegative edge coefficients reproducing the point, when
            feasible

    """

    point: tuple
    contained: bool
    feasible: bool
    violated_face: tuple[int, ...] | None = None
    coefficients: dict[tuple[int, int], float] = field(factory=dict)

    @property
    def consistent(self) -> bool:
        return self.contained == self.feasible


def cone_contains(x: Sequence) -> bool:
    """
    Whether ``x`` lies in the cone, decided by the face inequalities.
    """
    return ConeSigma(len(x)).contains(x)


def cone_certificate(x: Sequence) -> Certificate:
    return ConeSigma(len(x)).certificate(x)
