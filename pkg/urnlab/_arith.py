from __future__ import annotations

from fractions import Fraction
from typing import TYPE_CHECKING
import numbers

from attrs import evolve, field, frozen

if TYPE_CHECKING:
    from urnlab._typing import Scalar

#: eigenvalues closer than this are treated as equal
CLUSTER_TOLERANCE = 1e-7
#: coefficients below this magnitude are dropped from float polynomials
PRUNE_TOLERANCE = 1e-14
#: clustered values this many tolerances apart are reported as ambiguous
AMBIGUITY_FACTOR = 100


def _positive_below(instance, attribute, value):
    if not 0 < value < 1e-2:
        raise ValueError(
            f"{attribute.name} must lie in (0, 1e-2), not {value!r}",
        )


def to_fraction(value) -> Fraction:
    """
    Convert an exact number (including sympy rationals) to a `Fraction`.
    """
    if isinstance(value, bool):
        raise TypeError(f"{value!r} is not a number")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    numerator, denominator = getattr(value, "p", None), getattr(value, "q", 1)
    if numerator is not None:
        return Fraction(int(numerator), int(denominator))
    if isinstance(value, numbers.Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    raise TypeError(f"{value!r} is not an exact rational number")


@frozen(repr=False)
class Arithmetic:
    """
    Decides how scalars are compared and combined in one computation.

    An exact arithmetic works with `fractions.Fraction` throughout and
    compares exactly. A float arithmetic works with Python complex numbers
    and compares up to the clustering ``tolerance``, dropping coefficients
    smaller than ``prune``.

    Arguments:

        exact:

            whether this arithmetic is exact

        tolerance:

            how close two eigenvalue sums must be to count as equal
            (ignored when exact)

        prune:

            magnitude below which float coefficients count as zero

    """

    exact: bool = False
    tolerance: float = field(
        default=CLUSTER_TOLERANCE,
        validator=_positive_below,
    )
    prune: float = PRUNE_TOLERANCE

    def __repr__(self):
        if self.exact:
            return f"<{self.__class__.__name__} exact>"
        return (
            f"<{self.__class__.__name__} float tolerance={self.tolerance:g}>"
        )

    @property
    def zero(self) -> Scalar:
        return Fraction(0) if self.exact else 0j

    @property
    def one(self) -> Scalar:
        return Fraction(1) if self.exact else 1 + 0j

    @property
    def half(self) -> Scalar:
        return Fraction(1, 2) if self.exact else 0.5

    def convert(self, value) -> Scalar:
        """
        Bring a number into this arithmetic's scalar type.
        """
        if self.exact:
            return to_fraction(value)
        return complex(value)

    def is_zero(self, value, scale=1.0) -> bool:
        if self.exact:
            return value == 0
        return abs(value) <= self.prune * scale

    def same(self, one, two) -> bool:
        """
        Decide whether two eigenvalue-like quantities coincide.
        """
        if self.exact:
            return one == two
        return abs(one - two) <= self.tolerance

    def ambiguous(self, one, two) -> bool:
        """
        Whether two values are too close to call distinct with confidence.
        """
        if self.exact:
            return False
        distance = abs(one - two)
        return (
            self.tolerance < distance <= AMBIGUITY_FACTOR * self.tolerance
        )

    def real(self, value):
        if self.exact:
            return value
        return complex(value).real

    def with_tolerance(self, tolerance: float) -> Arithmetic:
        return evolve(self, tolerance=tolerance)


EXACT = Arithmetic(exact=True)
FLOAT = Arithmetic(exact=False)
