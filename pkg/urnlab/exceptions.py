"""
Urn validation errors, computation failures, and some surrounding helpers.
"""
from __future__ import annotations

from pprint import pformat
from textwrap import dedent, indent
from typing import TYPE_CHECKING, Any, ClassVar

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Sequence


def _pretty(thing: Any, prefix: str):
    """
    Format something for an error message as prettily as we currently can.
    """
    return indent(pformat(thing, width=72, sort_dicts=False), prefix).lstrip()


class UrnError(Exception):
    """
    The base class for everything urnlab raises deliberately.
    """

    def __init__(self, message: str, cause: Exception | None = None):
        super().__init__(message)
        self.message = message
        self.cause = self.__cause__ = cause

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__}: {self.message!r}>"

    def __str__(self) -> str:
        return self.message


class InvalidUrn(UrnError):
    """
    An urn specification violates one of the model's standing assumptions.

    The most relevant violation is raised; any others found while checking
    the same specification are available on `InvalidUrn.context`.
    """

    #: how strongly this kind of violation should be preferred when
    #: reporting a single error (higher wins)
    rank: ClassVar[int] = 0

    def __init__(
        self,
        message: str,
        cause: Exception | None = None,
        context: Iterable[InvalidUrn] = (),
        where: Sequence[int] = (),
    ):
        super().__init__(message, cause=cause)
        self.context = list(context)
        self.where = tuple(where)


class SpecError(InvalidUrn):
    """
    An urn specification could not be read as one (bad shape, bad types).
    """

    rank = 4

    def __str__(self) -> str:
        if self.cause is None:
            return self.message
        return dedent(
            f"""\
            {self.message}

            Underlying schema failure:
                {_pretty(getattr(self.cause, "message", self.cause), " " * 16)}
            """.rstrip(),
        )


class NotBalanced(InvalidUrn):
    """
    The rows of the replacement matrix do not all add the same positive mass.
    """

    rank = 3

    def __init__(self, row_sums, **kwargs):
        self.row_sums = list(row_sums)
        super().__init__(
            f"replacement rows are not balanced: row sums {self.row_sums}",
            **kwargs,
        )


class NotTenable(InvalidUrn):
    """
    The urn could leave the closed positive orthant.
    """

    rank = 2


class Reducible(InvalidUrn):
    """
    The replacement matrix is reducible, so the classification does not apply.
    """

    rank = 1

    def __init__(self, components, **kwargs):
        self.components = [list(each) for each in components]
        super().__init__(
            "the replacement matrix is reducible; strongly connected "
            f"colour classes are {self.components}",
            **kwargs,
        )


class IllConditioned(UrnError):
    """
    A rank decision while building Jordan chains was ambiguous.
    """

    def __init__(self, eigenvalue, singular_values, threshold):
        self.eigenvalue = eigenvalue
        self.singular_values = list(singular_values)
        self.threshold = threshold
        super().__init__(
            f"Jordan chain rank for eigenvalue {eigenvalue!r} is ambiguous "
            f"at threshold {threshold:g}",
        )

    def __str__(self) -> str:
        prefix = 16 * " "
        return dedent(
            f"""\
            {self.message}

            Singular values near the threshold:
                {_pretty(self.singular_values, prefix=prefix)}
            """.rstrip(),
        )


class StabilityViolation(UrnError):
    """
    Applying the transition operator left the span it should preserve.

    This always indicates a bug in an ordering or an expansion.
    """

    def __init__(self, alpha, leaks):
        self.alpha = alpha
        self.leaks = dict(leaks)
        super().__init__(
            f"the span below {alpha} is not stable; leaked onto "
            f"{sorted(self.leaks)}",
        )


class ResonanceAmbiguity(UrnError):
    """
    Two eigenvalue sums are neither clearly equal nor clearly distinct.
    """

    def __init__(self, pairs, tolerance):
        self.pairs = list(pairs)
        self.tolerance = tolerance
        super().__init__(
            f"{len(self.pairs)} eigenvalue sum(s) straddle the clustering "
            f"tolerance {tolerance:g}",
        )

    def __str__(self) -> str:
        prefix = 16 * " "
        return dedent(
            f"""\
            {self.message}

            Offending pairs:
                {_pretty(self.pairs, prefix=prefix)}
            """.rstrip(),
        )


class BudgetExceeded(UrnError):
    """
    A requested computation is larger than the configured budget allows.
    """

    def __init__(self, budget: str, requested, limit):
        self.budget = budget
        self.requested = requested
        self.limit = limit
        super().__init__(
            f"{budget} budget exceeded: {requested} requested, limit {limit}",
        )


class UnsupportedSupport(UrnError):
    """
    A multi-index uses indices outside of those a functional is defined on.
    """

    def __init__(self, gamma, allowed):
        self.gamma = tuple(gamma)
        self.allowed = sorted(allowed)
        super().__init__(
            f"{self.gamma} is supported outside of the indices "
            f"{self.allowed}",
        )


class NotSmall(UrnError):
    """
    The request only makes sense for a small urn, but the urn is large.
    """

    def __init__(self, sigma2, what="this computation"):
        self.sigma2 = sigma2
        super().__init__(
            f"urn is large (sigma2 = {float(sigma2):.6g} > 1/2); {what} "
            "requires a small urn",
        )


class DegenerateDirection(UrnError):
    """
    The observable has vanishing asymptotic variance, so it cannot be scaled.
    """

    def __init__(self, w, gamma):
        self.w = list(w)
        self.gamma = gamma
        super().__init__(
            f"direction {self.w} is degenerate: asymptotic variance "
            f"{gamma:.3g} vanishes",
        )


class NearCriticalWarning(UserWarning):
    """
    An eigenvalue's real part is close to, but not clustered onto, 1/2.
    """


def relevance(error: InvalidUrn):
    """
    A key function (e.g. to use with `sorted`) ranking validation errors.

    Errors about the shape of the input come first, then balance, then
    tenability, then irreducibility; ties go to the earliest colour.
    """
    return error.rank, tuple(-each for each in error.where)


def best_match(
    errors: Iterable[InvalidUrn],
    key: Callable[[InvalidUrn], Any] = relevance,
) -> InvalidUrn | None:
    """
    Pick the most relevant error, attaching the rest as its context.

    Returns:

        the best matching error, or ``None`` if the iterable was empty

    """
    errors = list(errors)
    best = max(errors, key=key, default=None)
    if best is None:
        return None
    best.context.extend(error for error in errors if error is not best)
    return best
