"""
The urn model: specifications, validation, and exact simulation.

A balanced urn holds masses of ``s`` colours. At each step a colour is drawn
with probability proportional to its mass, and the corresponding row of the
replacement matrix is added to the urn.

Most commonly, `validate` followed by `simulate` is all that is needed::

    spec = UrnSpec(R=[[2, 1], [1, 2]], X0=[1, 1])
    validate(spec)
    trajectory = simulate(spec, n_max=100, seed=0)
"""
from __future__ import annotations

from fractions import Fraction
from typing import TYPE_CHECKING, Any
import csv
import logging

from attrs import evolve, field, frozen
from jsonschema import exceptions as schema_exceptions
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
import numpy as np

from urnlab import _schemas
from urnlab._arith import to_fraction
from urnlab.exceptions import (
    BudgetExceeded,
    InvalidUrn,
    NotBalanced,
    NotTenable,
    Reducible,
    SpecError,
    best_match,
)

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Sequence
    from typing import TextIO

    from urnlab._typing import Number
    from urnlab.protocols import RandomSource

logger = logging.getLogger(__name__)

#: the largest number of leaves `enumerate_paths` will visit by default
ENUMERATION_BUDGET = 2 * 10 ** 7
#: relative tolerance for row sums in floating point specifications
BALANCE_TOLERANCE = 1e-9
#: relative tolerance for the total mass identity along float trajectories
MASS_TOLERANCE = 1e-12


def _number(value) -> Number:
    if isinstance(value, bool):
        raise SpecError(f"{value!r} is not a number")
    if isinstance(value, (int, Fraction)):
        return value
    if isinstance(value, float):
        return int(value) if value.is_integer() else value
    try:
        return to_fraction(value)
    except TypeError:
        raise SpecError(f"{value!r} is not a number") from None


def _vector(values) -> tuple[Number, ...]:
    return tuple(_number(each) for each in values)


def _matrix(rows) -> tuple[tuple[Number, ...], ...]:
    return tuple(_vector(row) for row in rows)


def stream(seed: int, *key: int) -> np.random.Generator:
    """
    An independent, reproducible random stream for ``(seed, *key)``.

    Streams are counter-based (Philox) and keyed through
    `numpy.random.SeedSequence`, so the stream for a given key does not depend
    on how many other streams were created, or in what order.
    """
    sequence = np.random.SeedSequence(seed, spawn_key=key)
    return np.random.Generator(np.random.Philox(sequence))


@frozen
class UrnSpec:
    """
    A balanced urn: replacement matrix, initial composition and a name.

    Arguments:

        R:

            the replacement matrix, whose row ``i`` is added when colour
            ``i`` is drawn

        X0:

            the initial masses

        name:

            an optional human-readable name

    Entries may be integers, fractions or floats. Integer-valued floats
    are stored as integers, so a specification read from JSON keeps its
    exact arithmetic.
    """

    R: tuple[tuple[Number, ...], ...] = field(converter=_matrix)
    X0: tuple[Number, ...] = field(converter=_vector)
    name: str | None = field(default=None, kw_only=True)

    @classmethod
    def from_json(cls, instance: Any) -> UrnSpec:
        """
        Build a specification from a decoded urn-spec JSON document.

        Raises:

            `urnlab.exceptions.SpecError`:

                if the document does not match the urn-spec schema

        """
        validator = _schemas.validator_for("urn-spec")
        error = schema_exceptions.best_match(validator.iter_errors(instance))
        if error is not None:
            raise SpecError("invalid urn specification", cause=error)
        return cls(
            R=instance["R"], X0=instance["X0"], name=instance.get("name"),
        )

    def to_json(self) -> dict[str, Any]:
        def plain(value):
            if isinstance(value, Fraction) and value.denominator != 1:
                return float(value)
            return int(value) if isinstance(value, Fraction) else value

        document: dict[str, Any] = {
            "R": [[plain(each) for each in row] for row in self.R],
            "X0": [plain(each) for each in self.X0],
        }
        if self.name is not None:
            document["name"] = self.name
        return document

    @property
    def s(self) -> int:
        return len(self.R)

    @property
    def row_sums(self) -> tuple[Number, ...]:
        return tuple(sum(row) for row in self.R)

    @property
    def m(self) -> Number:
        """
        The balance constant, i.e. the common row sum.
        """
        return self.row_sums[0]

    @property
    def rational(self) -> bool:
        """
        Whether every entry is exact (an integer or a fraction).
        """
        entries = [*self.X0, *(each for row in self.R for each in row)]
        return all(isinstance(each, (int, Fraction)) for each in entries)

    @property
    def integral(self) -> bool:
        """
        Whether every entry is an integer, including fractions like ``2/1``.
        """
        entries = [*self.X0, *(each for row in self.R for each in row)]
        return all(
            isinstance(each, int)
            or (isinstance(each, Fraction) and each.denominator == 1)
            for each in entries
        )

    def normalized(self) -> UrnSpec:
        """
        The same urn measured in units of ``m``, so that every row sums to 1.
        """
        m = self.m
        if self.rational:
            scale = Fraction(m)
            return evolve(
                self,
                R=[[Fraction(each) / scale for each in row] for row in self.R],
                X0=[Fraction(each) / scale for each in self.X0],
            )
        return evolve(
            self,
            R=[[each / m for each in row] for row in self.R],
            X0=[each / m for each in self.X0],
        )

    def scaled(self, factor: Number) -> UrnSpec:
        """
        Multiply every replacement and initial mass by ``factor``.
        """
        return evolve(
            self,
            R=[[each * factor for each in row] for row in self.R],
            X0=[each * factor for each in self.X0],
        )


@frozen
class ValidationReport:
    """
    The outcome of a successful `validate`.

    Attributes:

        spec:

            the specification as given

        normalized:

            the specification rescaled so that ``m = 1``

        scale:

            the balance constant ``m`` of the original specification

    """

    spec: UrnSpec
    normalized: UrnSpec
    scale: Number
    balanced: bool = True
    tenable: bool = True
    irreducible: bool = True


def _shape_errors(spec: UrnSpec) -> Iterator[InvalidUrn]:
    s = spec.s
    if s == 0:
        yield SpecError("the replacement matrix has no rows")
        return
    for i, row in enumerate(spec.R):
        if len(row) != s:
            yield SpecError(
                f"row {i} of R has {len(row)} entries, expected {s}",
                where=(i,),
            )
    if len(spec.X0) != s:
        yield SpecError(f"X0 has {len(spec.X0)} entries, expected {s}")


def _balance_errors(spec: UrnSpec) -> Iterator[InvalidUrn]:
    sums = spec.row_sums
    m = sums[0]
    if spec.rational:
        unequal = any(each != m for each in sums)
    else:
        unequal = any(
            abs(each - m) > BALANCE_TOLERANCE * abs(m) for each in sums
        )
    if unequal or m <= 0:
        yield NotBalanced(row_sums=sums)


def _tenability_errors(spec: UrnSpec) -> Iterator[InvalidUrn]:
    R, X0 = spec.R, spec.X0
    if any(each < 0 for each in X0):
        yield NotTenable("initial masses must be nonnegative")
    if not any(X0):
        yield NotTenable("the initial composition is empty")
    for i, row in enumerate(R):
        for j, each in enumerate(row):
            if i != j and each < 0:
                yield NotTenable(
                    f"off-diagonal replacement r[{i}][{j}] = {each} is "
                    "negative",
                    where=(i, j),
                )
    for k in range(spec.s):
        r_kk = R[k][k]
        if r_kk >= 0:
            continue
        if not spec.integral:
            yield NotTenable(
                f"negative diagonal entry r[{k}][{k}] = {r_kk} is only "
                "allowed for integer specifications",
                where=(k, k),
            )
            continue
        divisor = -r_kk
        offenders = [
            value for value in (
                X0[k], *(R[i][k] for i in range(spec.s) if i != k)
            )
            if value % divisor
        ]
        if offenders:
            yield NotTenable(
                f"r[{k}][{k}] = {r_kk} does not divide {offenders}, so "
                f"colour {k} could be overdrawn",
                where=(k, k),
            )


def strong_components(spec: UrnSpec) -> list[list[int]]:
    """
    The strongly connected classes of the colour graph.

    Colour ``i`` points to colour ``j`` when drawing ``i`` adds mass to
    ``j``; self-loops are ignored.
    """
    adjacency = np.array(
        [
            [1 if i != j and spec.R[i][j] > 0 else 0 for j in range(spec.s)]
            for i in range(spec.s)
        ],
    )
    count, labels = connected_components(
        csr_matrix(adjacency),
        directed=True,
        connection="strong",
    )
    return [
        [i for i in range(spec.s) if labels[i] == label]
        for label in range(count)
    ]


def iter_errors(spec: UrnSpec) -> Iterator[InvalidUrn]:
    """
    Lazily yield each reason ``spec`` is not a valid urn.

    Shape problems are reported alone, since nothing else can be checked
    for a specification of the wrong shape.
    """
    shape = list(_shape_errors(spec))
    if shape:
        yield from shape
        return
    yield from _balance_errors(spec)
    yield from _tenability_errors(spec)
    components = strong_components(spec)
    if len(components) > 1:
        yield Reducible(components=components)


def validate(spec: UrnSpec) -> ValidationReport:
    """
    Check that ``spec`` is balanced, tenable and irreducible.

    Returns:

        a `ValidationReport` carrying the normalized specification

    Raises:

        `urnlab.exceptions.InvalidUrn`:

            the most relevant violation (see `urnlab.exceptions.relevance`),
            with every other violation found in its ``context``

    """
    error = best_match(iter_errors(spec))
    if error is not None:
        raise error
    return ValidationReport(
        spec=spec, normalized=spec.normalized(), scale=spec.m,
    )


def is_valid(spec: UrnSpec) -> bool:
    return next(iter_errors(spec), None) is None


@frozen
class UrnState:
    """
    The urn after ``n`` draws.
    """

    n: int
    x: tuple[Number, ...] = field(converter=_vector)

    @property
    def total(self) -> Number:
        return sum(self.x)


def _draw(x: Sequence[Number], uniform: float) -> int:
    total = float(sum(x))
    target = uniform * total
    running = 0.0
    last = 0
    for k, each in enumerate(x):
        if each > 0:
            last = k
            running += float(each)
            if target < running:
                return k
    return last


def step(state: UrnState, spec: UrnSpec, rng: RandomSource) -> UrnState:
    """
    Draw one colour and add its replacement row.

    Colour ``k`` is drawn with probability ``x_k / |x|``.

    Raises:

        `urnlab.exceptions.NotTenable`:

            if the step would leave the closed positive orthant, which
            cannot happen for a validated specification

    """
    if state.total <= 0:
        raise NotTenable(f"the urn is empty at step {state.n}")
    k = _draw(state.x, rng.random())
    x = tuple(a + b for a, b in zip(state.x, spec.R[k]))
    if any(each < 0 for each in x):
        raise NotTenable(
            f"drawing colour {k} at step {state.n} leaves the orthant: {x}",
        )
    return UrnState(n=state.n + 1, x=x)


@frozen
class Trajectory:
    """
    A simulated path of an urn, from ``X0`` to step ``n_max``.
    """

    spec: UrnSpec
    states: tuple[UrnState, ...] = field(converter=tuple)
    seed: int | None = None

    def __len__(self):
        return len(self.states)

    def __getitem__(self, n):
        return self.states[n]

    def masses(self) -> np.ndarray:
        """
        The trajectory as an ``(n_max + 1) x s`` array of floats.
        """
        return np.array(
            [[float(each) for each in state.x] for state in self.states],
        )

    def mass_defects(self) -> list[float]:
        """
        Relative deviations from the identity ``|X_n| = |X0| + n m``.
        """
        start, m = sum(self.spec.X0), self.spec.m
        defects = []
        for state in self.states:
            expected = start + state.n * m
            defects.append(float(abs(state.total - expected) / abs(expected)))
        return defects

    def to_csv(self, file: TextIO) -> None:
        """
        Write columns ``n, x_1, ..., x_s``.
        """
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(["n", *(f"x_{k + 1}" for k in range(self.spec.s))])
        for state in self.states:
            writer.writerow([state.n, *(_plain(each) for each in state.x)])


def _plain(value):
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else float(value)
    return value


def simulate(spec: UrnSpec, n_max: int, seed: int) -> Trajectory:
    """
    Simulate ``n_max`` draws from ``X0``, deterministically in ``seed``.
    """
    rng = stream(seed)
    state = UrnState(n=0, x=spec.X0)
    states = [state]
    for _ in range(n_max):
        state = step(state, spec, rng)
        states.append(state)
    logger.debug("simulated %d steps of %s (seed %d)", n_max, spec.name, seed)
    return Trajectory(spec=spec, states=states, seed=seed)


def enumerate_paths(
    spec: UrnSpec,
    n: int,
    merge: bool = False,
    budget: int = ENUMERATION_BUDGET,
) -> list[tuple[tuple[Number, ...], Number]]:
    """
    Every possible composition after ``n`` draws, with its probability.

    Arguments:

        merge:

            combine paths ending in the same composition (the result then
            has one entry per reachable composition)

        budget:

            the largest number of leaves ``s ** n`` to allow

    Probabilities are `fractions.Fraction` for exact specifications, in
    which case they sum to exactly 1.

    Raises:

        `urnlab.exceptions.BudgetExceeded`:

            if ``s ** n`` exceeds the budget

    """
    leaves = spec.s ** n
    if leaves > budget:
        raise BudgetExceeded("enumeration", requested=leaves, limit=budget)

    exact = spec.rational
    one: Number = Fraction(1) if exact else 1.0
    level: Iterable[tuple[tuple[Number, ...], Number]] = [(spec.X0, one)]
    for depth in range(n):
        following: list[tuple[tuple[Number, ...], Number]] = []
        for x, probability in level:
            total = sum(x)
            for k, each in enumerate(x):
                if each == 0:
                    continue
                share = Fraction(each) / total if exact else each / total
                y = tuple(a + b for a, b in zip(x, spec.R[k]))
                if any(value < 0 for value in y):
                    raise NotTenable(
                        f"composition {y} reached after {depth + 1} draws "
                        "leaves the orthant",
                    )
                following.append((y, probability * share))
        if merge:
            combined: dict[tuple[Number, ...], Number] = {}
            for y, probability in following:
                combined[y] = combined.get(y, 0) + probability
            following = list(combined.items())
        level = following
    return list(level)
