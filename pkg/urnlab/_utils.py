from __future__ import annotations

from fractions import Fraction
import math


def format_multi_index(alpha) -> str:
    """
    Render a multi-index as comma-joined integers, e.g. (0, 2) -> "0,2".
    """
    return ",".join(str(each) for each in alpha)


def parse_integers(text: str) -> tuple[int, ...]:
    """
    Parse comma-joined integers, the inverse of `format_multi_index`.
    """
    text = text.strip()
    if not text:
        return ()
    return tuple(int(each) for each in text.split(","))


def parse_numbers(text: str) -> tuple[float | int, ...]:
    """
    Parse comma-joined numbers, keeping integers exact.
    """
    values = []
    for each in text.split(","):
        each = each.strip()
        try:
            values.append(int(each))
        except ValueError:
            values.append(float(each))
    return tuple(values)


def complex_pair(value) -> list[float]:
    """
    Serialize a scalar as ``[re, im]``.
    """
    value = complex(value)
    return [value.real, value.imag]


def real_number(value):
    """
    Serialize an exact or floating scalar as a JSON number.
    """
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else float(value)
    return float(value.real if isinstance(value, complex) else value)


def powers_of_two(start=4, stop=17) -> tuple[int, ...]:
    return tuple(2 ** j for j in range(start, stop + 1))


def log_factor(n, exponent) -> float:
    """
    ``log(n + 2) ** exponent``, the shifted logarithm used on grids.
    """
    if exponent == 0:
        return 1.0
    return math.log(n + 2) ** exponent


def decades(grid, low=100):
    """
    Split a grid into its first decade after ``low`` and its last decade.

    Returns a pair of index lists. Grids without points in ``[low, 10 low)``
    fall back to their first third.
    """
    grid = list(grid)
    first = [i for i, n in enumerate(grid) if low <= n < 10 * low]
    if not first:
        first = list(range(max(1, len(grid) // 3)))
    top = grid[-1]
    last = [i for i, n in enumerate(grid) if n > top / 10]
    return first, last
