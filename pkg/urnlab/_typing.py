"""
Some (initially private) typing helpers for urnlab's types.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Union

#: a coefficient or eigenvalue, exact or floating point
Scalar = Union[Fraction, complex, float, int]

#: an entry of an urn specification
Number = Union[int, Fraction, float]
