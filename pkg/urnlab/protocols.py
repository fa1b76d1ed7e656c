"""
typing.Protocol classes for urnlab interfaces.
"""

# for reference material on Protocols, see
#   https://www.python.org/dev/peps/pep-0544/

from __future__ import annotations

from typing import Protocol, runtime_checkable


@runtime_checkable
class RandomSource(Protocol):
    """
    A source of uniform random numbers driving an urn.

    `numpy.random.Generator` and `random.Random` both satisfy this protocol,
    so either may be passed to `urnlab.urn.step`. Simulations which need
    reproducible parallel streams should use `urnlab.urn.stream`.
    """

    def random(self) -> float:
        """
        Return a float drawn uniformly from the half-open interval [0, 1).
        """
