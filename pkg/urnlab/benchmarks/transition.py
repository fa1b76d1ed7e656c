"""
The transition operator matrix and reduced polynomials at growing degree.

Reduced polynomials are cached per decomposition, so each call decomposes
afresh.
"""
from pyperf import Runner

from urnlab.polynomials import phi_matrix
from urnlab.reduction import reduced_polynomial
from urnlab.spectral import decompose
from urnlab.urn import UrnSpec

jordan = UrnSpec(
    R=[[1, 9, 0, 0], [0, 9, 1, 0], [0, 0, 2, 8], [2, 0, 0, 8]],
    X0=[1, 1, 1, 1],
)
dec = decompose(jordan)


def reduce(alpha):
    return reduced_polynomial(alpha, decompose(jordan))


if __name__ == "__main__":
    runner = Runner()
    for degree in (2, 3, 4):
        alpha = (0, 0, degree - 1, 1)
        runner.bench_func(
            f"phi matrix, degree {degree}",
            lambda alpha=alpha: phi_matrix(alpha, dec),
        )
        runner.bench_func(
            f"reduced polynomial, degree {degree}",
            lambda alpha=alpha: reduce(alpha),
        )
