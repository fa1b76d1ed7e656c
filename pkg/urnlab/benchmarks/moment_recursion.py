"""
The exact moment recursion, rational against floating point.
"""
from pyperf import Runner

from urnlab._arith import EXACT
from urnlab.moments import exact_moment_series
from urnlab.polynomials import UPolynomial
from urnlab.spectral import decompose
from urnlab.urn import UrnSpec

dec = decompose(UrnSpec(R=[[3, 1], [1, 3]], X0=[1, 1]))
square = UPolynomial.monomial((0, 2), EXACT)


if __name__ == "__main__":
    runner = Runner()
    runner.bench_func(
        "rational, n=200",
        lambda: exact_moment_series(square, 200, dec, arithmetic="rational"),
    )
    for n_max in (2 ** 10, 2 ** 14):
        runner.bench_func(
            f"float, n={n_max}",
            lambda n_max=n_max: exact_moment_series(
                square, n_max, dec, arithmetic="float",
            ),
        )
