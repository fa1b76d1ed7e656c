"""
Exact and floating point spectral decompositions of growing urns.
"""
from pyperf import Runner

from urnlab.spectral import decompose
from urnlab.urn import UrnSpec


def cyclic(s):
    """
    An urn which adds one ball of the drawn colour and one of the next.
    """
    return UrnSpec(
        R=[
            [int(j == i) + int(j == (i + 1) % s) for j in range(s)]
            for i in range(s)
        ],
        X0=[1] * s,
    )


if __name__ == "__main__":
    runner = Runner()
    for s in (2, 4, 6):
        spec = cyclic(s)
        runner.bench_func(
            f"decompose float, s={s}",
            lambda spec=spec: decompose(spec, arithmetic="float"),
        )
    symmetric = UrnSpec(R=[[3, 1], [1, 3]], X0=[1, 1])
    runner.bench_func(
        "decompose rational, s=2",
        lambda: decompose(symmetric, arithmetic="rational"),
    )
