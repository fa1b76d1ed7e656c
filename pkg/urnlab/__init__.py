"""
Analysis of balanced Polya urns.

An urn is described by a `UrnSpec`. `validate` checks that it is balanced,
tenable and irreducible, `decompose` computes a Jordan-adapted basis and
`classify` decides whether the urn is strictly small, critically small or
large. The transition operator on polynomials, the reduced polynomials and
the exact moment recursion build on the decomposition.
"""
from urnlab.cone import ConeSigma, cone_certificate, cone_contains
from urnlab.moments import (
    estimate_sigma,
    exact_moment_series,
    gaussian_moment,
    verify_momQ,
    verify_power_moments,
)
from urnlab.montecarlo import mc_standardized_moments
from urnlab.polynomials import (
    MultiIndex,
    UPolynomial,
    basis_upto,
    evaluate,
    order_less,
    phi_apply,
    phi_matrix,
)
from urnlab.reduction import (
    check_nilpotence_bounds,
    compute_power_sets,
    m_functional,
    reduced_polynomial,
    verify_stability,
)
from urnlab.spectral import classify, decompose, project
from urnlab.urn import UrnSpec, enumerate_paths, simulate, step, validate


def __getattr__(name):
    if name == "__version__":
        from importlib import metadata
        return metadata.version("urnlab")
    raise AttributeError(f"module {__name__} has no attribute {name}")


__all__ = [
    "ConeSigma",
    "MultiIndex",
    "UPolynomial",
    "UrnSpec",
    "basis_upto",
    "check_nilpotence_bounds",
    "classify",
    "compute_power_sets",
    "cone_certificate",
    "cone_contains",
    "decompose",
    "enumerate_paths",
    "estimate_sigma",
    "evaluate",
    "exact_moment_series",
    "gaussian_moment",
    "m_functional",
    "mc_standardized_moments",
    "order_less",
    "phi_apply",
    "phi_matrix",
    "project",
    "reduced_polynomial",
    "simulate",
    "step",
    "validate",
    "verify_momQ",
    "verify_power_moments",
    "verify_stability",
]
