"""
Monte Carlo estimates from many independent urn trajectories.

Trajectories are simulated in blocks, each block on its own counter-based
stream keyed by ``(seed, 0, block)``. Results therefore depend only on the
seed and the number of samples, never on the number of workers.
"""
from __future__ import annotations

from typing import TYPE_CHECKING
import logging

from attrs import field, frozen
from joblib import Parallel, delayed
import numpy as np

from urnlab.exceptions import BudgetExceeded, DegenerateDirection, NotTenable
from urnlab.moments import estimate_sigma, gaussian_moment
from urnlab.urn import stream

if TYPE_CHECKING:
    from collections.abc import Sequence

    from urnlab.spectral import SpectralDecomposition
    from urnlab.urn import UrnSpec

logger = logging.getLogger(__name__)

#: trajectories simulated together on one stream
BLOCK_SIZE = 4096
#: the largest ``samples * n`` simulated by default
MC_BUDGET = 10 ** 10
#: bootstrap resamples used for standard errors
BOOTSTRAP_RESAMPLES = 200
#: relative size below which an asymptotic variance counts as vanishing
DEGENERACY_TOLERANCE = 1e-9
#: standard errors allowed between a Monte Carlo moment and its reference
MOMENT_SIGMAS = 4


def _simulate_block(R, X0, n, size, rng) -> np.ndarray:
    masses = np.tile(np.asarray(X0, dtype=float), (size, 1))
    last = masses.shape[1] - 1
    for step in range(n):
        cumulative = np.cumsum(masses, axis=1)
        target = rng.random(size) * cumulative[:, -1]
        drawn = np.minimum(
            (cumulative <= target[:, None]).sum(axis=1), last,
        )
        masses += R[drawn]
        if masses.min() < -1e-9:
            raise NotTenable(
                f"a simulated trajectory left the orthant at step {step + 1}",
            )
    return masses


def simulate_endpoints(
    spec: UrnSpec,
    n: int,
    samples: int,
    seed: int,
    n_jobs: int = 1,
    budget: int = MC_BUDGET,
) -> np.ndarray:
    """
    ``X_n`` for ``samples`` independent trajectories, as a ``samples x s``
    array.

    Raises:

        `urnlab.exceptions.BudgetExceeded`:

            if ``samples * n`` exceeds the budget

    """
    if samples * n > budget:
        raise BudgetExceeded(
            "monte carlo", requested=samples * n, limit=budget,
        )
    R = np.array([[float(each) for each in row] for row in spec.R])
    X0 = [float(each) for each in spec.X0]
    sizes = [
        min(BLOCK_SIZE, samples - start)
        for start in range(0, samples, BLOCK_SIZE)
    ]
    logger.info(
        "simulating %d trajectories of %d steps in %d blocks",
        samples,
        n,
        len(sizes),
    )
    blocks = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_simulate_block)(R, X0, n, size, stream(seed, 0, block))
        for block, size in enumerate(sizes)
    )
    if not blocks:
        return np.empty((0, spec.s))
    return np.concatenate(blocks)


def _standardized(values: np.ndarray, k_max: int) -> np.ndarray:
    """
    Standardized sample moments ``1..k_max`` along the last axis.
    """
    centered = values - values.mean(axis=-1, keepdims=True)
    sd = np.sqrt((centered ** 2).mean(axis=-1, keepdims=True))
    z = centered / sd
    moments = np.stack(
        [(z ** k).mean(axis=-1) for k in range(1, k_max + 1)], axis=-1,
    )
    moments[..., 0] = 0.0
    moments[..., 1] = 1.0
    return moments


@frozen(eq=False)
class StandardizedMoments:
    """
    Monte Carlo standardized moments of ``w . X_n`` with bootstrap errors.

    Attributes:

        reference:

            the values each moment is checked against, by default the
            standard normal moments

    """

    w: tuple[float, ...] = field(converter=tuple)
    n: int
    samples: int
    values: tuple[float, ...] = field(converter=tuple)
    stderr: tuple[float, ...] = field(converter=tuple)
    reference: tuple[float, ...] = field(converter=tuple)

    @property
    def k(self) -> range:
        return range(1, len(self.values) + 1)

    def within(self, k: int, reference: float | None = None) -> bool:
        """
        Whether moment ``k`` is within 4 standard errors of a reference.
        """
        if reference is None:
            reference = self.reference[k - 1]
        slack = MOMENT_SIGMAS * self.stderr[k - 1] + 1e-12
        return abs(self.values[k - 1] - reference) <= slack


def mc_standardized_moments(
    spec: UrnSpec,
    dec: SpectralDecomposition,
    w: Sequence[float],
    n: int,
    samples: int,
    seed: int,
    k_max: int = 6,
    n_jobs: int = 1,
    resamples: int = BOOTSTRAP_RESAMPLES,
) -> StandardizedMoments:
    """
    Estimate standardized moments of ``Y_n = w . X_n`` by simulation.

    Bootstrap resampling runs on its own stream, keyed ``(seed, 1)``.

    Raises:

        `urnlab.exceptions.DegenerateDirection`:

            if ``w^T Sigma w`` vanishes, so ``Y_n`` has no Gaussian scaling

    """
    sigma = estimate_sigma(dec, n_max=max(n, 2)).sigma
    w = np.asarray(w, dtype=float)
    gamma = float(w @ sigma @ w)
    scale = float(w @ w) * max(1.0, float(np.abs(sigma).max()))
    if gamma <= DEGENERACY_TOLERANCE * scale:
        raise DegenerateDirection(w.tolist(), gamma)

    endpoints = simulate_endpoints(spec, n, samples, seed, n_jobs=n_jobs)
    y = endpoints @ w
    values = _standardized(y, k_max)
    rng = stream(seed, 1)
    boot = np.empty((resamples, k_max))
    for each in range(resamples):
        boot[each] = _standardized(y[rng.integers(0, samples, samples)], k_max)
    stderr = boot.std(axis=0)
    stderr[:2] = 0.0
    return StandardizedMoments(
        w=w.tolist(),
        n=n,
        samples=samples,
        values=values.tolist(),
        stderr=stderr.tolist(),
        reference=[gaussian_moment(k) for k in range(1, k_max + 1)],
    )


@frozen
class MeanVariance:
    """
    Sample mean and variance of ``w . X_n`` with their standard errors.
    """

    mean: float
    mean_stderr: float
    variance: float
    variance_stderr: float


def mc_mean_variance(
    spec: UrnSpec,
    w: Sequence[float],
    n: int,
    samples: int,
    seed: int,
    n_jobs: int = 1,
) -> MeanVariance:
    y = simulate_endpoints(spec, n, samples, seed, n_jobs=n_jobs) @ np.asarray(
        w, dtype=float,
    )
    centered = y - y.mean()
    variance = float((centered ** 2).mean())
    fourth = float((centered ** 4).mean())
    return MeanVariance(
        mean=float(y.mean()),
        mean_stderr=(variance / samples) ** 0.5,
        variance=variance,
        variance_stderr=(max(fourth - variance ** 2, 0.0) / samples) ** 0.5,
    )
