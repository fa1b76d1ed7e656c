"""
Simulating many trajectories, on one worker and on several.
"""
from pyperf import Runner

from urnlab.montecarlo import simulate_endpoints
from urnlab.urn import UrnSpec

spec = UrnSpec(R=[[-1, 2], [1, 0]], X0=[2, 1])


if __name__ == "__main__":
    runner = Runner()
    for n_jobs in (1, 4):
        runner.bench_func(
            f"10000 samples of 1000 draws, {n_jobs} worker(s)",
            lambda n_jobs=n_jobs: simulate_endpoints(
                spec, 1000, 10_000, seed=0, n_jobs=n_jobs,
            ),
        )
