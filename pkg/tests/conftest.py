import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hilbapprox import Grid, SampleSet

settings.register_profile("repo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def random_samples(rng, N, n=2, m=8, dim=1, scale=1.0):
    grid = Grid(dim, m)
    return SampleSet(grid, scale * rng.standard_normal((N, n, grid.size)))


def low_rank_samples(rng, N, rank, n=2, m=10, noise=0.0):
    """Samples in a fixed ``rank``-dimensional slice of H^n, optionally perturbed."""
    grid = Grid(1, m)
    B = rng.standard_normal((rank, n * grid.size))
    X = rng.uniform(-1, 1, (N, rank)) @ B
    X = X + noise * rng.standard_normal(X.shape)
    return SampleSet(grid, X.reshape(N, n, grid.size))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def isolating_epsilon(mod, train):
    """An epsilon whose delta makes every training point an isolated net center.

    With delta <= 1.5 * (min pairwise distance) the net radius delta/3 keeps
    every sample as a center and the hat radius 2 delta/3 keeps each center's
    ball free of the others, so the interpolant reproduces f on train exactly.
    """
    from scipy.spatial.distance import pdist
    dmin = float(np.sqrt(train.grid.weight) * pdist(train.flat).min())
    ok = np.nonzero((mod.distances <= 3.0 * dmin) & (mod.envelope > mod.envelope[0]))[0]
    assert ok.size, "no examined pair separates the closest-pair envelope"
    return 3.0 * float(mod.envelope[ok[-1]])


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for num in sorted(results):
            terminalreporter.write_line(results[num])
