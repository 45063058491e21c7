import numpy as np
import pytest

from prisac.manifold import ProductPoint, TangentVector, random_point, retract
from prisac.scenario import ScenarioConfig, sample_scenario

# Oracle-equivalence scale (dims small enough for straight-line loops) and the
# gradient-check scale used across the gradient and acceptance suites.
TINY = ScenarioConfig(
    m_tx=2, m_rx=3, n_users=2, n_radar_streams=1, n_targets=2, n_clutter=1,
    power_dbm=3.0, noise_user_dbm=0.0, noise_radar_dbm=0.0, n_paths=2, seed=11,
)
SMALL = ScenarioConfig(
    m_tx=4, m_rx=4, n_users=2, n_radar_streams=2, n_targets=2, n_clutter=1, seed=7
)


@pytest.fixture
def tiny_cfg():
    return TINY


@pytest.fixture
def small_cfg():
    return SMALL


@pytest.fixture
def tiny_instance():
    channels = sample_scenario(TINY)
    point = perturbed_point(TINY, seed=5)
    return TINY, channels, point


@pytest.fixture
def small_instance():
    channels = sample_scenario(SMALL)
    point = perturbed_point(SMALL, seed=5)
    return SMALL, channels, point


def random_tangent_shaped(cfg: ScenarioConfig, seed: int) -> TangentVector:
    """Ambient block set with Gaussian entries everywhere (not tangent)."""
    rng = np.random.default_rng(seed)

    def cx(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    return TangentVector(
        w=cx(cfg.m_tx, cfg.n_streams),
        p_tx=rng.standard_normal((cfg.m_tx, 2)),
        p_rx=rng.standard_normal((cfg.m_rx, 2)),
        p_users=rng.standard_normal((cfg.n_users, 2)),
        f=cx(cfg.m_rx, cfg.n_targets),
        a=float(rng.standard_normal()),
        b=float(rng.standard_normal()),
    )


def perturbed_point(cfg: ScenarioConfig, seed: int, a: float = 0.3, b: float = 0.2) -> ProductPoint:
    """Generic feasible point: the standard initializer kicked off its axes.

    The balanced polarization start is a symmetry point for several gradients;
    retracting along a random direction removes that degeneracy.
    """
    from prisac.manifold import project_to_tangent

    base = random_point(cfg, seed)
    ambient = random_tangent_shaped(cfg, seed + 1)
    moved = retract(base, project_to_tangent(base, ambient), 0.2)
    return ProductPoint(
        w=moved.w, p_tx=moved.p_tx, p_rx=moved.p_rx, p_users=moved.p_users,
        f=moved.f, a=a, b=b,
    )
