import numpy as np
import pytest

from aggglm.glm import FAMILIES, GlmFamily
from aggglm.simulate import SimulationConfig, simulate_glm


def test_gaussian_residual_mean():
    X, z, beta = simulate_glm(SimulationConfig("gaussian", n=2000, d=5, seed=0))
    assert abs(np.mean(z - X @ beta)) < 4 / np.sqrt(2000)


def test_no_relationship():
    _, _, beta = simulate_glm(SimulationConfig("poisson", relationship="none", seed=1))
    assert np.all(beta == 0)


def test_seed_determinism():
    a = simulate_glm(SimulationConfig("poisson", n=100, d=3, seed=2))
    b = simulate_glm(SimulationConfig("poisson", n=100, d=3, seed=2))
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


@pytest.mark.parametrize("kind", FAMILIES)
@pytest.mark.parametrize("relationship", ["linear", "none"])
def test_domain_valid(kind, relationship):
    _, z, _ = simulate_glm(SimulationConfig(kind, n=300, d=4, seed=3, relationship=relationship))
    assert GlmFamily(kind).in_domain(z).all()


@pytest.mark.parametrize("kind", FAMILIES)
def test_moments(kind):
    fam = GlmFamily(kind)
    X, z, beta = simulate_glm(SimulationConfig(kind, n=5000, d=3, seed=4))
    mu = fam.mean(X @ beta)
    if kind == "gaussian":
        var = np.ones_like(mu)
    elif kind == "poisson":
        var = mu
    else:
        var = mu * (1 - mu)
    se = np.sqrt(var.sum()) / z.size
    assert abs(z.mean() - mu.mean()) < 5 * se


def test_bernoulli_softened():
    _, z, _ = simulate_glm(SimulationConfig("bernoulli", n=50, d=2, seed=5))
    assert set(np.unique(z)) <= {1e-8, 1 - 1e-8}


def test_invalid_config():
    with pytest.raises(ValueError):
        SimulationConfig("gaussian", n=0)
    with pytest.raises(ValueError):
        SimulationConfig("gaussian", covariate_scale=-1.0)
