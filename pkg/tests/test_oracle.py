import numpy as np
import pytest

from dirtygrid import oracle
from dirtygrid.core import DiscreteDistribution, esdu
from dirtygrid.entropy import gaussian_entropy
from dirtygrid.errors import InsufficientSamples, InvalidParameter
from dirtygrid.scheme1 import Scheme1Params, simulate


def test_mc_entropy_single_atom():
    est = oracle.mc_entropy(DiscreteDistribution.point_mass(0.0), 1.0, 10**6, seed=1)
    assert est.within(gaussian_entropy(1.0))
    assert gaussian_entropy(1.0) == pytest.approx(2.0471, abs=1e-4)
    assert est.std_error > 0 and est.samples == 10**6 and est.seed == 1


@pytest.mark.parametrize("sigma", [0.5, 1.0, 4.0])
def test_mc_entropy_gaussians(sigma):
    est = oracle.mc_entropy(DiscreteDistribution.point_mass(2.0), sigma, 100_000, seed=3)
    assert est.within(gaussian_entropy(sigma))


def test_mc_entropy_far_atoms():
    est = oracle.mc_entropy(DiscreteDistribution([0.0, 100.0], [0.5, 0.5]), 1.0, 200_000, seed=4)
    assert est.within(gaussian_entropy(1.0) + 1.0)


def test_mc_deterministic():
    u = esdu(10, 4)
    assert oracle.mc_entropy(u, 1.0, 20_000, 9) == oracle.mc_entropy(u, 1.0, 20_000, 9)


def test_minimum_samples():
    with pytest.raises(InsufficientSamples):
        oracle.mc_entropy(esdu(10, 4), 1.0, 100, 0)
    with pytest.raises(InsufficientSamples):
        oracle.mc_variance(lambda n, s: np.zeros(n), lambda x: x, 10, 0)
    with pytest.raises(InsufficientSamples):
        oracle.ks_uniform_test(np.linspace(0, 1, 10), 1.0)
    with pytest.raises(InvalidParameter):
        oracle.mc_entropy(esdu(10, 4), 0.0, 10**4, 0)


def test_mc_variance_scheme1():
    p = Scheme1Params(10.0, 8, 0.9, 1.0)
    state = esdu(20.0, 11)

    def gen(n, seed):
        return simulate(p, state, n, seed)

    est_w0 = oracle.mc_variance(gen, lambda s: s.w0, 200_000, 1)
    assert est_w0.within(p.delta ** 2 / 12)
    est_x = oracle.mc_variance(gen, lambda s: s.x, 200_000, 2)
    assert est_x.within(p.peak_A * (p.peak_A + 2 * p.delta) / 12)
    p1 = Scheme1Params(10.0, 8, 1.0, 1.0)
    est = oracle.mc_variance(lambda n, sd: simulate(p1, state, n, sd), lambda s: s.z_tilde, 200_000, 3)
    assert est.within(p.delta ** 2 / 12 + 1.0)


def test_mc_variance_standard_error_is_calibrated():
    # normal data: SE of the sample variance is about sqrt(2/n)
    est = oracle.mc_variance(lambda n, s: np.random.default_rng(s).standard_normal(n), lambda x: x, 40_000, 5)
    assert est.std_error == pytest.approx(np.sqrt(2 / 40_000), rel=0.05)


def test_ks():
    rng = np.random.default_rng(0)
    assert oracle.ks_uniform_test(rng.uniform(0, 3, 5000), 3.0) > 0.01
    assert oracle.ks_uniform_test(rng.uniform(0, 1.5, 5000), 3.0) < 1e-6
    p = Scheme1Params(10.0, 8, 0.9, 1.0)
    sm = simulate(p, esdu(20.0, 11), 50_000, 8)
    assert oracle.ks_uniform_test(sm.w0, p.delta) > 0.01


def test_chi2_helpers():
    rng = np.random.default_rng(4)
    a = rng.integers(0, 6, 20_000)
    b = rng.integers(0, 4, 20_000)
    assert oracle.chi2_uniform_test(a) > 0.01
    assert oracle.chi2_uniform_test(np.minimum(a, 4)) < 1e-6
    assert oracle.chi2_independence_test(a, b) > 0.01
    assert oracle.chi2_independence_test(a, (a + b) % 3) < 1e-6
    assert oracle.chi2_independence_test(a, np.zeros_like(a)) == 1.0
    with pytest.raises(InvalidParameter):
        oracle.chi2_independence_test(a, b[:10])
    with pytest.raises(InsufficientSamples):
        oracle.chi2_uniform_test(a[:10])


def test_corpus_shape():
    cases = oracle.grid_corpus(20, seed=7)
    assert len(cases) == 20
    for u, sigma in cases:
        assert 1 <= len(u) <= 64 and 0.25 <= sigma <= 4.0
    assert [len(u) for u, _ in cases] == [len(u) for u, _ in oracle.grid_corpus(20, seed=7)]
