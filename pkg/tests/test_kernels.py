import importlib
import math

import numpy as np
import pytest

from dirtygrid import _accel, kernels
from dirtygrid.core import esdu
from dirtygrid.entropy import lattice_mixture_entropy, mixture_entropy

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


def _inputs():
    rng = np.random.default_rng(1)
    loc = np.sort(rng.choice(100, 20, replace=False) * 0.7)
    logw = np.log(rng.dirichlet(np.ones(20)))
    y = np.linspace(loc[0] - 5, loc[-1] + 5, 3001)
    return y, loc, logw


@needs_numba
def test_mixture_logpdf_backends_agree():
    y, loc, logw = _inputs()
    a = kernels.mixture_logpdf(y, loc, logw, 0.8, use_numba=True)
    b = kernels.mixture_logpdf(y, loc, logw, 0.8, use_numba=False)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


@needs_numba
def test_lattice_density_backends_agree():
    rng = np.random.default_rng(2)
    w = rng.dirichlet(np.ones(50))
    w[::7] = 0
    g = np.exp(-0.5 * np.linspace(-8, 8, 129) ** 2)
    np.testing.assert_allclose(kernels.lattice_density(w, 16, g, use_numba=True),
                               kernels.lattice_density(w, 16, g, use_numba=False), atol=1e-15)


@needs_numba
def test_neg_plogp_backends_agree():
    p = np.random.default_rng(3).random(1000)
    p[::5] = 0
    assert kernels.neg_plogp_sum(p, use_numba=True) == pytest.approx(kernels.neg_plogp_sum(p, use_numba=False),
                                                                       rel=1e-13)


def test_python_loops_match_numpy():
    # the uncompiled loop bodies are the reference implementation
    y, loc, logw = _inputs()
    np.testing.assert_allclose(kernels._mixture_logpdf_loop.py_func(y[:200], loc, logw, 0.8),
                               kernels._mixture_logpdf_numpy(y[:200], loc, logw, 0.8), atol=1e-12)
    p = np.array([0.2, 0.0, 0.8])
    assert kernels._neg_plogp_sum_loop.py_func(p) == pytest.approx(-(0.2 * math.log(0.2) + 0.8 * math.log(0.8)))


def test_env_flag(monkeypatch):
    monkeypatch.setenv("DIRTYGRID_NUMBA", "0")
    assert not _accel.numba_enabled()
    monkeypatch.setenv("DIRTYGRID_NUMBA", "1")
    assert _accel.numba_enabled() == _accel.HAVE_NUMBA


def test_entropy_identical_under_both_backends(monkeypatch):
    u = esdu(10, 4)
    monkeypatch.setenv("DIRTYGRID_NUMBA", "0")
    h_np = mixture_entropy(u, 1.0)
    l_np = lattice_mixture_entropy(np.ones(30), 0.5, 1.0)
    monkeypatch.setenv("DIRTYGRID_NUMBA", "1")
    assert mixture_entropy(u, 1.0) == pytest.approx(h_np, abs=1e-12)
    assert lattice_mixture_entropy(np.ones(30), 0.5, 1.0) == pytest.approx(l_np, abs=1e-12)


def test_kernel_decorator_without_numba(monkeypatch):
    monkeypatch.setattr(_accel, "HAVE_NUMBA", False)

    def f(x):
        return x + 1

    g = _accel.kernel(f)
    assert g is f and g.py_func is f
    assert not _accel.numba_enabled()
    importlib.reload(_accel)
