import math

import numpy as np
import pytest

from dirtygrid import bounds
from dirtygrid.bounds import (RateValue, costa_alpha_star, costa_lmmse, r0_costa, r1_derived,
                              r1_max_over_k, r1_printed, scheme1_alpha_star, scheme1_noise_variance,
                              snr_db_to_amplitude, state_free_ub)
from dirtygrid.errors import InvalidParameter

SWEEP = [snr_db_to_amplitude(s) for s in range(21)]


def test_rate_value_clamp():
    assert RateValue(-0.3).clamped_bits == 0.0
    assert RateValue(0.7).clamped_bits == 0.7
    assert float(RateValue(-0.3)) == -0.3


@pytest.mark.parametrize("A,v", [(1, 0.160964047), (10, 1.773872824), (100, 4.655184217)])
def test_state_free_ub(A, v):
    assert state_free_ub(A, 1.0).raw_bits == pytest.approx(v, abs=1e-8)


@pytest.mark.parametrize("A,v", [(1, -0.196875726), (10, 1.356581876), (100, 4.597625703)])
def test_r0(A, v):
    assert r0_costa(A, 1.0).raw_bits == pytest.approx(v, abs=1e-8)


@pytest.mark.parametrize("fn", [state_free_ub, r0_costa])
@pytest.mark.parametrize("A,sigma", [(0, 1), (1, 0), (-1, 1), (math.inf, 1)])
def test_closed_forms_reject(fn, A, sigma):
    with pytest.raises(InvalidParameter):
        fn(A, sigma)


def test_snr_convention_is_amplitude_ratio():
    assert snr_db_to_amplitude(20.0) == pytest.approx(100.0)
    assert snr_db_to_amplitude(10.0, sigma=2.0) == pytest.approx(20.0)


def test_costa_lmmse_examples():
    v, w, s = 3.0, 5.0, 1.5
    assert costa_lmmse(v, w, s, 1.0) == pytest.approx(s * s * (v + w) / (v + w + s * s))
    assert costa_lmmse(0.0, w, s, 0.0) == 0.0
    with pytest.raises(InvalidParameter):
        costa_lmmse(-1.0, 1.0, 1.0, 0.5)


def test_costa_alpha_star_minimises_on_grid():
    alphas = np.arange(0, 1 + 1e-12, 1e-4)
    for v in np.linspace(0.5, 50, 5):
        for w in np.linspace(0.5, 50, 5):
            a = costa_alpha_star(v, 1.0)
            best = alphas[np.argmin([costa_lmmse(v, w, 1.0, x) for x in alphas])]
            assert abs(best - a) <= 1e-3
            assert costa_lmmse(v, w, 1.0, a) <= costa_lmmse(v, w, 1.0, a + 0.01)
            assert costa_lmmse(v, w, 1.0, a) <= costa_lmmse(v, w, 1.0, a - 0.01)


def test_costa_alpha_star_examples():
    assert costa_alpha_star(0.0, 1.0) == 0.0
    assert costa_alpha_star(100 / 12, 1.0) == pytest.approx(100 / 112)


def test_scheme1_alpha_star():
    assert scheme1_alpha_star(10, 4, 1.0) == pytest.approx((100 + 200 / 3) / (112 + 200 / 3), abs=1e-6)
    assert scheme1_alpha_star(1, 3, 1e6) < 1e-9
    with pytest.raises(InvalidParameter):
        scheme1_alpha_star(10, 1, 1.0)
    alphas = np.arange(0, 1 + 1e-12, 1e-4)
    for A, K in [(10, 8), (3, 4), (100, 40)]:
        best = alphas[np.argmin(scheme1_noise_variance(A, K, 1.0, alphas))]
        assert abs(best - scheme1_alpha_star(A, K, 1.0)) <= 1e-4


def test_r1_preconditions():
    with pytest.raises(InvalidParameter):
        r1_printed(10, 2, 1.0)
    with pytest.raises(InvalidParameter):
        r1_derived(10, 1, 1.0)
    with pytest.raises(InvalidParameter):
        r1_max_over_k(10, 1.0, form="other")


def test_r1_derived_matches_slot_form():
    # derived = printed with the slot replaced by A^2 (K+1) / (12 (K-1) K^2)
    A, s2 = 37.0, 1.0
    for K in (2, 3, 10, 200):
        first = 0.5 * math.log2(A * A + 2 * A * A / (K - 1) + 12 * s2)
        slot = A * A * (K + 1) / (12 * (K - 1) * K * K)
        alt = first - 0.5 * math.log2(2 * math.pi * math.e) - 0.5 * math.log2(slot + s2)
        assert r1_derived(A, K, 1.0).raw_bits == pytest.approx(alt, abs=1e-12)


def test_r1_derived_equals_log_minus_noise_entropy():
    A, K, sigma = 10.0, 8, 1.0
    a = scheme1_alpha_star(A, K, sigma)
    v = scheme1_noise_variance(A, K, sigma, a)
    want = math.log2(A + A / (K - 1)) - 0.5 * math.log2(2 * math.pi * math.e * v)
    assert r1_derived(A, K, sigma).raw_bits == pytest.approx(want, abs=1e-12)


def test_r1_forms_close_at_k64():
    assert abs(r1_derived(100, 64, 1).raw_bits - r1_printed(100, 64, 1).raw_bits) < 0.05


def test_r1_derived_large_k_limit():
    P = 100 ** 2 / 12
    limit = math.log2(100) - 0.5 * math.log2(2 * math.pi * math.e * P / (P + 1))
    assert r1_derived(100, 10**5, 1.0).raw_bits == pytest.approx(limit, abs=1e-4)


def test_r1_max_over_k_examples():
    assert r1_max_over_k(100, 1.0)[0].raw_bits == pytest.approx(4.598488, abs=1e-2)
    assert r1_max_over_k(10, 1.0)[0].raw_bits == pytest.approx(1.417822, abs=1e-2)
    assert r1_max_over_k(1, 1.0)[0].raw_bits == pytest.approx(-0.137382, abs=1e-2)
    assert r1_max_over_k(100, 1.0, "printed")[0].raw_bits == pytest.approx(4.598488, abs=1e-2)
    assert r1_max_over_k(10, 1.0, "printed")[0].raw_bits == pytest.approx(1.417822, abs=1e-2)


def test_printed_form_at_k3_exceeds_upper_bound():
    assert r1_printed(100, 3, 1.0).raw_bits > state_free_ub(100, 1.0).raw_bits


def test_ordering_on_sweep():
    for A in SWEEP:
        ub = state_free_ub(A, 1.0).raw_bits
        r0 = r0_costa(A, 1.0).raw_bits
        r1 = r1_max_over_k(A, 1.0)[0].raw_bits
        r1p = r1_max_over_k(A, 1.0, "printed")[0].raw_bits
        assert r0 <= ub + 1e-9
        assert r1 <= ub + 1e-9 and r1p <= ub + 1e-9
        assert r1 >= r0


def test_monotone_in_amplitude():
    for fn in (state_free_ub, r0_costa, lambda a, s: r1_max_over_k(a, s)[0]):
        vals = [fn(A, 1.0).raw_bits for A in SWEEP]
        assert np.all(np.diff(vals) >= 0)


def test_noise_variance_vectorised():
    alphas = np.array([0.0, 0.5, 1.0])
    out = scheme1_noise_variance(10, 8, 1.0, alphas)
    assert out.shape == (3,)
    assert out[2] == pytest.approx((10 / 7) ** 2 / 12 + 1.0)
    assert isinstance(bounds.scheme1_noise_variance(10, 8, 1.0, 0.5), float)
