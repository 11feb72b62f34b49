"""Acceptance gates, one test per criterion, each at its stated tolerance."""
import math

import numpy as np
import pytest

from dirtygrid import bounds, data, oracle
from dirtygrid.bcregion import BcParams, check_inner_inside_outer, sweep
from dirtygrid.entropy import mixture_entropy
from dirtygrid.experiments import (TABLE_I, ExperimentConfig, dump_json, fig2_curves, identity_residual, r2_point,
                                   roundtrip_failures, run_discrepancy_report, scheme1_setup, table_i,
                                   x_law_spread)
from dirtygrid.scheme1 import simulate

SNR = np.arange(21.0)
AMPS = [bounds.snr_db_to_amplitude(s) for s in SNR]


def _ref(name):
    arr = data.load_curve(name)
    assert np.array_equal(arr[:, 0], SNR)
    return arr[:, 1]


def test_c1_closed_form_regression():
    cbar = [bounds.state_free_ub(a, 1.0).raw_bits for a in AMPS]
    r0 = [bounds.r0_costa(a, 1.0).raw_bits for a in AMPS]
    assert np.max(np.abs(np.array(cbar) - _ref("fig2_cbar"))) < 1e-6
    assert np.max(np.abs(np.array(r0) - _ref("fig2_r0"))) < 1e-6


def test_c2_r1_regression():
    r1 = [bounds.r1_max_over_k(a, 1.0, "derived")[0].raw_bits for a in AMPS]
    assert np.max(np.abs(np.array(r1) - _ref("fig2_r1"))) < 1e-2


@pytest.mark.xfail(strict=True, reason="the printed closed form misses the published curve: by 0.499 bits "
                                       "scanned from K=3 and by 0.043 bits scanned from K=4")
@pytest.mark.parametrize("k_min", [3, 4])
def test_c2_r1_regression_printed_form(k_min):
    r1 = [max(bounds.r1_printed(a, k, 1.0).raw_bits for k in range(k_min, 1025)) for a in AMPS]
    assert np.max(np.abs(np.array(r1) - _ref("fig2_r1"))) < 1e-2


@pytest.mark.parametrize("inr", [5, 10, 20])
def test_c3_r2_regression(inr):
    r2 = [r2_point(s, float(inr)).raw_bits for s in SNR]
    assert np.max(np.abs(np.array(r2) - _ref(f"fig2_r2_inr{inr}"))) < 2e-2


def test_c4_bc_region_regression():
    bc = BcParams(100.0, 1.0, 10.0)
    region = sweep(bc, [3.0])
    hull = np.array(region.hull)
    ref = data.load_curve("fig3_ib_dpc_d3")
    assert len(ref) == 12
    for pt in ref:
        assert np.min(np.max(np.abs(hull - pt), axis=1)) < 2e-2, pt
    r1max = max(v[0] for v in region.hull)
    r2max = max(v[1] for v in region.hull)
    assert abs(r1max - 4.64707) < 2e-2
    assert abs(r2max - 1.73599) < 2e-2
    for r1, r2 in region.hull:
        assert r1 <= 4.655184 + 1e-6 and r2 <= 1.773873 + 1e-6 and r1 + r2 <= 4.655184 + 1e-6
    assert check_inner_inside_outer(region, bc)["violations"] == []


def test_c5_scheme1_algebra():
    params, state = scheme1_setup()
    sm = simulate(params, state, 10**6, seed=5)
    assert identity_residual(sm, params) <= 1e-9
    assert np.all((sm.x >= 0) & (sm.x <= params.peak_A))
    assert oracle.ks_uniform_test(sm.w0, params.delta) > 0.01
    A, K, sig = params.peak_A, params.K, params.sigma
    for alpha in (0.5, bounds.scheme1_alpha_star(A, K, sig), 0.99):
        p = type(params)(A, K, alpha, sig)
        est = oracle.mc_variance(lambda n, sd: simulate(p, state, n, sd), lambda s: s.z_tilde, 10**6, 6)
        assert est.within(bounds.scheme1_noise_variance(A, K, sig, alpha)), alpha


def test_c6_scheme2_structure():
    assert np.array_equal(table_i(), TABLE_I)
    assert roundtrip_failures(k_values=range(1, 65), n_states=64) == 0
    for k in (2, 3, 7, 64):
        assert x_law_spread(k=k, n_states=64) <= 1e-12


def test_c7_oracle_equivalence():
    for i, (u, sigma) in enumerate(oracle.grid_corpus(20, seed=7)):
        mc = oracle.mc_entropy(u, sigma, 10**6, seed=700 + i)
        h = mixture_entropy(u, sigma)
        assert abs(h - mc.value) <= 3 * mc.std_error, (i, len(u), sigma, h, mc)


def test_c8_ordering_properties():
    cfg = ExperimentConfig()
    curves = fig2_curves(cfg)
    cbar, r0, r1 = curves["fig2_cbar"], curves["fig2_r0"], curves["fig2_r1"]
    assert np.all(r0 <= cbar)
    assert np.all(r1 <= cbar)
    assert np.all(r1 >= r0)
    for inr in (5, 10, 20):
        assert np.all(curves[f"fig2_r2_inr{inr}"] <= cbar + 2e-2)


def test_c9_discrepancy_report():
    cfg = ExperimentConfig(experiment="discrepancy")
    first = run_discrepancy_report(cfg)
    second = run_discrepancy_report(cfg)
    assert dump_json(first) == dump_json(second)
    forms = first["sections"]["r1_forms"]
    assert forms["both_forms_agree"]
    assert forms["max_abs_delta"]["derived"] < 5e-2
    assert forms["max_abs_delta"]["printed_k4"] < 5e-2
    tab = forms["gap_tables"]["A=100"]
    assert [r["K"] for r in tab["rows"]] == list(range(3, 65))
    assert tab["max_abs_gap"] > 0 and math.isfinite(tab["max_abs_gap"])
