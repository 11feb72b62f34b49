"""Reproduction experiments: figure data, regression against the bundled
reference curves, the property suite and the formula discrepancy report.

Each ``run_*`` function returns a JSON-ready report dict with an ``ok`` flag
and, when ``config.out`` is set, writes a run directory::

    OUT/config.json      resolved configuration
    OUT/curves/*.csv     emitted curves
    OUT/report.json      the report
"""
from __future__ import annotations

import json
import math
import shutil
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import bounds, data, oracle, scheme2
from .bcregion import (BcParams, RateRegion, check_inner_inside_outer, convex_hull, grid_size,
                       simple_outer_bound, sweep)
from .core import DiscreteDistribution, esdu
from .entropy import QuadratureConfig, discrete_entropy, gaussian_entropy, mixture_entropy
from .errors import ConsistencyFailure, InsufficientSamples, InvalidParameter
from .scheme1 import Scheme1Params, simulate

EXPERIMENTS = ("fig2", "fig3", "validate", "discrepancy")
FIG2_STATE_RULES = ("below", "above")
K_READINGS = ("max", "min")

CLOSED_FORM_TOL = 1e-6
R1_TOL = 1e-2
R2_TOL = 2e-2
FIG3_TOL = 2e-2
FORM_AGREEMENT_TOL = 5e-2

TABLE_I = np.array([[0, 3, 3, 3, 6],
                    [1, 1, 4, 4, 4],
                    [2, 2, 2, 5, 5]])


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved parameters of one run. Spacings are in units of the noise
    standard deviation (``sigma`` for fig2, ``sigma1`` for fig3)."""

    experiment: str = "fig2"
    snr_db: tuple = tuple(float(v) for v in range(21))
    inr_db: tuple = (5.0, 10.0, 20.0)
    delta0: float = 3.0
    sigma: float = 1.0
    state_rule: str = "below"
    r1_form: str = "derived"
    k_max: int = 1024
    snr1_db: float = 20.0
    sigma2_ratio: float = 10.0
    delta0_list: tuple = tuple(0.5 * i for i in range(1, 9))
    reference_delta0: float = 3.0
    bc_state_rule: str = "subset"
    tol: float = 1e-6
    seed: int = 0
    samples: int = 200_000
    oracle_cases: int = 8
    workers: int = 1
    out: str | None = None

    @property
    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(tolerance_bits=self.tol)

    def resolved(self) -> dict:
        d = asdict(self)
        d["snr_db"] = list(self.snr_db)
        d["inr_db"] = list(self.inr_db)
        d["delta0_list"] = list(self.delta0_list)
        return d


# --- output helpers -------------------------------------------------------

def _fmt(v) -> str:
    return repr(float(v))


def curve_csv(rows, header) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _plain(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"{type(o).__name__} is not JSON serialisable")


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=_plain) + "\n"


def write_run(out, config: ExperimentConfig, curves: dict, report: dict, extra: dict | None = None):
    root = Path(out)
    (root / "curves").mkdir(parents=True, exist_ok=True)
    (root / "config.json").write_text(dump_json(config.resolved()), encoding="utf-8")
    for name, text in sorted(curves.items()):
        (root / "curves" / f"{name}.csv").write_text(text, encoding="utf-8", newline="")
    for name, text in sorted((extra or {}).items()):
        (root / name).write_text(text, encoding="utf-8", newline="")
    (root / "report.json").write_text(dump_json(report), encoding="utf-8")


def _compare(snr, values, reference, tol):
    """Per-point deltas of ``values`` (on ``snr``) against a reference curve."""
    lookup = {round(float(s), 9): i for i, s in enumerate(snr)}
    rows = []
    for s, ref in reference:
        i = lookup.get(round(float(s), 9))
        if i is None:
            continue
        rows.append({"snr_db": float(s), "computed": float(values[i]), "reference": float(ref),
                     "delta": float(values[i] - ref)})
    worst = max((abs(r["delta"]) for r in rows), default=0.0)
    return {"tolerance": tol, "compared": len(rows), "max_abs_delta": worst,
            "ok": bool(rows) and worst < tol, "points": rows}


# --- Figure 2 -------------------------------------------------------------

def fig2_grid(A: float, delta0: float, sigma: float = 1.0, k_reading: str = "max"):
    """``(K, D)`` of the input grid: ``K = max{2, ceil(A / (delta0 sigma))}``.

    The ``"min"`` reading is kept for the discrepancy report; it can give a
    one-level code, returned as ``(1, None)``.
    """
    raw = math.ceil(A / (delta0 * sigma))
    K = max(2, raw) if k_reading == "max" else min(2, raw)
    return K, (A / (K - 1) if K > 1 else None)


def fig2_state_count(B: float, D: float, state_rule: str = "below") -> int:
    """Number of state levels on the ``D``-grid for interference peak ``B``.

    ``"below"``: ``ceil(B/D)`` levels, top level ``(ceil(B/D) - 1) D < B``
    (reproduces the published curves). ``"above"``: ``B' = ceil(B/D) D`` and
    ``B'/D + 1`` levels.
    """
    n = math.ceil(B / D)
    return max(1, n) if state_rule == "below" else n + 1


def r2_point(snr_db: float, inr_db: float, sigma: float = 1.0, delta0: float = 3.0,
             state_rule: str = "below", k_reading: str = "max",
             cfg: QuadratureConfig | None = None) -> bounds.RateValue:
    A = float(bounds.snr_db_to_amplitude(snr_db, sigma))
    B = float(bounds.snr_db_to_amplitude(inr_db, sigma))
    K, D = fig2_grid(A, delta0, sigma, k_reading)
    if K == 1:
        return bounds.RateValue(0.0)
    params = scheme2.Scheme2Params(A, D)
    t = scheme2.esdu_on_grid(K, D)
    s = scheme2.esdu_on_grid(fig2_state_count(B, D, state_rule), D)
    return scheme2.rate_r2(t, s, sigma, params, cfg)


def fig2_curves(config: ExperimentConfig) -> dict:
    """``name -> array of rates`` on ``config.snr_db``; raw (unclamped) values."""
    sig = config.sigma
    cfg = config.quadrature
    amps = [float(bounds.snr_db_to_amplitude(s, sig)) for s in config.snr_db]
    curves = {
        "fig2_cbar": [bounds.state_free_ub(a, sig).raw_bits for a in amps],
        "fig2_r0": [bounds.r0_costa(a, sig).raw_bits for a in amps],
        "fig2_r1": [bounds.r1_max_over_k(a, sig, config.r1_form, config.k_max)[0].raw_bits for a in amps],
    }
    for inr in config.inr_db:
        curves[f"fig2_r2_inr{inr:g}"] = [
            r2_point(s, inr, sig, config.delta0, config.state_rule, "max", cfg).raw_bits
            for s in config.snr_db]
    return {k: np.array(v) for k, v in curves.items()}


def _fig2_tolerance(name):
    if name in ("fig2_cbar", "fig2_r0"):
        return CLOSED_FORM_TOL
    return R1_TOL if name == "fig2_r1" else R2_TOL


def run_fig2(config: ExperimentConfig) -> dict:
    curves = fig2_curves(config)
    snr = np.array(config.snr_db, dtype=float)
    checks = {}
    for name, values in curves.items():
        try:
            ref = data.load_curve(name)
        except InvalidParameter as exc:  # missing reference: report, do not fail the run
            checks[name] = {"ok": True, "skipped": str(exc)}
            continue
        checks[name] = _compare(snr, values, ref, _fig2_tolerance(name))
    report = {"experiment": "fig2", "ok": all(c["ok"] for c in checks.values()), "regression": checks}
    if config.out:
        texts = {n: curve_csv(zip(snr, v), ("snr_db", "rate_bits")) for n, v in curves.items()}
        write_run(config.out, config, texts, report)
    return report


# --- Figure 3 -------------------------------------------------------------

def fig3_bc(config: ExperimentConfig) -> BcParams:
    s1 = config.sigma
    return BcParams(float(bounds.snr_db_to_amplitude(config.snr1_db, s1)), s1, config.sigma2_ratio * s1)


def _vertex_match(hull, reference, tol):
    H = np.array(hull, dtype=float)
    rows = []
    for r1, r2 in reference:
        d = np.abs(H - (r1, r2)).max(axis=1)
        j = int(np.argmin(d))
        rows.append({"reference": [float(r1), float(r2)], "nearest_vertex": H[j].tolist(),
                     "max_coord_delta": float(d[j])})
    worst = max((r["max_coord_delta"] for r in rows), default=0.0)
    return {"tolerance": tol, "compared": len(rows), "max_abs_delta": worst, "ok": worst < tol,
            "points": rows}


def _boundary_match(region: RateRegion, reference, tol):
    rows = [{"reference": [float(a), float(b)], "boundary_distance": region.boundary_distance((a, b))}
            for a, b in reference]
    worst = max((r["boundary_distance"] for r in rows), default=0.0)
    return {"tolerance": tol, "compared": len(rows), "max_abs_delta": worst, "ok": worst < tol,
            "points": rows}


def run_fig3(config: ExperimentConfig) -> dict:
    bc = fig3_bc(config)
    scale = config.sigma
    opt_list = [d * scale for d in config.delta0_list]
    ref_d0 = config.reference_delta0 * scale
    extra = [] if any(math.isclose(ref_d0, d) for d in opt_list) else [ref_d0]
    full = sweep(bc, opt_list + extra, config.quadrature, config.workers, config.bc_state_rule)

    def pick(pred):
        return [p for p in full.points if pred(p.setting.delta0)]

    opt_pts = pick(lambda d0: any(math.isclose(d0, d) for d in opt_list))
    ref_pts = pick(lambda d0: math.isclose(d0, ref_d0))
    opt = RateRegion(full.points, convex_hull(opt_pts))
    ref = RateRegion(ref_pts, convex_hull(ref_pts))

    ob = simple_outer_bound(bc)
    checks = {}
    try:
        d3 = data.load_curve("fig3_ib_dpc_d3")
        checks["ib_dpc_reference_delta0"] = _vertex_match(ref.hull, d3, FIG3_TOL)
    except InvalidParameter as exc:
        checks["ib_dpc_reference_delta0"] = {"ok": True, "skipped": str(exc)}
    try:
        dopt = data.load_curve("fig3_ib_dpc_opt")
        checks["ib_dpc_optimised"] = _boundary_match(opt, dopt, FIG3_TOL)
    except InvalidParameter as exc:
        checks["ib_dpc_optimised"] = {"ok": True, "skipped": str(exc)}
    for name, region in (("inner_inside_outer_optimised", opt), ("inner_inside_outer_reference", ref)):
        try:
            rep = check_inner_inside_outer(region, bc)
            checks[name] = {"ok": True, **rep}
        except ConsistencyFailure as exc:
            checks[name] = {"ok": False, "violations": exc.offending}
    outside = [list(v) for v in ref.hull if not opt.contains(v, 1e-9)]
    checks["nesting"] = {"ok": not outside, "outside": outside}

    report = {
        "experiment": "fig3",
        "ok": all(c["ok"] for c in checks.values()),
        "bc": asdict(bc),
        "outer_bound": {"R1": ob.c1, "R2": ob.c2, "R1+R2": ob.c_sum},
        "hull_optimised": [list(v) for v in opt.hull],
        "hull_reference_delta0": [list(v) for v in ref.hull],
        "settings_evaluated": len(full.points),
        "regression": checks,
    }
    if config.out:
        hdr = ("r1_bits", "r2_bits")
        ob_poly = [(0.0, ob.c2), (ob.c_sum - ob.c2, ob.c2), (ob.c1, 0.0)]
        texts = {
            "fig3_ib_dpc_opt": curve_csv(opt.hull, hdr),
            "fig3_ib_dpc_d3": curve_csv(ref.hull, hdr),
            "fig3_ob_simple": curve_csv(ob_poly, hdr),
            "fig3_region_points": opt.to_csv(),
        }
        write_run(config.out, config, texts, report)
        for name in data.FIG3_CURVES:
            try:
                shutil.copyfile(data.curve_path(name), Path(config.out) / "curves" / f"ref_{name}.csv")
            except (InvalidParameter, OSError):
                pass
    return report


# --- property suite ---------------------------------------------------------

def _gate(name, fn):
    try:
        ok, details = fn()
        status = "pass" if ok else "fail"
    except InsufficientSamples as exc:
        status, details = "insufficient-samples", {"reason": str(exc)}
    return {"name": name, "status": status, "details": details}


def _oracle_gates(config):
    cfg = config.quadrature
    corpus = oracle.grid_corpus(config.oracle_cases, config.seed)

    def sandwich():
        rows = []
        for u, sig in corpus:
            h = mixture_entropy(u, sig, cfg)
            lo, hi = gaussian_entropy(sig), gaussian_entropy(sig) + discrete_entropy(u)
            rows.append({"atoms": len(u), "sigma": sig, "h": h,
                         "ok": lo - cfg.tolerance_bits <= h <= hi + cfg.tolerance_bits})
        return all(r["ok"] for r in rows), {"cases": rows}

    def agreement():
        rows = []
        for i, (u, sig) in enumerate(corpus):
            h = mixture_entropy(u, sig, cfg)
            mc = oracle.mc_entropy(u, sig, config.samples, config.seed * 1000 + i)
            # the oracle cannot certify a quadrature whose own error budget
            # is coarser than the Monte Carlo resolution
            resolved = cfg.tolerance_bits <= mc.std_error
            rows.append({"atoms": len(u), "sigma": sig, "quadrature": h, "mc": mc.value,
                         "std_error": mc.std_error, "within_3se": mc.within(h),
                         "tolerance_resolved": resolved})
        ok = all(r["within_3se"] and r["tolerance_resolved"] for r in rows)
        return ok, {"cases": rows, "quadrature_tolerance": cfg.tolerance_bits}

    def gaussians():
        rows = []
        for j, sig in enumerate((0.5, 1.0, 4.0)):
            mc = oracle.mc_entropy(DiscreteDistribution.point_mass(0.0), sig, config.samples, config.seed + j)
            rows.append({"sigma": sig, "mc": mc.value, "std_error": mc.std_error,
                         "exact": gaussian_entropy(sig), "ok": mc.within(gaussian_entropy(sig))})
        return all(r["ok"] for r in rows), {"cases": rows}

    return [_gate("entropy.sandwich", sandwich), _gate("oracle.mixture_entropy", agreement),
            _gate("oracle.gaussian_entropy", gaussians)]


def scheme1_setup(alpha=None, A=10.0, K=8, sigma=1.0):
    if alpha is None:
        alpha = bounds.scheme1_alpha_star(A, K, sigma)
    params = Scheme1Params(A, K, alpha, sigma)
    state = esdu(20.0, 11)
    return params, state


def identity_residual(samples, params: Scheme1Params) -> float:
    """Largest circular distance between ``y'`` and ``[t + z_tilde] mod (A + D)``."""
    m = params.a_delta
    d = np.mod(samples.y_prime - (samples.t + samples.z_tilde), m)
    return float(np.max(np.minimum(d, m - d)))


def _scheme1_gates(config):
    n = config.samples

    def identity():
        params, state = scheme1_setup()
        sm = simulate(params, state, n, config.seed)
        res = identity_residual(sm, params)
        in_range = bool(np.all((sm.x >= 0) & (sm.x <= params.peak_A)))
        return res <= 1e-9 and in_range, {"max_residual": res, "x_in_range": in_range, "samples": n}

    def w0_uniform():
        params, state = scheme1_setup()
        if n < oracle.MIN_KS_SAMPLES:
            raise InsufficientSamples(f"need at least {oracle.MIN_KS_SAMPLES} samples, got {n}")
        sm = simulate(params, state, n, config.seed + 1)
        p = oracle.ks_uniform_test(sm.w0, params.delta)
        return p > 0.01, {"p_value": p}

    def variances():
        rows = []
        base, state = scheme1_setup()
        for alpha in (0.5, bounds.scheme1_alpha_star(base.peak_A, base.K, base.sigma), 0.99):
            params = replace(base, alpha=alpha)
            est = oracle.mc_variance(lambda k, sd: simulate(params, state, k, sd), lambda s: s.z_tilde,
                                     n, config.seed + 2)
            exact = bounds.scheme1_noise_variance(params.peak_A, params.K, params.sigma, alpha)
            rows.append({"quantity": "z_tilde", "alpha": alpha, "mc": est.value, "std_error": est.std_error,
                         "exact": exact, "ok": est.within(exact)})
        d, A = base.delta, base.peak_A
        for label, fn, exact in (("w0", lambda s: s.w0, d * d / 12.0),
                                 ("x", lambda s: s.x, A * (A + 2.0 * d) / 12.0)):
            est = oracle.mc_variance(lambda k, sd: simulate(base, state, k, sd), fn, n, config.seed + 3)
            rows.append({"quantity": label, "alpha": base.alpha, "mc": est.value, "std_error": est.std_error,
                         "exact": exact, "ok": est.within(exact)})
        return all(r["ok"] for r in rows), {"cases": rows}

    def x_independence():
        params, state = scheme1_setup()
        sm = simulate(params, state, n, config.seed + 4)
        # x, t and s sit on grids, so rounding to grid indices gives exact labels
        xi = np.rint(sm.x / params.delta)
        ti = np.rint(sm.t / params.delta)
        pvals = {"x_uniform": oracle.chi2_uniform_test(xi),
                 "x_vs_t": oracle.chi2_independence_test(xi, ti),
                 "x_vs_s": oracle.chi2_independence_test(xi, sm.s)}
        corr = float(abs(np.corrcoef(sm.w0, sm.t)[0, 1]))
        ok = all(p > 0.01 for p in pvals.values()) and corr < 4.0 / math.sqrt(n)
        return ok, {"p_values": pvals, "abs_corr_w0_t": corr, "corr_limit": 4.0 / math.sqrt(n)}

    return [_gate("scheme1.identity_chain", identity), _gate("scheme1.w0_uniform", w0_uniform),
            _gate("scheme1.noise_variance", variances), _gate("scheme1.x_independence", x_independence)]


def table_i() -> np.ndarray:
    params = scheme2.Scheme2Params(2.0, 1.0)
    t, s = np.meshgrid(np.arange(3.0), np.arange(5.0), indexing="ij")
    return np.asarray(scheme2.map_phi(t, s, params))


def roundtrip_failures(k_values=(1, 2, 3, 7, 16, 64), n_states=64, deltas=(1.0, 10.0 / 3.0)) -> int:
    bad = 0
    for delta in deltas:
        for k in k_values:
            params = scheme2.Scheme2Params((k - 1) * delta, delta)
            t, s = np.meshgrid(np.arange(k) * delta, np.arange(n_states) * delta, indexing="ij")
            u = scheme2.map_phi(t, s, params)
            bad += int(np.count_nonzero(np.abs(scheme2.recover_t(u, params) - t) > 1e-9 * delta))
    return bad


def x_law_spread(k=7, n_states=64, delta=1.0) -> float:
    """Largest pmf difference of ``X | S = s`` across states for uniform ``T``."""
    params = scheme2.Scheme2Params((k - 1) * delta, delta)
    joint = scheme2.build_joint(scheme2.esdu_on_grid(k, delta), scheme2.esdu_on_grid(n_states, delta), params)
    laws = list(joint.x_given_s().values())
    ref = laws[0]
    worst = 0.0
    for law in laws[1:]:
        if law.locations.shape != ref.locations.shape or np.any(law.locations != ref.locations):
            return math.inf
        worst = max(worst, float(np.max(np.abs(law.probabilities - ref.probabilities))))
    return worst


def _scheme2_gates(config):
    def table():
        got = table_i()
        return bool(np.array_equal(got, TABLE_I)), {"table": got.tolist()}

    def roundtrip():
        bad = roundtrip_failures()
        return bad == 0, {"failures": bad}

    def independence():
        spread = x_law_spread()
        return spread <= 1e-12, {"max_pmf_difference": spread}

    return [_gate("scheme2.table_i", table), _gate("scheme2.recover_roundtrip", roundtrip),
            _gate("scheme2.x_independent_of_s", independence)]


def run_validate(config: ExperimentConfig) -> dict:
    gates = _oracle_gates(config) + _scheme1_gates(config) + _scheme2_gates(config)
    report = {"experiment": "validate", "ok": all(g["status"] != "fail" for g in gates), "gates": gates}
    if config.out:
        write_run(config.out, config, {}, report)
    return report


# --- discrepancy report -----------------------------------------------------

def r1_gap_table(A: float, sigma: float, k_values) -> list[dict]:
    rows = []
    for k in k_values:
        p = bounds.r1_printed(A, k, sigma).raw_bits
        d = bounds.r1_derived(A, k, sigma).raw_bits
        rows.append({"K": int(k), "printed": p, "derived": d, "gap": p - d})
    return rows


def _max_abs(rows, key="gap"):
    j = int(np.argmax([abs(r[key]) for r in rows]))
    return rows[j]


def run_discrepancy_report(config: ExperimentConfig) -> dict:
    sig = config.sigma
    cfg = config.quadrature
    sections = {}

    # modulo-precoder closed form: printed versus recomputed
    tables = {}
    for snr in (10.0, 20.0):
        A = float(bounds.snr_db_to_amplitude(snr, sig))
        rows = r1_gap_table(A, sig, range(3, 65))
        worst = _max_abs(rows)
        tables[f"A={A:g}"] = {
            "A": A, "sigma": sig, "rows": rows,
            "max_abs_gap": abs(worst["gap"]), "argmax_K": worst["K"],
            "gap_at_K": {str(k): r1_gap_table(A, sig, [k])[0]["gap"] for k in (128, 1024, 8192)},
        }
    ref = data.load_curve("fig2_r1")
    fig2_rows = []
    for snr, r in ref:
        A = float(bounds.snr_db_to_amplitude(snr, sig))
        cbar = bounds.state_free_ub(A, sig).raw_bits
        der, kd = bounds.r1_max_over_k(A, sig, "derived", config.k_max)
        pri, kp = bounds.r1_max_over_k(A, sig, "printed", config.k_max)
        lit = max((bounds.r1_printed(A, k, sig).raw_bits, k) for k in range(3, config.k_max + 1))
        fig2_rows.append({"snr_db": float(snr), "reference": float(r), "cbar": cbar,
                          "derived": der.raw_bits, "derived_K": kd, "derived_delta": der.raw_bits - r,
                          "printed_k4": pri.raw_bits, "printed_k4_K": kp, "printed_k4_delta": pri.raw_bits - r,
                          "printed_k3": lit[0], "printed_k3_K": lit[1], "printed_k3_delta": lit[0] - r})
    sections["r1_forms"] = {
        "gap_tables": tables,
        "fig2_comparison": fig2_rows,
        "max_abs_delta": {
            key: max(abs(row[f"{key}_delta"]) for row in fig2_rows)
            for key in ("derived", "printed_k4", "printed_k3")},
        "agreement_tolerance": FORM_AGREEMENT_TOL,
        "both_forms_agree": all(abs(row["derived_delta"]) < FORM_AGREEMENT_TOL
                                and abs(row["printed_k4_delta"]) < FORM_AGREEMENT_TOL for row in fig2_rows),
        "printed_k3_exceeds_cbar": [row["snr_db"] for row in fig2_rows if row["printed_k3"] > row["cbar"]],
        "note": ("The two forms differ only in the quantisation slot of the second logarithm. "
                 "At K = 3 the printed slot is zero, so scanning K from 3 lets the printed form "
                 "exceed the capacity upper bound; scanning from K = 4 keeps it near the published "
                 "curve. The residual algebraic gap is tabulated, not resolved."),
    }

    # grid size reading and state-grid rule, evidenced on the R2 curves
    r2 = {}
    for inr in (5.0, 10.0, 20.0):
        try:
            refc = data.load_curve(f"fig2_r2_inr{inr:g}")
        except InvalidParameter:
            continue
        variants = {}
        for k_reading in K_READINGS:
            for rule in FIG2_STATE_RULES:
                deltas = [r2_point(s, inr, sig, config.delta0, rule, k_reading, cfg).raw_bits - r
                          for s, r in refc]
                variants[f"K={k_reading},states={rule}"] = max(abs(d) for d in deltas)
        r2[f"inr{inr:g}"] = variants
    sections["fig2_r2_readings"] = {
        "max_abs_delta": r2,
        "chosen": "K=max,states=below",
        "note": ("K = max{2, ceil(A/delta0)}; the min reading pins K = 2. States: ceil(B/D) levels "
                 "spaced D, i.e. the top level is the last grid point strictly below B."),
    }

    # broadcast sweep: full state grid versus evenly spread subsets
    bc = fig3_bc(config)
    d0 = config.reference_delta0 * sig
    intercepts = {}
    for rule in ("full", "subset"):
        reg = sweep(bc, [d0], cfg, config.workers, rule)
        intercepts[rule] = {"r1_max": max(v[0] for v in reg.hull), "r2_max": max(v[1] for v in reg.hull),
                            "hull_vertices": len(reg.hull)}
    sections["fig3_state_sets"] = {"delta0": d0, "K": grid_size(bc.peak_P, d0), "by_rule": intercepts,
                                   "chosen": config.bc_state_rule}
    sections["snr_convention"] = {"amplitude_of_snr_db": "A = sigma * 10^(snr_db / 10)"}

    report = {"experiment": "discrepancy", "ok": sections["r1_forms"]["both_forms_agree"], "sections": sections}
    text = render_discrepancy(report)
    if config.out:
        write_run(config.out, config, {}, report, {"discrepancy.txt": text})
    return report


def render_discrepancy(report: dict) -> str:
    s = report["sections"]
    r1 = s["r1_forms"]
    out = ["modulo precoder rate: printed closed form vs recomputed form", ""]
    for key, tab in r1["gap_tables"].items():
        out.append(f"{key}, sigma={tab['sigma']:g}: max |gap| = {tab['max_abs_gap']:.9f} at K = {tab['argmax_K']}")
        out.append(f"  {'K':>5} {'printed':>13} {'derived':>13} {'gap':>13}")
        for row in tab["rows"]:
            out.append(f"  {row['K']:>5} {row['printed']:>13.9f} {row['derived']:>13.9f} {row['gap']:>13.9f}")
        for k, g in tab["gap_at_K"].items():
            out.append(f"  K = {k}: gap {g:.3e}")
        out.append("")
    out.append("against the published curve (max over K):")
    out.append(f"  {'snr':>4} {'ref':>10} {'derived':>10} {'print K>=4':>11} {'print K>=3':>11} {'cbar':>10}")
    for row in r1["fig2_comparison"]:
        out.append(f"  {row['snr_db']:>4g} {row['reference']:>10.6f} {row['derived']:>10.6f} "
                   f"{row['printed_k4']:>11.6f} {row['printed_k3']:>11.6f} {row['cbar']:>10.6f}")
    out.append("  max |delta|: " + ", ".join(f"{k} {v:.4f}" for k, v in r1["max_abs_delta"].items()))
    out.append(f"  both forms within {r1['agreement_tolerance']:g} bits: {r1['both_forms_agree']}")
    out.append("")
    out.append("grid-state readings for the precoder curves (max |delta| vs published):")
    for inr, variants in s["fig2_r2_readings"]["max_abs_delta"].items():
        out.append(f"  {inr}: " + ", ".join(f"{k} {v:.4f}" for k, v in variants.items()))
    out.append("")
    f3 = s["fig3_state_sets"]
    out.append(f"broadcast sweep at delta0={f3['delta0']:g} (K={f3['K']}):")
    for rule, v in f3["by_rule"].items():
        out.append(f"  states={rule}: R1 max {v['r1_max']:.6f}, R2 max {v['r2_max']:.6f}")
    return "\n".join(out) + "\n"
