"""Command-line entry point: ``dirtygrid fig2|fig3|validate|discrepancy``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import experiments
from .errors import DirtyGridError
from .experiments import ExperimentConfig


def parse_range(text: str) -> tuple:
    """``"a:b:step"`` (inclusive of ``b``) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise argparse.ArgumentTypeError(f"expected start:stop:step with step > 0, got {text!r}")
        a, b, step = parts
        n = int(np.floor((b - a) / step + 1e-9)) + 1
        if n < 1:
            raise argparse.ArgumentTypeError(f"empty range {text!r}")
        return tuple(round(a + i * step, 12) for i in range(n))
    return parse_list(text)


def parse_list(text: str) -> tuple:
    try:
        vals = tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="run directory for config.json, curves/*.csv and report.json")
    common.add_argument("--seed", type=int, default=0, help="base seed for Monte Carlo draws")
    common.add_argument("--tol", type=float, default=1e-6, help="quadrature tolerance in bits")
    common.add_argument("--sigma", type=float, default=1.0, help="noise standard deviation (sigma1 for fig3)")
    common.add_argument("--workers", type=_positive_int, default=1, help="process count for sweeps")

    p = argparse.ArgumentParser(prog="dirtygrid", description=__doc__)
    sub = p.add_subparsers(dest="experiment", required=True)

    f2 = sub.add_parser("fig2", parents=[common], help="single-user rate curves versus SNR")
    f2.add_argument("--snr-db", type=parse_range, default=ExperimentConfig.snr_db,
                    help="SNR grid in dB, start:stop:step or a comma list")
    f2.add_argument("--inr-db", type=parse_list, default=ExperimentConfig.inr_db, help="comma list of INR values in dB")
    f2.add_argument("--delta0", type=float, default=3.0, help="reference grid spacing in units of sigma")
    f2.add_argument("--state-rule", choices=experiments.FIG2_STATE_RULES, default="below",
                    help="state grid: n = ceil(B/delta) points (below) or one more (above)")
    f2.add_argument("--r1-form", choices=("derived", "printed"), default="derived",
                    help="closed form scanned over K for the modulo precoder")

    f3 = sub.add_parser("fig3", parents=[common], help="broadcast inner bound region")
    f3.add_argument("--snr1-db", type=float, default=20.0, help="SNR of the strong user in dB")
    f3.add_argument("--sigma2-ratio", type=float, default=10.0, help="sigma2 / sigma1")
    f3.add_argument("--delta0-list", type=parse_range, default=ExperimentConfig.delta0_list,
                    help="grid spacings swept for the optimised region, in units of sigma1")
    f3.add_argument("--reference-delta0", type=float, default=3.0, help="spacing of the single-spacing region")
    f3.add_argument("--state-rule", dest="bc_state_rule", choices=("subset", "full"), default="subset",
                    help="state supports swept per setting")

    v = sub.add_parser("validate", parents=[common], help="oracle and structural property suite")
    v.add_argument("--samples", type=int, default=ExperimentConfig.samples, help="Monte Carlo draws per gate")
    v.add_argument("--oracle-cases", type=_positive_int, default=ExperimentConfig.oracle_cases,
                   help="random mixtures checked against the quadrature")

    sub.add_parser("discrepancy", parents=[common], help="closed-form and reading discrepancies")
    return p


RUNNERS = {
    "fig2": experiments.run_fig2,
    "fig3": experiments.run_fig3,
    "validate": experiments.run_validate,
    "discrepancy": experiments.run_discrepancy_report,
}


def config_from_args(args) -> ExperimentConfig:
    fields = set(ExperimentConfig.__dataclass_fields__)
    return ExperimentConfig(**{k: v for k, v in vars(args).items() if k in fields})


def _summary(report: dict) -> str:
    exp = report["experiment"]
    if exp == "validate":
        lines = [f"{g['status']:>21}  {g['name']}" for g in report["gates"]]
    elif exp == "discrepancy":
        return experiments.render_discrepancy(report)
    else:
        lines = []
        for name, chk in report["regression"].items():
            if "skipped" in chk:
                lines.append(f"{'skipped':>8}  {name}: {chk['skipped']}")
            elif "max_abs_delta" in chk:
                tag = "ok" if chk["ok"] else "FAIL"
                lines.append(f"{tag:>8}  {name}: max |delta| {chk['max_abs_delta']:.3e} (tol {chk['tolerance']:g})")
            else:
                lines.append(f"{'ok' if chk['ok'] else 'FAIL':>8}  {name}")
    lines.append("overall: " + ("ok" if report["ok"] else "FAIL"))
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        report = RUNNERS[config.experiment](config)
    except DirtyGridError as exc:
        print(f"dirtygrid: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(_summary(report))
    if config.out is None and config.experiment == "validate":
        sys.stdout.write(experiments.dump_json(report))
    return 0 if report["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
