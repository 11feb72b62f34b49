"""Bundled reference curves digitised from the published figures."""
from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InvalidParameter

ENV_VAR = "DIRTYGRID_DATA_DIR"

FIG2_CURVES = ("fig2_cbar", "fig2_r0", "fig2_r1", "fig2_r2_inr5", "fig2_r2_inr10", "fig2_r2_inr20")
FIG3_CURVES = ("fig3_ob", "fig3_ib_tg", "fig3_ib_emd", "fig3_ib_dpc_opt", "fig3_ib_dpc_d3")


def data_dir() -> Path:
    """``$DIRTYGRID_DATA_DIR`` if set, otherwise the packaged ``data`` folder."""
    override = os.environ.get(ENV_VAR)
    if override:
        return Path(override)
    return Path(str(resources.files("dirtygrid") / "data"))


def curve_path(name: str) -> Path:
    path = data_dir() / f"{name}.csv"
    if not path.is_file():
        raise InvalidParameter(f"reference curve {name!r} not found at {path}")
    return path


def load_curve(name: str) -> np.ndarray:
    """``(n, 2)`` array of a two-column reference CSV (header skipped)."""
    arr = np.loadtxt(curve_path(name), delimiter=",", skiprows=1, ndmin=2)
    if arr.shape[1] != 2:
        raise InvalidParameter(f"{name}: expected two columns, got {arr.shape[1]}")
    return arr
