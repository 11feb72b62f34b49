"""Closed-form capacity bounds and achievable rates (bits per channel use).

``state_free_ub``  upper bound from the state-free peak-limited channel.
``r0_costa``       Costa / Tomlinson-Harashima benchmark.
``r1_printed``     modulo precoder rate, evaluated exactly as published.
``r1_derived``     the same rate recomputed from the LMMSE argument at the
                   optimal scale factor; see :func:`r1_max_over_k` for which
                   one reproduces the published curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter

TWO_PI_E = 2.0 * math.pi * math.e


@dataclass(frozen=True)
class RateValue:
    """A rate in bits that may be negative; ``clamped_bits`` is ``[raw]^+``."""

    raw_bits: float

    @property
    def clamped_bits(self) -> float:
        return max(0.0, self.raw_bits)

    def __float__(self):
        return float(self.raw_bits)


def _positive(**kw):
    for name, v in kw.items():
        if not (v > 0 and math.isfinite(v)):
            raise InvalidParameter(f"{name} must be finite and > 0, got {v!r}")


def _int_at_least(name, k, lo):
    if int(k) != k or k < lo:
        raise InvalidParameter(f"{name} must be an integer >= {lo}, got {k!r}")


def state_free_ub(A: float, sigma: float) -> RateValue:
    """min{0.5 log2(1 + A^2/4 sigma^2), log2(1 + A / (sqrt(2 pi e) sigma))}."""
    _positive(A=A, sigma=sigma)
    snr = A / sigma
    a = 0.5 * math.log2(1.0 + snr * snr / 4.0)
    b = math.log2(1.0 + snr / math.sqrt(TWO_PI_E))
    return RateValue(min(a, b))


def r0_costa(A: float, sigma: float) -> RateValue:
    _positive(A=A, sigma=sigma)
    return RateValue(0.5 * math.log2(12.0 / TWO_PI_E + A * A / (TWO_PI_E * sigma * sigma)))


def costa_lmmse(var_x: float, var_s: float, sigma: float, alpha: float) -> float:
    """LMMSE of estimating ``X + alpha S`` from ``Y = X + S + Z``."""
    if var_x < 0 or var_s < 0:
        raise InvalidParameter("variances must be >= 0")
    s2 = sigma * sigma
    den = var_x + var_s + s2
    if den <= 0:
        raise InvalidParameter("var_x + var_s + sigma^2 must be > 0")
    num = (1.0 - alpha) ** 2 * var_x * var_s + s2 * var_x + alpha * alpha * s2 * var_s
    return num / den


def costa_alpha_star(var_x: float, sigma: float) -> float:
    _positive(sigma=sigma)
    if var_x < 0:
        raise InvalidParameter("var_x must be >= 0")
    return var_x / (var_x + sigma * sigma)


def scheme1_noise_variance(A: float, K: int, sigma: float, alpha) -> float:
    """Variance of the effective modulo-channel noise of the dithered
    grid precoder: ``D^2/12 + (alpha-1)^2 A (A + 2D)/12 + alpha^2 sigma^2``
    with ``D = A/(K-1)``. Vectorised over ``alpha``."""
    _positive(A=A, sigma=sigma)
    _int_at_least("K", K, 2)
    d = A / (K - 1)
    alpha = np.asarray(alpha, dtype=float)
    v = d * d / 12.0 + (alpha - 1.0) ** 2 * A * (A + 2.0 * d) / 12.0 + alpha ** 2 * sigma ** 2
    return float(v) if v.ndim == 0 else v


def scheme1_alpha_star(A: float, K: int, sigma: float) -> float:
    _positive(A=A, sigma=sigma)
    _int_at_least("K", K, 2)
    d = A / (K - 1)
    p = A * A + 2.0 * A * d
    return p / (p + 12.0 * sigma * sigma)


def r1_printed(A: float, K: int, sigma: float) -> RateValue:
    """The modulo-precoder rate exactly as the closed form is printed.

    Needs ``K >= 3``: the bracket ``1 - 1/(K-2)^2`` is singular at ``K = 2``
    and vanishes at ``K = 3``, where the quantisation term drops out.
    """
    _positive(A=A, sigma=sigma)
    _int_at_least("K", K, 3)
    s2 = sigma * sigma
    first = 0.5 * math.log2(A * A + 2.0 * A * A / (K - 1) + 12.0 * s2)
    slot = A * A / (12.0 * (K - 1) ** 2) * (1.0 - 1.0 / (K - 2) ** 2)
    return RateValue(first - 0.5 * math.log2(TWO_PI_E) - 0.5 * math.log2(slot + s2))


def r1_derived(A: float, K: int, sigma: float) -> RateValue:
    """``log2(A + D) - 0.5 log2(2 pi e V*)`` with the noise variance ``V*``
    minimised over the scale factor.

    Equals the printed form with the bracketed slot replaced by
    ``A^2 (K+1) / (12 (K-1) K^2)``.
    """
    _positive(A=A, sigma=sigma)
    _int_at_least("K", K, 2)
    d = A / (K - 1)
    p = A * (A + 2.0 * d) / 12.0
    s2 = sigma * sigma
    v_star = d * d / 12.0 + p * s2 / (p + s2)
    return RateValue(math.log2(A * K / (K - 1)) - 0.5 * math.log2(TWO_PI_E * v_star))


R1_FORMS = {
    # form -> (function, smallest K scanned)
    "derived": (r1_derived, 2),
    "printed": (r1_printed, 4),
}


def r1_max_over_k(A: float, sigma: float, form: str = "derived", k_max: int = 1024):
    """Best rate of the modulo precoder over ``K`` in ``[k_min, k_max]``.

    Returns ``(RateValue, K)``. The ``"derived"`` form scans from ``K = 2``
    and is what reproduces the published curve. The ``"printed"`` form scans
    from ``K = 4``; at ``K = 3`` its quantisation term is identically zero and
    the expression exceeds the capacity upper bound at high SNR.
    """
    try:
        fn, k_min = R1_FORMS[form]
    except KeyError:
        raise InvalidParameter(f"unknown R1 form {form!r}; choose from {sorted(R1_FORMS)}")
    if k_max < k_min:
        raise InvalidParameter(f"k_max must be >= {k_min}")
    best, best_k = None, None
    for k in range(k_min, k_max + 1):
        v = fn(A, k, sigma).raw_bits
        if best is None or v > best:
            best, best_k = v, k
    return RateValue(best), best_k


def snr_db_to_amplitude(snr_db, sigma: float = 1.0):
    """Amplitude ratio convention: ``snr_db = 10 log10(A / sigma)``."""
    a = sigma * 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
    return float(a) if a.ndim == 0 else a
