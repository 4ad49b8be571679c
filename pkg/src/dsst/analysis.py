"""Concentration and accuracy metrics, and downsampling-factor bounds."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidArgument
from .signal import Signal

__all__ = [
    "BoundsReport",
    "renyi_entropy",
    "output_snr",
    "rmse",
    "compute_bounds",
    "rf_model",
]


def _values(tf) -> np.ndarray:
    return tf.data if hasattr(tf, "data") else np.asarray(tf)


def renyi_entropy(tf, alpha: float = 3.0, measure: str = "cells") -> float:
    """Order-`alpha` Renyi entropy (bits) of the energy distribution ``|tf|^2``.

    With ``measure="cells"`` every cell has unit area, so a uniform spread
    over ``K`` cells gives ``log2(K)``. ``measure="tf"`` integrates over
    time and frequency instead: each cell of a :class:`TfMatrix` has area
    ``(Ht / fs) * df`` (s * Hz), which adds ``log2`` of that area and makes
    the value comparable across hops and DFT lengths.
    """
    if not alpha > 0 or alpha == 1:
        raise InvalidArgument("alpha must be positive and != 1")
    if measure not in ("cells", "tf"):
        raise InvalidArgument("measure must be 'cells' or 'tf'")
    p = np.abs(_values(tf)) ** 2
    total = float(p.sum())
    if total == 0 or not math.isfinite(total):
        raise InvalidArgument("matrix has no energy")
    p = p / total
    h = float(np.log2(np.sum(p**alpha)) / (1 - alpha))
    if measure == "tf":
        if not hasattr(tf, "df"):
            raise InvalidArgument("measure='tf' needs a TfMatrix")
        h += math.log2(tf.Ht * tf.df / tf.fs)
    return h


def _pair(reference, estimate):
    x = reference.samples if isinstance(reference, Signal) else np.asarray(reference, float)
    y = estimate.samples if isinstance(estimate, Signal) else np.asarray(estimate, float)
    if x.shape != y.shape:
        raise InvalidArgument(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size == 0:
        raise InvalidArgument("empty signals")
    return x, y


def output_snr(reference, estimate) -> float:
    """``10 log10(|x|^2 / |x - x_hat|^2)`` in dB; ``inf`` for a perfect estimate."""
    x, y = _pair(reference, estimate)
    num = float(np.dot(x, x))
    if num == 0:
        raise InvalidArgument("reference signal has zero energy")
    err = x - y
    den = float(np.dot(err, err))
    if den == 0:
        return math.inf
    return 10 * math.log10(num / den)


def rmse(reference, estimate) -> float:
    x, y = _pair(reference, estimate)
    return float(np.sqrt(np.mean((y - x) ** 2)))


@dataclass(frozen=True)
class BoundsReport:
    """Frequency spread of the window and the largest useful ``Hf``.

    ``hf_support`` keeps the outer bins of the effective support moving
    (``df < 1.5 sigma_f``); ``hf_rf`` bounds the saturated reassignment
    frequency by half a bin (``df < sqrt(2) sigma_f``).
    """

    sigma: float
    fs: float
    N: int
    sigma_f: float
    hf_support: float
    hf_rf: float
    delta_f_max_support: float
    delta_f_max_rf: float

    def to_dict(self) -> dict:
        return asdict(self)


def compute_bounds(sigma: float, fs: float, N: int) -> BoundsReport:
    if not (sigma > 0 and fs > 0 and N > 0):
        raise InvalidArgument("sigma, fs and N must be positive")
    sigma_f = 1 / (2 * math.pi * sigma)
    return BoundsReport(
        sigma=sigma,
        fs=fs,
        N=N,
        sigma_f=sigma_f,
        hf_support=3 * N / (4 * math.pi * sigma * fs),
        hf_rf=math.sqrt(2) * N / (2 * math.pi * sigma * fs),
        delta_f_max_support=1.5 * sigma_f,
        delta_f_max_rf=math.sqrt(2) * sigma_f,
    )


def rf_model(delta_f, sigma: float, f_d):
    """Reassignment frequency (Hz) predicted by a one-bin forward difference.

    `f_d` is the signed distance of the bin from the ridge. The prediction
    tends to ``-f_d`` as ``delta_f -> 0`` and saturates at
    ``-1 / (4 pi^2 delta_f sigma^2)`` for large positive `f_d`.
    """
    delta_f = np.asarray(delta_f, dtype=np.float64)
    if np.any(delta_f <= 0):
        raise InvalidArgument("delta_f must be positive")
    c = 4 * math.pi**2 * delta_f * sigma**2
    expo = -2 * math.pi**2 * delta_f**2 * sigma**2 - c * np.asarray(f_d, dtype=np.float64)
    out = np.expm1(expo) / c
    return float(out) if np.ndim(out) == 0 else out
