"""Ridge tracking, band zones and mode retrieval."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InvalidArgument, NoRidgeError
from .signal import Signal
from .sst import sst_inverse
from .stft import Kind, StftPlan, TfMatrix, band_filter, stft_inverse

__all__ = [
    "RidgeZone",
    "extract_ridge",
    "zone_from_ridge",
    "retrieve_mode",
    "retrieve_mode_full",
    "retrieve_mode_stft",
    "ridge_freqs",
]


@dataclass(frozen=True)
class RidgeZone:
    """Per-frame band ``center_bins[m] +/- half_bw_bins`` on a given grid."""

    center_bins: np.ndarray
    half_bw_bins: int
    df: float
    f0: float
    n_bins: int

    def __post_init__(self):
        c = np.asarray(self.center_bins, dtype=np.int64)
        if c.ndim != 1:
            raise InvalidArgument("center_bins must be 1-D")
        if self.half_bw_bins < 0:
            raise InvalidArgument("half_bw_bins must be >= 0")
        if c.size and (c.min() < 0 or c.max() >= self.n_bins):
            raise InvalidArgument("center bins outside the matrix")
        object.__setattr__(self, "center_bins", c)

    def check(self, tf: TfMatrix) -> None:
        if tf.n_frames != self.center_bins.size:
            raise InvalidArgument(
                f"zone has {self.center_bins.size} frames, matrix has {tf.n_frames}"
            )
        if tf.n_bins != self.n_bins or not np.isclose(tf.df, self.df) or not np.isclose(tf.f0, self.f0):
            raise InvalidArgument("zone was built on a different frequency grid")

    def mask(self, tf: TfMatrix) -> np.ndarray:
        """Boolean frames x bins selection for `tf`."""
        self.check(tf)
        bins = np.arange(tf.n_bins)[None, :]
        return np.abs(bins - self.center_bins[:, None]) <= self.half_bw_bins

    def count(self) -> int:
        lo = np.maximum(self.center_bins - self.half_bw_bins, 0)
        hi = np.minimum(self.center_bins + self.half_bw_bins, self.n_bins - 1)
        return int(np.sum(hi - lo + 1))


def extract_ridge(tf: TfMatrix, lam: float = 0.01, count: int = 1, suppress: int = 3):
    """Track `count` ridges by penalised dynamic programming.

    Each path maximises ``sum log(|tf| + eps) - lam * sum(dl**2)`` with
    ``eps = 1e-12 * max|tf|``. After a ridge is found, ``+/- suppress`` bins
    around it are zeroed before the next search.

    Returns
    -------
    list of ndarray
        Bin index per frame, one array per ridge, in extraction order.
    """
    if count < 1:
        raise InvalidArgument("count must be >= 1")
    if lam < 0:
        raise InvalidArgument("lam must be >= 0")
    mag = np.abs(tf.data)
    peak = float(mag.max()) if mag.size else 0.0
    if peak == 0:
        raise NoRidgeError("matrix is identically zero")
    eps = 1e-12 * peak
    frames = np.arange(tf.n_frames)
    paths = []
    for _ in range(count):
        path = _backend.kernels.ridge_dp(np.log(mag + eps), float(lam))
        paths.append(path)
        for d in range(-suppress, suppress + 1):
            cols = path + d
            ok = (cols >= 0) & (cols < tf.n_bins)
            mag[frames[ok], cols[ok]] = 0.0
    return paths


def ridge_freqs(tf: TfMatrix, path) -> np.ndarray:
    return tf.f0 + tf.df * np.asarray(path)


def zone_from_ridge(path, f_w: float, tf: TfMatrix) -> RidgeZone:
    """Band of half-width ``round(f_w / df)`` bins around `path`."""
    if f_w < 0:
        raise InvalidArgument("f_w must be >= 0")
    path = np.asarray(path, dtype=np.int64)
    if path.size != tf.n_frames:
        raise InvalidArgument("path length does not match frame count")
    half = int(round(f_w / tf.df))
    return RidgeZone(np.clip(path, 0, tf.n_bins - 1), half, tf.df, tf.f0, tf.n_bins)


def retrieve_mode(plan: StftPlan, T: TfMatrix, zone: RidgeZone, n_out: int | None = None) -> Signal:
    """Mode inside `zone`, synthesised with the downsampled SST inverse."""
    if T.kind != Kind.SST:
        raise InvalidArgument("retrieve_mode needs an SST matrix")
    return sst_inverse(plan, band_filter(T, zone), n_out)


def retrieve_mode_stft(plan: StftPlan, S: TfMatrix, zone: RidgeZone, n_out: int | None = None) -> Signal:
    """Mode inside `zone` of a one-sided STFT, by band filtering and overlap-add."""
    if S.kind != Kind.STFT or not S.onesided:
        raise InvalidArgument("retrieve_mode_stft needs a one-sided STFT matrix")
    return stft_inverse(plan, band_filter(S, zone), n_out)


def retrieve_mode_full(plan: StftPlan, T: TfMatrix, zone: RidgeZone) -> Signal:
    """Column-sum retrieval for an SST with hop 1.

    ``x[m] = Re(sum_zone w_l T[m, l]) / (Nf * g[M])`` where ``w_l = 2`` for
    strictly positive sub-Nyquist bins and 1 at DC and Nyquist. The window
    centre ``g[M]`` is the discrete counterpart of ``g(0)``.
    """
    if T.kind != Kind.SST:
        raise InvalidArgument("retrieve_mode_full needs an SST matrix")
    if T.Ht != 1:
        raise InvalidArgument("column-sum retrieval is only valid for Ht = 1")
    zone.check(T)
    f = T.freqs
    w = np.where((f > 0) & (f < T.fs / 2 - 0.5 * T.df), 2.0, 1.0)
    rows = np.arange(T.n_frames)
    acc = np.zeros(T.n_frames)
    for d in range(-zone.half_bw_bins, zone.half_bw_bins + 1):
        cols = zone.center_bins + d
        ok = (cols >= 0) & (cols < T.n_bins)
        acc[ok] += T.data[rows[ok], cols[ok]].real * w[cols[ok]]
    return Signal(acc / (T.Nf_effective * plan.window.g0), T.fs)
