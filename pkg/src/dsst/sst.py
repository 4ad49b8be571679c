"""Synchrosqueezing on a downsampled STFT grid.

Reassignment relocates each retained coefficient along frequency to the bin
nearest its instantaneous-frequency estimate; nothing is rescaled. Only
non-negative source bins (``0 <= k <= Nf//2``) are reassigned, and the
inverse rebuilds a real signal by conjugate symmetry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import _backend
from . import stft as _stft
from .errors import InvalidArgument
from .signal import Signal
from .stft import Kind, StftPlan, TfMatrix, overlap_add, stft_pair

__all__ = [
    "SstParams",
    "IfEstimate",
    "if_estimate",
    "synchrosqueeze",
    "squeeze_stage",
    "sst",
    "sst_inverse",
    "reassignment_frequency",
    "SQRT2",
]

SQRT2 = math.sqrt(2.0)
ESTIMATORS = ("analytic", "difference")
_CHUNK_CELLS = 1 << 21


@dataclass(frozen=True)
class SstParams:
    """Reassignment configuration.

    Attributes
    ----------
    gamma_rel : float
        Threshold relative to ``max |S^g|``; cells at or below it are dropped.
    f1, f2 : float
        Target band in Hz, snapped to the STFT grid. ``f2=None`` means ``fs/2``.
    z : int
        Subdivision factor; target bins are ``df / z`` apart.
    source_margin : float or None
        When set, only source bins within ``[f1 - margin, f2 + margin]`` are
        examined. ``None`` examines every non-negative bin.
    estimator : {"analytic", "difference"}
        ``"analytic"`` uses the derivative-window ratio ``Im(S^gd / S^g)``.
        ``"difference"`` replaces the frequency derivative of ``S^g`` by a
        one-bin forward difference (Gaussian windows only); its displacement
        saturates at ``1 / (4 pi^2 df sigma^2)`` on coarse grids.
    """

    gamma_rel: float = 1e-6
    f1: float = 0.0
    f2: float | None = None
    z: int = 1
    source_margin: float | None = None
    estimator: str = "analytic"

    def __post_init__(self):
        if not self.gamma_rel >= 0:
            raise InvalidArgument("gamma_rel must be >= 0")
        if int(self.z) != self.z or self.z < 1:
            raise InvalidArgument("z must be an integer >= 1")
        if self.f1 < 0:
            raise InvalidArgument("f1 must be >= 0")
        if self.f2 is not None and not self.f2 > self.f1:
            raise InvalidArgument(f"f2 must exceed f1 (f1={self.f1}, f2={self.f2})")
        if self.source_margin is not None and self.source_margin < 0:
            raise InvalidArgument("source_margin must be >= 0")
        if self.estimator not in ESTIMATORS:
            raise InvalidArgument(f"estimator must be one of {ESTIMATORS}")
        object.__setattr__(self, "z", int(self.z))

    def band_bins(self, fs: float, Nf: int) -> tuple[int, int]:
        """Coarse-grid bin indices ``(k1, k2)`` of the snapped band."""
        df = fs / Nf
        f2 = fs / 2 if self.f2 is None else self.f2
        if f2 > fs / 2 * (1 + 1e-12):
            raise InvalidArgument(f"f2={f2} exceeds Nyquist {fs / 2}")
        k1 = int(round(self.f1 / df))
        k2 = min(int(round(f2 / df)), Nf // 2)
        if k2 <= k1:
            raise InvalidArgument(
                f"band [{self.f1}, {f2}] Hz is narrower than one bin ({df:g} Hz)"
            )
        return k1, k2

    def source_bins(self, fs: float, Nf: int) -> tuple[int, int]:
        """Half-open range of absolute source bins examined for reassignment."""
        if self.source_margin is None:
            return 0, Nf // 2 + 1
        df = fs / Nf
        k1, k2 = self.band_bins(fs, Nf)
        lo = max(0, math.floor((k1 * df - self.source_margin) / df))
        hi = min(Nf // 2 + 1, math.ceil((k2 * df + self.source_margin) / df) + 1)
        return lo, hi


@dataclass(frozen=True)
class IfEstimate:
    """IF estimate in Hz and the mask of cells above threshold."""

    omega: np.ndarray
    mask: np.ndarray


def _check_pair(Sg: TfMatrix, Sgd: TfMatrix | None):
    if Sg.kind != Kind.STFT:
        raise InvalidArgument("IF estimation needs STFT matrices")
    if Sgd is None:
        return
    if Sg.data.shape != Sgd.data.shape:
        raise InvalidArgument(f"shape mismatch {Sg.data.shape} vs {Sgd.data.shape}")
    if Sgd.kind != Kind.STFT:
        raise InvalidArgument("IF estimation needs two STFT matrices")
    same = (Sg.Ht, Sg.fs, Sg.f0, Sg.df, Sg.M) == (Sgd.Ht, Sgd.fs, Sgd.f0, Sgd.df, Sgd.M)
    if not same:
        raise InvalidArgument("S^g and S^gd carry different grid metadata")


def _ratio_imag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``Im(a / b)`` for nonzero `b`."""
    return (a.imag * b.real - a.real * b.imag) / (b.real**2 + b.imag**2)


def _ratio_real(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.real * b.real + a.imag * b.imag) / (b.real**2 + b.imag**2)


def _next_bin(Sg: TfMatrix):
    """``S^g[m, k+1]`` for every column, plus a validity mask for the last one.

    Past Nyquist the conjugate-symmetric neighbour is used; otherwise a
    matrix edge has no successor.
    """
    data = Sg.data
    nxt = np.empty_like(data)
    nxt[:, :-1] = data[:, 1:]
    last = Sg.bin_offset + Sg.n_bins - 1
    Nf = Sg.Nf_effective
    ok = True
    if 2 * last == Nf and Sg.n_bins >= 2:
        nxt[:, -1] = np.conj(data[:, -2])
    elif last == Nf - 1:
        nxt[:, -1] = data[:, 0] if Sg.bin_offset == 0 else 0
        ok = Sg.bin_offset == 0
    else:
        nxt[:, -1] = 0
        ok = False
    return nxt, ok


def if_estimate(Sg: TfMatrix, Sgd: TfMatrix | None, gamma_rel: float = 1e-6,
                gamma_abs: float | None = None, estimator: str = "analytic",
                sigma: float | None = None) -> IfEstimate:
    """Instantaneous frequency ``|f_k + f_r|`` (Hz) of each retained cell.

    ``f_r`` is :func:`reassignment_frequency`. Cells with ``|S^g| <= gamma``
    are masked out and get ``omega = 0``; ``gamma = gamma_rel * max|S^g|``
    unless `gamma_abs` is given. The ``"difference"`` estimator needs the
    Gaussian width `sigma` and ignores `Sgd`.
    """
    _check_pair(Sg, Sgd)
    amp = np.abs(Sg.data)
    if gamma_abs is None:
        gamma_abs = gamma_rel * (float(amp.max()) if amp.size else 0.0)
    mask = amp > gamma_abs
    if estimator == "difference" and amp.size:
        nxt, ok = _next_bin(Sg)
        if not ok:
            mask[:, -1] = False
    omega = np.zeros(amp.shape)
    rows, cols = np.nonzero(mask)
    if rows.size:
        b = Sg.data[rows, cols]
        if estimator == "analytic":
            if Sgd is None:
                raise InvalidArgument("the analytic estimator needs S^gd")
            fr = -_ratio_imag(Sgd.data[rows, cols], b) / (2 * np.pi)
        elif estimator == "difference":
            fr = _difference_rf(nxt[rows, cols], b, Sg.df, sigma)
        else:
            raise InvalidArgument(f"estimator must be one of {ESTIMATORS}")
        omega[rows, cols] = np.abs(Sg.f0 + cols * Sg.df + fr)
    return IfEstimate(omega, mask)


def _difference_rf(nxt, cur, df, sigma):
    if sigma is None or not sigma > 0:
        raise InvalidArgument("the difference estimator needs the window sigma")
    return (_ratio_real(nxt, cur) - 1.0) / (4 * np.pi**2 * sigma**2 * df)


def reassignment_frequency(Sg: TfMatrix, Sgd: TfMatrix | None, estimator: str = "analytic",
                           sigma: float | None = None) -> np.ndarray:
    """Signed displacement (Hz) a cell would move by; 0 where ``S^g = 0``.

    Analytic form: ``-Im(S^gd / S^g) / 2pi``. It is negative above a ridge
    and positive below it.
    """
    _check_pair(Sg, Sgd)
    out = np.zeros(Sg.data.shape)
    nz = Sg.data != 0
    if estimator == "analytic":
        if Sgd is None:
            raise InvalidArgument("the analytic estimator needs S^gd")
        out[nz] = -_ratio_imag(Sgd.data[nz], Sg.data[nz]) / (2 * np.pi)
    elif estimator == "difference":
        nxt, ok = _next_bin(Sg)
        if not ok:
            nz[:, -1] = False
        out[nz] = _difference_rf(nxt[nz], Sg.data[nz], Sg.df, sigma)
    else:
        raise InvalidArgument(f"estimator must be one of {ESTIMATORS}")
    return out


def _grid(Sg: TfMatrix, params: SstParams):
    Nf = Sg.Nf_effective
    k1, k2 = params.band_bins(Sg.fs, Nf)
    dfs = Sg.df / params.z
    return k1 * Sg.df, dfs, params.z * (k2 - k1)


def synchrosqueeze(Sg: TfMatrix, est: IfEstimate, params: SstParams = SstParams()) -> TfMatrix:
    """Relocate masked coefficients of `Sg` to the bins their IF points at.

    The target grid has ``z * Nr`` bins of width ``df / z`` starting at the
    snapped ``f1``; a coefficient lands in ``floor((omega - f1) / dfs + 0.5)``
    and is dropped when that index falls outside the grid.
    """
    if Sg.kind != Kind.STFT:
        raise InvalidArgument("synchrosqueeze needs an STFT matrix")
    if est.omega.shape != Sg.data.shape or est.mask.shape != Sg.data.shape:
        raise InvalidArgument("IF estimate shape does not match S^g")
    f1s, dfs, n_out = _grid(Sg, params)
    src_lo, src_hi = params.source_bins(Sg.fs, Sg.Nf_effective)
    off = Sg.bin_offset
    k_lo = min(max(src_lo - off, 0), Sg.n_bins)
    k_hi = max(min(src_hi - off, Sg.n_bins), k_lo)
    out = _backend.kernels.squeeze(
        np.ascontiguousarray(Sg.data, dtype=np.complex128),
        np.ascontiguousarray(est.omega, dtype=np.float64),
        np.ascontiguousarray(est.mask).view(np.uint8),
        k_lo, k_hi, f1s, dfs, n_out,
    )
    return TfMatrix(out, Sg.Ht, Sg.fs, f1s, dfs, Sg.M, Kind.SST, Sg.Nf_effective)


def _cols(tf: TfMatrix, lo: int, hi: int) -> TfMatrix:
    off = tf.bin_offset
    return TfMatrix(tf.data[:, lo - off:hi - off], tf.Ht, tf.fs, lo * tf.df, tf.df,
                    tf.M, tf.kind, tf.Nf_effective)


def squeeze_stage(Sg: TfMatrix, Sgd: TfMatrix | None, params: SstParams = SstParams(),
                  sigma: float | None = None) -> TfMatrix:
    """IF estimation plus reassignment, processed in frame blocks.

    The threshold is taken from the whole of `Sg`; with a source margin only
    the source columns near the band are touched (one extra column is kept
    for the difference estimator).
    """
    _check_pair(Sg, Sgd)
    gamma = params.gamma_rel * float(np.abs(Sg.data).max()) if Sg.data.size else 0.0
    lo, hi = params.source_bins(Sg.fs, Sg.Nf_effective)
    off = Sg.bin_offset
    lo = max(lo, off)
    hi = min(hi + (params.estimator == "difference"), off + Sg.n_bins)
    if (lo, hi) != (off, off + Sg.n_bins):
        Sg = _cols(Sg, lo, hi)
        Sgd = None if Sgd is None else _cols(Sgd, lo, hi)
    f1s, dfs, n_out = _grid(Sg, params)
    out = np.empty((Sg.n_frames, n_out), dtype=np.complex128)
    step = max(1, _CHUNK_CELLS // max(Sg.n_bins, 1))
    for a in range(0, Sg.n_frames, step):
        b = min(Sg.n_frames, a + step)
        g_blk = Sg.with_data(Sg.data[a:b])
        d_blk = None if Sgd is None else Sgd.with_data(Sgd.data[a:b])
        est = if_estimate(g_blk, d_blk, gamma_abs=gamma, estimator=params.estimator, sigma=sigma)
        out[a:b] = synchrosqueeze(g_blk, est, params).data
    return TfMatrix(out, Sg.Ht, Sg.fs, f1s, dfs, Sg.M, Kind.SST, Sg.Nf_effective)


def sst(plan: StftPlan, sig: Signal, params: SstParams = SstParams()) -> TfMatrix:
    """Downsampled SST of `sig`: one-sided STFT pair, then :func:`squeeze_stage`."""
    if params.estimator == "difference":
        Sg, Sgd = _stft.stft_forward(plan, sig, "g", onesided=True), None
    else:
        Sg, Sgd = stft_pair(plan, sig, onesided=True)
    return squeeze_stage(Sg, Sgd, params, sigma=plan.window.sigma)


def sst_inverse(plan: StftPlan, T: TfMatrix, n_out: int | None = None) -> Signal:
    """Direct inverse of a (selective, subdivided) downsampled SST.

    The band is zero-padded onto a ``z * Nf`` grid, inverted per frame by
    a real inverse DFT (conjugate mirroring, DC and Nyquist once), scaled by
    ``z / sqrt(2)`` and overlap-added with the analysis window. The
    ``1/sqrt(2)`` corrects for the SST acting like a Gaussian of energy
    ``sqrt(2)`` when squeezed coefficients are synthesised with ``g``.
    """
    if T.kind != Kind.SST:
        raise InvalidArgument("sst_inverse needs an SST matrix")
    _stft._check_meta(plan, T)
    if T.Nf_effective != plan.Nf:
        raise InvalidArgument(f"matrix grid Nf={T.Nf_effective} does not match plan Nf={plan.Nf}")
    z = plan.df / T.df
    if abs(z - round(z)) > 1e-9 * z:
        raise InvalidArgument(f"bin spacing {T.df} is not df/z for df={plan.df}")
    z = int(round(z))
    K = z * plan.Nf
    if K < plan.L:
        raise InvalidArgument(f"z*Nf={K} < L={plan.L}: cannot synthesise frames")
    off = T.bin_offset
    half = K // 2 + 1
    width = max(0, min(T.n_bins, half - off))
    n_out = plan.N if n_out is None else int(n_out)
    scale = z / SQRT2

    def inv(block):
        X = np.zeros((block.shape[0], half), dtype=np.complex128)
        X[:, off:off + width] = block[:, :width]
        return sfft.irfft(X, n=K, axis=1, workers=_stft.get_threads()) * scale

    frames = _stft._synthesis_frames(plan, T.data, inv, K)
    return Signal(overlap_add(frames, plan, n_out), plan.fs)
