"""Downsampled discrete STFT with a truncated Gaussian window.

Frame ``m`` is centred on sample ``m * Ht``; the signal is zero outside
``[0, N-1]``. Bin ``k`` of an ``Nf``-point transform sits at ``k * fs / Nf``
and the phase is referenced to the window centre, so a real signal gives a
Hermitian two-sided frame. Inverses use overlap-add with the frame diagonal
``d[j] = sum_m g[j - m*Ht + M]**2`` as normaliser.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft as sfft
from numpy.lib.stride_tricks import sliding_window_view

from . import _backend
from .errors import InvalidArgument, ReconstructionCoverageError
from .signal import Signal

__all__ = [
    "Kind",
    "WindowPair",
    "StftPlan",
    "TfMatrix",
    "make_window",
    "stft_forward",
    "stft_pair",
    "stft_inverse",
    "band_filter",
    "overlap_add",
    "set_threads",
    "get_threads",
]

_WORKERS = 1
_CHUNK_CELLS = 1 << 22  # complex cells per FFT batch


def set_threads(n: int) -> None:
    """Cap the FFT worker count. Results do not depend on it."""
    global _WORKERS
    if n < 1:
        raise InvalidArgument("thread count must be >= 1")
    _WORKERS = int(n)


def get_threads() -> int:
    return _WORKERS


class Kind(enum.IntEnum):
    STFT = 0
    SST = 1


@dataclass(frozen=True)
class WindowPair:
    """Unit-energy Gaussian window ``g`` and its time derivative ``gd``.

    Both are sampled on ``(n - M) / fs`` for ``n = 0..2M``. ``gd`` has units
    of 1/s.
    """

    g: np.ndarray
    gd: np.ndarray
    M: int
    sigma: float
    fs: float

    @property
    def L(self) -> int:
        return 2 * self.M + 1

    @property
    def g0(self) -> float:
        return float(self.g[self.M])


def make_window(sigma: float, fs: float, trunc_k: float = 3.0) -> WindowPair:
    """Gaussian ``(pi sigma^2)^(-1/4) exp(-t^2 / 2 sigma^2)`` truncated at ``trunc_k*sigma``.

    The samples are rescaled so that ``sum(g**2) / fs == 1``; the derivative
    is sampled analytically and carries the same scale factor.
    """
    if not (sigma > 0 and fs > 0 and trunc_k > 0):
        raise InvalidArgument("sigma, fs and trunc_k must be positive")
    M = math.ceil(round(trunc_k * sigma * fs, 9))
    t = (np.arange(2 * M + 1) - M) / fs
    amp = (np.pi * sigma**2) ** -0.25
    g = amp * np.exp(-(t**2) / (2 * sigma**2))
    gd = -g * t / sigma**2
    scale = math.sqrt(fs / float(np.dot(g, g)))
    g *= scale
    gd *= scale
    gd[M] = 0.0
    for arr in (g, gd):
        arr.setflags(write=False)
    return WindowPair(g, gd, M, float(sigma), float(fs))


@dataclass(frozen=True)
class StftPlan:
    """Analysis geometry: window, time hop ``Ht`` and DFT length ``Nf``.

    ``Nf`` may be shorter than the window length ``L``; the forward
    transform then folds the windowed frame (exact time aliasing) but the
    plan is not invertible.
    """

    window: WindowPair
    Ht: int
    Nf: int
    N: int

    def __post_init__(self):
        if int(self.Ht) != self.Ht or self.Ht < 1:
            raise InvalidArgument(f"Ht must be an integer >= 1, got {self.Ht}")
        if int(self.N) != self.N or self.N < 1:
            raise InvalidArgument(f"N must be a positive integer, got {self.N}")
        if int(self.Nf) != self.Nf or self.Nf < 2:
            raise InvalidArgument(f"Nf must be an integer >= 2, got {self.Nf}")
        if self.Nf > self.N:
            raise InvalidArgument(f"Nf <= N violated: Nf={self.Nf}, N={self.N}")
        object.__setattr__(self, "Ht", int(self.Ht))
        object.__setattr__(self, "Nf", int(self.Nf))
        object.__setattr__(self, "N", int(self.N))

    @classmethod
    def create(cls, sigma, fs, N, Ht=1, Nf=None, trunc_k=3.0) -> "StftPlan":
        return cls(make_window(sigma, fs, trunc_k), Ht, N if Nf is None else Nf, N)

    @property
    def fs(self) -> float:
        return self.window.fs

    @property
    def M(self) -> int:
        return self.window.M

    @property
    def L(self) -> int:
        return self.window.L

    @property
    def Hf(self) -> float:
        return self.N / self.Nf

    @property
    def df(self) -> float:
        return self.fs / self.Nf

    @property
    def n_frames(self) -> int:
        return (self.N - 1) // self.Ht + 1

    @property
    def invertible(self) -> bool:
        return self.Nf >= self.L


@dataclass(frozen=True)
class TfMatrix:
    """Complex time-frequency matrix, frames x bins.

    Bin ``l`` is at ``f0 + l * df`` Hz, frame ``m`` at ``m * Ht / fs`` s.
    ``Nf_effective`` is the DFT length of the underlying full grid.
    """

    data: np.ndarray
    Ht: int
    fs: float
    f0: float
    df: float
    M: int
    kind: Kind
    Nf_effective: int
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.data.ndim != 2:
            raise InvalidArgument("TfMatrix data must be 2-D (frames x bins)")
        if not self.df > 0:
            raise InvalidArgument("df must be positive")
        object.__setattr__(self, "kind", Kind(self.kind))

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def n_bins(self) -> int:
        return self.data.shape[1]

    @property
    def freqs(self) -> np.ndarray:
        return self.f0 + self.df * np.arange(self.n_bins)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_frames) * self.Ht / self.fs

    @property
    def bin_offset(self) -> int:
        """Index of bin 0 on the full ``df``-spaced grid that starts at 0 Hz."""
        return int(round(self.f0 / self.df))

    @property
    def onesided(self) -> bool:
        return (
            self.kind == Kind.STFT
            and self.bin_offset == 0
            and self.n_bins == self.Nf_effective // 2 + 1
            and self.Nf_effective > 2
        )

    def with_data(self, data) -> "TfMatrix":
        return replace(self, data=data)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.data) ** 2))


def _frames(plan: StftPlan, x: np.ndarray) -> np.ndarray:
    """Strided view of rows ``x[n + m*Ht - M]``, ``n = 0..L-1``."""
    padded = np.concatenate([np.zeros(plan.M), x, np.zeros(plan.M)])
    return sliding_window_view(padded, plan.L)[:: plan.Ht][: plan.n_frames]


def _to_buffer(windowed: np.ndarray, M: int, Nf: int) -> np.ndarray:
    """Place sample ``n`` at ``(n - M) mod Nf``, folding when ``L > Nf``.

    A circular shift by ``M`` is the centre-referenced phase term.
    """
    rows, L = windowed.shape
    buf = np.zeros((rows, Nf))
    idx = (np.arange(L) - M) % Nf
    if L <= Nf:
        buf[:, idx] = windowed
    else:
        for n in range(L):
            buf[:, idx[n]] += windowed[:, n]
    return buf


def _check_signal(plan: StftPlan, sig: Signal) -> np.ndarray:
    x = sig.samples if isinstance(sig, Signal) else np.asarray(sig, dtype=np.float64)
    if x.ndim != 1 or x.size != plan.N:
        raise InvalidArgument(f"signal length {x.size} does not match plan N={plan.N}")
    if isinstance(sig, Signal) and not math.isclose(sig.fs, plan.fs):
        raise InvalidArgument(f"signal fs={sig.fs} does not match plan fs={plan.fs}")
    return x


def _transform(plan, x, windows, onesided):
    n_frames = plan.n_frames
    n_bins = plan.Nf // 2 + 1 if onesided else plan.Nf
    outs = [np.empty((n_frames, n_bins), dtype=np.complex128) for _ in windows]
    step = max(1, _CHUNK_CELLS // plan.Nf)
    fft = sfft.rfft if onesided else sfft.fft
    view = _frames(plan, x)
    for lo in range(0, n_frames, step):
        hi = min(n_frames, lo + step)
        fr = view[lo:hi]
        for w, out in zip(windows, outs):
            buf = _to_buffer(fr * w, plan.M, plan.Nf)
            out[lo:hi] = fft(buf, axis=1, workers=_WORKERS)
    return [
        TfMatrix(o, plan.Ht, plan.fs, 0.0, plan.df, plan.M, Kind.STFT, plan.Nf)
        for o in outs
    ]


def stft_forward(plan: StftPlan, sig: Signal, which: str = "g", onesided: bool = False) -> TfMatrix:
    """STFT of `sig` with window ``g`` or its derivative ``gd``.

    ``onesided=True`` keeps bins ``0..Nf//2`` only.
    """
    if which not in ("g", "gd"):
        raise InvalidArgument("which must be 'g' or 'gd'")
    x = _check_signal(plan, sig)
    w = plan.window.g if which == "g" else plan.window.gd
    return _transform(plan, x, [w], onesided)[0]


def stft_pair(plan: StftPlan, sig: Signal, onesided: bool = True):
    """``(S^g, S^gd)`` computed from one framing pass."""
    x = _check_signal(plan, sig)
    sg, sgd = _transform(plan, x, [plan.window.g, plan.window.gd], onesided)
    return sg, sgd


def overlap_add(frames: np.ndarray, plan: StftPlan, n_out: int) -> np.ndarray:
    """Window-weighted overlap-add normalised by the frame diagonal.

    `frames` holds ``L`` time samples per frame, sample ``n`` belonging to
    signal index ``m*Ht + n - M``.
    """
    span = min(n_out, plan.N)
    num, diag = _backend.kernels.overlap_add(
        np.ascontiguousarray(frames, dtype=np.float64),
        np.ascontiguousarray(plan.window.g),
        plan.Ht,
        plan.M,
        span,
    )
    if span and np.any(diag == 0):
        bad = int(np.flatnonzero(diag == 0)[0])
        raise ReconstructionCoverageError(
            f"sample {bad} is not covered by any frame (Ht={plan.Ht} > L={plan.L}?)"
        )
    out = np.zeros(n_out)
    out[:span] = num / diag
    return out


def _check_meta(plan: StftPlan, tf: TfMatrix):
    if not math.isclose(tf.fs, plan.fs) or tf.Ht != plan.Ht or tf.M != plan.M:
        raise InvalidArgument(
            f"matrix (fs={tf.fs}, Ht={tf.Ht}, M={tf.M}) does not match plan "
            f"(fs={plan.fs}, Ht={plan.Ht}, M={plan.M})"
        )
    if tf.n_frames != plan.n_frames:
        raise InvalidArgument(f"matrix has {tf.n_frames} frames, plan expects {plan.n_frames}")


def stft_inverse(plan: StftPlan, tf: TfMatrix, n_out: int | None = None) -> Signal:
    """Overlap-add inverse of :func:`stft_forward`.

    Accepts the two-sided grid (real part of the inverse DFT) or the
    one-sided grid (Hermitian completion, DC and Nyquist counted once).
    """
    if tf.kind != Kind.STFT:
        raise InvalidArgument("stft_inverse needs an STFT matrix")
    _check_meta(plan, tf)
    if tf.Nf_effective != plan.Nf or tf.bin_offset != 0:
        raise InvalidArgument("stft_inverse needs the full grid starting at 0 Hz")
    if not plan.invertible:
        raise InvalidArgument(f"Nf={plan.Nf} < L={plan.L}: plan is analysis-only")
    n_out = plan.N if n_out is None else int(n_out)
    if tf.onesided:
        inv = lambda a: sfft.irfft(a, n=plan.Nf, axis=1, workers=_WORKERS)
    elif tf.n_bins == plan.Nf:
        inv = lambda a: sfft.ifft(a, axis=1, workers=_WORKERS).real
    else:
        raise InvalidArgument(f"unexpected bin count {tf.n_bins} for Nf={plan.Nf}")
    return Signal(overlap_add(_synthesis_frames(plan, tf.data, inv, plan.Nf), plan, n_out), plan.fs)


def _synthesis_frames(plan, data, inv, K):
    """First ``L`` centre-referenced samples of each frame's inverse DFT."""
    idx = (np.arange(plan.L) - plan.M) % K
    out = np.empty((data.shape[0], plan.L))
    step = max(1, _CHUNK_CELLS // K)
    for lo in range(0, data.shape[0], step):
        hi = min(data.shape[0], lo + step)
        out[lo:hi] = inv(data[lo:hi])[:, idx]
    return out


def band_filter(tf: TfMatrix, zone) -> TfMatrix:
    """Zero every entry outside the per-frame band of `zone`."""
    return tf.with_data(np.where(zone.mask(tf), tf.data, 0))
