"""Signal containers and the three-component AM-FM benchmark.

The benchmark is sampled on ``t = n / fs`` for ``n = 0..N-1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

__all__ = [
    "Signal",
    "IfTrack",
    "make_simulated_signal",
    "true_ifs",
    "add_white_noise",
]


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled real time series."""

    samples: np.ndarray
    fs: float
    t0: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=np.float64)
        if x.ndim != 1 or x.size == 0:
            raise InvalidArgument("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(x)):
            raise InvalidArgument("samples must be finite")
        if not self.fs > 0:
            raise InvalidArgument(f"fs must be positive, got {self.fs}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self):
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) / self.fs

    def with_samples(self, samples) -> "Signal":
        return Signal(samples, self.fs, self.t0)


@dataclass(frozen=True)
class IfTrack:
    times: np.ndarray
    freqs: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        f = np.asarray(self.freqs, dtype=np.float64)
        if t.shape != f.shape:
            raise InvalidArgument("times and freqs must have equal lengths")
        if not (np.all(np.isfinite(f)) and np.all(f >= 0)):
            raise InvalidArgument("freqs must be finite and non-negative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "freqs", f)


def _components(t: np.ndarray):
    pi = np.pi
    x1 = (1 - 0.1 * np.cos(0.25 * pi * t)) * np.cos(100 * pi * t)
    early = np.cos(500 * pi * t - 25 * pi * t**2)
    late = np.cos(500 * pi * t - 50 * pi * t**2 + 25 / 6 * pi * t**3 + 4 / 3 * pi)
    x2 = np.where(t < 4, early, late)
    x3 = (1 - 0.2 * np.cos(0.125 * pi * t)) * np.cos(
        740 * pi * t + 400 / 3 * np.sin(0.75 * pi * t) - 200 * np.sin(0.5 * pi * t)
    )
    return x1, x2, x3


def make_simulated_signal(fs: float = 1024.0, duration: float = 8.0):
    """Build the three-component AM-FM benchmark.

    Returns
    -------
    total : Signal
        ``x1 + x2 + x3``.
    components : tuple of Signal
        The noise-free components ``(x1, x2, x3)``.
    """
    if not fs > 0 or not duration > 0:
        raise InvalidArgument("fs and duration must be positive")
    n = int(round(fs * duration))
    t = np.arange(n) / fs
    comps = _components(t)
    total = comps[0] + comps[1] + comps[2]
    return Signal(total, fs), tuple(Signal(c, fs) for c in comps)


def true_ifs(times) -> tuple[IfTrack, IfTrack, IfTrack]:
    """Instantaneous frequencies (Hz) of the benchmark components."""
    t = np.asarray(times, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise InvalidArgument("times must be finite")
    f1 = np.full_like(t, 50.0)
    f2 = np.where(t < 4, 250 - 25 * t, 250 - 50 * t + 6.25 * t**2)
    f3 = 370 + 50 * np.cos(0.75 * np.pi * t) - 50 * np.cos(0.5 * np.pi * t)
    return IfTrack(t, f1), IfTrack(t, f2), IfTrack(t, f3)


def add_white_noise(sig: Signal, snr_db: float, seed: int) -> Signal:
    """Add Gaussian white noise at an exact signal-to-noise ratio.

    The realized noise vector is rescaled so that
    ``10*log10(|x|^2 / |noise|^2)`` equals `snr_db`. Noise is drawn from
    ``numpy.random.Generator(PCG64(seed)).standard_normal``.
    """
    if not np.isfinite(snr_db):
        raise InvalidArgument("snr_db must be finite")
    x = sig.samples
    energy = float(np.dot(x, x))
    if energy == 0.0:
        raise InvalidArgument("cannot set an SNR against a zero-energy signal")
    rng = np.random.Generator(np.random.PCG64(seed))
    noise = rng.standard_normal(x.size)
    noise -= noise.mean()
    noise *= np.sqrt(energy / 10 ** (snr_db / 10) / np.dot(noise, noise))
    return sig.with_samples(x + noise)
