"""File formats: signal CSV + JSON sidecar, WAV input, TFR1 matrices, CSV exports."""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .signal import Signal
from .stft import Kind, TfMatrix

MAGIC = b"TFRDATA1"
VERSION = 1
# version, kind, frames, bins, fs, df, f0, Ht, M, Nf_effective
_HEADER = struct.Struct("<IIQQdddQQQ")


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_signal_csv(path, sig: Signal) -> None:
    """``t,x`` CSV plus a ``<path>.json`` sidecar holding ``fs`` and ``n``."""
    path = Path(path)
    data = np.column_stack([sig.times, sig.samples])
    np.savetxt(path, data, delimiter=",", header="t,x", comments="", fmt="%.17g")
    sidecar_path(path).write_text(json.dumps({"fs": sig.fs, "n": len(sig), "t0": sig.t0}) + "\n")


def read_signal_csv(path, fs: float | None = None) -> Signal:
    """Read a ``t,x`` CSV. The sample rate comes from `fs`, the sidecar, or the time column."""
    path = Path(path)
    with open(path, newline="") as fh:
        header = fh.readline().strip().replace(" ", "")
    if header != "t,x":
        raise InvalidArgument(f"{path}: expected header 't,x', got {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[0] == 0 or data.shape[1] != 2:
        raise InvalidArgument(f"{path}: expected two columns and at least one row")
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text())
        if "n" in meta and int(meta["n"]) != data.shape[0]:
            raise InvalidArgument(f"{path}: sidecar says n={meta['n']}, file has {data.shape[0]} rows")
    if fs is None:
        fs = meta.get("fs")
    if fs is None:
        if data.shape[0] < 2:
            raise InvalidArgument(f"{path}: cannot infer fs from a single sample")
        fs = 1.0 / float(np.median(np.diff(data[:, 0])))
    return Signal(data[:, 1].copy(), float(fs), float(data[0, 0]))


def read_wav(path) -> Signal:
    """Mono PCM 16/24/32-bit or 32-bit float WAV, scaled to [-1, 1] for integers."""
    from scipy.io import wavfile

    fs, data = wavfile.read(path)
    if data.ndim != 1:
        raise InvalidArgument(f"{path}: only mono WAV is supported, got {data.shape[1]} channels")
    if data.dtype == np.int16:
        x = data / 32768.0
    elif data.dtype == np.int32:
        # scipy left-justifies 24-bit samples into int32
        x = data / 2147483648.0
    elif data.dtype == np.float32:
        x = data.astype(np.float64)
    else:
        raise InvalidArgument(f"{path}: unsupported WAV sample type {data.dtype}")
    return Signal(x, float(fs))


def read_signal(path, fs: float | None = None) -> Signal:
    if Path(path).suffix.lower() == ".wav":
        return read_wav(path)
    return read_signal_csv(path, fs)


def write_tfr(path, tf: TfMatrix) -> None:
    data = np.ascontiguousarray(tf.data, dtype="<c16")
    header = _HEADER.pack(VERSION, int(tf.kind), tf.n_frames, tf.n_bins, tf.fs, tf.df, tf.f0,
                          tf.Ht, tf.M, tf.Nf_effective)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(header)
        fh.write(data.tobytes())


def read_tfr(path) -> TfMatrix:
    raw = Path(path).read_bytes()
    n_head = len(MAGIC) + _HEADER.size
    if len(raw) < n_head or raw[: len(MAGIC)] != MAGIC:
        raise InvalidArgument(f"{path}: not a TFR1 file")
    version, kind, frames, bins, fs, df, f0, Ht, M, nfe = _HEADER.unpack_from(raw, len(MAGIC))
    if version != VERSION:
        raise InvalidArgument(f"{path}: unsupported TFR version {version}")
    if kind not in (Kind.STFT, Kind.SST):
        raise InvalidArgument(f"{path}: unknown kind {kind}")
    expected = frames * bins * 16
    if len(raw) - n_head != expected:
        raise InvalidArgument(f"{path}: payload is {len(raw) - n_head} bytes, header implies {expected}")
    data = np.frombuffer(raw, dtype="<c16", offset=n_head).reshape(frames, bins).astype(np.complex128)
    return TfMatrix(data, int(Ht), fs, f0, df, int(M), Kind(kind), int(nfe))


def write_tfr_csv(path, tf: TfMatrix) -> None:
    """Long-format export ``frame,bin,freq_hz,time_s,re,im,abs``."""
    frame, b = np.meshgrid(np.arange(tf.n_frames), np.arange(tf.n_bins), indexing="ij")
    d = tf.data.ravel()
    cols = [frame.ravel(), b.ravel(), tf.freqs[b.ravel()], tf.times[frame.ravel()], d.real, d.imag, np.abs(d)]
    table = np.column_stack(cols)
    np.savetxt(path, table, delimiter=",", header="frame,bin,freq_hz,time_s,re,im,abs", comments="",
               fmt=["%d", "%d", "%.17g", "%.17g", "%.17g", "%.17g", "%.17g"])


def write_ridge_csv(path, tf: TfMatrix, path_bins) -> None:
    """Ridge export ``frame,time_s,freq_hz,abs``."""
    p = np.asarray(path_bins, dtype=np.int64)
    m = np.arange(tf.n_frames)
    table = np.column_stack([m, tf.times, tf.freqs[p], np.abs(tf.data[m, p])])
    np.savetxt(path, table, delimiter=",", header="frame,time_s,freq_hz,abs", comments="",
               fmt=["%d", "%.17g", "%.17g", "%.17g"])


def read_ridge_csv(path):
    """``(frames, freq_hz)`` from a ridge CSV."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0].astype(np.int64), data[:, 2]


def write_rows_csv(path, rows) -> None:
    """Tidy CSV from a list of flat dicts; the column order follows the first row."""
    if not rows:
        raise InvalidArgument("no rows to write")
    fields = list(rows[0])
    for r in rows[1:]:
        fields += [k for k in r if k not in fields]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
