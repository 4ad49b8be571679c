"""Pure numpy fallback for the compiled kernels in ``_ckernels``.

Accumulation order matches the compiled loops (frame-major, ascending
index), so results are bit-identical. ``ridge_dp`` runs a Python loop per
bin and is only practical for small matrices.
"""
import numpy as np


def squeeze(sg, omega, mask, k_lo, k_hi, f1, dfs, n_out):
    n_frames = sg.shape[0]
    sub = slice(k_lo, k_hi)
    pos = np.floor((omega[:, sub] - f1) / dfs + 0.5)
    keep = mask[:, sub].astype(bool) & (pos >= 0) & (pos < n_out)
    rows, cols = np.nonzero(keep)
    flat = rows * n_out + pos[rows, cols].astype(np.int64)
    vals = sg[:, sub][rows, cols]
    size = n_frames * n_out
    re = np.bincount(flat, weights=vals.real, minlength=size)
    im = np.bincount(flat, weights=vals.imag, minlength=size)
    out = np.empty(size, dtype=np.complex128)
    out.real = re
    out.imag = im
    return out.reshape(n_frames, n_out)


def overlap_add(frames, g, hop, half, n_out):
    n_frames, width = frames.shape
    j = (np.arange(n_frames)[:, None] * hop + np.arange(width)[None, :] - half).ravel()
    ok = (j >= 0) & (j < n_out)
    vals = (g[None, :] * frames).ravel()
    gg = np.broadcast_to(g * g, frames.shape).ravel()
    out = np.bincount(j[ok], weights=vals[ok], minlength=n_out)
    diag = np.bincount(j[ok], weights=gg[ok], minlength=n_out)
    return out, diag


def _envelope(prev, lam):
    n_bins = prev.size
    v = [0] * n_bins
    z = [0.0] * (n_bins + 1)
    k = 0
    z[0], z[1] = -np.inf, np.inf
    p = prev.tolist()
    for q in range(1, n_bins):
        s = ((lam * q * q - p[q]) - (lam * v[k] * v[k] - p[v[k]])) / (2.0 * lam * (q - v[k]))
        while k > 0 and s <= z[k]:
            k -= 1
            s = ((lam * q * q - p[q]) - (lam * v[k] * v[k] - p[v[k]])) / (2.0 * lam * (q - v[k]))
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = np.inf
    ptr = np.empty(n_bins, dtype=np.int64)
    k = 0
    for l in range(n_bins):
        while z[k + 1] < l:
            k += 1
        ptr[l] = v[k]
    return ptr


def ridge_dp(score, lam):
    n_frames, n_bins = score.shape
    ptr = np.zeros((n_frames, n_bins), dtype=np.int64)
    prev = np.array(score[0], dtype=np.float64)
    bins = np.arange(n_bins)
    for m in range(1, n_frames):
        if lam == 0.0:
            ptr[m] = int(np.argmax(prev))
        else:
            ptr[m] = _envelope(prev, lam)
        d = (bins - ptr[m]).astype(np.float64)
        prev = score[m] + (prev[ptr[m]] - lam * d * d)
    path = np.empty(n_frames, dtype=np.int64)
    path[-1] = int(np.argmax(prev))
    for m in range(n_frames - 1, 0, -1):
        path[m - 1] = ptr[m, path[m]]
    return path
