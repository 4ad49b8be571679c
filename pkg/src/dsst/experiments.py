"""Parameter sweeps on the three-component benchmark.

Every preset returns a list of flat dict rows (one per parameter point) so
the CLI can write them as a tidy CSV. Timings are wall-clock means over
`reps` runs after one warm-up; ratios against the first row of the sweep
are included because absolute times depend on the machine.
"""
from __future__ import annotations

import time
from dataclasses import replace

import numpy as np

from .analysis import compute_bounds, output_snr, renyi_entropy
from .ridge import extract_ridge, retrieve_mode, retrieve_mode_full, retrieve_mode_stft, zone_from_ridge
from .signal import add_white_noise, make_simulated_signal
from .sst import SstParams, squeeze_stage, sst
from .stft import StftPlan, stft_forward, stft_pair

FS = 1024.0
DURATION = 8.0
N = 8192
SIGMA = 0.03

# Noisy reconstruction: threshold about twice the rms noise-cell magnitude at
# 5 dB input SNR, so isolated noise cells are not squeezed into the zones.
RECON_GAMMA = 0.2
RIDGE_LAMBDA = 0.1
F_W = 10.0
# Concentration sweeps use the finite-difference displacement, whose
# saturation on coarse grids sets the Hf bounds.
CONC_ESTIMATOR = "difference"

PRESETS = ("table1", "table2", "fig3", "fig6", "fig7", "bounds-check")


def benchmark(snr_db=None, seed=0):
    """``(signal, components)``; noise is added when `snr_db` is given."""
    x, comps = make_simulated_signal(FS, DURATION)
    if snr_db is not None:
        x = add_white_noise(x, snr_db, seed)
    return x, comps


def plan_for(Ht, Hf=None, Nf=None, sigma=SIGMA, trunc_k=3.0):
    if Nf is None:
        Nf = int(round(N / Hf))
    return StftPlan.create(sigma, FS, N, Ht=Ht, Nf=Nf, trunc_k=trunc_k)


def time_call(fn, reps=20, warmup=1):
    """Mean and minimum wall time of ``fn()`` over `reps` runs."""
    for _ in range(warmup):
        fn()
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.mean(times)), float(np.min(times))


def ordered_ridges(T, count=3, lam=RIDGE_LAMBDA):
    """Ridges sorted by mean frequency, so they line up with ``x1, x2, x3``."""
    return sorted(extract_ridge(T, lam, count), key=lambda p: float(np.mean(p)))


def sst_mode_snrs(plan, xn, comps, f_w=F_W, gamma_rel=RECON_GAMMA, lam=RIDGE_LAMBDA):
    """Output SNR of each component retrieved from the SST of `xn`.

    Hop-1 plans use the column-sum retrieval, others the overlap-add inverse.
    Returns ``(snrs, T, paths)``.
    """
    T = sst(plan, xn, SstParams(gamma_rel=gamma_rel))
    paths = ordered_ridges(T, len(comps), lam)
    out = []
    for p, c in zip(paths, comps):
        zone = zone_from_ridge(p, f_w, T)
        y = retrieve_mode_full(plan, T, zone) if plan.Ht == 1 else retrieve_mode(plan, T, zone)
        out.append(output_snr(c, y))
    return out, T, paths


def stft_mode_snr(plan, xn, comp, path_hz, f_w):
    """Output SNR of the STFT band-filter retrieval around `path_hz`."""
    S = stft_forward(plan, xn, onesided=True)
    path = np.clip(np.round((path_hz - S.f0) / S.df).astype(np.int64), 0, S.n_bins - 1)
    return output_snr(comp, retrieve_mode_stft(plan, S, zone_from_ridge(path, f_w, S)))


def entropy_pair(plan, sig, params=None, alpha=3.0):
    """Renyi entropies ``(stft, sst)`` in bits on the same non-negative band."""
    params = params or SstParams(estimator=CONC_ESTIMATOR)
    if params.estimator == "difference":
        Sg, Sgd = stft_forward(plan, sig, "g", onesided=True), None
    else:
        Sg, Sgd = stft_pair(plan, sig, onesided=True)
    T = squeeze_stage(Sg, Sgd, params, sigma=plan.window.sigma)
    lo = int(round(T.f0 / Sg.df))
    hi = lo + T.n_bins // params.z
    band = replace(Sg, data=Sg.data[:, lo:hi], f0=lo * Sg.df)
    return (renyi_entropy(band, alpha, measure="tf"), renyi_entropy(T, alpha, measure="tf"))


def _sst_timer(plan, x, params):
    return lambda: sst(plan, x, params)


def run_table1(reps=20, snr_db=5.0, seed=0, Ht_values=(1, 20, 40), Hf_values=(1, 2)):
    x, _ = benchmark(snr_db, seed)
    rows = []
    base = None
    for Hf in Hf_values:
        for Ht in Ht_values:
            plan = plan_for(Ht, Hf)
            mean, best = time_call(_sst_timer(plan, x, SstParams()), reps)
            base = base or mean
            rows.append(dict(Ht=Ht, Hf=Hf, Nf=plan.Nf, elapsed_mean=mean, elapsed_min=best,
                             ratio=mean / base, frames=plan.n_frames))
    return rows


def run_table2(reps=20, snr_db=5.0, seed=0, Ht=20, Hf_values=(1, 2), band=(0.0, 80.0)):
    """SST-stage time (IF estimate + reassignment) with and without a band."""
    x, _ = benchmark(snr_db, seed)
    rows = []
    margin = 3 * compute_bounds(SIGMA, FS, N).sigma_f
    for Hf in Hf_values:
        plan = plan_for(Ht, Hf)
        Sg, Sgd = stft_pair(plan, x, onesided=True)
        full = SstParams()
        sel = SstParams(f1=band[0], f2=band[1], source_margin=margin)
        t_full = time_call(lambda: squeeze_stage(Sg, Sgd, full), reps)[0]
        t_sel = time_call(lambda: squeeze_stage(Sg, Sgd, sel), reps)[0]
        rows.append(dict(Ht=Ht, Hf=Hf, Nf=plan.Nf, f1=band[0], f2=band[1], source_margin=margin,
                         elapsed_full=t_full, elapsed_selective=t_sel, ratio=t_sel / t_full))
    return rows


def run_fig3(Ht_values=(1, 20, 60), Hf_values=(1, 2, 4, 8, 16, 32, 50, 64, 70, 100), snr_db=None, seed=0):
    x, _ = benchmark(snr_db, seed)
    rows = []
    for Hf in Hf_values:
        for Ht in Ht_values:
            plan = plan_for(Ht, Hf)
            h_stft, h_sst = entropy_pair(plan, x)
            rows.append(dict(Ht=Ht, Hf=Hf, Nf=plan.Nf, entropy_stft=h_stft, entropy_sst=h_sst,
                             reduction=h_stft - h_sst, estimator=CONC_ESTIMATOR))
    return rows


def run_fig6(factors=(2, 4, 8, 16, 32, 40), snr_db=5.0, seed=0, f_w=F_W):
    x, comps = benchmark(snr_db, seed)
    rows = []
    for Hf in factors:
        for Ht in factors:
            plan = plan_for(Ht, Hf)
            snrs, T, paths = sst_mode_snrs(plan, x, comps, f_w)
            stft_snrs = [stft_mode_snr(plan, x, c, T.f0 + T.df * p, f_w) for p, c in zip(paths, comps)]
            row = dict(Ht=Ht, Hf=Hf, Nf=plan.Nf, f_w=f_w, gamma_rel=RECON_GAMMA)
            for i in range(3):
                row[f"snr_sst_x{i + 1}"] = snrs[i]
                row[f"snr_stft_x{i + 1}"] = stft_snrs[i]
            rows.append(row)
    return rows


def run_fig7(f_w_values=tuple(range(0, 31, 2)), input_snrs=(0.0, 5.0), seed=0, Ht=4, Hf=4):
    rows = []
    plan = plan_for(Ht, Hf)
    full_plan = plan_for(1, 1)
    for snr_in in input_snrs:
        x, comps = benchmark(snr_in, seed)
        T = sst(plan, x, SstParams(gamma_rel=RECON_GAMMA))
        paths = ordered_ridges(T)
        Tf = sst(full_plan, x, SstParams(gamma_rel=RECON_GAMMA))
        full_paths = ordered_ridges(Tf)
        S = stft_forward(plan, x, onesided=True)
        for f_w in f_w_values:
            row = dict(input_snr=snr_in, f_w=f_w, Ht=Ht, Hf=Hf, gamma_rel=RECON_GAMMA)
            for i, c in enumerate(comps):
                row[f"snr_sst_x{i + 1}"] = output_snr(c, retrieve_mode(plan, T, zone_from_ridge(paths[i], f_w, T)))
                sp = np.clip(np.round((T.f0 + T.df * paths[i]) / S.df).astype(np.int64), 0, S.n_bins - 1)
                row[f"snr_stft_x{i + 1}"] = output_snr(c, retrieve_mode_stft(plan, S, zone_from_ridge(sp, f_w, S)))
                row[f"snr_fullsst_x{i + 1}"] = output_snr(
                    c, retrieve_mode_full(full_plan, Tf, zone_from_ridge(full_paths[i], f_w, Tf)))
            rows.append(row)
        del Tf
    return rows


def run_bounds_check(Hf_values=(8, 16, 24, 32, 40, 48, 56, 60, 64, 70, 80, 90, 100), Ht=1):
    """Entropy reduction of the 50 Hz tone alone and of the full signal vs Hf."""
    x, comps = benchmark()
    b = compute_bounds(SIGMA, FS, N)
    rows = []
    for Hf in Hf_values:
        plan = plan_for(Ht, Hf)
        tone = entropy_pair(plan, comps[0])
        full = entropy_pair(plan, x)
        rows.append(dict(Hf=Hf, Nf=plan.Nf, df=plan.df, hf_rf=b.hf_rf, hf_support=b.hf_support,
                         reduction_tone=tone[0] - tone[1], reduction_signal=full[0] - full[1],
                         estimator=CONC_ESTIMATOR))
    return rows


def run(preset: str, reps: int = 20, seed: int = 0):
    if preset == "table1":
        return run_table1(reps=reps, seed=seed)
    if preset == "table2":
        return run_table2(reps=reps, seed=seed)
    if preset == "fig3":
        return run_fig3(seed=seed)
    if preset == "fig6":
        return run_fig6(seed=seed)
    if preset == "fig7":
        return run_fig7(seed=seed)
    if preset == "bounds-check":
        return run_bounds_check()
    raise ValueError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
