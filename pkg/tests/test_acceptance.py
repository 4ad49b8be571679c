"""Acceptance criteria, each at its stated tolerance.

Every test appends one ``PASS``/``FAIL`` line that pytest prints in a
summary section; running this file directly prints the same lines.
"""
import math
import time

import numpy as np
import pytest
import scipy.fft as sfft

from conftest import ACCEPTANCE_LINES, naive_dft
from dsst import (
    Signal,
    SstParams,
    StftPlan,
    compute_bounds,
    output_snr,
    reassignment_frequency,
    retrieve_mode,
    retrieve_mode_full,
    retrieve_mode_stft,
    rf_model,
    sst,
    stft_forward,
    stft_inverse,
    stft_pair,
    synchrosqueeze,
    IfEstimate,
    Kind,
    TfMatrix,
    zone_from_ridge,
)
from dsst import bench
from dsst import experiments as ex

FS, N, SIGMA = ex.FS, ex.N, ex.SIGMA
REFERENCE_SNR = (14.98, 14.57, 12.36)
SEEDS = (0, 1, 2, 3, 4)


def record(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def fmt(values):
    return "/".join(f"{v:.2f}" for v in values)


# 1 ----------------------------------------------------------------------


def test_criterion_01_stft_round_trip():
    x, _ = ex.benchmark()
    scale = np.abs(x.samples).max()
    worst = 0.0
    t0 = time.perf_counter()
    for Ht in (1, 8, 40):
        for Nf in (256, 1024):
            p = StftPlan.create(SIGMA, FS, N, Ht=Ht, Nf=Nf)
            y = stft_inverse(p, stft_forward(p, x)).samples
            covered = slice(p.M, N - p.M)
            worst = max(worst, np.abs(y - x.samples)[covered].max() / scale)
    elapsed = time.perf_counter() - t0
    record(1, "STFT round trip", worst < 1e-9 and elapsed < 5.0,
           f"max rel error {worst:.2e} (< 1e-9), {elapsed:.2f} s (< 5 s)")


# 2 ----------------------------------------------------------------------


def test_criterion_02_dft_oracle():
    rng = np.random.default_rng(0)
    worst = 0.0
    for Nf in (8, 64, 256, 1024):
        z = rng.standard_normal(Nf) + 1j * rng.standard_normal(Nf)
        ref = naive_dft(z)
        worst = max(worst, np.linalg.norm(sfft.fft(z) - ref) / np.linalg.norm(ref))
        # the STFT frame at the signal centre against the same naive DFT
        sigma = 0.0009 if Nf == 8 else SIGMA * min(1.0, Nf / 256)
        n = max(Nf, 256)
        x = rng.standard_normal(n)
        p = StftPlan.create(sigma, FS, n, Ht=n // 2, Nf=Nf)
        row = stft_forward(p, Signal(x, FS)).data[1]
        buf = np.zeros(Nf)
        seg = x[n // 2 - p.M:n // 2 + p.M + 1] * p.window.g
        buf[(np.arange(p.L) - p.M) % Nf] = seg
        ref = naive_dft(buf)
        worst = max(worst, np.linalg.norm(row - ref) / np.linalg.norm(ref))
    record(2, "DFT oracle", worst < 1e-9, f"max rel error {worst:.2e} (< 1e-9) for Nf 8/64/256/1024")


# 3, 4 -------------------------------------------------------------------


def _mean_snrs(Ht, Hf):
    plan = ex.plan_for(Ht, Hf)
    runs = []
    for seed in SEEDS:
        xn, comps = ex.benchmark(5.0, seed)
        snrs, _, _ = ex.sst_mode_snrs(plan, xn, comps)
        runs.append(snrs)
    return np.mean(runs, axis=0)


@pytest.mark.slow
def test_criterion_03_full_sst_reference():
    snr = _mean_snrs(1, 1)
    ok = all(abs(s - r) <= 1.5 for s, r in zip(snr, REFERENCE_SNR))
    record(3, "full-SST reconstruction", ok,
           f"x1/x2/x3 {fmt(snr)} dB vs {fmt(REFERENCE_SNR)} +/- 1.5 (5 seeds, gamma 0.2, f_w 10 Hz)")


@pytest.mark.slow
def test_criterion_04_downsampled_sst():
    snr = _mean_snrs(8, 8)
    close = all(abs(s - r) <= 2.5 for s, r in zip(snr, REFERENCE_SNR))
    ordered = snr[0] >= snr[1] >= snr[2]
    record(4, "downsampled-SST reconstruction", close and ordered,
           f"Ht=Hf=8 x1/x2/x3 {fmt(snr)} dB vs {fmt(REFERENCE_SNR)} +/- 2.5, ordered={ordered}")


# 5, 6 -------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_05_concentration_ordering():
    x, _ = ex.benchmark()
    gaps, spread = [], []
    for Hf in (1, 2, 4, 8, 16, 32):
        sst_h = []
        for Ht in (1, 20, 60):
            h_stft, h_sst = ex.entropy_pair(ex.plan_for(Ht, Hf), x)
            gaps.append(h_stft - h_sst)
            sst_h.append(h_sst)
        spread.append(max(sst_h) - min(sst_h))
    analytic = ex.entropy_pair(ex.plan_for(20, 32), x, SstParams())
    ok = min(gaps) >= 0.5 and max(spread) < 0.2
    record(5, "concentration ordering", ok,
           f"min STFT-SST gap {min(gaps):.2f} bits (>= 0.5), max SST spread over Ht {max(spread):.3f} bits "
           f"(< 0.2); analytic estimator gap at Hf=32 {analytic[0] - analytic[1]:.2f}")


@pytest.mark.slow
def test_criterion_06_degeneration():
    x, _ = ex.benchmark()
    gaps = []
    for Ht in (1, 20, 60):
        h_stft, h_sst = ex.entropy_pair(ex.plan_for(Ht, 70), x)
        gaps.append(abs(h_sst - h_stft))
    a_stft, a_sst = ex.entropy_pair(ex.plan_for(1, 70), x, SstParams())
    record(6, "degeneration at Hf=70", max(gaps) < 0.3,
           f"|SST-STFT| {fmt(gaps)} bits at Ht 1/20/60 (< 0.3); analytic estimator {abs(a_sst - a_stft):.2f}")


# 7 ----------------------------------------------------------------------


def test_criterion_07_bounds():
    b = compute_bounds(0.03, 1024, 8192)
    b2 = compute_bounds(0.02, 44100, 9035089)
    ok = (abs(b.sigma_f - 5.31) <= 0.01 and 63 < b.hf_support <= 64 and 59 < b.hf_rf < 61
          and abs(b2.hf_support - 2446) <= 1)
    record(7, "bound formulas", ok,
           f"sigma_f {b.sigma_f:.3f}, hf_support {b.hf_support:.2f}, hf_rf {b.hf_rf:.2f}, "
           f"audio hf_support {b2.hf_support:.1f}")


# 8 ----------------------------------------------------------------------


def test_criterion_08_rf_model():
    limit_err = abs(rf_model(1e-6, SIGMA, 10.0) + 10.0) / 10.0
    sigma_f = 1 / (2 * math.pi * SIGMA)
    t = np.arange(N) / FS
    x = Signal(np.cos(2 * np.pi * 50.0 * t), FS)
    errs = {}
    for Hf, estimator in ((1, "analytic"), (2, "analytic"), (16, "difference"), (32, "difference"),
                          (64, "difference")):
        p = ex.plan_for(64, Hf)
        if estimator == "analytic":
            Sg, Sgd = stft_pair(p, x)
        else:
            Sg, Sgd = stft_forward(p, x, onesided=True), None
        rf = reassignment_frequency(Sg, Sgd, estimator, sigma=SIGMA)[p.n_frames // 2]
        fd = Sg.freqs - 50.0
        near = np.abs(fd) <= 2 * sigma_f
        model = rf_model(Sg.df, SIGMA, fd[near])
        errs[(Hf, estimator)] = np.linalg.norm(rf[near] - model) / np.linalg.norm(model)
    ok = limit_err < 1e-3 and max(errs.values()) < 0.10
    detail = ", ".join(f"Hf={h} {e[0]}: {v:.3f}" for (h, e), v in errs.items())
    record(8, "RF model", ok, f"limit rel error {limit_err:.1e} (< 1e-3); relative L2 vs model {detail} (< 0.10)")


# 9 ----------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_09_bandwidth_insensitivity():
    plan = ex.plan_for(4, 4)
    widths = np.arange(5, 31, 1.0)
    sst_snr = np.zeros(widths.size)
    stft_snr = np.zeros(widths.size)
    for seed in SEEDS:
        xn, (x1, _, _) = ex.benchmark(5.0, seed)
        T = sst(plan, xn, SstParams(gamma_rel=ex.RECON_GAMMA))
        path = ex.ordered_ridges(T)[0]
        S = stft_forward(plan, xn, onesided=True)
        spath = np.clip(np.round((T.f0 + T.df * path) / S.df).astype(np.int64), 0, S.n_bins - 1)
        for i, fw in enumerate(widths):
            sst_snr[i] += output_snr(x1, retrieve_mode(plan, T, zone_from_ridge(path, fw, T))) / len(SEEDS)
            stft_snr[i] += output_snr(x1, retrieve_mode_stft(plan, S, zone_from_ridge(spath, fw, S))) / len(SEEDS)
    v_sst = sst_snr.max() - sst_snr.min()
    v_stft = stft_snr.max() - stft_snr.min()
    record(9, "bandwidth insensitivity", v_sst < 3.0 and v_stft > v_sst,
           f"x1 SNR spread over f_w 5..30 Hz: SST {v_sst:.2f} dB (< 3), STFT {v_stft:.2f} dB (> SST)")


# 10 ---------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_10_efficiency_scaling():
    rows = {r["check"]: r["ratio"] for r in bench.scaling(reps=5)}
    ok = rows["hop"] < 0.15 and rows["nf"] < 0.7 and rows["selective"] <= 0.7
    record(10, "efficiency scaling", ok,
           f"Ht20/Ht1 {rows['hop']:.3f} (< 0.15), NfN/2 / NfN {rows['nf']:.3f} (< 0.7), "
           f"selective/full {rows['selective']:.3f} (<= 0.7)")


# 11 ---------------------------------------------------------------------


def test_criterion_11_conservation():
    rng = np.random.default_rng(11)
    failures = 0
    for _ in range(100):
        Nf = int(rng.integers(4, 256))
        frames = int(rng.integers(1, 16))
        nb = Nf // 2 + 1
        data = (rng.integers(-1000, 1000, (frames, nb)) + 1j * rng.integers(-1000, 1000, (frames, nb))).astype(complex)
        S = TfMatrix(data, 1, FS, 0.0, FS / Nf, 3, Kind.STFT, Nf)
        mask = rng.random(data.shape) < rng.uniform(0.2, 1.0)
        omega = np.where(mask, rng.uniform(0, 0.55 * FS, data.shape), 0.0)
        z = int(rng.integers(1, 5))
        k1 = int(rng.integers(0, Nf // 2))
        k2 = int(rng.integers(k1 + 1, Nf // 2 + 1))
        params = SstParams(f1=k1 * S.df, f2=k2 * S.df, z=z)
        T = synchrosqueeze(S, IfEstimate(omega, mask), params)
        pos = np.floor((omega - k1 * S.df) / (S.df / z) + 0.5)
        kept = mask & (pos >= 0) & (pos < z * (k2 - k1))
        failures += T.data.sum() != data[kept].sum()
    record(11, "coefficient conservation", failures == 0, f"{100 - failures}/100 exact")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
