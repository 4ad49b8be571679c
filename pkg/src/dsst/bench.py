"""Backend comparison and empirical scaling of the SST pipeline."""
from __future__ import annotations

import numpy as np

from . import _backend
from .experiments import N, benchmark, plan_for, time_call
from .sst import SstParams, if_estimate, squeeze_stage, sst
from .stft import stft_pair


def kernel_inputs(Ht=8, Nf=1024, ridge_shape=(128, 96), seed=0):
    """Realistic inputs for each kernel, taken from the noisy benchmark."""
    x, _ = benchmark(5.0, seed)
    plan = plan_for(Ht, Nf=Nf)
    Sg, Sgd = stft_pair(plan, x, onesided=True)
    est = if_estimate(Sg, Sgd)
    n_out = Nf // 2 + 1
    squeeze_args = (np.ascontiguousarray(Sg.data), np.ascontiguousarray(est.omega),
                    est.mask.view(np.uint8), 0, Sg.n_bins, 0.0, plan.df, n_out)
    frames = np.random.default_rng(seed).standard_normal((plan.n_frames, plan.L))
    ola_args = (frames, np.ascontiguousarray(plan.window.g), plan.Ht, plan.M, plan.N)
    m, b = ridge_shape
    score = np.log(np.abs(Sg.data[:m, :b]) + 1e-12)
    return {
        "squeeze": squeeze_args,
        "overlap_add": ola_args,
        "ridge_dp": (np.ascontiguousarray(score), 0.1),
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(u, v) for u, v in zip(a, b))
    return np.array_equal(a, b)


def compare_backends(reps=20, **kw):
    """Time each kernel on every available backend.

    Rows carry the mean and min time, whether the output is bit-identical to
    the python backend, and the speedup of each backend over python.
    """
    inputs = kernel_inputs(**kw)
    rows = []
    for name, args in inputs.items():
        ref = getattr(_backend.get("python"), name)(*args)
        base = None
        for backend in _backend.BACKENDS:
            fn = getattr(_backend.get(backend), name)
            out = fn(*args)
            mean, best = time_call(lambda: fn(*args), reps)
            if backend == "python":
                base = mean
            rows.append(dict(kernel=name, backend=backend, elapsed_mean=mean, elapsed_min=best,
                             identical=_same(out, ref)))
        for r in rows:
            if r["kernel"] == name:
                r["speedup_vs_python"] = base / r["elapsed_mean"]
    return rows


def scaling(reps=20, Nf_hop=2048, Ht_nf=20, band=(0.0, 80.0), margin=16.0, seed=0):
    """Elapsed-time ratios of the SST pipeline.

    ``hop``: Ht=20 against Ht=1 at ``Nf=Nf_hop``. ``nf``: Nf=N/2 against
    Nf=N at ``Ht=Ht_nf``. ``selective``: squeeze stage on `band` against the
    full band at ``Ht=Ht_nf, Nf=N``.
    """
    x, _ = benchmark(5.0, seed)
    params = SstParams()

    def sst_time(Ht, Nf):
        plan = plan_for(Ht, Nf=Nf)
        return time_call(lambda: sst(plan, x, params), reps)[0]

    rows = []
    t1, t20 = sst_time(1, Nf_hop), sst_time(20, Nf_hop)
    rows.append(dict(check="hop", numerator="Ht=20", denominator="Ht=1", Nf=Nf_hop, Ht="",
                     elapsed_num=t20, elapsed_den=t1, ratio=t20 / t1))
    tn, th = sst_time(Ht_nf, N), sst_time(Ht_nf, N // 2)
    rows.append(dict(check="nf", numerator="Nf=N/2", denominator="Nf=N", Nf="", Ht=Ht_nf,
                     elapsed_num=th, elapsed_den=tn, ratio=th / tn))
    plan = plan_for(Ht_nf, Nf=N)
    Sg, Sgd = stft_pair(plan, x, onesided=True)
    sel = SstParams(f1=band[0], f2=band[1], source_margin=margin)
    tf = time_call(lambda: squeeze_stage(Sg, Sgd, params), reps)[0]
    ts = time_call(lambda: squeeze_stage(Sg, Sgd, sel), reps)[0]
    rows.append(dict(check="selective", numerator=f"[{band[0]:g},{band[1]:g}] Hz", denominator="full band",
                     Nf=N, Ht=Ht_nf, elapsed_num=ts, elapsed_den=tf, ratio=ts / tf))
    return rows
