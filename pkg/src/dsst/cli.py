"""Command-line front end.

Every subcommand shares one set of flags. Values resolve in the order
built-in default < ``--config`` JSON file < explicit flag, and the merged
configuration is written into each run report.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__, _backend, bench, experiments
from . import io as tfio
from .analysis import compute_bounds, output_snr, renyi_entropy, rmse
from .errors import InvalidArgument
from .ridge import extract_ridge, retrieve_mode, retrieve_mode_full, retrieve_mode_stft, zone_from_ridge
from .signal import add_white_noise, make_simulated_signal
from .sst import SstParams, sst
from .stft import Kind, StftPlan, set_threads, stft_forward


@dataclass
class RunConfig:
    fs: float | None = None
    duration: float = 8.0
    sigma: float = 0.03
    ht: int = 1
    nf: int | None = None
    n: int | None = None
    gamma: float = 1e-6
    f1: float = 0.0
    f2: float | None = None
    zoom: int = 1
    margin: float | None = None
    estimator: str = "analytic"
    fw: float = 10.0
    lam: float = 0.1
    count: int = 1
    component: int = 1
    method: str = "direct"
    trunc_k: float = 3.0
    alpha: float = 3.0
    snr: float | None = None
    seed: int = 0
    threads: int | None = None
    reps: int = 20
    preset: str | None = None
    input: str | None = None
    output: str | None = None
    ref: str | None = None
    ridge: str | None = None
    csv: str | None = None

    def sst_params(self) -> SstParams:
        return SstParams(gamma_rel=self.gamma, f1=self.f1, f2=self.f2, z=self.zoom,
                         source_margin=self.margin, estimator=self.estimator)

    def plan(self, fs: float, N: int) -> StftPlan:
        return StftPlan.create(self.sigma, fs, N, Ht=self.ht, Nf=self.nf, trunc_k=self.trunc_k)


_FIELDS = {f.name for f in fields(RunConfig)}


class CliError(Exception):
    """Fatal problem with a diagnostic; carries the exit code."""

    def __init__(self, msg, code=2):
        super().__init__(msg)
        self.code = code


def _add_common(p):
    g = p.add_argument_group("common")
    S = argparse.SUPPRESS
    g.add_argument("--config", default=S, help="JSON file with RunConfig fields")
    g.add_argument("--in", dest="input", default=S, help="input file")
    g.add_argument("--out", dest="output", default=S, help="output file")
    g.add_argument("--fs", type=float, default=S, help="sample rate in Hz")
    g.add_argument("--sigma", type=float, default=S, help="Gaussian window width in s")
    g.add_argument("--ht", type=int, default=S, help="time hop in samples")
    g.add_argument("--nf", type=int, default=S, help="DFT length (default: signal length)")
    g.add_argument("--gamma", type=float, default=S, help="relative reassignment threshold")
    g.add_argument("--f1", type=float, default=S, help="lower edge of the reassignment band in Hz")
    g.add_argument("--f2", type=float, default=S, help="upper edge of the reassignment band in Hz")
    g.add_argument("--zoom", type=int, default=S, help="frequency subdivision factor")
    g.add_argument("--fw", type=float, default=S, help="half-bandwidth of the retrieval zone in Hz")
    g.add_argument("--trunc-k", dest="trunc_k", type=float, default=S, help="window support in sigmas")
    g.add_argument("--seed", type=int, default=S, help="noise seed")
    g.add_argument("--threads", type=int, default=S, help="FFT worker threads")
    g.add_argument("--margin", type=float, default=S, help="source-bin margin around [f1, f2] in Hz")
    g.add_argument("--estimator", choices=("analytic", "difference"), default=S)
    g.add_argument("--lam", type=float, default=S, help="ridge smoothness penalty")
    g.add_argument("--snr", type=float, default=S, help="input SNR in dB for synth")
    g.add_argument("--ref", default=S, help="reference signal for metrics")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dsst", description="Downsampled synchrosqueezing transform")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    p = sub.add_parser("synth", help="write the three-component benchmark signal")
    _add_common(p)
    p.add_argument("--duration", type=float, default=S)

    for name, text in (("stft", "forward STFT to a TFR1 file"), ("sst", "SST to a TFR1 file")):
        p = sub.add_parser(name, help=text)
        _add_common(p)
        p.add_argument("--csv", default=S, help="also export the matrix as long CSV")

    p = sub.add_parser("reconstruct", help="retrieve one mode from a TFR1 file")
    _add_common(p)
    p.add_argument("--ridge", default=S, help="ridge CSV to use instead of extracting one")
    p.add_argument("--count", type=int, default=S, help="ridges to extract")
    p.add_argument("--component", type=int, default=S, help="1-based ridge index, low to high frequency")
    p.add_argument("--method", choices=("direct", "full"), default=S,
                   help="SST inverse: overlap-add (direct) or column sum (full, Ht=1)")
    p.add_argument("--n", type=int, default=S, help="output length in samples")

    p = sub.add_parser("ridge", help="export ridges of a TFR1 file")
    _add_common(p)
    p.add_argument("--count", type=int, default=S)

    p = sub.add_parser("entropy", help="Renyi entropy of a TFR1 file or a signal")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=S)

    p = sub.add_parser("bounds", help="print the Hf bounds as JSON")
    _add_common(p)
    p.add_argument("--n", type=int, default=S, help="signal length (default: --in length or 8192)")

    p = sub.add_parser("experiment", help="run a parameter sweep preset")
    _add_common(p)
    p.add_argument("preset", choices=experiments.PRESETS)
    p.add_argument("--reps", type=int, default=S, help="timing repetitions")

    p = sub.add_parser("bench", help="compare kernel backends and scaling ratios")
    _add_common(p)
    p.add_argument("--reps", type=int, default=S)
    return parser


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    values = {}
    cfg_path = getattr(ns, "config", None)
    if cfg_path:
        try:
            data = json.loads(Path(cfg_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {cfg_path}: {exc}", 1) from exc
        if not isinstance(data, dict):
            raise CliError(f"config {cfg_path} must hold a JSON object")
        unknown = set(data) - _FIELDS
        if unknown:
            raise CliError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(data)
    values.update({k: v for k, v in vars(ns).items() if k in _FIELDS})
    cfg = RunConfig(**values)
    # keys the user set, so they can override values stored with a TFR file
    cfg._explicit = set(values)
    return cfg


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


def _need(cfg, attr, what):
    val = getattr(cfg, attr)
    if val is None:
        raise CliError(f"{what} is required (--{'in' if attr == 'input' else 'out'})")
    return val


def _load_signal(cfg):
    try:
        return tfio.read_signal(_need(cfg, "input", "input file"), cfg.fs)
    except OSError as exc:
        raise CliError(f"cannot read {cfg.input}: {exc}", 1) from exc


def _make_plan(cfg, sig):
    N = len(sig)
    if cfg.nf is not None and cfg.nf > N:
        raise CliError(f"Nf <= N violated: --nf {cfg.nf} exceeds the signal length N={N}")
    if cfg.nf is not None and cfg.nf & (cfg.nf - 1):
        _warn(f"Nf={cfg.nf} is not a power of two; FFTs will be slower")
    return cfg.plan(sig.fs, N)


def _report(cfg, **extra):
    return {"version": __version__, "backend": _backend.NAME, "config": asdict(cfg), **extra}


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(type(o).__name__)


def _finite(x):
    return x if math.isfinite(x) else None


def cmd_synth(cfg):
    fs = 1024.0 if cfg.fs is None else cfg.fs
    x, comps = make_simulated_signal(fs, cfg.duration)
    if cfg.snr is not None:
        x = add_white_noise(x, cfg.snr, cfg.seed)
    out = Path(cfg.output or "signal.csv")
    tfio.write_signal_csv(out, x)
    written = [str(out)]
    for i, c in enumerate(comps, 1):
        p = out.with_name(f"{out.stem}_x{i}{out.suffix}")
        tfio.write_signal_csv(p, c)
        written.append(str(p))
    print(json.dumps({"written": written, "n": len(x), "fs": fs}))


def cmd_transform(cfg, mode):
    sig = _load_signal(cfg)
    out = Path(_need(cfg, "output", "output file"))
    plan = _make_plan(cfg, sig)
    t0 = time.perf_counter()
    if mode == "sst":
        tf = sst(plan, sig, cfg.sst_params())
    else:
        tf = stft_forward(plan, sig, onesided=True)
    elapsed = time.perf_counter() - t0
    tfio.write_tfr(out, tf)
    written = [str(out)]
    if cfg.csv:
        tfio.write_tfr_csv(cfg.csv, tf)
        written.append(cfg.csv)
    effective = replace(cfg, fs=sig.fs, nf=plan.Nf, n=len(sig),
                        f2=sig.fs / 2 if cfg.f2 is None else cfg.f2)
    report = _report(
        effective, command=mode, fs=sig.fs, N=len(sig), Nf=plan.Nf, Hf=plan.Hf, M=plan.M, L=plan.L,
        df=tf.df, f0=tf.f0, frames=tf.n_frames, bins=tf.n_bins, invertible=plan.invertible,
        elapsed_s=elapsed, entropy_bits=renyi_entropy(tf, cfg.alpha, measure="tf"),
        entropy_cells_bits=renyi_entropy(tf, cfg.alpha), written=written,
    )
    _write_json(tfio.sidecar_path(out), report)
    written.append(str(tfio.sidecar_path(out)))
    print(json.dumps({k: report[k] for k in ("Hf", "frames", "bins", "elapsed_s", "entropy_bits")}))


def _load_tfr(cfg):
    path = _need(cfg, "input", "input TFR1 file")
    try:
        tf = tfio.read_tfr(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", 1) from exc
    side = tfio.sidecar_path(path)
    meta = json.loads(side.read_text()) if side.exists() else {}
    return tf, meta


def _plan_for_tfr(cfg, tf, meta):
    """Rebuild the analysis plan; flags win over the transform's run report."""
    saved = meta.get("config", {})
    sigma = cfg.sigma if "sigma" in cfg._explicit else saved.get("sigma", cfg.sigma)
    trunc_k = cfg.trunc_k if "trunc_k" in cfg._explicit else saved.get("trunc_k", cfg.trunc_k)
    N = cfg.n or meta.get("N") or tf.n_frames * tf.Ht
    plan = StftPlan.create(sigma, tf.fs, N, Ht=tf.Ht, Nf=tf.Nf_effective, trunc_k=trunc_k)
    if plan.M != tf.M:
        raise CliError(f"window mismatch: sigma={sigma}, trunc_k={trunc_k} give M={plan.M}, "
                       f"matrix has M={tf.M}; pass the --sigma used for the transform")
    if plan.n_frames != tf.n_frames:
        raise CliError(f"frame count mismatch: N={N}, Ht={tf.Ht} give {plan.n_frames} frames, "
                       f"matrix has {tf.n_frames}; pass --n")
    return plan


def _ridges(cfg, tf, count):
    paths = extract_ridge(tf, cfg.lam, count)
    return sorted(paths, key=lambda p: float(np.mean(p)))


def cmd_reconstruct(cfg):
    tf, meta = _load_tfr(cfg)
    out = Path(_need(cfg, "output", "output file"))
    plan = _plan_for_tfr(cfg, tf, meta)
    if cfg.ridge:
        frames, freqs = tfio.read_ridge_csv(cfg.ridge)
        if frames.size != tf.n_frames:
            raise CliError(f"ridge file has {frames.size} frames, matrix has {tf.n_frames}")
        path = np.clip(np.round((freqs - tf.f0) / tf.df).astype(np.int64), 0, tf.n_bins - 1)
    else:
        count = max(cfg.count, cfg.component)
        path = _ridges(cfg, tf, count)[cfg.component - 1]
    zone = zone_from_ridge(path, cfg.fw, tf)
    if tf.kind == Kind.SST:
        if cfg.method == "full":
            y = retrieve_mode_full(plan, tf, zone)
        else:
            y = retrieve_mode(plan, tf, zone)
    else:
        if not tf.onesided:
            raise CliError("STFT input must be the one-sided matrix written by the stft command")
        y = retrieve_mode_stft(plan, tf, zone)
    tfio.write_signal_csv(out, y)
    result = {"written": [str(out)], "n": len(y), "half_bw_bins": zone.half_bw_bins}
    if cfg.ref:
        ref = tfio.read_signal(cfg.ref, cfg.fs)
        if len(ref) != len(y):
            raise CliError(f"reference has {len(ref)} samples, reconstruction has {len(y)}")
        result["output_snr_db"] = _finite(output_snr(ref, y))
        result["rmse"] = rmse(ref, y)
    print(json.dumps(result))


def cmd_ridge(cfg):
    tf, _ = _load_tfr(cfg)
    out = Path(_need(cfg, "output", "output file"))
    paths = _ridges(cfg, tf, cfg.count)
    written = []
    for i, p in enumerate(paths, 1):
        dest = out if len(paths) == 1 else out.with_name(f"{out.stem}_{i}{out.suffix}")
        tfio.write_ridge_csv(dest, tf, p)
        written.append(str(dest))
    print(json.dumps({"written": written}))


def cmd_entropy(cfg):
    path = _need(cfg, "input", "input file")
    with open(path, "rb") as fh:
        is_tfr = fh.read(len(tfio.MAGIC)) == tfio.MAGIC
    if is_tfr:
        tf, _ = _load_tfr(cfg)
        res = {"kind": tf.kind.name, "entropy_bits": renyi_entropy(tf, cfg.alpha, measure="tf"),
               "entropy_cells_bits": renyi_entropy(tf, cfg.alpha)}
    else:
        sig = _load_signal(cfg)
        plan = _make_plan(cfg, sig)
        S = stft_forward(plan, sig, onesided=True)
        T = sst(plan, sig, cfg.sst_params())
        res = {"stft_bits": renyi_entropy(S, cfg.alpha, measure="tf"),
               "sst_bits": renyi_entropy(T, cfg.alpha, measure="tf"), "Hf": plan.Hf}
    res["alpha"] = cfg.alpha
    print(json.dumps(res))


def cmd_bounds(cfg):
    fs, N = cfg.fs, cfg.n
    if cfg.input:
        sig = _load_signal(cfg)
        fs, N = sig.fs, N or len(sig)
    rep = compute_bounds(cfg.sigma, 1024.0 if fs is None else fs, N or 8192).to_dict()
    text = json.dumps(rep, indent=2)
    if cfg.output:
        Path(cfg.output).write_text(text + "\n")
    print(text)


def cmd_experiment(cfg):
    out = cfg.output or f"{cfg.preset}.csv"
    rows = experiments.run(cfg.preset, reps=cfg.reps, seed=cfg.seed)
    tfio.write_rows_csv(out, rows)
    print(json.dumps({"written": [out], "rows": len(rows)}))


def cmd_bench(cfg):
    rows = bench.compare_backends(reps=cfg.reps)
    scale = bench.scaling(reps=max(1, cfg.reps // 4))
    for r in rows:
        print(f"{r['kernel']:12s} {r['backend']:9s} {r['elapsed_mean'] * 1e3:9.3f} ms "
              f"x{r['speedup_vs_python']:6.1f} identical={r['identical']}")
    for r in scale:
        print(f"{r['check']:10s} {r['numerator']} / {r['denominator']}: {r['ratio']:.3f}")
    if cfg.output:
        tfio.write_rows_csv(cfg.output, rows + scale)


COMMANDS = {
    "synth": cmd_synth,
    "stft": lambda cfg: cmd_transform(cfg, "stft"),
    "sst": lambda cfg: cmd_transform(cfg, "sst"),
    "reconstruct": cmd_reconstruct,
    "ridge": cmd_ridge,
    "entropy": cmd_entropy,
    "bounds": cmd_bounds,
    "experiment": cmd_experiment,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(ns)
        if cfg.threads is not None:
            set_threads(cfg.threads)
        cfg.sst_params()
        COMMANDS[ns.command](cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InvalidArgument, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
