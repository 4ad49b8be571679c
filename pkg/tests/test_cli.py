import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import FS, tone
from dsst import cli
from dsst import io as tfio


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def synth(tmp_path, capsys):
    path = tmp_path / "sig.csv"
    code, _, _ = run(capsys, "synth", "--out", path, "--snr", 5, "--seed", 7)
    assert code == 0
    return path


def test_synth_default(tmp_path, capsys):
    path = tmp_path / "clean.csv"
    code, out, _ = run(capsys, "synth", "--out", path)
    assert code == 0
    s = tfio.read_signal_csv(path)
    assert len(s) == 8192 and s.fs == 1024.0
    parts = [tfio.read_signal_csv(tmp_path / f"clean_x{i}.csv").samples for i in (1, 2, 3)]
    assert np.abs(sum(parts) - s.samples).max() < 1e-12
    assert json.loads(out)["n"] == 8192


def test_synth_deterministic(tmp_path, capsys, synth):
    again = tmp_path / "again.csv"
    run(capsys, "synth", "--out", again, "--snr", 5, "--seed", 7)
    assert again.read_bytes() == synth.read_bytes()


def test_sst_report(tmp_path, capsys, synth):
    out = tmp_path / "s.tfr"
    code, stdout, err = run(capsys, "sst", "--in", synth, "--out", out, "--sigma", 0.03, "--ht", 20, "--nf", 410)
    assert code == 0
    assert "not a power of two" in err
    rep = json.loads((tmp_path / "s.tfr.json").read_text())
    assert rep["Hf"] == pytest.approx(8192 / 410)
    assert rep["frames"] == 410 and rep["bins"] == 205
    assert rep["elapsed_s"] > 0 and np.isfinite(rep["entropy_bits"])
    cfg = rep["config"]
    assert cfg["nf"] == 410 and cfg["ht"] == 20 and cfg["fs"] == 1024.0 and cfg["f2"] == 512.0
    assert set(cfg) == {f.name for f in cli.fields(cli.RunConfig)}
    assert json.loads(stdout)["Hf"] == pytest.approx(19.98, abs=0.01)
    T = tfio.read_tfr(out)
    assert T.kind.name == "SST" and T.Ht == 20


def test_selective_band(tmp_path, capsys, synth):
    out = tmp_path / "s.tfr"
    code, _, _ = run(capsys, "sst", "--in", synth, "--out", out, "--ht", 20, "--nf", 410,
                     "--f1", 0, "--f2", 80, "--zoom", 2)
    assert code == 0
    T = tfio.read_tfr(out)
    assert T.f0 == 0.0 and T.freqs.max() < 80.0
    assert T.df == pytest.approx(1024 / 410 / 2)


def test_nf_larger_than_signal(tmp_path, capsys, synth):
    code, _, err = run(capsys, "sst", "--in", synth, "--out", tmp_path / "x.tfr", "--nf", 8193)
    assert code == 2
    assert "Nf <= N" in err
    assert not (tmp_path / "x.tfr").exists()


def test_invalid_params_exit_code(tmp_path, capsys, synth):
    code, _, err = run(capsys, "sst", "--in", synth, "--out", tmp_path / "x.tfr", "--f1", 90, "--f2", 80)
    assert code == 2 and "f2 must exceed f1" in err
    code, _, err = run(capsys, "sst", "--in", synth, "--out", tmp_path / "x.tfr", "--ht", 0)
    assert code == 2 and "Ht" in err


def test_unwritable_output(tmp_path, capsys, synth):
    code, _, err = run(capsys, "stft", "--in", synth, "--out", tmp_path / "no" / "x.tfr", "--ht", 64, "--nf", 256)
    assert code == 1 and err.startswith("error:")


def test_missing_input(tmp_path, capsys):
    code, _, err = run(capsys, "stft", "--in", tmp_path / "nope.csv", "--out", tmp_path / "x.tfr")
    assert code == 1
    code, _, err = run(capsys, "stft", "--out", tmp_path / "x.tfr")
    assert code == 2 and "--in" in err


def _tone_file(tmp_path):
    ref = tmp_path / "tone.csv"
    tfio.write_signal_csv(ref, tone(50.0))
    return ref


def test_reconstruct_noiseless_tone(tmp_path, capsys):
    ref = _tone_file(tmp_path)
    T = tmp_path / "t.tfr"
    assert run(capsys, "sst", "--in", ref, "--out", T, "--ht", 8, "--nf", 1024)[0] == 0
    code, out, _ = run(capsys, "reconstruct", "--in", T, "--out", tmp_path / "y.csv", "--ref", ref, "--fw", 10)
    assert code == 0
    res = json.loads(out)
    assert res["output_snr_db"] >= 25
    assert res["rmse"] < 0.1
    assert len(tfio.read_signal_csv(tmp_path / "y.csv")) == 8192


def test_reconstruct_without_reference_and_single_bin(tmp_path, capsys):
    ref = _tone_file(tmp_path)
    T = tmp_path / "t.tfr"
    run(capsys, "sst", "--in", ref, "--out", T, "--ht", 8, "--nf", 1024)
    code, out, _ = run(capsys, "reconstruct", "--in", T, "--out", tmp_path / "y.csv", "--fw", 0)
    assert code == 0
    res = json.loads(out)
    assert "output_snr_db" not in res and res["half_bw_bins"] == 0
    assert (tmp_path / "y.csv").exists()


def test_reconstruct_full_method_and_stft(tmp_path, capsys):
    ref = tmp_path / "short.csv"
    tfio.write_signal_csv(ref, tone(50.0, n=2048))
    T = tmp_path / "t.tfr"
    run(capsys, "sst", "--in", ref, "--out", T, "--nf", 2048)
    code, out, _ = run(capsys, "reconstruct", "--in", T, "--out", tmp_path / "y.csv", "--method", "full",
                       "--ref", ref)
    assert code == 0 and json.loads(out)["output_snr_db"] > 20
    S = tmp_path / "s.tfr"
    run(capsys, "stft", "--in", ref, "--out", S, "--ht", 4, "--nf", 512)
    code, out, _ = run(capsys, "reconstruct", "--in", S, "--out", tmp_path / "z.csv", "--ref", ref, "--fw", 30)
    assert code == 0 and json.loads(out)["output_snr_db"] > 25


def test_reconstruct_metadata_mismatch(tmp_path, capsys):
    ref = _tone_file(tmp_path)
    T = tmp_path / "t.tfr"
    run(capsys, "sst", "--in", ref, "--out", T, "--ht", 8, "--nf", 1024)
    code, _, err = run(capsys, "reconstruct", "--in", T, "--out", tmp_path / "y.csv", "--sigma", 0.05)
    assert code == 2 and "window mismatch" in err
    other = tmp_path / "short.csv"
    tfio.write_signal_csv(other, tone(50.0, n=4096))
    code, _, err = run(capsys, "reconstruct", "--in", T, "--out", tmp_path / "y.csv", "--ref", other)
    assert code == 2 and "samples" in err


def test_ridge_and_reuse(tmp_path, capsys, synth):
    T = tmp_path / "t.tfr"
    run(capsys, "sst", "--in", synth, "--out", T, "--ht", 8, "--nf", 1024, "--gamma", 0.2)
    code, out, _ = run(capsys, "ridge", "--in", T, "--out", tmp_path / "r.csv", "--count", 3)
    assert code == 0 and len(json.loads(out)["written"]) == 3
    frames, freqs = tfio.read_ridge_csv(tmp_path / "r_1.csv")
    assert frames.size == 1024 and abs(np.median(freqs) - 50) < 2
    x1 = tmp_path / "sig_x1.csv"
    code, out, _ = run(capsys, "reconstruct", "--in", T, "--ridge", tmp_path / "r_1.csv",
                       "--out", tmp_path / "y.csv", "--ref", x1)
    assert code == 0 and json.loads(out)["output_snr_db"] > 10


def test_entropy_command(tmp_path, capsys, synth):
    T = tmp_path / "t.tfr"
    run(capsys, "stft", "--in", synth, "--out", T, "--ht", 32, "--nf", 512)
    code, out, _ = run(capsys, "entropy", "--in", T)
    res = json.loads(out)
    assert code == 0 and res["kind"] == "STFT" and res["alpha"] == 3.0
    code, out, _ = run(capsys, "entropy", "--in", synth, "--ht", 32, "--nf", 512, "--alpha", 2)
    res = json.loads(out)
    assert code == 0 and res["sst_bits"] < res["stft_bits"] and res["alpha"] == 2.0


def test_bounds_command(tmp_path, capsys):
    code, out, _ = run(capsys, "bounds", "--sigma", 0.03, "--fs", 1024, "--n", 8192)
    rep = json.loads(out)
    assert code == 0
    assert rep["sigma_f"] == pytest.approx(5.305, abs=1e-3)
    assert rep["hf_rf"] == pytest.approx(60.02, abs=0.01)
    code, out, _ = run(capsys, "bounds", "--sigma", 0.02, "--fs", 44100, "--n", 9035089, "--out", tmp_path / "b.json")
    assert json.loads((tmp_path / "b.json").read_text())["hf_support"] == pytest.approx(2446, abs=1)


def test_config_file_and_override(tmp_path, capsys, synth):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"ht": 16, "nf": 512, "gamma": 0.01, "input": str(synth)}))
    out = tmp_path / "t.tfr"
    code, _, _ = run(capsys, "sst", "--config", cfg, "--out", out, "--ht", 32)
    assert code == 0
    rep = json.loads((tmp_path / "t.tfr.json").read_text())
    assert rep["config"]["ht"] == 32 and rep["config"]["nf"] == 512 and rep["config"]["gamma"] == 0.01
    cfg.write_text(json.dumps({"hop": 3}))
    code, _, err = run(capsys, "sst", "--config", cfg, "--out", out)
    assert code == 2 and "hop" in err
    code, _, err = run(capsys, "sst", "--config", tmp_path / "missing.json", "--out", out)
    assert code == 1


def test_report_reproduces_run(tmp_path, capsys, synth):
    out = tmp_path / "a.tfr"
    run(capsys, "sst", "--in", synth, "--out", out, "--ht", 16, "--nf", 512, "--f1", 10, "--f2", 300, "--zoom", 2)
    cfg = json.loads((tmp_path / "a.tfr.json").read_text())["config"]
    cfg["output"] = str(tmp_path / "b.tfr")
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    assert run(capsys, "sst", "--config", tmp_path / "cfg.json")[0] == 0
    assert (tmp_path / "a.tfr").read_bytes() == (tmp_path / "b.tfr").read_bytes()


def test_threads_flag_same_output(tmp_path, capsys, synth):
    for n, name in ((1, "a"), (3, "b")):
        run(capsys, "stft", "--in", synth, "--out", tmp_path / f"{name}.tfr", "--ht", 16, "--nf", 512,
            "--threads", n)
    assert (tmp_path / "a.tfr").read_bytes() == (tmp_path / "b.tfr").read_bytes()
    from dsst.stft import set_threads

    set_threads(1)


def test_tfr_csv_export(tmp_path, capsys, synth):
    code, _, _ = run(capsys, "stft", "--in", synth, "--out", tmp_path / "a.tfr", "--ht", 512, "--nf", 256,
                     "--csv", tmp_path / "a.csv")
    assert code == 0
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "frame,bin,freq_hz,time_s,re,im,abs"


def test_wav_input(tmp_path, capsys):
    from scipy.io import wavfile

    wavfile.write(tmp_path / "a.wav", 1024, (tone(50.0).samples * 16000).astype(np.int16))
    code, out, _ = run(capsys, "stft", "--in", tmp_path / "a.wav", "--out", tmp_path / "a.tfr", "--ht", 64, "--nf", 1024)
    assert code == 0 and json.loads(out)["frames"] == 128


def test_experiment_preset(tmp_path, capsys):
    out = tmp_path / "t2.csv"
    code, _, _ = run(capsys, "experiment", "table2", "--reps", 1, "--out", out)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("Ht,Hf,Nf,f1,f2")
    assert len(lines) == 3


def test_bench_command(tmp_path, capsys):
    code, out, _ = run(capsys, "bench", "--reps", 1, "--out", tmp_path / "b.csv")
    assert code == 0
    assert "ridge_dp" in out and "selective" in out
    assert (tmp_path / "b.csv").exists()


def test_entry_point_help():
    res = subprocess.run([sys.executable, "-m", "dsst.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("synth", "stft", "sst", "reconstruct", "ridge", "entropy", "bounds", "experiment", "bench"):
        assert cmd in res.stdout
    res = subprocess.run([sys.executable, "-m", "dsst.cli", "sst", "--help"], capture_output=True, text=True)
    for flag in ("--fs", "--sigma", "--ht", "--nf", "--gamma", "--f1", "--f2", "--zoom", "--fw", "--trunc-k",
                 "--seed", "--threads", "--in", "--out", "--config"):
        assert flag in res.stdout
